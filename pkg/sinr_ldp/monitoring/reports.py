"""Report files: JSON reports, CSV mirrors and the run manifest.

JSON floats are written with `repr` (shortest round-trip form); ±inf are
written as the strings "inf" / "-inf" so every file stays strict JSON. CSV
numbers use 17 significant digits.
"""

import hashlib
import importlib.metadata
import json
import math
import pathlib
import platform
from typing import Any, Sequence

import numpy as np

from sinr_ldp.types import ManifestDict, RateReportDict

REPORT_CSV_HEADER = ("lam", "value", "stderr", "hits", "ess", "theory_target")


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            raise ValueError("NaN in a report")
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def dumps_json(data: Any) -> str:
    return json.dumps(_jsonable(data), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(data: Any, path: pathlib.Path) -> pathlib.Path:
    path.write_text(dumps_json(data), encoding="utf-8")
    return path


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if value is None:
        return ""
    return str(value)


def write_csv_table(
    header: Sequence[str], rows: Sequence[Sequence[Any]], path: pathlib.Path
) -> pathlib.Path:
    lines = [",".join(header)]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_report(
    report: RateReportDict, out_dir: pathlib.Path, name: str = "report"
) -> list[pathlib.Path]:
    """`<name>.json` plus its CSV mirror `<name>.csv` (one row per λ)."""
    rows = [[r[k] for k in REPORT_CSV_HEADER] for r in report["estimates"]]
    return [
        write_json(report, out_dir / f"{name}.json"),
        write_csv_table(REPORT_CSV_HEADER, rows, out_dir / f"{name}.csv"),
    ]


def config_hash(config: dict[str, Any]) -> str:
    canonical = json.dumps(
        _jsonable(config), sort_keys=True, separators=(",", ":"), allow_nan=False
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _version(package: str) -> str:
    try:
        return importlib.metadata.version(package)
    except importlib.metadata.PackageNotFoundError:
        return "unknown"


def environment_versions() -> dict[str, str]:
    return {
        "python": platform.python_version(),
        "numpy": _version("numpy"),
        "scipy": _version("scipy"),
        "jax": _version("jax"),
    }


def write_manifest(
    out_dir: pathlib.Path,
    experiment: str,
    config: dict[str, Any],
    seed_root: int,
    outputs: list[pathlib.Path],
    status: str,
    error: str | None = None,
) -> pathlib.Path:
    """`manifest.json`; its `config` entry alone reproduces the run."""
    manifest: ManifestDict = {
        "experiment": experiment,
        "config_hash": config_hash(config),
        "seed_root": seed_root,
        "version": _version("sinr-ldp-lab"),
        "environment": environment_versions(),
        "status": status,
        "outputs": sorted(str(p.relative_to(out_dir)) for p in outputs),
        "config": config,
    }
    if error is not None:
        manifest["error"] = error
    return write_json(manifest, out_dir / "manifest.json")
