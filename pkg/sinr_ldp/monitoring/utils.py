from typing import Any

import flax.struct
import numpy as np
import numpy.typing as npt
import wandb
from jaxtyping import Float

from sinr_ldp.types import LogDict, RateReportDict


class Histogram(flax.struct.PyTreeNode):
    data: Float[npt.NDArray, "..."] | None = None
    np_histogram: tuple | None = None


def log(logs: dict, step: int) -> None:
    for key, value in logs.items():
        if isinstance(value, Histogram):
            logs[key] = wandb.Histogram(value.data, np_histogram=value.np_histogram)  # pyright: ignore[reportArgumentType]
    wandb.log(logs, step=step)


def get_logs(
    name: str,
    data: Float[npt.NDArray, "..."],
    axis: int | None = None,
    hist: bool = True,
    std: bool = True,
) -> LogDict:
    data = np.asarray(data, dtype=np.float64)
    finite = data[np.isfinite(data)] if axis is None else data
    if finite.size == 0:
        return {}
    ret: LogDict = {
        f"{name}_mean": np.mean(finite, axis=axis),
        f"{name}_min": np.min(finite, axis=axis),
        f"{name}_max": np.max(finite, axis=axis),
    }
    if std:
        ret[f"{name}_std"] = np.std(finite, axis=axis)
    if hist:
        ret[f"{name}"] = Histogram(finite.reshape(-1))

    return ret


def prefix_dict(prefix: str, d: dict[str, Any]) -> dict[str, Any]:
    return {f"{prefix}/{k}": v for k, v in d.items()}


def log_report(report: RateReportDict) -> None:
    """One wandb step per λ of the grid, plus a summary of the whole run."""
    kind = report["experiment"]
    for step, record in enumerate(report["estimates"]):
        scalars = {
            "lam": record["lam"],
            "value": record["value"],
            "stderr": record["stderr"],
            "hits": record["hits"],
            "ess": record["ess"],
            "theory_target": record["theory_target"],
        }
        log(prefix_dict(kind, scalars), step=step)

    summary = get_logs(
        "value", np.asarray([r["value"] for r in report["estimates"]]), hist=False
    )
    if report["slope"] is not None:
        summary["slope"] = report["slope"]
    assert wandb.run is not None
    wandb.run.summary.update(prefix_dict(kind, summary))
