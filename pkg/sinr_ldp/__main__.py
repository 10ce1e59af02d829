"""Command-line entry point: `sinr-ldp <experiment> --config <file> [--out <dir>] [--seed <u64>]`.

Exit status is 0 on success, 2 for an invalid configuration (the message
names the offending field) and 1 for any other failure, in which case the
manifest of the output directory is marked `partial`.
"""

import dataclasses
import logging
import pathlib
import sys
from typing import Callable

import tyro

from sinr_ldp.config.experiment import load_config
from sinr_ldp.config.utils import ExperimentKind
from sinr_ldp.errors import ConfigurationError
from sinr_ldp.experiments import default_out_dir
from sinr_ldp.run import Run

logger = logging.getLogger("sinr_ldp")

_HELP = {
    ExperimentKind.GENERATE: "Sample networks and write them in the text network format.",
    ExperimentKind.MEASURES: "Empirical power and connectivity measures against their limits.",
    ExperimentKind.SCGF: "Cumulant generating functions at speeds λ and λ²a_λ.",
    ExperimentKind.LDP_DECAY: "Importance-sampled decay rate of a rare event along the λ grid.",
    ExperimentKind.AEP: "The normalized log-likelihood statistic against its limit.",
    ExperimentKind.MCMILLAN: "Exact edge-set counts near ν against exp(λ²a_λ h(ν)).",
    ExperimentKind.LIMIT_CHECK: "Tabulate a_λ⁻¹Q along the λ grid for one pair.",
}


def _configure_logging(level: str) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    logger.handlers[:] = [handler]
    logger.setLevel(level.upper())


def execute(
    config: pathlib.Path,
    kind: ExperimentKind | None = None,
    out: pathlib.Path | None = None,
    seed: int | None = None,
    track: bool = False,
    wandb_project: str = "sinr-ldp",
    log_level: str = "INFO",
) -> int:
    _configure_logging(log_level)
    try:
        cfg = load_config(config)
        if kind is not None:
            if cfg.kind is not None and cfg.kind != kind:
                raise ConfigurationError(
                    f"the file configures {cfg.kind.value!r}, not {kind.value!r}",
                    field="kind",
                )
            cfg = dataclasses.replace(cfg, kind=kind)
        if seed is not None:
            cfg = dataclasses.replace(cfg, seed_root=seed)
        if cfg.kind is None:
            raise ConfigurationError("missing experiment kind", field="kind")
        run = Run(
            run_name=cfg.kind.value,
            seed=cfg.seed_root,
            data_dir=out or default_out_dir(cfg),
            config=cfg,
        )
        if track:
            run.enable_wandb(project=wandb_project)
        run.start()
    except ConfigurationError as e:
        logger.error("invalid configuration: %s", e)
        return 2
    except Exception:
        logger.exception("run failed")
        return 1
    return 0


def _subcommand(kind: ExperimentKind) -> Callable[..., int]:
    def command(
        config: pathlib.Path,
        out: pathlib.Path | None = None,
        seed: int | None = None,
        track: bool = False,
        wandb_project: str = "sinr-ldp",
        log_level: str = "INFO",
    ) -> int:
        """
        Args:
            config: Experiment file (TOML), or the manifest.json of an earlier run.
            out: Output directory. Defaults to the file's `out_dir`, then runs/<kind>_<seed>.
            seed: Overrides seed_root.
            track: Log report scalars to wandb.
            wandb_project: wandb project used with --track.
            log_level: Python logging level.
        """
        return execute(config, kind, out, seed, track, wandb_project, log_level)

    command.__doc__ = f"{_HELP[kind]}\n{command.__doc__}"
    return command


def rerun(
    manifest: pathlib.Path,
    out: pathlib.Path | None = None,
    log_level: str = "INFO",
) -> int:
    """Reproduce a run from its manifest.json.

    Args:
        manifest: The manifest.json written by the earlier run.
        out: Output directory. Defaults to the recorded one.
        log_level: Python logging level.
    """
    return execute(manifest, None, out, None, False, "sinr-ldp", log_level)


def main() -> None:
    commands: dict[str, Callable[..., int]] = {
        kind.value: _subcommand(kind) for kind in ExperimentKind
    }
    commands["rerun"] = rerun
    sys.exit(tyro.extras.subcommand_cli_from_dict(commands))


if __name__ == "__main__":
    main()
