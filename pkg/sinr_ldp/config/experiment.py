import json
import pathlib
import tomllib
from dataclasses import dataclass, field
from typing import Any

from sinr_ldp.errors import ConfigurationError

from .inference import EntropyConfig, EventConfig, KullbackOptimizerConfig, SamplerConfig
from .kernel import KernelConfig, QuadratureConfig
from .model import ModelConfig
from .partition import PartitionConfig
from .utils import ExperimentKind, from_dict


@dataclass(frozen=True, kw_only=True)
class LimitPairConfig:
    """The pair of powered points tabulated by the `limit-check` experiment."""

    x: tuple[float, ...] = (0.25, 0.5)
    y: tuple[float, ...] = (0.75, 0.5)
    eta_x: float = 1.0
    eta_y: float = 1.0

    tolerance: float = 1e-2
    """Largest last relative change of a_λ⁻¹Q accepted as converged."""

    def __post_init__(self) -> None:
        if len(self.x) != len(self.y):
            raise ConfigurationError("x and y differ in dimension", field="y")
        if not (self.eta_x > 0 and self.eta_y > 0):
            raise ConfigurationError("powers must be positive", field="eta_x")
        if not self.tolerance > 0:
            raise ConfigurationError("must be positive", field="tolerance")


@dataclass(frozen=True, kw_only=True)
class ExperimentConfig:
    lambda_grid: tuple[float, ...]
    """Intensities λ the experiment is run at, strictly increasing."""

    kind: ExperimentKind | None = None
    """Set by the command-line subcommand when absent from the file."""

    model: ModelConfig = field(default_factory=ModelConfig)
    kernel: KernelConfig = field(default_factory=KernelConfig)
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)
    partition: PartitionConfig = field(default_factory=PartitionConfig)
    event: EventConfig = field(default_factory=EventConfig)
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    entropy: EntropyConfig = field(default_factory=EntropyConfig)
    optimizer: KullbackOptimizerConfig = field(default_factory=KullbackOptimizerConfig)
    limit_pair: LimitPairConfig = field(default_factory=LimitPairConfig)

    trials: int = 1000
    """Monte Carlo trials per λ."""

    seed_root: int = 0
    """Root of every random stream of the run."""

    out_dir: str | None = None
    """Output directory. Defaults to `runs/<kind>_<seed_root>`."""

    def __post_init__(self) -> None:
        if len(self.lambda_grid) == 0:
            raise ConfigurationError("must not be empty", field="lambda_grid")
        if any(not lam > 0 for lam in self.lambda_grid):
            raise ConfigurationError("intensities must be positive", field="lambda_grid")
        if any(b <= a for a, b in zip(self.lambda_grid, self.lambda_grid[1:])):
            raise ConfigurationError("must be strictly increasing", field="lambda_grid")
        if self.trials < 1:
            raise ConfigurationError("must be at least 1", field="trials")
        if not 0 <= self.seed_root < 2**64:
            raise ConfigurationError("must be an unsigned 64-bit integer", field="seed_root")
        if len(self.limit_pair.x) != self.model.domain.dimension:
            raise ConfigurationError(
                f"expected {self.model.domain.dimension} coordinates", field="limit_pair.x"
            )

    def require_grid(self, minimum: int) -> None:
        if len(self.lambda_grid) < minimum:
            raise ConfigurationError(
                f"this experiment needs at least {minimum} intensities",
                field="lambda_grid",
            )


def parse_config(data: dict[str, Any]) -> ExperimentConfig:
    """Accepts the file layout (run-level keys under `[experiment]`) or the flat
    layout stored in manifests."""
    data = dict(data)
    top = data.pop("experiment", None)
    if isinstance(top, dict):
        overlap = set(top) & set(data)
        if overlap:
            raise ConfigurationError(
                "given both in [experiment] and at top level",
                field=sorted(overlap)[0],
            )
        data.update(top)
    elif top is not None:
        data["kind"] = top
    return from_dict(ExperimentConfig, data)


def load_config(path: pathlib.Path) -> ExperimentConfig:
    """Reads a TOML experiment file, or the `manifest.json` of a previous run."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"cannot read {path}: {e.strerror}") from None

    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{path}, line {e.lineno}: {e.msg}") from None
        if "config" in data and "config_hash" in data:
            data = data["config"]
        return parse_config(data)

    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"{path}: {e}") from None
    return parse_config(data)
