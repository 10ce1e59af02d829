from typing import TYPE_CHECKING, Any, NamedTuple, NotRequired, TypedDict

import numpy as np
from jaxtyping import Float, Int

if TYPE_CHECKING:
    from sinr_ldp.model.network import SinrNetwork
    from sinr_ldp.monitoring.utils import Histogram

Locations = Float[np.ndarray, "n d"]
Powers = Float[np.ndarray, " n"]
DistanceMatrix = Float[np.ndarray, "n n"]
PairMatrix = Float[np.ndarray, "n n"]
EdgeArray = Int[np.ndarray, "m 2"]
BinIds = Int[np.ndarray, " n"]
Masses = Float[np.ndarray, " bins"]
PairMasses = Float[np.ndarray, "bins bins"]

type ExtendedReal = float
"""A float that may be ±inf but is never NaN."""

type LogDict = dict[str, float | np.floating | Histogram]


class PoweredPoint(NamedTuple):
    location: Float[np.ndarray, " d"]
    power: float


class PoweredPointSet(NamedTuple):
    locations: Locations
    powers: Powers

    def point(self, index: int) -> PoweredPoint:
        return PoweredPoint(self.locations[index], float(self.powers[index]))

    @property
    def num_points(self) -> int:
        return int(self.powers.shape[0])

    @classmethod
    def empty(cls, dimension: int) -> "PoweredPointSet":
        return cls(
            locations=np.zeros((0, dimension), dtype=np.float64),
            powers=np.zeros((0,), dtype=np.float64),
        )


class WeightedSample(NamedTuple):
    network: "SinrNetwork"
    log_weight: float


class Estimate(NamedTuple):
    value: float
    stderr: float
    hits: int
    ess: float
    log_value: float = float("nan")
    """log of `value`, kept separately since deep-tail estimates underflow."""
    rel_stderr: float = float("nan")


class EstimateRecord(TypedDict):
    lam: float
    value: float
    stderr: float
    hits: int
    ess: float
    theory_target: float
    extra: NotRequired[dict[str, Any]]


class RateReportDict(TypedDict):
    experiment: str
    lambda_grid: list[float]
    estimates: list[EstimateRecord]
    theory_target: float | list[float] | None
    slope: float | None
    slope_ci: list[float] | None
    seed_root: int
    notes: list[str]
    extra: dict[str, Any]


class ManifestDict(TypedDict):
    experiment: str
    config_hash: str
    seed_root: int
    version: str
    environment: dict[str, str]
    status: str
    outputs: list[str]
    config: dict[str, Any]
    error: NotRequired[str]


class OracleResultDict(TypedDict):
    instance_hash: str
    event: dict[str, Any]
    exact_probability: float
    count: int
    bound: float
    h_nu: float
    log_count_rate: float
    gap: float
