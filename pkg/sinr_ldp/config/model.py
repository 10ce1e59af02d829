import math
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Callable

import numpy as np
import numpy.typing as npt

from sinr_ldp.errors import ConfigurationError

from .utils import BoundaryMode, IntensityKind, InterferenceMode

if TYPE_CHECKING:
    from sinr_ldp.model.params import ModelParams


@dataclass(frozen=True, kw_only=True)
class DomainConfig:
    lows: tuple[float, ...] = (0.0, 0.0)
    """Lower corner of the box 𝒟, one entry per axis."""

    highs: tuple[float, ...] = (1.0, 1.0)
    """Upper corner of the box 𝒟, one entry per axis."""

    boundary: BoundaryMode = BoundaryMode.HARD
    """`HARD` measures Euclidean distances in ℝ^d, `TOROIDAL` wraps each axis."""

    def __post_init__(self) -> None:
        if len(self.lows) < 1:
            raise ConfigurationError("dimension must be at least 1", field="lows")
        if len(self.lows) != len(self.highs):
            raise ConfigurationError(
                f"got {len(self.lows)} lower and {len(self.highs)} upper bounds",
                field="highs",
            )
        for axis, (lo, hi) in enumerate(zip(self.lows, self.highs)):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ConfigurationError(
                    f"axis {axis} has a non-finite bound", field="lows"
                )
            if not hi > lo:
                raise ConfigurationError(
                    f"axis {axis} interval [{lo}, {hi}] is empty", field="highs"
                )

    @property
    def dimension(self) -> int:
        return len(self.lows)

    @cached_property
    def low(self) -> npt.NDArray[np.float64]:
        return np.asarray(self.lows, dtype=np.float64)

    @cached_property
    def high(self) -> npt.NDArray[np.float64]:
        return np.asarray(self.highs, dtype=np.float64)

    @cached_property
    def lengths(self) -> npt.NDArray[np.float64]:
        return self.high - self.low

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    def contains(self, locations: npt.NDArray[np.float64]) -> npt.NDArray[np.bool_]:
        locations = np.asarray(locations, dtype=np.float64).reshape(
            -1, self.dimension
        )
        return np.all((locations >= self.low) & (locations <= self.high), axis=-1)


@dataclass(frozen=True, kw_only=True)
class ModelConfig:
    domain: DomainConfig = DomainConfig()
    """The box 𝒟 the devices live in."""

    intensity: IntensityKind = IntensityKind.UNIFORM
    """Shape of the density π on 𝒟."""

    intensity_scale: float = 1.0
    """Value of π for `UNIFORM`, peak value for `GAUSSIAN`."""

    intensity_center: tuple[float, ...] | None = None
    """Centre of the `GAUSSIAN` bump. Defaults to the centre of the domain."""

    intensity_width: float = 0.25
    """Standard deviation of the `GAUSSIAN` bump, per axis."""

    power_rate: float = 1.0
    """Rate c of the exponential power law 𝒦(η) = c e^{-cη}."""

    pathloss_exponent: float = 2.0
    """Exponent ℓ of the path loss β(r) = r^{-ℓ}."""

    tau0: float = 1.0
    """Constant SINR threshold, τ(η) = τ₀."""

    gamma0: float = 1.0
    """Interference factor prefactor, γ(η) = γ₀ λ^{-gamma_lambda_exponent}."""

    gamma_lambda_exponent: float = 1.0
    """How fast the interference factor is scaled down with λ."""

    noise: float = 1.0
    """Background noise N₀."""

    a0: float = 1.0
    """Prefactor of the scaling sequence a_λ = a₀ λ^{-a_exponent}."""

    a_exponent: float = 0.5
    """Exponent of the scaling sequence. Values in (0, 1) are super-critical."""

    interference: InterferenceMode = InterferenceMode.EXCLUDE_SIGNAL
    """Which devices contribute to the interference sum of a directed link."""

    def __post_init__(self) -> None:
        for name in ("power_rate", "pathloss_exponent", "a0", "intensity_width"):
            if not getattr(self, name) > 0:
                raise ConfigurationError("must be positive", field=name)
        for name in ("noise", "gamma0", "intensity_scale"):
            if not getattr(self, name) >= 0:
                raise ConfigurationError("must be nonnegative", field=name)
        if not self.tau0 > 0:
            raise ConfigurationError("must be positive", field="tau0")
        if (
            self.intensity_center is not None
            and len(self.intensity_center) != self.domain.dimension
        ):
            raise ConfigurationError(
                f"expected {self.domain.dimension} coordinates",
                field="intensity_center",
            )

    def a_lambda(self, lam: float) -> float:
        return self.a0 * lam ** (-self.a_exponent)

    def check_supercritical(self, lambda_grid: tuple[float, ...]) -> None:
        """λ·a_λ must increase along the grid."""
        products = [lam * self.a_lambda(lam) for lam in lambda_grid]
        if any(b <= a for a, b in zip(products, products[1:])):
            raise ConfigurationError(
                "λ·a_λ is not increasing on the λ grid (not super-critical)",
                field="a_exponent",
            )

    def spawn(
        self,
        lam: float,
        tau_fn: Callable[[npt.NDArray], npt.NDArray] | None = None,
        gamma_fn: Callable[[npt.NDArray], npt.NDArray] | None = None,
        a_lambda_fn: Callable[[float], float] | None = None,
    ) -> "ModelParams":
        from sinr_ldp.model.params import build_params

        return build_params(
            self, lam, tau_fn=tau_fn, gamma_fn=gamma_fn, a_lambda_fn=a_lambda_fn
        )
