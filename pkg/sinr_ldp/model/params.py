import math
from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np
import numpy.typing as npt
from jaxtyping import Float
from scipy import special

from sinr_ldp.config.model import DomainConfig, ModelConfig
from sinr_ldp.config.utils import IntensityKind, InterferenceMode
from sinr_ldp.errors import ConfigurationError
from sinr_ldp.types import Locations

type IntensityFn = Callable[[Locations], Float[npt.NDArray, " n"]]
type MarkFn = Callable[[npt.NDArray[np.float64]], npt.NDArray[np.float64]]


def _uniform_density(value: float, locations: Locations) -> Float[npt.NDArray, " n"]:
    return np.full(np.shape(locations)[0], value, dtype=np.float64)


def _gaussian_density(
    peak: float,
    center: npt.NDArray[np.float64],
    width: float,
    locations: Locations,
) -> Float[npt.NDArray, " n"]:
    sq = np.sum((np.asarray(locations) - center) ** 2, axis=-1)
    return peak * np.exp(-0.5 * sq / width**2)


def _gaussian_mass(
    peak: float, center: npt.NDArray[np.float64], width: float, domain: DomainConfig
) -> float:
    # Product of per-axis truncated Gaussian integrals.
    scale = width * math.sqrt(2.0)
    per_axis = (
        width
        * math.sqrt(math.pi / 2.0)
        * (
            special.erf((domain.high - center) / scale)
            - special.erf((domain.low - center) / scale)
        )
    )
    return float(peak * np.prod(per_axis))


def _constant_mark(value: float, eta: npt.NDArray[np.float64]) -> npt.NDArray:
    return np.full(np.shape(eta), value, dtype=np.float64)


def _power_law_a(a0: float, exponent: float, lam: float) -> float:
    return a0 * lam ** (-exponent)


@dataclass(frozen=True, kw_only=True)
class ModelParams:
    """All model constants at one value of λ."""

    lam: float
    domain: DomainConfig
    intensity: IntensityFn
    intensity_max: float
    intensity_mass: float
    power_rate: float
    pathloss_exponent: float
    tau: MarkFn
    gamma: MarkFn
    noise: float
    a_lambda_fn: Callable[[float], float]
    interference: InterferenceMode = InterferenceMode.EXCLUDE_SIGNAL

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ConfigurationError("λ must be positive", field="lam")
        if not self.power_rate > 0:
            raise ConfigurationError("must be positive", field="power_rate")
        if not self.pathloss_exponent > 0:
            raise ConfigurationError("must be positive", field="pathloss_exponent")
        if not self.noise >= 0:
            raise ConfigurationError("must be nonnegative", field="noise")
        if not (math.isfinite(self.intensity_mass) and self.intensity_mass > 0):
            raise ConfigurationError(
                f"intensity is not normalizable (∫π = {self.intensity_mass})",
                field="intensity",
            )
        if not self.a_lambda > 0:
            raise ConfigurationError("a_λ must be positive", field="a_lambda")

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    @property
    def a_lambda(self) -> float:
        return float(self.a_lambda_fn(self.lam))

    @property
    def edge_scale(self) -> float:
        """λ²a_λ, the normalization of the empirical connectivity measure."""
        return self.lam**2 * self.a_lambda

    @property
    def expected_count(self) -> float:
        return self.lam * self.intensity_mass

    def density(self, locations: Locations) -> Float[npt.NDArray, " n"]:
        """Normalized location density π/∫π."""
        return self.intensity(locations) / self.intensity_mass

    def power_log_density(
        self, eta: Float[npt.NDArray, " n"]
    ) -> Float[npt.NDArray, " n"]:
        return math.log(self.power_rate) - self.power_rate * np.asarray(eta)


def build_params(
    config: ModelConfig,
    lam: float,
    tau_fn: MarkFn | None = None,
    gamma_fn: MarkFn | None = None,
    a_lambda_fn: Callable[[float], float] | None = None,
) -> ModelParams:
    domain = config.domain
    if config.intensity == IntensityKind.UNIFORM:
        intensity = partial(_uniform_density, config.intensity_scale)
        intensity_max = config.intensity_scale
        mass = config.intensity_scale * domain.volume
    elif config.intensity == IntensityKind.GAUSSIAN:
        center = (
            np.asarray(config.intensity_center, dtype=np.float64)
            if config.intensity_center is not None
            else 0.5 * (domain.low + domain.high)
        )
        intensity = partial(
            _gaussian_density, config.intensity_scale, center, config.intensity_width
        )
        intensity_max = config.intensity_scale
        mass = _gaussian_mass(
            config.intensity_scale, center, config.intensity_width, domain
        )
    else:
        raise ValueError(f"Invalid intensity kind: {config.intensity}")

    if gamma_fn is None:
        gamma_fn = partial(
            _constant_mark, config.gamma0 * lam ** (-config.gamma_lambda_exponent)
        )

    return ModelParams(
        lam=lam,
        domain=domain,
        intensity=intensity,
        intensity_max=intensity_max,
        intensity_mass=mass,
        power_rate=config.power_rate,
        pathloss_exponent=config.pathloss_exponent,
        tau=tau_fn or partial(_constant_mark, config.tau0),
        gamma=gamma_fn,
        noise=config.noise,
        a_lambda_fn=a_lambda_fn
        or partial(_power_law_a, config.a0, config.a_exponent),
        interference=config.interference,
    )
