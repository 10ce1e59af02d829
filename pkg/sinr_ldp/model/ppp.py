import numpy as np

from sinr_ldp.config.utils import PointLaw
from sinr_ldp.errors import ConfigurationError
from sinr_ldp.seeding import derive_seed
from sinr_ldp.types import Locations, PoweredPointSet

from .params import ModelParams


def _draw_locations(
    params: ModelParams, count: int, rng: np.random.Generator
) -> Locations:
    """`count` i.i.d. locations with density π/∫π, by rejection from the box."""
    domain = params.domain
    if count == 0:
        return np.zeros((0, domain.dimension), dtype=np.float64)

    if params.intensity_max <= 0:
        raise ConfigurationError("intensity bound must be positive", field="intensity")

    accept_rate = params.intensity_mass / (params.intensity_max * domain.volume)
    if not 0 < accept_rate <= 1 + 1e-12:
        raise ConfigurationError(
            f"intensity exceeds its declared maximum (acceptance {accept_rate:.3g})",
            field="intensity",
        )

    accepted: list[Locations] = []
    have = 0
    while have < count:
        batch = max(16, int(1.2 * (count - have) / accept_rate))
        proposals = rng.uniform(domain.low, domain.high, size=(batch, domain.dimension))
        keep = rng.uniform(size=batch) * params.intensity_max < params.intensity(
            proposals
        )
        accepted.append(proposals[keep])
        have += int(keep.sum())
    return np.concatenate(accepted, axis=0)[:count]


def sample_ppp(params: ModelParams, seed: int) -> Locations:
    """Poisson point process on 𝒟 with rate measure λπ."""
    rng = np.random.default_rng(seed)
    count = int(rng.poisson(params.expected_count))
    return _draw_locations(params, count, rng)


def sample_fixed_count(params: ModelParams, count: int, seed: int) -> Locations:
    """Binomial point process: exactly `count` i.i.d. locations from π/∫π."""
    if count < 0:
        raise ValueError(f"count must be nonnegative, got {count}")
    return _draw_locations(params, count, np.random.default_rng(seed))


def assign_powers(
    locations: Locations, params: ModelParams, seed: int
) -> PoweredPointSet:
    """Attach i.i.d. exponential(c) powers, independently of the locations."""
    locations = np.asarray(locations, dtype=np.float64).reshape(-1, params.dimension)
    rng = np.random.default_rng(seed)
    powers = rng.exponential(scale=1.0 / params.power_rate, size=locations.shape[0])
    # exponential draws are a.s. positive; guard the measure-zero 0.0
    powers = np.maximum(powers, np.finfo(np.float64).tiny)
    return PoweredPointSet(locations=locations, powers=powers)


def sample_points(
    params: ModelParams, seed: int, law: PointLaw = PointLaw.POISSON
) -> PoweredPointSet:
    """Locations by `law`, then powers, on two streams split from `seed`."""
    location_seed = derive_seed(seed, "locations")
    power_seed = derive_seed(seed, "powers")
    if law == PointLaw.POISSON:
        locations = sample_ppp(params, location_seed)
    elif law == PointLaw.FIXED_COUNT:
        locations = sample_fixed_count(
            params, int(round(params.expected_count)), location_seed
        )
    else:
        raise ValueError(f"Invalid point law: {law}")
    return assign_powers(locations, params, power_seed)
