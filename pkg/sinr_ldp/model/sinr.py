import logging

import numpy as np
import numpy.typing as npt

from sinr_ldp.config.model import DomainConfig
from sinr_ldp.config.utils import BoundaryMode, InterferenceMode
from sinr_ldp.errors import DomainError
from sinr_ldp.types import DistanceMatrix, Locations, PairMatrix, PoweredPointSet

from .network import NetworkHeader, SinrNetwork, canonical_edges
from .params import ModelParams

logger = logging.getLogger(__name__)

# Directed SINR values this close to their threshold are re-evaluated pairwise.
_AMBIGUITY_RTOL = 1e-9


def path_loss(ell: float, distance: float | npt.NDArray) -> float | npt.NDArray:
    """β(r) = r^{-ℓ}, with β(0) = +inf."""
    if not ell > 0:
        raise DomainError(f"path loss exponent must be positive, got {ell}")
    r = np.asarray(distance, dtype=np.float64)
    if np.any(r < 0) or np.any(np.isnan(r)):
        raise DomainError("distances must be nonnegative")
    with np.errstate(divide="ignore"):
        beta = np.where(r > 0, np.power(np.where(r > 0, r, 1.0), -ell), np.inf)
    return float(beta) if beta.ndim == 0 else beta


def pairwise_distances(locations: Locations, domain: DomainConfig) -> DistanceMatrix:
    locations = np.asarray(locations, dtype=np.float64).reshape(-1, domain.dimension)
    delta = np.abs(locations[:, None, :] - locations[None, :, :])
    if domain.boundary == BoundaryMode.TOROIDAL:
        delta = np.minimum(delta, domain.lengths - delta)
    return np.sqrt(np.sum(delta**2, axis=-1))


def _distance(a: npt.NDArray, b: npt.NDArray, domain: DomainConfig) -> float:
    delta = np.abs(np.asarray(a) - np.asarray(b))
    if domain.boundary == BoundaryMode.TOROIDAL:
        delta = np.minimum(delta, domain.lengths - delta)
    return float(np.sqrt(np.sum(delta**2)))


def _ratio(numerator: float, denominator: float) -> float:
    # inf/inf and 0/0 mean "not connected"; never NaN
    if np.isinf(denominator):
        return 0.0
    if denominator == 0.0:
        return np.inf if numerator > 0 else 0.0
    return numerator / denominator


def sinr(tx: int, rx: int, points: PoweredPointSet, params: ModelParams) -> float:
    """SINR of the signal sent by `tx` and received at `rx`."""
    n = points.num_points
    if tx == rx:
        raise DomainError("transmitter and receiver must differ")
    if not (0 <= tx < n and 0 <= rx < n):
        raise DomainError(f"indices ({tx}, {rx}) out of range for {n} points")

    receiver = points.locations[rx]
    numerator = points.powers[tx] * path_loss(
        params.pathloss_exponent, _distance(points.locations[tx], receiver, params.domain)
    )

    excluded = {rx}
    if params.interference == InterferenceMode.EXCLUDE_SIGNAL:
        excluded.add(tx)
    interference = 0.0
    for k in range(n):
        if k in excluded:
            continue
        interference += points.powers[k] * path_loss(
            params.pathloss_exponent,
            _distance(points.locations[k], receiver, params.domain),
        )

    gamma = float(params.gamma(np.asarray([points.powers[rx]]))[0])
    if gamma == 0.0:
        denominator = params.noise
    else:
        denominator = params.noise + gamma * interference
    return float(_ratio(float(numerator), float(denominator)))


def sinr_matrix(points: PoweredPointSet, params: ModelParams) -> PairMatrix:
    """All directed SINR values, indexed [tx, rx]. The diagonal is 0."""
    n = points.num_points
    if n < 2:
        return np.zeros((n, n), dtype=np.float64)

    distances = pairwise_distances(points.locations, params.domain)
    np.fill_diagonal(distances, 1.0)
    received = points.powers[:, None] * path_loss(params.pathloss_exponent, distances)
    np.fill_diagonal(received, 0.0)

    if not np.all(np.isfinite(received)):
        # Coincident locations; fall back to the pairwise definition.
        out = np.zeros((n, n), dtype=np.float64)
        for tx in range(n):
            for rx in range(n):
                if tx != rx:
                    out[tx, rx] = sinr(tx, rx, points, params)
        return out

    total = received.sum(axis=0)
    if params.interference == InterferenceMode.LITERAL:
        interference = np.broadcast_to(total[None, :], (n, n))
    else:
        interference = total[None, :] - received
    gamma = np.asarray(params.gamma(points.powers), dtype=np.float64)
    denominator = params.noise + np.where(
        gamma[None, :] == 0.0, 0.0, gamma[None, :] * interference
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(
            denominator > 0,
            received / np.where(denominator > 0, denominator, 1.0),
            np.where(received > 0, np.inf, 0.0),
        )
    np.fill_diagonal(out, 0.0)
    return out


def build_network(points: PoweredPointSet, params: ModelParams) -> SinrNetwork:
    """Link i and j iff both directed SINR values reach the transmitter's threshold."""
    n = points.num_points
    header = NetworkHeader.from_params(params)
    if n < 2:
        return SinrNetwork(
            points=points, edges=np.zeros((0, 2), dtype=np.int64), header=header
        )

    values = sinr_matrix(points, params)
    thresholds = np.asarray(params.tau(points.powers), dtype=np.float64)
    passed = values >= thresholds[:, None]

    near = np.isfinite(values) & np.isclose(
        values, thresholds[:, None], rtol=_AMBIGUITY_RTOL, atol=0.0
    )
    np.fill_diagonal(near, False)
    for tx, rx in zip(*np.nonzero(near)):
        passed[tx, rx] = sinr(int(tx), int(rx), points, params) >= thresholds[tx]

    linked = passed & passed.T
    i, j = np.nonzero(np.triu(linked, k=1))
    logger.debug(
        "SINR network: %d points, %d directed tests passed, %d edges",
        n,
        int(passed.sum()),
        i.size,
    )
    return SinrNetwork(
        points=points, edges=canonical_edges(np.stack([i, j], axis=-1), n), header=header
    )
