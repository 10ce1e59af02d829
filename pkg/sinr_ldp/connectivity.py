import logging
import math
from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np
import numpy.typing as npt

from sinr_ldp.config.kernel import KernelConfig, QuadratureConfig
from sinr_ldp.config.model import DomainConfig, ModelConfig
from sinr_ldp.config.utils import KernelKind, KernelMode
from sinr_ldp.errors import DomainError
from sinr_ldp.model.network import NetworkHeader, SinrNetwork, pair_indices
from sinr_ldp.model.params import ModelParams
from sinr_ldp.model.sinr import pairwise_distances
from sinr_ldp.types import PairMatrix, PoweredPoint, PoweredPointSet, RateReportDict

logger = logging.getLogger(__name__)

Q_MIN = 1e-12
Q_MAX = 1.0 - 1e-12

# Pairs per block when integrating q_λ^𝒟 for many pairs at once.
_PAIR_CHUNK = 32


@dataclass(frozen=True, kw_only=True)
class Kernel:
    """A symmetric nonnegative function of two powered points."""

    kind: KernelKind
    evaluator: Callable[[PoweredPoint, PoweredPoint], float]
    pair_fn: Callable[[PoweredPointSet], npt.NDArray[np.float64]] | None = None
    """Vectorized values on every unordered pair, in `pair_indices` order."""

    def __call__(self, x: PoweredPoint, y: PoweredPoint) -> float:
        return self.evaluator(x, y)

    def pair_values(self, points: PoweredPointSet) -> npt.NDArray[np.float64]:
        if self.pair_fn is not None:
            return self.pair_fn(points)
        i, j = pair_indices(points.num_points)
        return np.asarray(
            [self.evaluator(points.point(a), points.point(b)) for a, b in zip(i, j)],
            dtype=np.float64,
        )

    def matrix(self, points: PoweredPointSet) -> PairMatrix:
        n = points.num_points
        out = np.zeros((n, n), dtype=np.float64)
        i, j = pair_indices(n)
        values = self.pair_values(points)
        out[i, j] = values
        out[j, i] = values
        return out


def _distance(x: npt.NDArray, y: npt.NDArray, domain: DomainConfig) -> float:
    return float(pairwise_distances(np.stack([x, y]), domain)[0, 1])


def _pair_distances(points: PoweredPointSet, domain: DomainConfig) -> npt.NDArray:
    i, j = pair_indices(points.num_points)
    return pairwise_distances(points.locations, domain)[i, j]


def limit_kernel(
    x: npt.ArrayLike, y: npt.ArrayLike, kappa: float, theta: float, domain: DomainConfig
) -> float:
    """Synthetic limit kernel q(x, y) = κ e^{-θ‖x-y‖}."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return kappa * math.exp(-theta * _distance(x, y, domain))


def connection_probability(
    lam: float, qval: float | npt.NDArray
) -> float | npt.NDArray:
    """Q = e^{-λ q}."""
    q = np.asarray(qval, dtype=np.float64)
    if np.any(q < 0):
        raise DomainError("q must be nonnegative")
    out = np.exp(-lam * q)
    return float(out) if out.ndim == 0 else out


def _clamp(q: npt.NDArray) -> npt.NDArray:
    return np.clip(q, Q_MIN, Q_MAX)


def _interference_mass(
    s: npt.NDArray, norms: npt.NDArray, weights: npt.NDArray, ell: float
) -> npt.NDArray:
    """F(s) = ∫ s / (s + ‖z‖^ℓ) π(dz) for a batch of s, with π folded into `weights`."""
    s = np.asarray(s, dtype=np.float64)
    out = np.zeros(s.shape, dtype=np.float64)
    z = norms**ell
    flat = s.reshape(-1)
    res = out.reshape(-1)
    for start in range(0, flat.size, _PAIR_CHUNK):
        block = flat[start : start + _PAIR_CHUNK, None]
        denom = block + z[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(denom > 0, block / np.where(denom > 0, denom, 1.0), 0.0)
        terms = np.where(block > 0, terms, 0.0)
        res[start : start + _PAIR_CHUNK] = terms @ weights
    return res.reshape(s.shape)


def _integral_setup(
    params: ModelParams, quad: QuadratureConfig
) -> tuple[npt.NDArray, npt.NDArray]:
    nodes, weights = quad.nodes(params.domain)
    return np.linalg.norm(nodes, axis=-1), weights * params.intensity(nodes)


def _q_integral_from_parts(
    powers_x: npt.NDArray,
    powers_y: npt.NDArray,
    distances: npt.NDArray,
    params: ModelParams,
    norms: npt.NDArray,
    weights: npt.NDArray,
) -> npt.NDArray:
    ell = params.pathloss_exponent
    tg_x = np.asarray(params.tau(powers_x)) * np.asarray(params.gamma(powers_x))
    tg_y = np.asarray(params.tau(powers_y)) * np.asarray(params.gamma(powers_y))
    r_ell = distances**ell
    return _interference_mass(tg_x * r_ell, norms, weights, ell) + _interference_mass(
        tg_y * r_ell, norms, weights, ell
    )


def pairwise_q_integral(
    x: PoweredPoint, y: PoweredPoint, params: ModelParams, quad: QuadratureConfig
) -> float:
    """q_λ^𝒟 for one pair, by quadrature against π(dz)."""
    distance = _distance(x.location, y.location, params.domain)
    if distance == 0.0:
        raise DomainError("q_λ^𝒟 is undefined for coincident locations")
    norms, weights = _integral_setup(params, quad)
    value = _q_integral_from_parts(
        np.asarray([x.power]),
        np.asarray([y.power]),
        np.asarray([distance]),
        params,
        norms,
        weights,
    )
    return float(value[0])


def _pairwise_q_integrals(
    points: PoweredPointSet, params: ModelParams, quad: QuadratureConfig
) -> npt.NDArray:
    i, j = pair_indices(points.num_points)
    distances = _pair_distances(points, params.domain)
    if np.any(distances == 0.0):
        raise DomainError("q_λ^𝒟 is undefined for coincident locations")
    norms, weights = _integral_setup(params, quad)
    return _q_integral_from_parts(
        points.powers[i], points.powers[j], distances, params, norms, weights
    )


def _synthetic_limit_pairs(
    points: PoweredPointSet, config: KernelConfig, domain: DomainConfig
) -> npt.NDArray:
    return config.kappa * np.exp(-config.theta * _pair_distances(points, domain))


def connection_matrix(
    points: PoweredPointSet,
    params: ModelParams,
    config: KernelConfig,
    quad: QuadratureConfig | None = None,
) -> PairMatrix:
    """Q for every pair of points, symmetric with a zero diagonal."""
    return config.spawn(params, KernelKind.Q_LAMBDA, quad).matrix(points)


def build_kernel(
    config: KernelConfig,
    params: ModelParams,
    kind: KernelKind,
    quad: QuadratureConfig,
) -> Kernel:
    a = params.a_lambda
    domain = params.domain

    if config.mode == KernelMode.SYNTHETIC:

        def limit_pairs(points: PoweredPointSet) -> npt.NDArray:
            return _synthetic_limit_pairs(points, config, domain)

        def limit(x: PoweredPoint, y: PoweredPoint) -> float:
            return limit_kernel(x.location, y.location, config.kappa, config.theta, domain)

        def q_pairs(points: PoweredPointSet) -> npt.NDArray:
            return _clamp(np.minimum(1.0, a * limit_pairs(points)))

        def q_single(x: PoweredPoint, y: PoweredPoint) -> float:
            return float(_clamp(np.minimum(1.0, a * np.asarray(limit(x, y)))))

        if kind == KernelKind.LIMIT_Q:
            return Kernel(kind=kind, evaluator=limit, pair_fn=limit_pairs)
        if kind == KernelKind.Q_LAMBDA:
            return Kernel(kind=kind, evaluator=q_single, pair_fn=q_pairs)
        if kind == KernelKind.Q_LAMBDA_D:
            # The q_λ^𝒟 that reproduces the synthetic Q through e^{-λ q}.
            return Kernel(
                kind=kind,
                evaluator=lambda x, y: -math.log(q_single(x, y)) / params.lam,
                pair_fn=lambda points: -np.log(q_pairs(points)) / params.lam,
            )
        raise ValueError(f"Invalid kernel kind: {kind}")

    if config.mode == KernelMode.INTEGRAL:
        integral = partial(pairwise_q_integral, params=params, quad=quad)
        integrals = partial(_pairwise_q_integrals, params=params, quad=quad)

        if kind == KernelKind.Q_LAMBDA_D:
            return Kernel(kind=kind, evaluator=integral, pair_fn=integrals)
        if kind == KernelKind.Q_LAMBDA:
            return Kernel(
                kind=kind,
                evaluator=lambda x, y: float(
                    _clamp(np.asarray(connection_probability(params.lam, integral(x, y))))
                ),
                pair_fn=lambda points: _clamp(
                    np.asarray(connection_probability(params.lam, integrals(points)))
                ),
            )
        if kind == KernelKind.LIMIT_Q:
            # No closed-form limit exists here; a_λ⁻¹Q at the current λ stands in.
            return Kernel(
                kind=kind,
                evaluator=lambda x, y: float(
                    connection_probability(params.lam, integral(x, y))
                )
                / a,
                pair_fn=lambda points: np.asarray(
                    connection_probability(params.lam, integrals(points))
                )
                / a,
            )
        raise ValueError(f"Invalid kernel kind: {kind}")

    raise ValueError(f"Invalid kernel mode: {config.mode}")


def sample_q_network(
    points: PoweredPointSet, params: ModelParams, kernel: Kernel, seed: int
) -> SinrNetwork:
    """Q-driven generator: each pair is an edge independently with probability Q."""
    assert kernel.kind == KernelKind.Q_LAMBDA
    rng = np.random.default_rng(seed)
    q = kernel.pair_values(points)
    indicator = rng.random(q.shape[0]) < q
    return SinrNetwork.from_indicator(points, indicator, NetworkHeader.from_params(params))


def extrapolate_limit(values: npt.NDArray[np.float64]) -> float:
    """Aitken Δ² extrapolation from the last three values of a sequence.

    Falls back to the last value when the successive differences do not shrink
    or are already at rounding level, where Δ² is not informative.
    """
    values = np.asarray(values, dtype=np.float64)
    last = float(values[-1])
    if values.size < 3 or not np.all(np.isfinite(values[-3:])):
        return last
    d1 = float(values[-2] - values[-3])
    d2 = float(values[-1] - values[-2])
    if abs(d1) <= 1e-12 * max(abs(last), 1.0) or not abs(d2) < abs(d1):
        return last
    return last - d2 * d2 / (d2 - d1)


def limit_kernel_check(
    x: PoweredPoint,
    y: PoweredPoint,
    model: ModelConfig,
    kernel: KernelConfig,
    lambda_grid: tuple[float, ...],
    quad: QuadratureConfig | None = None,
    tolerance: float = 1e-2,
    q_lambda_fn: Callable[[float], float] | None = None,
    seed_root: int = 0,
) -> RateReportDict:
    """Tabulate a_λ⁻¹Q along `lambda_grid` for one pair and judge convergence.

    Converged means the relative successive changes never increase and the
    last one is below `tolerance`. The limit is the Aitken Δ² extrapolation of
    the last three values. `q_lambda_fn` replaces the kernel with an explicit
    λ ↦ Q map.
    """
    if len(lambda_grid) < 3:
        raise ValueError("the λ grid needs at least 3 points")
    if any(b <= a for a, b in zip(lambda_grid, lambda_grid[1:])):
        raise ValueError("the λ grid must be strictly increasing")

    values = []
    for lam in lambda_grid:
        params = model.spawn(lam)
        if q_lambda_fn is not None:
            q = q_lambda_fn(lam)
        else:
            q = kernel.spawn(params, KernelKind.Q_LAMBDA, quad)(x, y)
        values.append(q / params.a_lambda)
    values_arr = np.asarray(values, dtype=np.float64)

    with np.errstate(divide="ignore", invalid="ignore"):
        changes = np.abs(np.diff(values_arr)) / np.abs(values_arr[1:])
    changes = np.where(np.isfinite(changes), changes, np.inf)
    changes = np.where(changes < 1e-12, 0.0, changes)
    monotone = bool(np.all(np.diff(changes) <= 0))
    converged = monotone and bool(changes[-1] < tolerance)
    if not converged:
        logger.warning(
            "a_λ⁻¹Q does not converge on the grid (last relative change %.3g)",
            changes[-1],
        )

    limit = extrapolate_limit(values_arr)
    last = float(values_arr[-1])
    return {
        "experiment": "limit-check",
        "lambda_grid": [float(v) for v in lambda_grid],
        "estimates": [
            {
                "lam": float(lam),
                "value": float(v),
                "stderr": 0.0,
                "hits": 0,
                "ess": 0.0,
                "theory_target": limit,
            }
            for lam, v in zip(lambda_grid, values_arr)
        ],
        "theory_target": limit,
        "slope": None,
        "slope_ci": None,
        "seed_root": seed_root,
        "notes": [] if converged else ["a_λ⁻¹Q flagged as non-convergent"],
        "extra": {
            "limit": limit,
            "last_value": last,
            "limit_uncertainty": abs(limit - last),
            "last_change": float(abs(values_arr[-1] - values_arr[-2])),
            "relative_changes": [float(c) for c in changes],
            "converged": converged,
        },
    }
