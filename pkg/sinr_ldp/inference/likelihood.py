import logging
import math

import numpy as np
import numpy.typing as npt

from sinr_ldp.config.kernel import KernelConfig, QuadratureConfig
from sinr_ldp.config.model import ModelConfig
from sinr_ldp.config.utils import AepTarget, KernelKind, KernelMode
from sinr_ldp.connectivity import Kernel
from sinr_ldp.errors import ConfigurationError, DomainError
from sinr_ldp.model.network import SinrNetwork
from sinr_ldp.model.params import ModelParams
from sinr_ldp.model.sinr import pairwise_distances

logger = logging.getLogger(__name__)


def point_log_likelihood(network: SinrNetwork, params: ModelParams) -> float:
    """Σ_i log of the π/∫π ⊗ 𝒦 density at (x_i, η_i)."""
    if network.num_points == 0:
        return 0.0
    with np.errstate(divide="ignore"):
        log_density = np.log(params.density(network.points.locations))
    return math.fsum(log_density + params.power_log_density(network.points.powers))


def edge_log_likelihood(network: SinrNetwork, q: npt.NDArray[np.float64]) -> float:
    """log of Π_edges Q Π_non-edges (1 − Q), with Q given per pair in `pair_indices` order.

    Equal to Σ_edges log(Q/(1−Q)) + Σ_pairs log(1−Q). A realized outcome of
    probability zero gives -inf.
    """
    q = np.asarray(q, dtype=np.float64)
    indicator = network.edge_indicator()
    assert q.shape == indicator.shape
    with np.errstate(divide="ignore"):
        terms = np.where(indicator, np.log(q), np.log1p(-q))
    if np.any(np.isneginf(terms)):
        logger.warning("a realized pair has Q ∈ {0, 1} against its outcome")
        return -math.inf
    return math.fsum(terms)


def log_likelihood(network: SinrNetwork, params: ModelParams, kernel: Kernel) -> float:
    """log P_λ of a Q-driven network; the diagonal factor is left out."""
    assert kernel.kind == KernelKind.Q_LAMBDA
    if network.num_points < 2:
        return point_log_likelihood(network, params)
    edges = edge_log_likelihood(network, kernel.pair_values(network.points))
    return point_log_likelihood(network, params) + edges


def aep_statistic(network: SinrNetwork, params: ModelParams, kernel: Kernel) -> float:
    """−log P_λ(Z) / (a_λ λ² log λ)."""
    if not params.lam > 1:
        raise DomainError("the AEP statistic needs λ > 1")
    return -log_likelihood(network, params, kernel) / (
        params.edge_scale * math.log(params.lam)
    )


def connectivity_mass(
    model: ModelConfig, kernel: KernelConfig, quad: QuadratureConfig
) -> float:
    """⟨1, q π⊗π⟩ = ∫∫ q(x, y) π(dx) π(dy); the power marks integrate out."""
    if kernel.mode != KernelMode.SYNTHETIC:
        raise ConfigurationError(
            "a closed-form limit kernel needs the synthetic mode", field="kernel.mode"
        )
    params = model.spawn(1.0)
    nodes, weights = quad.nodes(params.domain, pair=True)
    weights = weights * params.intensity(nodes)
    q = kernel.kappa * np.exp(-kernel.theta * pairwise_distances(nodes, params.domain))
    return float(weights @ q @ weights)


def aep_target(
    model: ModelConfig,
    kernel: KernelConfig,
    quad: QuadratureConfig,
    mode: AepTarget = AepTarget.SCALED,
) -> float:
    """Limit of the AEP statistic.

    `LITERAL` is ⟨1, q π⊗π⟩. `SCALED` is ½ρ⟨1, q π⊗π⟩ with
    ρ = lim −log a_λ / log λ, which for a_λ = a₀λ^{-e} is e.
    """
    mass = connectivity_mass(model, kernel, quad)
    if mode == AepTarget.LITERAL:
        return mass
    if mode == AepTarget.SCALED:
        return 0.5 * model.a_exponent * mass
    raise ValueError(f"Invalid AEP target: {mode}")
