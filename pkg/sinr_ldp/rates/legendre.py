"""Kullback action sup_g {⟨g, ν⟩ − φ_q(g, π)} by per-bin Newton iterations.

The objective is separable over bin pairs, so every bin is maximized on its
own with a vmapped scalar Newton solver; gradient and curvature come from
autodiff.
"""

import math
from typing import NamedTuple

import jax
import jax.numpy as jnp
import numpy as np
from jax.experimental import enable_x64
from jaxtyping import Array, Float

from sinr_ldp.config.inference import KullbackOptimizerConfig
from sinr_ldp.config.utils import KullbackInit
from sinr_ldp.empirical import BinnedKernel, BinnedMeasure

from .entropy import h_divergence

# Bins with ν = 0 and m > 0 push g to -inf; their supremum m is added analytically.
_G_FLOOR = -745.0


class KullbackResult(NamedTuple):
    value: float
    g: Float[np.ndarray, "bins bins"]
    converged: bool
    iterations: int


def _bin_objective(g: Float[Array, ""], nu: Float[Array, ""], m: Float[Array, ""]):
    return g * nu - jnp.expm1(g) * m


_grad = jax.grad(_bin_objective)
_curvature = jax.grad(_grad)


def _newton(
    g0: Float[Array, ""],
    nu: Float[Array, ""],
    m: Float[Array, ""],
    max_iters: int,
    tol: float,
    max_step: float,
) -> tuple[Float[Array, ""], Float[Array, ""]]:
    def cond(state):
        g, it = state
        return (jnp.abs(_grad(g, nu, m)) > tol * jnp.maximum(nu, 1.0)) & (it < max_iters)

    def body(state):
        g, it = state
        step = -_grad(g, nu, m) / _curvature(g, nu, m)
        return g + jnp.clip(step, -max_step, max_step), it + 1

    g, it = jax.lax.while_loop(cond, body, (g0, jnp.asarray(0)))
    return g, it


_solve = jax.jit(
    jax.vmap(_newton, in_axes=(0, 0, 0, None, None, None)),
    static_argnums=(3, 4, 5),
)


def maximize_kullback(
    nu: Float[np.ndarray, "..."],
    m: Float[np.ndarray, "..."],
    opt: KullbackOptimizerConfig,
) -> KullbackResult:
    """sup_g Σ g ν − (e^g − 1) m, bin by bin, in float64.

    A bin with ν = 0 < m contributes its m, the limit as g → -inf. For ν ≡ 0
    the supremum is therefore ‖m‖, while 𝓗(0‖m) is +inf by convention, so the
    two only agree for ‖ν‖ > 0.
    """
    nu = np.asarray(nu, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    assert nu.shape == m.shape

    # ν > 0 on a bin with m = 0: ⟨g, ν⟩ grows without bound.
    if np.any((nu > 0) & (m == 0)):
        return KullbackResult(math.inf, np.full(nu.shape, math.inf), True, 0)

    free = (nu > 0) & (m > 0)
    g = np.zeros(nu.shape)
    g[(nu == 0) & (m > 0)] = _G_FLOOR
    iterations = 0
    converged = True
    if np.any(free):
        nu_free, m_free = nu[free], m[free]
        if opt.init == KullbackInit.CLOSED_FORM:
            g0 = np.log(nu_free) - np.log(m_free)
        else:
            g0 = np.zeros_like(nu_free)
        with enable_x64():
            g_free, its = _solve(
                jnp.asarray(g0),
                jnp.asarray(nu_free),
                jnp.asarray(m_free),
                opt.max_iters,
                opt.tol,
                opt.max_step,
            )
            g[free] = np.asarray(g_free)
            its = np.asarray(its)
        iterations = int(its.max())
        converged = bool(np.all(its < opt.max_iters))

    value = math.fsum(np.where(free, g * nu - np.expm1(g) * m, 0.0).reshape(-1))
    # sup over g of −(e^g − 1)m is m, approached as g → −inf
    value += math.fsum(np.where((nu == 0) & (m > 0), m, 0.0).reshape(-1))
    return KullbackResult(value, g, converged, iterations)


def kullback_action(
    nu: BinnedMeasure,
    pi: BinnedMeasure,
    qk: BinnedKernel,
    opt: KullbackOptimizerConfig | None = None,
) -> float:
    """sup_g {⟨g, ν⟩ − φ_q(g, π)} over bin-piecewise-constant g."""
    m = qk.q_pi_pi(pi)
    nu.check_compatible(m)
    return maximize_kullback(nu.masses, m.masses, opt or KullbackOptimizerConfig()).value


def legendre_gap(
    nu: BinnedMeasure,
    pi: BinnedMeasure,
    qk: BinnedKernel,
    opt: KullbackOptimizerConfig | None = None,
) -> float:
    """|Kullback action − 𝓗(ν‖qπ⊗π)|, zero when the duality holds.

    +inf for ν ≡ 0, where the action is ‖qπ⊗π‖ and 𝓗 is +inf.
    """
    action = kullback_action(nu, pi, qk, opt)
    closed = h_divergence(nu, qk.q_pi_pi(pi))
    if math.isinf(action) and math.isinf(closed):
        return 0.0
    return abs(action - closed)
