import math

import numpy as np
from scipy import special

from sinr_ldp.config.utils import EntropyReference
from sinr_ldp.empirical import BinnedKernel, BinnedMeasure, TiltFunction
from sinr_ldp.errors import DomainError, PartitionMismatchError
from sinr_ldp.types import ExtendedReal


def check_extended_real(value: float) -> ExtendedReal:
    value = float(value)
    if math.isnan(value):
        raise DomainError("NaN where an extended real was expected")
    return value


def relative_entropy(nu: BinnedMeasure, m: BinnedMeasure) -> ExtendedReal:
    """H(ν‖m) = Σ ν log(ν/m), with 0 log 0 = 0 and +inf when ν ≪ m fails."""
    nu.check_compatible(m)
    terms = special.rel_entr(nu.masses, m.masses)
    if np.any(np.isinf(terms)):
        return math.inf
    return check_extended_real(math.fsum(terms.reshape(-1)))


def h_divergence(nu: BinnedMeasure, m: BinnedMeasure) -> ExtendedReal:
    """𝓗(ν‖m) = H(ν‖m) + ‖m‖ − ‖ν‖ for ‖ν‖ > 0, +inf otherwise."""
    nu.check_compatible(m)
    if nu.total == 0.0:
        return math.inf
    # termwise ν log(ν/m) − ν + m, each term ≥ 0
    terms = special.kl_div(nu.masses, m.masses)
    if np.any(np.isinf(terms)):
        return math.inf
    return check_extended_real(math.fsum(terms.reshape(-1)))


def _q_pi_pi(pi: BinnedMeasure, qk: BinnedKernel) -> BinnedMeasure:
    if pi.is_pair:
        raise PartitionMismatchError("π must be a measure on 𝒲")
    return qk.q_pi_pi(pi)


def rate_speed1(
    pi: BinnedMeasure,
    nu: BinnedMeasure,
    ref: BinnedMeasure,
    qk: BinnedKernel,
    tol: float,
) -> ExtendedReal:
    """I¹(π, ν): H(π‖π⊗𝒦 reference) on the constraint ν = qπ⊗π, +inf off it."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    pi.check_compatible(ref)
    q_pi_pi = _q_pi_pi(pi, qk)
    nu.check_compatible(q_pi_pi)
    if np.max(np.abs(nu.masses - q_pi_pi.masses), initial=0.0) > tol:
        return math.inf
    return relative_entropy(pi, ref)


def rate_speed2(pi: BinnedMeasure, nu: BinnedMeasure, qk: BinnedKernel) -> ExtendedReal:
    """I²(π, ν) = ½𝓗(ν‖qπ⊗π)."""
    return 0.5 * h_divergence(nu, _q_pi_pi(pi, qk))


def conditional_rate_speed1(
    nu: BinnedMeasure, pi: BinnedMeasure, qk: BinnedKernel, tol: float
) -> ExtendedReal:
    """I_π¹(ν): 0 when ν = qπ⊗π within `tol`, +inf otherwise."""
    q_pi_pi = _q_pi_pi(pi, qk)
    nu.check_compatible(q_pi_pi)
    if np.max(np.abs(nu.masses - q_pi_pi.masses), initial=0.0) > tol:
        return math.inf
    return 0.0


def conditional_rate_speed2(
    nu: BinnedMeasure, pi: BinnedMeasure, qk: BinnedKernel
) -> ExtendedReal:
    return rate_speed2(pi, nu, qk)


def entropy_ref2_mass(
    mode: EntropyReference,
    qref: BinnedMeasure,
    pi: BinnedMeasure | None = None,
    lam: float | None = None,
) -> float:
    """‖qπ⊗π‖, or ‖λπ⊗π‖ = λ‖π‖² when the formula is read literally."""
    if mode == EntropyReference.Q_PI_PI:
        return qref.total
    if mode == EntropyReference.LAMBDA_PI_PI:
        if pi is None or lam is None:
            raise DomainError("the literal reference needs π and λ")
        return lam * pi.total**2
    raise ValueError(f"Invalid entropy reference: {mode}")


def network_entropy(
    nu: BinnedMeasure, qref: BinnedMeasure, ref2_mass: float | None = None
) -> float:
    """h(ν) = (‖ν‖ − ‖ref₂‖ − Σ ν log(ν/‖qπ⊗π‖)) / 2.

    The log divides by the scalar total mass of `qref`. `ref2_mass` defaults
    to that same total.
    """
    nu.partition.check_same(qref.partition)
    q_total = qref.total
    if not q_total > 0:
        raise DomainError("‖qπ⊗π‖ must be positive")
    if ref2_mass is None:
        ref2_mass = q_total
    cross = math.fsum(special.xlogy(nu.masses, nu.masses / q_total).reshape(-1))
    return check_extended_real(0.5 * (nu.total - ref2_mass - cross))


def spectral_potential(g: TiltFunction, pi: BinnedMeasure, qk: BinnedKernel) -> float:
    """φ_q(g, π) = ⟨e^g − 1, qπ⊗π⟩."""
    q_pi_pi = _q_pi_pi(pi, qk)
    g.partition.check_same(q_pi_pi.partition)
    return math.fsum((np.expm1(g.values) * q_pi_pi.masses).reshape(-1))
