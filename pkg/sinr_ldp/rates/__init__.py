from .entropy import (
    check_extended_real,
    conditional_rate_speed1,
    conditional_rate_speed2,
    entropy_ref2_mass,
    h_divergence,
    network_entropy,
    rate_speed1,
    rate_speed2,
    relative_entropy,
    spectral_potential,
)
from .legendre import KullbackResult, kullback_action, legendre_gap, maximize_kullback

__all__ = [
    "check_extended_real",
    "relative_entropy",
    "h_divergence",
    "rate_speed1",
    "rate_speed2",
    "conditional_rate_speed1",
    "conditional_rate_speed2",
    "entropy_ref2_mass",
    "network_entropy",
    "spectral_potential",
    "KullbackResult",
    "kullback_action",
    "maximize_kullback",
    "legendre_gap",
]
