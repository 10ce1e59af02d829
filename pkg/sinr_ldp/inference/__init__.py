from .estimators import (
    annealed_importance_estimate,
    decay_rate_estimate,
    exact_scgf,
    importance_estimate,
    linear_trend,
    lldp_sandwich,
    plain_mc_estimate,
    scgf_estimate,
    scgf_target,
    summarize_weights,
)
from .events import EventInfimum, EventSpec, event_infimum
from .likelihood import (
    aep_statistic,
    aep_target,
    connectivity_mass,
    edge_log_likelihood,
    log_likelihood,
    point_log_likelihood,
)
from .sampling import (
    PairLayout,
    layout_for,
    pair_layout,
    sample_class_counts,
    tilt_for_event,
    tilted_edge_sampler,
    tilted_probabilities,
)

__all__ = [
    "EventSpec",
    "EventInfimum",
    "event_infimum",
    "PairLayout",
    "pair_layout",
    "layout_for",
    "tilted_probabilities",
    "sample_class_counts",
    "tilted_edge_sampler",
    "tilt_for_event",
    "point_log_likelihood",
    "edge_log_likelihood",
    "log_likelihood",
    "aep_statistic",
    "aep_target",
    "connectivity_mass",
    "summarize_weights",
    "importance_estimate",
    "plain_mc_estimate",
    "annealed_importance_estimate",
    "exact_scgf",
    "scgf_estimate",
    "scgf_target",
    "lldp_sandwich",
    "linear_trend",
    "decay_rate_estimate",
]
