from .network import (
    NetworkHeader,
    SinrNetwork,
    canonical_edges,
    dumps_network,
    load_network,
    loads_network,
    pair_indices,
    save_network,
)
from .params import ModelParams, build_params
from .ppp import assign_powers, sample_fixed_count, sample_points, sample_ppp
from .sinr import build_network, pairwise_distances, path_loss, sinr, sinr_matrix

__all__ = [
    "ModelParams",
    "build_params",
    "NetworkHeader",
    "SinrNetwork",
    "canonical_edges",
    "pair_indices",
    "dumps_network",
    "loads_network",
    "save_network",
    "load_network",
    "sample_ppp",
    "sample_fixed_count",
    "assign_powers",
    "sample_points",
    "path_loss",
    "pairwise_distances",
    "sinr",
    "sinr_matrix",
    "build_network",
]
