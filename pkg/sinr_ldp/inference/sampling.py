"""Exponentially tilted edge laws.

Under the tilt g each pair {i, j} is an edge independently with probability
Q e^g / (1 − Q + Q e^g), g taken at the bin pair of (i, j). The likelihood
ratio back to the untilted law is

    log dP/dP̃ = Σ_pairs log(1 − Q + Q e^g) − Σ_edges g.
"""

import logging
import math
from typing import NamedTuple

import numpy as np
import numpy.typing as npt
from scipy import optimize, special

from sinr_ldp.config.utils import KernelKind, TiltTarget
from sinr_ldp.connectivity import Kernel
from sinr_ldp.empirical import BinnedMeasure, Partition, TiltFunction
from sinr_ldp.errors import DomainError
from sinr_ldp.model.network import NetworkHeader, SinrNetwork, pair_indices
from sinr_ldp.model.params import ModelParams
from sinr_ldp.types import PoweredPointSet, WeightedSample

from .events import EventSpec, event_infimum

logger = logging.getLogger(__name__)


class PairLayout(NamedTuple):
    """Unordered point pairs grouped by the unordered bin pair they fall in."""

    q: npt.NDArray[np.float64]
    """Q of every pair, in `pair_indices` order."""
    pair_class: npt.NDArray[np.int64]
    classes: npt.NDArray[np.int64]
    """Bin pairs (a, b) with a ≤ b, one row per class."""
    class_sizes: npt.NDArray[np.int64]
    partition: Partition
    edge_scale: float

    @property
    def num_classes(self) -> int:
        return int(self.classes.shape[0])

    def class_values(self, g: TiltFunction) -> npt.NDArray[np.float64]:
        self.partition.check_same(g.partition)
        return g.values[self.classes[:, 0], self.classes[:, 1]]

    def tilt_from_classes(self, values: npt.ArrayLike) -> TiltFunction:
        n = self.partition.num_bins
        out = np.zeros((n, n))
        values = np.asarray(values, dtype=np.float64)
        out[self.classes[:, 0], self.classes[:, 1]] = values
        out[self.classes[:, 1], self.classes[:, 0]] = values
        return TiltFunction.create(out, self.partition)

    def multiplicity(self) -> npt.NDArray[np.float64]:
        """Mass an edge of each class puts on its bin pair: 2 on the diagonal, 1 off it."""
        return np.where(self.classes[:, 0] == self.classes[:, 1], 2.0, 1.0)

    def connectivity_masses(self, counts: npt.NDArray) -> npt.NDArray[np.float64]:
        """U₂^λ masses of shape (..., bins, bins) from per-class edge counts."""
        counts = np.asarray(counts, dtype=np.float64)
        n = self.partition.num_bins
        out = np.zeros(counts.shape[:-1] + (n, n))
        values = counts * self.multiplicity() / self.edge_scale
        out[..., self.classes[:, 0], self.classes[:, 1]] = values
        out[..., self.classes[:, 1], self.classes[:, 0]] = values
        return out


def pair_layout(
    points: PoweredPointSet,
    partition: Partition,
    q: npt.ArrayLike,
    edge_scale: float,
) -> PairLayout:
    q = np.asarray(q, dtype=np.float64)
    if np.any((q <= 0) | (q >= 1)):
        raise DomainError("connection probabilities must lie in (0, 1)")
    bins = partition.bin_index(points)
    i, j = pair_indices(points.num_points)
    lo = np.minimum(bins[i], bins[j])
    hi = np.maximum(bins[i], bins[j])
    keys = lo * partition.num_bins + hi
    unique, pair_class = np.unique(keys, return_inverse=True)
    classes = np.stack(
        [unique // partition.num_bins, unique % partition.num_bins], axis=-1
    ).astype(np.int64)
    sizes = np.bincount(pair_class, minlength=unique.shape[0]).astype(np.int64)
    return PairLayout(
        q=q,
        pair_class=pair_class.astype(np.int64).reshape(-1),
        classes=classes.reshape(-1, 2),
        class_sizes=sizes,
        partition=partition,
        edge_scale=float(edge_scale),
    )


def layout_for(
    points: PoweredPointSet, partition: Partition, params: ModelParams, kernel: Kernel
) -> PairLayout:
    assert kernel.kind == KernelKind.Q_LAMBDA
    return pair_layout(points, partition, kernel.pair_values(points), params.edge_scale)


def tilted_probabilities(
    q: npt.NDArray, h: npt.NDArray
) -> tuple[npt.NDArray, npt.NDArray]:
    """Tilted edge probabilities and log(1 − Q + Q e^h), both exact where h = 0."""
    q = np.asarray(q, dtype=np.float64)
    h = np.broadcast_to(np.asarray(h, dtype=np.float64), q.shape)
    tilted = np.where(h == 0.0, q, special.expit(special.logit(q) + h))
    log_norm = np.where(h == 0.0, 0.0, np.logaddexp(np.log1p(-q), np.log(q) + h))
    return tilted, log_norm


def sample_class_counts(
    layout: PairLayout,
    h: npt.NDArray,
    trials: int,
    rng: np.random.Generator,
    chunk_size: int = 1024,
):
    """Per-class edge counts under the tilt h (one value per class), by chunks of trials.

    Yields `(counts, log_weights)` with `counts` of shape (chunk, classes).
    Classes whose pairs share one probability are drawn as binomials.
    """
    h = np.asarray(h, dtype=np.float64)
    assert h.shape == (layout.num_classes,)
    p, log_norm = tilted_probabilities(layout.q, h[layout.pair_class])
    base = math.fsum(log_norm)

    members = [np.nonzero(layout.pair_class == c)[0] for c in range(layout.num_classes)]
    for start in range(0, trials, chunk_size):
        size = min(chunk_size, trials - start)
        counts = np.zeros((size, layout.num_classes), dtype=np.int64)
        for c, idx in enumerate(members):
            pc = p[idx]
            if np.ptp(pc) == 0.0:
                counts[:, c] = rng.binomial(idx.size, pc[0], size=size)
            else:
                counts[:, c] = (rng.random((size, idx.size)) < pc).sum(axis=1)
        log_weights = base - counts @ h
        yield counts, log_weights


def tilted_edge_sampler(
    g: TiltFunction,
    points: PoweredPointSet,
    params: ModelParams,
    kernel: Kernel,
    seed: int,
) -> WeightedSample:
    """One network from the tilted law P̃ with its weight log dP/dP̃."""
    header = NetworkHeader.from_params(params)
    if points.num_points < 2:
        network = SinrNetwork(
            points=points, edges=np.zeros((0, 2), dtype=np.int64), header=header
        )
        return WeightedSample(network=network, log_weight=0.0)

    layout = layout_for(points, g.partition, params, kernel)
    h = layout.class_values(g)[layout.pair_class]
    p, log_norm = tilted_probabilities(layout.q, h)
    rng = np.random.default_rng(seed)
    indicator = rng.random(p.shape[0]) < p
    log_weight = math.fsum(log_norm) - math.fsum(h[indicator])
    return WeightedSample(
        network=SinrNetwork.from_indicator(points, indicator, header),
        log_weight=float(log_weight),
    )


def _calibrate_class(
    q: npt.NDArray, target_count: float, bound: float
) -> float:
    """g such that the expected tilted edge count of a class equals `target_count`."""
    if target_count <= 0:
        return -bound

    def excess(g: float) -> float:
        return float(np.sum(special.expit(special.logit(q) + g))) - target_count

    if excess(-bound) >= 0:
        return -bound
    if excess(bound) <= 0:
        return bound
    return float(optimize.brentq(excess, -bound, bound, xtol=1e-12))


def tilt_for_event(
    event: EventSpec,
    m: BinnedMeasure,
    layout: PairLayout | None = None,
    target: TiltTarget = TiltTarget.ASYMPTOTIC,
    bound: float = 40.0,
) -> TiltFunction:
    """A tilt that makes the dominating point ω* of the event typical.

    `ASYMPTOTIC` uses g = log(ω*/m). `CALIBRATED` solves, class by class,
    for the g whose tilted mean of U₂^λ equals ω* at the layout's λ.
    """
    dominating = event_infimum(event, m).minimizer
    if dominating is None:
        raise DomainError("the event has no finite-divergence point")
    omega, ref = dominating.masses, m.masses

    if target == TiltTarget.ASYMPTOTIC:
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(ref > 0, np.log(omega) - np.log(ref), 0.0)
        g = np.clip(np.nan_to_num(g, nan=0.0, neginf=-bound, posinf=bound), -bound, bound)
        return TiltFunction.create(g, m.partition)

    if target == TiltTarget.CALIBRATED:
        if layout is None:
            raise ValueError("a calibrated tilt needs the pair layout")
        layout.partition.check_same(m.partition)
        targets = (
            omega[layout.classes[:, 0], layout.classes[:, 1]]
            * layout.edge_scale
            / layout.multiplicity()
        )
        values = [
            _calibrate_class(layout.q[layout.pair_class == c], targets[c], bound)
            for c in range(layout.num_classes)
        ]
        return layout.tilt_from_classes(values)

    raise ValueError(f"Invalid tilt target: {target}")
