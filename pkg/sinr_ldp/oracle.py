"""Exhaustive enumeration of edge sets over a frozen point configuration.

Only tiny instances are accepted: every one of the 2^pairs outcomes is
visited, chunk by chunk of outcome indices, and chunks are merged in index
order so results do not depend on the chunk size.
"""

import hashlib
import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from sinr_ldp.config.utils import KernelKind
from sinr_ldp.connectivity import Kernel
from sinr_ldp.empirical import BinnedMeasure, Partition
from sinr_ldp.errors import DomainError, InstanceTooLargeError
from sinr_ldp.inference.events import EventSpec
from sinr_ldp.inference.sampling import PairLayout, pair_layout
from sinr_ldp.model.params import ModelParams
from sinr_ldp.rates.entropy import network_entropy
from sinr_ldp.types import OracleResultDict, PoweredPointSet

logger = logging.getLogger(__name__)

MAX_PAIRS = 22
_CHUNK = 1 << 14


@dataclass(frozen=True, kw_only=True)
class EnumInstance:
    points: PoweredPointSet
    q: npt.NDArray[np.float64]
    """Q of every pair, in `pair_indices` order."""
    partition: Partition
    lam: float
    a_lambda: float

    def __post_init__(self) -> None:
        n = self.points.num_points
        if self.num_pairs > MAX_PAIRS:
            raise InstanceTooLargeError(
                f"{n} points give {self.num_pairs} pairs; exhaustive enumeration "
                f"is capped at {MAX_PAIRS} pairs ({2**MAX_PAIRS} edge sets)"
            )
        q = np.asarray(self.q, dtype=np.float64)
        if q.shape != (self.num_pairs,):
            raise DomainError(f"expected {self.num_pairs} pair probabilities, got {q.shape}")
        if np.any((q <= 0) | (q >= 1)):
            raise DomainError("connection probabilities must lie in (0, 1)")
        object.__setattr__(self, "q", q)

    @property
    def num_pairs(self) -> int:
        n = self.points.num_points
        return n * (n - 1) // 2

    @property
    def num_outcomes(self) -> int:
        return 1 << self.num_pairs

    @property
    def edge_scale(self) -> float:
        return self.lam**2 * self.a_lambda

    def layout(self) -> PairLayout:
        return pair_layout(self.points, self.partition, self.q, self.edge_scale)


def make_instance(
    points: PoweredPointSet, params: ModelParams, kernel: Kernel, partition: Partition
) -> EnumInstance:
    assert kernel.kind == KernelKind.Q_LAMBDA
    return EnumInstance(
        points=points,
        q=kernel.pair_values(points),
        partition=partition,
        lam=params.lam,
        a_lambda=params.a_lambda,
    )


def instance_hash(inst: EnumInstance) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(inst.points.locations, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(inst.points.powers, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(inst.q, dtype="<f8").tobytes())
    h.update(inst.partition.identity.encode())
    h.update(f"{inst.lam!r}:{inst.a_lambda!r}".encode())
    return h.hexdigest()


def _outcome_chunks(
    inst: EnumInstance,
) -> Iterator[tuple[npt.NDArray[np.bool_], npt.NDArray[np.float64]]]:
    """Edge indicators of shape (chunk, pairs), bit p of the outcome index being
    pair p, with their log probabilities."""
    shifts = np.arange(inst.num_pairs, dtype=np.int64)
    log_q, log_not_q = np.log(inst.q), np.log1p(-inst.q)
    for start in range(0, inst.num_outcomes, _CHUNK):
        index = np.arange(start, min(start + _CHUNK, inst.num_outcomes), dtype=np.int64)
        bits = ((index[:, None] >> shifts) & 1).astype(bool)
        yield bits, np.where(bits, log_q, log_not_q).sum(axis=1)


def _class_counts(layout: PairLayout, bits: npt.NDArray[np.bool_]) -> npt.NDArray:
    onehot = np.zeros((layout.pair_class.shape[0], layout.num_classes), dtype=np.int64)
    onehot[np.arange(layout.pair_class.shape[0]), layout.pair_class] = 1
    return bits.astype(np.int64) @ onehot


def enumerate_networks(
    inst: EnumInstance,
) -> Iterator[tuple[npt.NDArray[np.bool_], float]]:
    """Every edge set, as an indicator in `pair_indices` order, with its probability."""
    for bits, log_p in _outcome_chunks(inst):
        for indicator, lp in zip(bits, log_p):
            yield indicator, math.exp(lp)


def _event_hits(
    event: EventSpec, inst: EnumInstance
) -> Iterator[tuple[npt.NDArray[np.bool_], npt.NDArray[np.float64]]]:
    event.partition.check_same(inst.partition)
    if inst.num_pairs == 0:
        masses = np.zeros((1, inst.partition.num_bins, inst.partition.num_bins))
        yield event.contains(masses), np.zeros(1)
        return
    layout = inst.layout()
    for bits, log_p in _outcome_chunks(inst):
        masses = layout.connectivity_masses(_class_counts(layout, bits))
        yield event.contains(masses), log_p


def exact_event_probability(event: EventSpec, inst: EnumInstance) -> float:
    """Σ of the probabilities of the edge sets whose U₂^λ lies in the event."""
    partial = [
        math.fsum(np.exp(log_p[inside])) for inside, log_p in _event_hits(event, inst)
    ]
    return math.fsum(partial)


def edge_marginals(inst: EnumInstance) -> npt.NDArray[np.float64]:
    """Per pair, the total probability of the edge sets containing it."""
    total = np.zeros(inst.num_pairs)
    for bits, log_p in _outcome_chunks(inst):
        total += np.exp(log_p) @ bits
    return total


def count_in_event(event: EventSpec, inst: EnumInstance) -> int:
    return sum(int(np.count_nonzero(inside)) for inside, _ in _event_hits(event, inst))


def exact_cardinality(
    event: EventSpec,
    inst: EnumInstance,
    reference: BinnedMeasure,
    ref2_mass: float | None = None,
) -> OracleResultDict:
    """Number of edge sets with U₂^λ in the event, against exp(λ²a_λ h(ν)).

    ν is the event centre and `reference` the qπ⊗π entering h. The point
    configuration stays frozen, so only edge sets are counted.
    """
    count = count_in_event(event, inst)
    h_nu = network_entropy(event.center, reference, ref2_mass)
    log_count_rate = math.log(count) / inst.edge_scale if count > 0 else -math.inf
    logger.info(
        "%d of %d edge sets in the event; log count/(λ²a)=%.4g, h(ν)=%.4g",
        count,
        inst.num_outcomes,
        log_count_rate,
        h_nu,
    )
    return {
        "instance_hash": instance_hash(inst),
        "event": event.to_json(),
        "exact_probability": exact_event_probability(event, inst),
        "count": count,
        "bound": math.exp(inst.edge_scale * h_nu),
        "h_nu": h_nu,
        "log_count_rate": log_count_rate,
        "gap": abs(log_count_rate - h_nu),
    }
