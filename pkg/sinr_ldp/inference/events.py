import logging
import math
from dataclasses import dataclass
from typing import Any, NamedTuple

import numpy as np
import numpy.typing as npt
from scipy import optimize

from sinr_ldp.config.utils import EventKind
from sinr_ldp.empirical import BinnedMeasure, Partition, TiltFunction
from sinr_ldp.errors import DomainError
from sinr_ldp.rates.entropy import h_divergence
from sinr_ldp.types import ExtendedReal

logger = logging.getLogger(__name__)

# exp(±_MU_MAX) stays finite in float64
_MU_MAX = 700.0


@dataclass(frozen=True, kw_only=True)
class EventSpec:
    """A set of pair measures: a total-variation ball or an open halfspace around ν."""

    kind: EventKind
    center: BinnedMeasure
    radius: float
    tilt: TiltFunction | None = None

    @classmethod
    def create(
        cls,
        kind: EventKind,
        center: BinnedMeasure,
        radius: float,
        tilt_value: float = 1.0,
        tilt: TiltFunction | None = None,
    ) -> "EventSpec":
        if not radius > 0:
            raise DomainError("ε must be positive")
        if not center.is_pair:
            raise DomainError("events live on pair measures")
        if kind == EventKind.HALFSPACE and tilt is None:
            tilt = TiltFunction.constant(center.partition, tilt_value)
        return cls(kind=kind, center=center, radius=float(radius), tilt=tilt)

    @classmethod
    def whole_space(cls, partition: Partition) -> "EventSpec":
        return cls.create(
            kind=EventKind.TV_BALL,
            center=BinnedMeasure.zeros(partition, pair=True),
            radius=math.inf,
        )

    @property
    def partition(self) -> Partition:
        return self.center.partition

    @property
    def threshold(self) -> float:
        """⟨g, ν⟩ − ε/2 of a halfspace event."""
        assert self.tilt is not None
        return float(np.sum(self.tilt.values * self.center.masses)) - 0.5 * self.radius

    def contains(self, masses: npt.NDArray[np.float64]) -> npt.NDArray[np.bool_]:
        """Membership of a batch of pair masses of shape (..., bins, bins)."""
        masses = np.asarray(masses, dtype=np.float64)
        if self.kind == EventKind.TV_BALL:
            if math.isinf(self.radius):
                return np.ones(masses.shape[:-2], dtype=bool)
            distance = np.sum(np.abs(masses - self.center.masses), axis=(-2, -1))
            return distance <= self.radius
        if self.kind == EventKind.HALFSPACE:
            assert self.tilt is not None
            pairing = np.sum(masses * self.tilt.values, axis=(-2, -1))
            return pairing > self.threshold
        raise ValueError(f"Invalid event kind: {self.kind}")

    def contains_measure(self, omega: BinnedMeasure) -> bool:
        omega.check_compatible(self.center)
        return bool(self.contains(omega.masses))

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "kind": self.kind.value,
            "radius": self.radius,
            "partition": self.partition.identity,
            "center_total": self.center.total,
        }
        if self.kind == EventKind.HALFSPACE and self.tilt is not None:
            out["threshold"] = self.threshold
        return out


class EventInfimum(NamedTuple):
    value: ExtendedReal
    minimizer: BinnedMeasure | None


def _tv_ball_infimum(event: EventSpec, m: BinnedMeasure) -> EventInfimum:
    nu, ref = event.center.masses, m.masses
    if np.sum(np.abs(ref - nu)) <= event.radius:
        return EventInfimum(0.0, m)

    # Minimizers of 𝓗(·‖m) + μ Σ|ω − ν| are ω(μ) = clip(ν, m e^{-μ}, m e^{μ}).
    def omega(mu: float) -> npt.NDArray:
        return np.clip(nu, ref * math.exp(-mu), ref * math.exp(mu))

    def excess(mu: float) -> float:
        return float(np.sum(np.abs(omega(mu) - nu))) - event.radius

    if excess(_MU_MAX) > 0:
        logger.debug("TV ball lies outside the support of the reference")
        return EventInfimum(math.inf, None)
    mu = optimize.brentq(excess, 0.0, _MU_MAX, xtol=1e-14, rtol=1e-14)
    minimizer = BinnedMeasure.create(omega(mu), m.partition)
    return EventInfimum(h_divergence(minimizer, m), minimizer)


def _halfspace_infimum(event: EventSpec, m: BinnedMeasure) -> EventInfimum:
    assert event.tilt is not None
    g, ref = event.tilt.values, m.masses
    target = event.threshold
    if float(np.sum(g * ref)) > target:
        return EventInfimum(0.0, m)
    if not np.any((g > 0) & (ref > 0)):
        return EventInfimum(math.inf, None)

    # Minimizers over {⟨g, ω⟩ ≥ c} are the exponential family ω(s) = m e^{s g}, s ≥ 0.
    def gap(s: float) -> float:
        return float(np.sum(g * ref * np.exp(s * g))) - target

    hi = 1.0
    while gap(hi) < 0:
        hi *= 2.0
        if hi > 1e6:
            return EventInfimum(math.inf, None)
    s = optimize.brentq(gap, 0.0, hi, xtol=1e-14, rtol=1e-14)
    minimizer = BinnedMeasure.create(ref * np.exp(s * g), m.partition)
    return EventInfimum(h_divergence(minimizer, m), minimizer)


def event_infimum(event: EventSpec, m: BinnedMeasure) -> EventInfimum:
    """inf of 𝓗(·‖m) over the closure of the event, and the measure attaining it."""
    event.center.check_compatible(m)
    if event.kind == EventKind.TV_BALL:
        if math.isinf(event.radius):
            return EventInfimum(0.0, m)
        return _tv_ball_infimum(event, m)
    if event.kind == EventKind.HALFSPACE:
        return _halfspace_infimum(event, m)
    raise ValueError(f"Invalid event kind: {event.kind}")
