from dataclasses import dataclass
from typing import TYPE_CHECKING

from sinr_ldp.errors import ConfigurationError

from .utils import (
    AepTarget,
    ConditioningMode,
    EntropyReference,
    EventKind,
    KullbackInit,
    NetworkGenerator,
    PointLaw,
    TiltTarget,
)

if TYPE_CHECKING:
    from sinr_ldp.empirical import BinnedMeasure
    from sinr_ldp.inference.events import EventSpec


@dataclass(frozen=True, kw_only=True)
class EventConfig:
    kind: EventKind = EventKind.TV_BALL
    """`TV_BALL` is {ω: Σ|ω − ν| ≤ ε}, `HALFSPACE` is {ω: ⟨g, ω⟩ > ⟨g, ν⟩ − ε/2}."""

    center_scale: float = 2.0
    """The event is centred at ν = center_scale · m, m the reference qπ⊗π."""

    radius: float = 0.05
    """ε. Relative to ‖ν‖ when `relative_radius` is set."""

    relative_radius: bool = True

    halfspace_tilt: float = 1.0
    """Constant g of a `HALFSPACE` event."""

    def __post_init__(self) -> None:
        if not self.center_scale >= 0:
            raise ConfigurationError("must be nonnegative", field="center_scale")
        if not self.radius > 0:
            raise ConfigurationError("ε must be positive", field="radius")

    def spawn(self, reference: "BinnedMeasure") -> "EventSpec":
        from sinr_ldp.inference.events import EventSpec

        center = reference.scaled(self.center_scale)
        radius = self.radius * center.total if self.relative_radius else self.radius
        return EventSpec.create(
            kind=self.kind,
            center=center,
            radius=radius,
            tilt_value=self.halfspace_tilt,
        )


@dataclass(frozen=True, kw_only=True)
class SamplerConfig:
    point_law: PointLaw = PointLaw.FIXED_COUNT
    """How the frozen point configuration of quenched experiments is drawn."""

    conditioning: ConditioningMode = ConditioningMode.QUENCHED
    """`QUENCHED` freezes one configuration per λ, `ANNEALED` redraws points and keeps
    those whose U₁ lies within `annealed_delta` of its mean in total variation."""

    annealed_delta: float = 0.1

    generator: NetworkGenerator = NetworkGenerator.Q_DRIVEN
    """Edge rule of the `generate` and `measures` experiments."""

    tilt_target: TiltTarget = TiltTarget.CALIBRATED
    """`ASYMPTOTIC` tilts by log(ω*/m), `CALIBRATED` matches the tilted mean to ω* at λ."""

    tilt_bound: float = 40.0
    """Tilt values are kept in [-tilt_bound, tilt_bound]."""

    chunk_size: int = 1024
    """Trials simulated per vectorized block."""

    scgf_g0: float = 0.5
    """Constant test function g ≡ g₀ of the `scgf` experiment."""

    scgf_tilted: bool = True
    """Estimate cumulants under the exponentially tilted law (zero variance)."""

    aep_target: AepTarget = AepTarget.SCALED
    """Which target the AEP trend is measured against. Both are always reported."""

    lldp_slack: float = 0.2
    """Relative half-width of the local LDP sandwich around −𝓗/2."""

    wlln_seeds: int = 0
    """Seeds per λ for the median sup deviations of the `measures` experiment; 0 skips
    them."""

    def __post_init__(self) -> None:
        if not self.annealed_delta > 0:
            raise ConfigurationError("must be positive", field="annealed_delta")
        if not self.tilt_bound > 0:
            raise ConfigurationError("must be positive", field="tilt_bound")
        if self.chunk_size < 1:
            raise ConfigurationError("must be at least 1", field="chunk_size")
        if not self.lldp_slack > 0:
            raise ConfigurationError("must be positive", field="lldp_slack")
        if self.wlln_seeds < 0:
            raise ConfigurationError("must be nonnegative", field="wlln_seeds")


@dataclass(frozen=True, kw_only=True)
class KullbackOptimizerConfig:
    init: KullbackInit = KullbackInit.CLOSED_FORM
    """Starting point of the Newton iterations."""

    max_iters: int = 200
    tol: float = 1e-13
    """Stop once every per-bin gradient is below this."""

    max_step: float = 4.0
    """Newton steps are clipped to this length."""

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            raise ConfigurationError("must be at least 1", field="max_iters")
        if not self.tol > 0:
            raise ConfigurationError("must be positive", field="tol")
        if not self.max_step > 0:
            raise ConfigurationError("must be positive", field="max_step")


@dataclass(frozen=True, kw_only=True)
class EntropyConfig:
    ref2: EntropyReference = EntropyReference.Q_PI_PI
    """Second mass term of the network entropy h(ν)."""

    epsilon: float = 0.05
    """Tolerance of the McMillan check |log Card / (λ²a_λ) − h(ν)| ≤ ε."""

    rate_tol: float = 1e-9
    """Constraint tolerance of the speed-λ rate functions."""

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ConfigurationError("must be positive", field="epsilon")
        if not self.rate_tol > 0:
            raise ConfigurationError("must be positive", field="rate_tol")
