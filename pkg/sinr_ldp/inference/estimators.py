import logging
import math

import numpy as np
import numpy.typing as npt
from scipy import special, stats

from sinr_ldp.config.inference import EventConfig, SamplerConfig
from sinr_ldp.config.kernel import KernelConfig, QuadratureConfig
from sinr_ldp.config.model import ModelConfig
from sinr_ldp.config.utils import ConditioningMode, KernelKind, KernelMode, Speed
from sinr_ldp.connectivity import Kernel
from sinr_ldp.empirical import (
    BinnedMeasure,
    Partition,
    TiltFunction,
    empirical_power_measure,
    limit_connectivity_reference,
    power_reference_measure,
    quenched_connectivity_reference,
    tv_distance,
)
from sinr_ldp.model.network import NetworkHeader, SinrNetwork
from sinr_ldp.model.params import ModelParams
from sinr_ldp.model.ppp import sample_points
from sinr_ldp.rates.entropy import h_divergence
from sinr_ldp.seeding import derive_seed
from sinr_ldp.types import Estimate, EstimateRecord, PoweredPointSet, RateReportDict

from .events import EventSpec, event_infimum
from .sampling import PairLayout, layout_for, sample_class_counts, tilt_for_event

logger = logging.getLogger(__name__)


def summarize_weights(
    log_terms: npt.NDArray[np.float64], trials: int
) -> Estimate:
    """Unnormalized importance-sampling estimate of a mean from the logs of its
    nonzero terms (the hits); the other `trials − len(log_terms)` terms are zero."""
    log_terms = np.asarray(log_terms, dtype=np.float64)
    hits = int(log_terms.size)
    if hits == 0:
        logger.warning("zero effective sample size: no trial hit the event")
        return Estimate(0.0, 0.0, 0, 0.0, -math.inf, math.inf)

    log_sum = special.logsumexp(log_terms)
    log_sq_sum = special.logsumexp(2.0 * log_terms)
    log_value = float(log_sum - math.log(trials))
    ess = float(math.exp(2.0 * log_sum - log_sq_sum))
    if trials > 1:
        # sample variance of the terms over their squared mean
        ratio = math.exp(log_sq_sum - math.log(trials) - 2.0 * log_value)
        rel_var = max(ratio - 1.0, 0.0) * trials / (trials - 1)
        rel_stderr = math.sqrt(rel_var / trials)
    else:
        rel_stderr = math.inf
    value = math.exp(log_value)
    return Estimate(value, value * rel_stderr, hits, ess, log_value, rel_stderr)


def _estimate_on_layout(
    event: EventSpec,
    h: npt.NDArray,
    layout: PairLayout,
    trials: int,
    seed: int,
    chunk_size: int,
) -> Estimate:
    rng = np.random.default_rng(seed)
    hit_logs = []
    for counts, log_weights in sample_class_counts(layout, h, trials, rng, chunk_size):
        inside = event.contains(layout.connectivity_masses(counts))
        hit_logs.append(log_weights[inside])
    return summarize_weights(np.concatenate(hit_logs), trials)


def importance_estimate(
    event: EventSpec,
    g: TiltFunction,
    points: PoweredPointSet,
    params: ModelParams,
    kernel: Kernel,
    trials: int,
    seed: int,
    chunk_size: int = 1024,
) -> Estimate:
    """P(U₂^λ ∈ event) for frozen points, sampling edges under the tilt g."""
    if trials < 1:
        raise ValueError("trials must be positive")
    event.partition.check_same(g.partition)
    layout = layout_for(points, g.partition, params, kernel)
    return _estimate_on_layout(
        event, layout.class_values(g), layout, trials, seed, chunk_size
    )


def plain_mc_estimate(
    event: EventSpec,
    points: PoweredPointSet,
    params: ModelParams,
    kernel: Kernel,
    trials: int,
    seed: int,
    chunk_size: int = 1024,
) -> Estimate:
    """Hit frequency of the event under the untilted Q-driven law."""
    zero = TiltFunction.constant(event.partition, 0.0)
    return importance_estimate(
        event, zero, points, params, kernel, trials, seed, chunk_size
    )


def annealed_importance_estimate(
    event: EventSpec,
    g: TiltFunction,
    params: ModelParams,
    kernel: Kernel,
    sampler: SamplerConfig,
    quad: QuadratureConfig,
    trials: int,
    seed: int,
) -> tuple[Estimate, int]:
    """P(U₂^λ ∈ event | TV(U₁^λ, π⊗𝒦) ≤ δ), redrawing the points on every trial.

    Returns the estimate over accepted trials and the number accepted.
    """
    partition = event.partition
    reference = power_reference_measure(partition, params, quad)
    header = NetworkHeader.from_params(params)
    hit_logs = []
    accepted = 0
    for trial in range(trials):
        points = sample_points(params, derive_seed(seed, "points", trial))
        empty = SinrNetwork(
            points=points, edges=np.zeros((0, 2), dtype=np.int64), header=header
        )
        u1 = empirical_power_measure(empty, partition, params.lam)
        if tv_distance(u1, reference) > sampler.annealed_delta or points.num_points < 2:
            continue
        accepted += 1
        layout = layout_for(points, partition, params, kernel)
        rng = np.random.default_rng(derive_seed(seed, "edges", trial))
        counts, log_weights = next(
            sample_class_counts(layout, layout.class_values(g), 1, rng)
        )
        if event.contains(layout.connectivity_masses(counts))[0]:
            hit_logs.append(float(log_weights[0]))
    if accepted == 0:
        logger.warning("annealed conditioning accepted no configuration")
        return Estimate(0.0, 0.0, 0, 0.0, -math.inf, math.inf), 0
    return summarize_weights(np.asarray(hit_logs), accepted), accepted


def _speed(params: ModelParams, speed: Speed) -> float:
    if speed == Speed.LIN:
        return params.lam
    if speed == Speed.QUAD:
        return params.edge_scale
    raise ValueError(f"Invalid speed: {speed}")


def exact_scgf(
    g: TiltFunction,
    speed: Speed,
    points: PoweredPointSet,
    params: ModelParams,
    kernel: Kernel,
) -> float:
    """(1/s) log E exp(s · ½⟨g, U₂^λ⟩) for frozen points, in closed form.

    Each edge carries g/(λ²a_λ), so the cumulant factorizes over pairs:
    (1/s) Σ_pairs log(1 − Q + Q e^{s g/(λ²a_λ)}).
    """
    s = _speed(params, speed)
    layout = layout_for(points, g.partition, params, kernel)
    h = s * layout.class_values(g)[layout.pair_class] / params.edge_scale
    log_norm = np.logaddexp(np.log1p(-layout.q), np.log(layout.q) + h)
    return math.fsum(log_norm) / s


def scgf_estimate(
    g: TiltFunction,
    speed: Speed,
    points: PoweredPointSet,
    params: ModelParams,
    kernel: Kernel,
    trials: int,
    seed: int,
    tilted: bool = False,
    chunk_size: int = 1024,
) -> Estimate:
    """Monte Carlo estimate of (1/s) log E exp(s · ½⟨g, U₂^λ⟩) for frozen points.

    With `tilted`, edges are drawn from the law tilted by s g/(λ²a_λ), under
    which the weighted observable is constant.
    """
    if trials < 2:
        raise ValueError("need at least 2 trials")
    s = _speed(params, speed)
    layout = layout_for(points, g.partition, params, kernel)
    per_edge = s * layout.class_values(g) / params.edge_scale
    h = per_edge if tilted else np.zeros_like(per_edge)

    rng = np.random.default_rng(seed)
    log_terms = []
    for counts, log_weights in sample_class_counts(layout, h, trials, rng, chunk_size):
        log_terms.append(counts @ per_edge + log_weights)
    mean = summarize_weights(np.concatenate(log_terms), trials)
    return Estimate(
        value=mean.log_value / s,
        stderr=mean.rel_stderr / s,
        hits=mean.hits,
        ess=mean.ess,
        log_value=mean.log_value,
        rel_stderr=mean.rel_stderr,
    )


def scgf_target(g: TiltFunction, m: BinnedMeasure, speed: Speed) -> float:
    """Limits of the cumulant: ½⟨g, m⟩ at speed λ, ½⟨e^g − 1, m⟩ at speed λ²a_λ."""
    g.partition.check_same(m.partition)
    if speed == Speed.LIN:
        return 0.5 * math.fsum((g.values * m.masses).reshape(-1))
    if speed == Speed.QUAD:
        return 0.5 * math.fsum((np.expm1(g.values) * m.masses).reshape(-1))
    raise ValueError(f"Invalid speed: {speed}")


def lldp_sandwich(
    log_probability: float, edge_scale: float, divergence: float, slack: float = 0.2
) -> dict[str, float | bool]:
    """Checks log P / (λ²a_λ) ∈ [−𝓗/2 − ε, −𝓗/2 + ε] with ε = slack · 𝓗."""
    statistic = log_probability / edge_scale
    centre = -0.5 * divergence
    half_width = slack * divergence
    return {
        "statistic": statistic,
        "lower": centre - half_width,
        "upper": centre + half_width,
        "inside": bool(centre - half_width <= statistic <= centre + half_width),
    }


def linear_trend(
    x: npt.NDArray, y: npt.NDArray
) -> tuple[float | None, list[float] | None]:
    """Least-squares slope of y on x with its 95% t interval; None below 3 points."""
    if x.size < 3:
        return None, None
    fit = stats.linregress(x, y)
    t = stats.t.ppf(0.975, x.size - 2)
    return float(fit.slope), [
        float(fit.slope - t * fit.stderr),
        float(fit.slope + t * fit.stderr),
    ]


def decay_rate_estimate(
    event_config: EventConfig,
    lambda_grid: tuple[float, ...],
    model: ModelConfig,
    kernel: KernelConfig,
    partition: Partition,
    sampler: SamplerConfig,
    quad: QuadratureConfig,
    trials: int,
    seed_root: int,
) -> RateReportDict:
    """Decay of P(U₂^λ ∈ event) along the λ grid, importance sampled.

    The event is centred on the limit reference qπ⊗π and fixed across the
    grid; the theory target is ½ inf 𝓗(·‖qπ⊗π) over the event.
    """
    if len(lambda_grid) < 3:
        raise ValueError("the λ grid needs at least 3 points")
    if kernel.mode != KernelMode.SYNTHETIC:
        raise ValueError("decay rates need a kernel with a known limit")

    limit_ref = limit_connectivity_reference(
        partition, model.spawn(lambda_grid[-1]), kernel, quad
    )
    event = event_config.spawn(limit_ref)
    infimum = event_infimum(event, limit_ref)
    target = 0.5 * infimum.value
    center_divergence = h_divergence(event.center, limit_ref)

    estimates: list[EstimateRecord] = []
    xs, ys = [], []
    notes = [
        "diagonal pairs (i, i) are excluded from every measure",
        f"{sampler.conditioning.value} conditioning on U₁",
    ]
    last_log_p = -math.inf
    for index, lam in enumerate(lambda_grid):
        params = model.spawn(lam)
        q_kernel = kernel.spawn(params, KernelKind.Q_LAMBDA, quad)
        stream = derive_seed(seed_root, "ldp-decay", index)

        if sampler.conditioning == ConditioningMode.QUENCHED:
            points = sample_points(
                params, derive_seed(stream, "points"), sampler.point_law
            )
            m = quenched_connectivity_reference(points, partition, params, kernel, quad)
            layout = layout_for(points, partition, params, q_kernel)
            g = tilt_for_event(
                event, m, layout, sampler.tilt_target, sampler.tilt_bound
            )
            est = importance_estimate(
                event,
                g,
                points,
                params,
                q_kernel,
                trials,
                derive_seed(stream, "edges"),
                sampler.chunk_size,
            )
            accepted = trials
        else:
            g = tilt_for_event(event, limit_ref, bound=sampler.tilt_bound)
            est, accepted = annealed_importance_estimate(
                event, g, params, q_kernel, sampler, quad, trials, stream
            )

        rate = -est.log_value / params.edge_scale if est.hits else math.inf
        logger.info(
            "λ=%g: %d hits, ess=%.1f, -log P/(λ²a)=%.4g", lam, est.hits, est.ess, rate
        )
        record: EstimateRecord = {
            "lam": float(lam),
            "value": rate,
            "stderr": est.rel_stderr / params.edge_scale if est.hits else math.inf,
            "hits": est.hits,
            "ess": est.ess,
            "theory_target": target,
            "extra": {
                "log_probability": est.log_value,
                "edge_scale": params.edge_scale,
                "accepted": accepted,
            },
        }
        estimates.append(record)
        if est.hits == 0:
            notes.append(f"λ={lam:g} excluded: no trial hit the event")
            continue
        xs.append(params.edge_scale)
        ys.append(-est.log_value)
        last_log_p = est.log_value

    slope, slope_ci = linear_trend(np.asarray(xs), np.asarray(ys))
    params_last = model.spawn(lambda_grid[-1])
    sandwich = lldp_sandwich(
        last_log_p, params_last.edge_scale, center_divergence, sampler.lldp_slack
    )
    return {
        "experiment": "ldp-decay",
        "lambda_grid": [float(v) for v in lambda_grid],
        "estimates": estimates,
        "theory_target": target,
        "slope": slope,
        "slope_ci": slope_ci,
        "seed_root": seed_root,
        "notes": notes,
        "extra": {
            "event": event.to_json(),
            "center_half_divergence": 0.5 * center_divergence,
            "slope_to_target": (
                slope / target if slope is not None and target > 0 else None
            ),
            "lldp_sandwich": sandwich,
        },
    }
