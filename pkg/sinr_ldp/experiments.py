"""Named experiments: one config in, JSON/CSV reports and a manifest out.

Random streams are keyed by (seed_root, experiment kind, λ index, ...), so the
numbers do not depend on which experiments ran before or on chunk sizes.
"""

import logging
import math
import pathlib
from typing import Callable

import numpy as np
from scipy import stats

from sinr_ldp.config.experiment import ExperimentConfig
from sinr_ldp.config.utils import (
    AepTarget,
    ExperimentKind,
    KernelKind,
    KernelMode,
    NetworkGenerator,
    Speed,
    to_dict,
)
from sinr_ldp.connectivity import limit_kernel_check, sample_q_network
from sinr_ldp.empirical import (
    BinnedMeasure,
    Partition,
    TiltFunction,
    empirical_connectivity_measure,
    empirical_power_measure,
    limit_connectivity_reference,
    power_reference_measure,
    quenched_connectivity_reference,
    wlln_deviation,
    write_measure_csv,
    write_partition_json,
)
from sinr_ldp.errors import ConfigurationError, InstanceTooLargeError
from sinr_ldp.inference import (
    aep_statistic,
    aep_target,
    decay_rate_estimate,
    exact_scgf,
    linear_trend,
    scgf_estimate,
    scgf_target,
)
from sinr_ldp.model import (
    NetworkHeader,
    SinrNetwork,
    build_network,
    sample_points,
    save_network,
)
from sinr_ldp.model.params import ModelParams
from sinr_ldp.monitoring.reports import write_json, write_manifest, write_report
from sinr_ldp.monitoring.utils import log_report
from sinr_ldp.oracle import exact_cardinality, make_instance
from sinr_ldp.rates import entropy_ref2_mass, h_divergence, maximize_kullback, network_entropy
from sinr_ldp.seeding import derive_seed
from sinr_ldp.types import EstimateRecord, PoweredPoint, PoweredPointSet, RateReportDict

logger = logging.getLogger(__name__)

type Runner = Callable[
    [ExperimentConfig, pathlib.Path, list[pathlib.Path]], dict[str, RateReportDict]
]


def _report(
    cfg: ExperimentConfig,
    estimates: list[EstimateRecord],
    theory_target: float | list[float] | None,
    slope: float | None = None,
    slope_ci: list[float] | None = None,
    notes: list[str] | None = None,
    extra: dict | None = None,
) -> RateReportDict:
    assert cfg.kind is not None
    return {
        "experiment": cfg.kind.value,
        "lambda_grid": [float(v) for v in cfg.lambda_grid],
        "estimates": estimates,
        "theory_target": theory_target,
        "slope": slope,
        "slope_ci": slope_ci,
        "seed_root": cfg.seed_root,
        "notes": notes or [],
        "extra": extra or {},
    }


def _stream(cfg: ExperimentConfig, index: int) -> int:
    assert cfg.kind is not None
    return derive_seed(cfg.seed_root, cfg.kind.value, index)


def _points(cfg: ExperimentConfig, params: ModelParams, seed: int) -> PoweredPointSet:
    return sample_points(params, derive_seed(seed, "points"), cfg.sampler.point_law)


def _network(
    cfg: ExperimentConfig, params: ModelParams, points: PoweredPointSet, seed: int
) -> SinrNetwork:
    if cfg.sampler.generator == NetworkGenerator.SINR:
        return build_network(points, params)
    kernel = cfg.kernel.spawn(params, KernelKind.Q_LAMBDA, cfg.quad)
    return sample_q_network(points, params, kernel, derive_seed(seed, "edges"))


def _partition(cfg: ExperimentConfig) -> Partition:
    return cfg.partition.spawn(cfg.model.domain)


def run_generate(
    cfg: ExperimentConfig, out_dir: pathlib.Path, outputs: list[pathlib.Path]
) -> dict[str, RateReportDict]:
    partition = _partition(cfg)
    estimates: list[EstimateRecord] = []
    for index, lam in enumerate(cfg.lambda_grid):
        params = cfg.model.spawn(lam)
        stream = _stream(cfg, index)
        points = _points(cfg, params, stream)
        network = _network(cfg, params, points, stream)
        path = out_dir / f"network_{index:03d}.txt"
        save_network(network, path)
        outputs.append(path)

        u1 = empirical_power_measure(network, partition, lam)
        u2 = empirical_connectivity_measure(network, partition, lam, params.a_lambda)
        m = quenched_connectivity_reference(points, partition, params, cfg.kernel, cfg.quad)
        logger.info(
            "λ=%g: %d points, %d edges", lam, network.num_points, network.num_edges
        )
        estimates.append(
            {
                "lam": float(lam),
                "value": u2.total,
                "stderr": 0.0,
                "hits": network.num_edges,
                "ess": 0.0,
                "theory_target": m.total,
                "extra": {
                    "num_points": network.num_points,
                    "u1_total": u1.total,
                    "network_file": path.name,
                },
            }
        )
    return {
        "report": _report(
            cfg,
            estimates,
            None,
            notes=[
                f"{cfg.sampler.generator.value} generator",
                "value is ‖U₂‖ = 2|E|/(λ²a_λ), target the quenched ‖qπ⊗π‖",
            ],
        )
    }


def _wlln_medians(
    cfg: ExperimentConfig,
    params: ModelParams,
    partition: Partition,
    stream: int,
    references: tuple[BinnedMeasure, BinnedMeasure],
) -> tuple[float, float]:
    deviations = []
    for s in range(cfg.sampler.wlln_seeds):
        seed = derive_seed(stream, "wlln", s)
        network = _network(cfg, params, _points(cfg, params, seed), seed)
        deviations.append(
            wlln_deviation(network, partition, params, cfg.kernel, cfg.quad, references)
        )
    sup1, sup2 = np.median(np.asarray(deviations), axis=0)
    return float(sup1), float(sup2)


def run_measures(
    cfg: ExperimentConfig, out_dir: pathlib.Path, outputs: list[pathlib.Path]
) -> dict[str, RateReportDict]:
    partition = _partition(cfg)
    wlln = cfg.sampler.wlln_seeds > 0 and cfg.kernel.mode == KernelMode.SYNTHETIC
    if cfg.sampler.wlln_seeds > 0 and not wlln:
        logger.warning("median sup deviations need the synthetic kernel; skipped")
    medians: list[tuple[float, float]] = []
    path = out_dir / "partition.json"
    write_partition_json(partition, path)
    outputs.append(path)

    estimates: list[EstimateRecord] = []
    for index, lam in enumerate(cfg.lambda_grid):
        params = cfg.model.spawn(lam)
        stream = _stream(cfg, index)
        points = _points(cfg, params, stream)
        network = _network(cfg, params, points, stream)
        u1 = empirical_power_measure(network, partition, lam)
        u2 = empirical_connectivity_measure(network, partition, lam, params.a_lambda)
        for name, measure in (("u1", u1), ("u2", u2)):
            path = out_dir / f"{name}_{index:03d}.csv"
            write_measure_csv(measure, path)
            outputs.append(path)

        ref1 = power_reference_measure(partition, params, cfg.quad)
        if cfg.kernel.mode == KernelMode.SYNTHETIC:
            ref2 = limit_connectivity_reference(partition, params, cfg.kernel, cfg.quad)
        else:
            ref2 = quenched_connectivity_reference(
                points, partition, params, cfg.kernel, cfg.quad
            )
        sup1 = float(np.max(np.abs(u1.masses - ref1.masses)))
        sup2 = float(np.max(np.abs(u2.masses - ref2.masses)))
        extra: dict = {"sup_power": sup1}
        if wlln:
            median1, median2 = _wlln_medians(cfg, params, partition, stream, (ref1, ref2))
            medians.append((median1, median2))
            extra["median_sup_power"] = median1
            extra["median_sup_connectivity"] = median2

        action = maximize_kullback(u2.masses, ref2.masses, cfg.optimizer)
        ref2_mass = entropy_ref2_mass(cfg.entropy.ref2, ref2, u1, lam)
        rates = [
            {"functional": "H", "value": h_divergence(u2, ref2)},
            {
                "functional": "kullback_action",
                "value": action.value,
                "attained_g": action.g,
                "converged": action.converged,
            },
            {"functional": "h", "value": network_entropy(u2, ref2, ref2_mass)},
        ]
        logger.info("λ=%g: sup|U₁−ref|=%.3g, sup|U₂−ref|=%.3g", lam, sup1, sup2)
        estimates.append(
            {
                "lam": float(lam),
                "value": sup2,
                "stderr": 0.0,
                "hits": network.num_edges,
                "ess": 0.0,
                "theory_target": 0.0,
                "extra": {**extra, "rates": rates},
            }
        )

    notes = ["value is the sup-norm distance of U₂ from its reference"]
    report_extra: dict = {}
    if wlln:
        power, connectivity = (list(column) for column in zip(*medians))
        notes.append(
            f"medians over {cfg.sampler.wlln_seeds} seeds of the sup distances from the"
            " limits π⊗𝒦 and qπ⊗π"
        )
        report_extra["wlln"] = {
            "seeds": cfg.sampler.wlln_seeds,
            "median_sup_power": power,
            "median_sup_connectivity": connectivity,
            "decreasing": bool(
                np.all(np.diff(power) < 0) and np.all(np.diff(connectivity) < 0)
            ),
        }
    return {"report": _report(cfg, estimates, 0.0, notes=notes, extra=report_extra)}


def run_scgf(
    cfg: ExperimentConfig, out_dir: pathlib.Path, outputs: list[pathlib.Path]
) -> dict[str, RateReportDict]:
    partition = _partition(cfg)
    g = TiltFunction.constant(partition, cfg.sampler.scgf_g0)
    trials = max(cfg.trials, 2)
    limit_ref = None
    if cfg.kernel.mode == KernelMode.SYNTHETIC:
        limit_ref = limit_connectivity_reference(
            partition, cfg.model.spawn(cfg.lambda_grid[-1]), cfg.kernel, cfg.quad
        )

    records: dict[Speed, list[EstimateRecord]] = {speed: [] for speed in Speed}
    targets: dict[Speed, list[float]] = {speed: [] for speed in Speed}
    for index, lam in enumerate(cfg.lambda_grid):
        params = cfg.model.spawn(lam)
        stream = _stream(cfg, index)
        points = _points(cfg, params, stream)
        kernel = cfg.kernel.spawn(params, KernelKind.Q_LAMBDA, cfg.quad)
        m = quenched_connectivity_reference(points, partition, params, cfg.kernel, cfg.quad)
        for speed in Speed:
            est = scgf_estimate(
                g,
                speed,
                points,
                params,
                kernel,
                trials,
                derive_seed(stream, "edges", speed.value),
                cfg.sampler.scgf_tilted,
                cfg.sampler.chunk_size,
            )
            exact = exact_scgf(g, speed, points, params, kernel)
            target = scgf_target(g, m, speed)
            targets[speed].append(target)
            bias = exact - target
            extra = {
                "exact": exact,
                "finite_lambda_bias": bias,
                "relative_error": abs(bias) / abs(target) if target else math.inf,
                "within_tolerance": abs(est.value - target)
                <= 3 * est.stderr + abs(bias) + 1e-9 * abs(target),
            }
            if limit_ref is not None:
                extra["limit_target"] = scgf_target(g, limit_ref, speed)
            logger.info(
                "λ=%g, speed %s: estimate %.5g, exact %.5g, target %.5g",
                lam,
                speed.value,
                est.value,
                exact,
                target,
            )
            records[speed].append(
                {
                    "lam": float(lam),
                    "value": est.value,
                    "stderr": est.stderr,
                    "hits": est.hits,
                    "ess": est.ess,
                    "theory_target": target,
                    "extra": extra,
                }
            )

    notes = [
        "observable ½⟨g, U₂⟩ with g constant",
        "targets use the quenched qπ⊗π of each frozen configuration",
        "tolerance is 3 stderr plus the finite-λ bias of the closed-form cumulant",
    ]
    return {
        f"scgf_{speed.value}": _report(
            cfg, records[speed], targets[speed], notes=notes, extra={"speed": speed.value}
        )
        for speed in Speed
    }


def run_ldp_decay(
    cfg: ExperimentConfig, out_dir: pathlib.Path, outputs: list[pathlib.Path]
) -> dict[str, RateReportDict]:
    cfg.require_grid(3)
    report = decay_rate_estimate(
        cfg.event,
        cfg.lambda_grid,
        cfg.model,
        cfg.kernel,
        _partition(cfg),
        cfg.sampler,
        cfg.quad,
        cfg.trials,
        cfg.seed_root,
    )
    return {"report": report}


def run_aep(
    cfg: ExperimentConfig, out_dir: pathlib.Path, outputs: list[pathlib.Path]
) -> dict[str, RateReportDict]:
    cfg.require_grid(3)
    if not cfg.lambda_grid[0] > 1:
        raise ConfigurationError("the AEP statistic needs λ > 1", field="lambda_grid")
    all_targets = {
        mode.value: aep_target(cfg.model, cfg.kernel, cfg.quad, mode) for mode in AepTarget
    }
    target = all_targets[cfg.sampler.aep_target.value]

    estimates: list[EstimateRecord] = []
    for index, lam in enumerate(cfg.lambda_grid):
        params = cfg.model.spawn(lam)
        kernel = cfg.kernel.spawn(params, KernelKind.Q_LAMBDA, cfg.quad)
        stream = _stream(cfg, index)
        values = np.empty(cfg.trials)
        for trial in range(cfg.trials):
            points = sample_points(
                params, derive_seed(stream, "points", trial), cfg.sampler.point_law
            )
            network = sample_q_network(
                points, params, kernel, derive_seed(stream, "edges", trial)
            )
            values[trial] = aep_statistic(network, params, kernel)
        stderr = math.inf
        if cfg.trials > 1:
            stderr = float(np.std(values, ddof=1) / math.sqrt(cfg.trials))
        median_deviation = float(np.median(np.abs(values - target)))
        logger.info(
            "λ=%g: AEP statistic %.5g ± %.2g, median |· − target| %.4g",
            lam,
            values.mean(),
            stderr,
            median_deviation,
        )
        estimates.append(
            {
                "lam": float(lam),
                "value": float(values.mean()),
                "stderr": stderr,
                "hits": cfg.trials,
                "ess": float(cfg.trials),
                "theory_target": target,
                "extra": {"median_abs_deviation": median_deviation},
            }
        )

    # the finite-λ bias decays like 1/log λ
    x = 1.0 / np.log(np.asarray(cfg.lambda_grid))
    y = np.asarray([r["value"] for r in estimates])
    slope, slope_ci = linear_trend(x, y)
    fit = stats.linregress(x, y)
    medians = [r["extra"]["median_abs_deviation"] for r in estimates]
    return {
        "report": _report(
            cfg,
            estimates,
            target,
            slope=slope,
            slope_ci=slope_ci,
            notes=[
                f"target mode {cfg.sampler.aep_target.value}",
                "slope and intercept regress the statistic on 1/log λ",
            ],
            extra={
                "targets": all_targets,
                "intercept": float(fit.intercept),
                "intercept_stderr": float(fit.intercept_stderr),
                "median_distance_to_target": medians,
                "strictly_decreasing": bool(np.all(np.diff(medians) < 0)),
            },
        )
    }


def run_mcmillan(
    cfg: ExperimentConfig, out_dir: pathlib.Path, outputs: list[pathlib.Path]
) -> dict[str, RateReportDict]:
    partition = _partition(cfg)
    epsilon = cfg.entropy.epsilon
    estimates: list[EstimateRecord] = []
    for index, lam in enumerate(cfg.lambda_grid):
        params = cfg.model.spawn(lam)
        points = _points(cfg, params, _stream(cfg, index))
        kernel = cfg.kernel.spawn(params, KernelKind.Q_LAMBDA, cfg.quad)
        try:
            inst = make_instance(points, params, kernel, partition)
        except InstanceTooLargeError as e:
            raise ConfigurationError(str(e), field="lambda_grid") from None

        m = quenched_connectivity_reference(points, partition, params, cfg.kernel, cfg.quad)
        event = cfg.event.spawn(m)
        unlinked = SinrNetwork(
            points=points,
            edges=np.zeros((0, 2), dtype=np.int64),
            header=NetworkHeader.from_params(params),
        )
        u1 = empirical_power_measure(unlinked, partition, lam)
        ref2_mass = entropy_ref2_mass(cfg.entropy.ref2, m, u1, lam)
        result = exact_cardinality(event, inst, m, ref2_mass)
        path = out_dir / f"oracle_{index:03d}.json"
        write_json(result, path)
        outputs.append(path)

        scale = inst.edge_scale
        estimates.append(
            {
                "lam": float(lam),
                "value": result["log_count_rate"],
                "stderr": 0.0,
                "hits": result["count"],
                "ess": 0.0,
                "theory_target": result["h_nu"],
                "extra": {
                    "bound": result["bound"],
                    "lower_bound": math.exp(scale * (result["h_nu"] - epsilon)),
                    "upper_bound": math.exp(scale * (result["h_nu"] + epsilon)),
                    "within_epsilon": bool(result["gap"] <= epsilon),
                    "num_points": points.num_points,
                    "instance_hash": result["instance_hash"],
                },
            }
        )
    return {
        "report": _report(
            cfg,
            estimates,
            [r["theory_target"] for r in estimates],
            notes=[
                "the point configuration is frozen; only edge sets are counted",
                f"value is log(count)/(λ²a_λ), checked against h(ν) ± {epsilon:g}",
            ],
        )
    }


def run_limit_check(
    cfg: ExperimentConfig, out_dir: pathlib.Path, outputs: list[pathlib.Path]
) -> dict[str, RateReportDict]:
    cfg.require_grid(3)
    pair = cfg.limit_pair
    x = PoweredPoint(np.asarray(pair.x, dtype=np.float64), pair.eta_x)
    y = PoweredPoint(np.asarray(pair.y, dtype=np.float64), pair.eta_y)
    report = limit_kernel_check(
        x,
        y,
        cfg.model,
        cfg.kernel,
        cfg.lambda_grid,
        cfg.quad,
        pair.tolerance,
        seed_root=cfg.seed_root,
    )
    return {"report": report}


RUNNERS: dict[ExperimentKind, Runner] = {
    ExperimentKind.GENERATE: run_generate,
    ExperimentKind.MEASURES: run_measures,
    ExperimentKind.SCGF: run_scgf,
    ExperimentKind.LDP_DECAY: run_ldp_decay,
    ExperimentKind.AEP: run_aep,
    ExperimentKind.MCMILLAN: run_mcmillan,
    ExperimentKind.LIMIT_CHECK: run_limit_check,
}


def default_out_dir(cfg: ExperimentConfig) -> pathlib.Path:
    if cfg.out_dir is not None:
        return pathlib.Path(cfg.out_dir)
    assert cfg.kind is not None
    return pathlib.Path("runs") / f"{cfg.kind.value}_{cfg.seed_root}"


def run_experiment(
    cfg: ExperimentConfig,
    out_dir: pathlib.Path | None = None,
    track: bool = False,
) -> dict[str, RateReportDict]:
    """Run one experiment, writing its reports and `manifest.json` to `out_dir`.

    The manifest is written even when the run fails, with status `partial`
    and the files produced so far.
    """
    if cfg.kind is None:
        raise ConfigurationError("missing experiment kind", field="kind")
    out_dir = out_dir or default_out_dir(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = to_dict(cfg)

    outputs: list[pathlib.Path] = []
    status, error = "partial", None
    try:
        reports = RUNNERS[cfg.kind](cfg, out_dir, outputs)
        for name, report in reports.items():
            outputs.extend(write_report(report, out_dir, name))
            if track:
                log_report(report)
        status = "complete"
        return reports
    except Exception as e:
        error = f"{type(e).__name__}: {e}"
        raise
    finally:
        write_manifest(out_dir, cfg.kind.value, config, cfg.seed_root, outputs, status, error)
