import math

import numpy as np
import pytest

from sinr_ldp import oracle
from sinr_ldp.config.kernel import KernelConfig
from sinr_ldp.config.model import ModelConfig
from sinr_ldp.config.utils import EventKind, KernelKind
from sinr_ldp.empirical import BinnedMeasure, quenched_connectivity_reference
from sinr_ldp.errors import DomainError, InstanceTooLargeError
from sinr_ldp.inference import EventSpec, plain_mc_estimate
from sinr_ldp.oracle import (
    EnumInstance,
    count_in_event,
    edge_marginals,
    enumerate_networks,
    exact_cardinality,
    exact_event_probability,
    instance_hash,
    make_instance,
)
from sinr_ldp.types import PoweredPointSet


def uniform_points(n: int, rng) -> PoweredPointSet:
    return PoweredPointSet(locations=rng.uniform(size=(n, 2)), powers=np.ones(n))


def instance(points, q, partition, lam=2.0, a_lambda=1.0) -> EnumInstance:
    return EnumInstance(
        points=points, q=np.asarray(q), partition=partition, lam=lam, a_lambda=a_lambda
    )


def k_edges(k: int, partition) -> EventSpec:
    # U₂ = k/2 for k edges at λ²a_λ = 4
    return EventSpec.create(
        kind=EventKind.TV_BALL,
        center=BinnedMeasure.create([[k / 2]], partition),
        radius=0.25,
    )


def test_two_points(single_bin, rng):
    inst = instance(uniform_points(2, rng), [0.5], single_bin)
    outcomes = list(enumerate_networks(inst))
    assert [o.tolist() for o, _ in outcomes] == [[False], [True]]
    assert [p for _, p in outcomes] == pytest.approx([0.5, 0.5])


def test_three_points(single_bin, rng):
    inst = instance(uniform_points(3, rng), np.full(3, 0.5), single_bin)
    probabilities = [p for _, p in enumerate_networks(inst)]
    assert probabilities == pytest.approx([0.125] * 8)


def test_probabilities_sum_to_one(four_points, single_bin):
    params = ModelConfig().spawn(4.0)
    kernel = KernelConfig(kappa=1.0, theta=1.0).spawn(params, KernelKind.Q_LAMBDA)
    inst = make_instance(four_points, params, kernel, single_bin)
    assert inst.num_outcomes == 64
    assert math.fsum(p for _, p in enumerate_networks(inst)) == pytest.approx(
        1.0, abs=1e-12
    )
    np.testing.assert_allclose(edge_marginals(inst), inst.q, atol=1e-12)


def test_whole_space(single_bin, rng):
    inst = instance(uniform_points(3, rng), [0.2, 0.5, 0.7], single_bin)
    whole = EventSpec.whole_space(single_bin)
    assert exact_event_probability(whole, inst) == pytest.approx(1.0)
    assert count_in_event(whole, inst) == 8


def test_counts_by_edge_number(single_bin, rng):
    inst = instance(uniform_points(3, rng), np.full(3, 0.5), single_bin)
    assert [count_in_event(k_edges(k, single_bin), inst) for k in (1, 2, 3)] == [3, 3, 1]
    assert exact_event_probability(k_edges(3, single_bin), inst) == pytest.approx(0.125)
    assert exact_event_probability(k_edges(1, single_bin), inst) == pytest.approx(0.375)


def test_size_cap(single_bin, rng):
    with pytest.raises(InstanceTooLargeError):
        instance(uniform_points(8, rng), np.full(28, 0.5), single_bin)
    # 7 points give 21 pairs, still enumerable
    assert instance(uniform_points(7, rng), np.full(21, 0.5), single_bin).num_pairs == 21


@pytest.mark.parametrize("q", [0.0, 1.0, 1.5])
def test_probabilities_in_the_open_interval(q, single_bin, rng):
    with pytest.raises(DomainError):
        instance(uniform_points(2, rng), [q], single_bin)


def test_results_do_not_depend_on_the_chunk_size(monkeypatch, two_bins, rng):
    points = PoweredPointSet(
        locations=rng.uniform(size=(5, 2)), powers=np.array([0.5, 2.0, 0.7, 1.5, 3.0])
    )
    inst = instance(points, rng.uniform(0.1, 0.9, size=10), two_bins, lam=3.0)
    event = EventSpec.create(
        kind=EventKind.TV_BALL,
        center=BinnedMeasure.create([[0.4, 0.3], [0.3, 0.4]], two_bins),
        radius=0.6,
    )
    expected = (exact_event_probability(event, inst), count_in_event(event, inst))
    marginals = edge_marginals(inst)

    monkeypatch.setattr(oracle, "_CHUNK", 7)
    assert exact_event_probability(event, inst) == pytest.approx(expected[0], rel=1e-12)
    assert count_in_event(event, inst) == expected[1]
    np.testing.assert_allclose(edge_marginals(inst), marginals, rtol=1e-12)


def test_instance_hash(single_bin, rng):
    points = uniform_points(3, rng)
    a = instance(points, [0.2, 0.5, 0.7], single_bin)
    b = instance(points, [0.2, 0.5, 0.7], single_bin)
    c = instance(points, [0.2, 0.5, 0.71], single_bin)
    assert instance_hash(a) == instance_hash(b)
    assert instance_hash(a) != instance_hash(c)


def test_cardinality_of_the_complete_graph(four_points, single_bin, constant_kernel):
    # Q = 0.99 on all 6 pairs and qπ⊗π has mass 12 · 1.98 / 16 = 1.485
    params = ModelConfig().spawn(4.0)
    kernel = constant_kernel.spawn(params, KernelKind.Q_LAMBDA)
    inst = make_instance(four_points, params, kernel, single_bin)
    m = quenched_connectivity_reference(four_points, single_bin, params, constant_kernel)
    assert m.total == pytest.approx(1.485)

    event = EventSpec.create(
        kind=EventKind.TV_BALL, center=m.scaled(1.5 / 1.485), radius=0.05
    )
    result = exact_cardinality(event, inst, m)
    assert result["count"] == 1
    assert result["exact_probability"] == pytest.approx(0.99**6)
    assert result["log_count_rate"] == 0.0
    assert result["gap"] <= 0.05
    assert result["bound"] == pytest.approx(math.exp(8.0 * result["h_nu"]))
    assert result["instance_hash"] == instance_hash(inst)


def four_point_events(partition) -> list[EventSpec]:
    # U₂ = k/4 for k edges at λ²a_λ = 8
    return [
        EventSpec.create(
            kind=EventKind.TV_BALL,
            center=BinnedMeasure.create([[0.5]], partition),
            radius=0.3,
        ),
        EventSpec.create(
            kind=EventKind.TV_BALL,
            center=BinnedMeasure.create([[1.5]], partition),
            radius=0.3,
        ),
        EventSpec.create(
            kind=EventKind.HALFSPACE,
            center=BinnedMeasure.create([[1.0]], partition),
            radius=0.4,
        ),
    ]


@pytest.mark.parametrize("index", range(3))
def test_enumeration_agrees_with_hit_frequencies(index, four_points, single_bin):
    params = ModelConfig().spawn(4.0)
    kernel = KernelConfig(kappa=1.0, theta=1.0).spawn(params, KernelKind.Q_LAMBDA)
    event = four_point_events(single_bin)[index]
    inst = make_instance(four_points, params, kernel, single_bin)
    exact = exact_event_probability(event, inst)
    assert 0.0 < exact < 1.0

    trials = 10_000
    est = plain_mc_estimate(event, four_points, params, kernel, trials, seed=100 + index)
    assert abs(est.value - exact) <= 3 * math.sqrt(exact * (1 - exact) / trials)
