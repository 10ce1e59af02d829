import chex
import numpy as np
import pytest

from sinr_ldp.config.model import DomainConfig, ModelConfig
from sinr_ldp.config.utils import BoundaryMode, InterferenceMode
from sinr_ldp.errors import DomainError
from sinr_ldp.model import build_network, sample_points
from sinr_ldp.model.sinr import path_loss, pairwise_distances, sinr, sinr_matrix
from sinr_ldp.types import PoweredPointSet

WIDE = DomainConfig(lows=(0.0, 0.0), highs=(4.0, 4.0))


def three_points() -> PoweredPointSet:
    # rx at (1, 1); tx with η = 2 and an interferer with η = 1, both at distance 1
    return PoweredPointSet(
        locations=np.array([[2.0, 1.0], [1.0, 1.0], [1.0, 2.0]]),
        powers=np.array([2.0, 1.0, 1.0]),
    )


def test_path_loss():
    assert path_loss(2.0, 1.0) == 1.0
    assert path_loss(4.0, 2.0) == pytest.approx(0.0625)
    assert path_loss(2.0, 0.0) == np.inf
    chex.assert_trees_all_close(
        path_loss(2.0, np.array([0.5, 1.0, 2.0])), np.array([4.0, 1.0, 0.25])
    )
    with pytest.raises(DomainError):
        path_loss(0.0, 1.0)
    with pytest.raises(DomainError):
        path_loss(2.0, -1.0)


def test_sinr_without_interference():
    params = ModelConfig(domain=WIDE, gamma0=0.0, noise=1.0).spawn(1.0)
    points = PoweredPointSet(
        locations=np.array([[1.0, 1.0], [2.0, 1.0]]), powers=np.array([2.0, 2.0])
    )
    assert sinr(0, 1, points, params) == pytest.approx(2.0)


def test_sinr_interference_modes():
    exclude = ModelConfig(domain=WIDE, gamma0=1.0, noise=1.0).spawn(1.0)
    literal = ModelConfig(
        domain=WIDE, gamma0=1.0, noise=1.0, interference=InterferenceMode.LITERAL
    ).spawn(1.0)
    assert sinr(0, 1, three_points(), exclude) == pytest.approx(1.0)
    assert sinr(0, 1, three_points(), literal) == pytest.approx(0.5)


def test_sinr_rejects_bad_indices():
    params = ModelConfig(domain=WIDE).spawn(1.0)
    with pytest.raises(DomainError):
        sinr(1, 1, three_points(), params)
    with pytest.raises(DomainError):
        sinr(0, 3, three_points(), params)


@pytest.mark.parametrize("mode", list(InterferenceMode))
def test_sinr_matrix_matches_pairwise_definition(mode, rng):
    params = ModelConfig(
        pathloss_exponent=3.0, noise=0.1, interference=mode
    ).spawn(20.0)
    points = PoweredPointSet(
        locations=rng.uniform(size=(12, 2)), powers=rng.exponential(size=12)
    )
    values = sinr_matrix(points, params)
    chex.assert_shape(values, (12, 12))
    expected = np.zeros((12, 12))
    for tx in range(12):
        for rx in range(12):
            if tx != rx:
                expected[tx, rx] = sinr(tx, rx, points, params)
    assert np.allclose(values, expected, rtol=1e-8)


def test_toroidal_distances_wrap():
    locations = np.array([[0.05, 0.5], [0.95, 0.5]])
    hard = pairwise_distances(locations, DomainConfig())
    torus = pairwise_distances(locations, DomainConfig(boundary=BoundaryMode.TOROIDAL))
    assert hard[0, 1] == pytest.approx(0.9)
    assert torus[0, 1] == pytest.approx(0.1)
    chex.assert_trees_all_close(torus, torus.T)


def test_single_point_has_no_edges():
    params = ModelConfig().spawn(1.0)
    points = PoweredPointSet(locations=np.array([[0.5, 0.5]]), powers=np.array([1.0]))
    network = build_network(points, params)
    assert network.num_edges == 0
    assert network.num_points == 1


def test_two_point_edge():
    params = ModelConfig(domain=WIDE, gamma0=0.0, noise=1.0, tau0=1.0).spawn(1.0)
    points = PoweredPointSet(
        locations=np.array([[1.0, 1.0], [2.0, 1.0]]), powers=np.array([2.0, 2.0])
    )
    network = build_network(points, params)
    assert network.edges.tolist() == [[0, 1]]

    weak = PoweredPointSet(locations=points.locations, powers=np.array([2.0, 0.5]))
    assert build_network(weak, params).num_edges == 0


def test_network_matches_brute_force():
    params = ModelConfig(pathloss_exponent=4.0, tau0=0.5, noise=0.01).spawn(30.0)
    points = sample_points(params, seed=3)
    network = build_network(points, params)

    tau = np.asarray(params.tau(points.powers))
    expected = set()
    for i in range(points.num_points):
        for j in range(i + 1, points.num_points):
            if (
                sinr(i, j, points, params) >= tau[i]
                and sinr(j, i, points, params) >= tau[j]
            ):
                expected.add((i, j))
    assert {tuple(e) for e in network.edges.tolist()} == expected


def test_raising_the_threshold_removes_edges():
    loose_model = ModelConfig(pathloss_exponent=4.0, tau0=0.25, noise=0.01)
    strict_model = ModelConfig(pathloss_exponent=4.0, tau0=1.0, noise=0.01)
    points = sample_points(loose_model.spawn(40.0), seed=5)
    loose = {tuple(e) for e in build_network(points, loose_model.spawn(40.0)).edges.tolist()}
    strict = {tuple(e) for e in build_network(points, strict_model.spawn(40.0)).edges.tolist()}
    assert strict <= loose


def test_relabeling_commutes_with_construction(rng):
    params = ModelConfig(pathloss_exponent=4.0, tau0=0.5, noise=0.01).spawn(25.0)
    points = sample_points(params, seed=9)
    network = build_network(points, params)

    permutation = rng.permutation(points.num_points)
    inverse = np.argsort(permutation)
    moved = PoweredPointSet(
        locations=points.locations[inverse], powers=points.powers[inverse]
    )
    assert np.array_equal(
        build_network(moved, params).edges, network.relabel(permutation).edges
    )
