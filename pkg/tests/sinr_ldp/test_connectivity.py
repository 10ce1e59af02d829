import math

import chex
import numpy as np
import pytest

from sinr_ldp.config.kernel import KernelConfig, QuadratureConfig
from sinr_ldp.config.model import DomainConfig, ModelConfig
from sinr_ldp.config.utils import KernelKind, KernelMode
from sinr_ldp.connectivity import (
    Q_MAX,
    connection_matrix,
    connection_probability,
    extrapolate_limit,
    limit_kernel,
    limit_kernel_check,
    pairwise_q_integral,
    sample_q_network,
)
from sinr_ldp.errors import DomainError
from sinr_ldp.types import PoweredPoint, PoweredPointSet

UNIT_INTERVAL = DomainConfig(lows=(0.0,), highs=(1.0,))


def interval_model(gamma0: float = 1.0) -> ModelConfig:
    # τγ ≡ gamma0, ℓ = 1
    return ModelConfig(
        domain=UNIT_INTERVAL,
        pathloss_exponent=1.0,
        tau0=1.0,
        gamma0=gamma0,
        gamma_lambda_exponent=0.0,
    )


def end_points() -> tuple[PoweredPoint, PoweredPoint]:
    return PoweredPoint(np.array([0.0]), 1.0), PoweredPoint(np.array([1.0]), 1.0)


def test_connection_probability():
    assert connection_probability(3.0, 0.0) == 1.0
    assert connection_probability(1.0, math.log(2)) == pytest.approx(0.5)
    assert connection_probability(10.0, math.log(2)) == pytest.approx(2**-10)
    with pytest.raises(DomainError):
        connection_probability(1.0, -0.1)


def test_q_integral_closed_form():
    params = interval_model().spawn(5.0)
    x, y = end_points()
    value = pairwise_q_integral(x, y, params, QuadratureConfig(resolution=2**8))
    assert value == pytest.approx(2 * math.log(2), abs=1e-4)


def test_q_integral_grid_refinement():
    params = interval_model().spawn(5.0)
    x, y = end_points()
    coarse = pairwise_q_integral(x, y, params, QuadratureConfig(resolution=2**8))
    fine = pairwise_q_integral(x, y, params, QuadratureConfig(resolution=2**9))
    assert abs(coarse - fine) < 1e-4


def test_q_integral_is_symmetric(rng):
    params = ModelConfig().spawn(16.0)
    quad = QuadratureConfig(resolution=32)
    for _ in range(100):
        x = PoweredPoint(rng.uniform(size=2), rng.exponential())
        y = PoweredPoint(rng.uniform(size=2), rng.exponential())
        assert pairwise_q_integral(x, y, params, quad) == pytest.approx(
            pairwise_q_integral(y, x, params, quad), rel=1e-12
        )


def test_q_integral_without_interference():
    params = interval_model(gamma0=0.0).spawn(5.0)
    x, y = end_points()
    assert pairwise_q_integral(x, y, params, QuadratureConfig(resolution=64)) == 0.0


def test_q_integral_rejects_coincident_points():
    params = interval_model().spawn(5.0)
    x = PoweredPoint(np.array([0.3]), 1.0)
    with pytest.raises(DomainError):
        pairwise_q_integral(x, x, params, QuadratureConfig(resolution=64))


@pytest.mark.parametrize("mode", list(KernelMode))
def test_connection_matrix_is_symmetric(mode, rng):
    params = ModelConfig().spawn(16.0)
    points = PoweredPointSet(
        locations=rng.uniform(size=(6, 2)), powers=rng.exponential(size=6)
    )
    quad = QuadratureConfig(resolution=32)
    q = connection_matrix(points, params, KernelConfig(mode=mode), quad)
    chex.assert_shape(q, (6, 6))
    chex.assert_trees_all_close(q, q.T)
    assert np.all(np.diag(q) == 0)
    off = q[~np.eye(6, dtype=bool)]
    assert np.all((off > 0) & (off < 1))

    kernel = KernelConfig(mode=mode).spawn(params, KernelKind.Q_LAMBDA, quad)
    x, y = points.point(0), points.point(1)
    assert kernel(x, y) == pytest.approx(kernel(y, x))
    assert kernel(x, y) == pytest.approx(q[0, 1])


def test_synthetic_kernel_scales_the_limit():
    params = ModelConfig(a0=1.0, a_exponent=0.5).spawn(100.0)
    config = KernelConfig(kappa=2.0, theta=1.5)
    x = PoweredPoint(np.array([0.2, 0.2]), 1.0)
    y = PoweredPoint(np.array([0.5, 0.6]), 3.0)
    limit = config.spawn(params, KernelKind.LIMIT_Q)
    q = config.spawn(params, KernelKind.Q_LAMBDA)
    q_d = config.spawn(params, KernelKind.Q_LAMBDA_D)
    expected = 2.0 * math.exp(-1.5 * 0.5)
    assert limit(x, y) == pytest.approx(expected)
    assert limit_kernel(x.location, y.location, 2.0, 1.5, params.domain) == pytest.approx(
        expected
    )
    assert q(x, y) == pytest.approx(0.1 * expected)
    assert connection_probability(100.0, q_d(x, y)) == pytest.approx(q(x, y))


def test_q_driven_network_is_seeded(rng):
    params = ModelConfig().spawn(16.0)
    points = PoweredPointSet(
        locations=rng.uniform(size=(10, 2)), powers=rng.exponential(size=10)
    )
    kernel = KernelConfig(kappa=1.0, theta=0.0).spawn(params, KernelKind.Q_LAMBDA)
    a = sample_q_network(points, params, kernel, seed=3)
    b = sample_q_network(points, params, kernel, seed=3)
    assert np.array_equal(a.edges, b.edges)
    # Q = 1/4 on all 45 pairs
    assert 0 < a.num_edges < 45


def test_limit_check_identity_harness():
    x, y = end_points()
    model = ModelConfig(domain=UNIT_INTERVAL)
    grid = (16.0, 32.0, 64.0, 128.0)
    report = limit_kernel_check(
        x,
        y,
        model,
        KernelConfig(),
        grid,
        q_lambda_fn=lambda lam: model.a_lambda(lam) * 0.3,
    )
    assert report["extra"]["limit"] == pytest.approx(0.3)
    assert report["extra"]["limit_uncertainty"] == pytest.approx(0.0, abs=1e-12)
    assert report["extra"]["converged"]
    assert [e["lam"] for e in report["estimates"]] == list(grid)


def test_limit_check_extrapolates():
    x, y = end_points()
    model = ModelConfig(domain=UNIT_INTERVAL)
    report = limit_kernel_check(
        x,
        y,
        model,
        KernelConfig(),
        (16.0, 32.0, 64.0, 128.0),
        q_lambda_fn=lambda lam: model.a_lambda(lam) * (1.0 + 1.0 / lam),
    )
    assert report["extra"]["converged"]
    assert report["extra"]["last_value"] == pytest.approx(1.0 + 1.0 / 128)
    assert report["extra"]["limit"] == pytest.approx(1.0, abs=1e-9)
    assert report["theory_target"] == report["extra"]["limit"]
    assert report["extra"]["limit_uncertainty"] == pytest.approx(1.0 / 128, rel=1e-6)


def test_extrapolate_limit():
    assert extrapolate_limit(np.array([3.0, 2.0, 1.5, 1.25])) == pytest.approx(1.0)
    # growing differences: no extrapolation
    assert extrapolate_limit(np.array([1.0, 2.0, 4.0])) == 4.0
    assert extrapolate_limit(np.array([0.3, 0.3, 0.3])) == 0.3
    assert extrapolate_limit(np.array([1.0, 0.5])) == 0.5


def test_limit_check_synthetic_kernel_converges():
    x = PoweredPoint(np.array([0.25, 0.5]), 1.0)
    y = PoweredPoint(np.array([0.75, 0.5]), 1.0)
    report = limit_kernel_check(
        x,
        y,
        ModelConfig(),
        KernelConfig(kappa=1.0, theta=2.0),
        tuple(2.0**k for k in range(4, 11)),
    )
    assert report["extra"]["converged"]
    assert report["theory_target"] == pytest.approx(math.exp(-1.0))


def test_limit_check_flags_divergence():
    x, y = end_points()
    report = limit_kernel_check(
        x,
        y,
        interval_model(gamma0=0.0),
        KernelConfig(mode=KernelMode.INTEGRAL),
        tuple(2.0**k for k in range(4, 11)),
        QuadratureConfig(resolution=64),
    )
    # Q ≡ 1, so a_λ⁻¹Q grows like √λ
    assert not report["extra"]["converged"]
    assert report["notes"]
    assert report["estimates"][-1]["value"] == pytest.approx(Q_MAX * 2.0**5)


def test_limit_check_needs_a_grid():
    x, y = end_points()
    with pytest.raises(ValueError):
        limit_kernel_check(x, y, ModelConfig(), KernelConfig(), (1.0, 2.0))
