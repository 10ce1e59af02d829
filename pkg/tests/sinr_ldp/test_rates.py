import math

import numpy as np
import pytest
from jax.experimental import disable_x64

from sinr_ldp.config.inference import KullbackOptimizerConfig
from sinr_ldp.config.model import DomainConfig
from sinr_ldp.config.utils import EntropyReference, KullbackInit
from sinr_ldp.empirical import BinnedKernel, BinnedMeasure, TiltFunction, make_partition
from sinr_ldp.errors import DomainError
from sinr_ldp.rates import (
    check_extended_real,
    conditional_rate_speed1,
    entropy_ref2_mass,
    h_divergence,
    kullback_action,
    legendre_gap,
    maximize_kullback,
    network_entropy,
    rate_speed1,
    rate_speed2,
    relative_entropy,
    spectral_potential,
)


def test_relative_entropy(two_bins):
    m = BinnedMeasure.create([0.25, 0.75], two_bins)
    nu = BinnedMeasure.create([0.5, 0.5], two_bins)
    assert relative_entropy(m, m) == 0.0
    assert relative_entropy(nu, m) == pytest.approx(
        0.5 * math.log(2) + 0.5 * math.log(2 / 3)
    )
    assert relative_entropy(nu, m) == pytest.approx(0.14384, abs=1e-5)
    assert relative_entropy(
        BinnedMeasure.create([1.0, 0.0], two_bins),
        BinnedMeasure.create([0.0, 1.0], two_bins),
    ) == math.inf


def test_h_divergence(single_bin):
    m = BinnedMeasure.create([[1.0]], single_bin)
    assert h_divergence(m, m) == 0.0
    assert h_divergence(m.scaled(2.0), m) == pytest.approx(2 * math.log(2) - 1)
    assert h_divergence(m.scaled(2.0), m) == pytest.approx(0.38629, abs=1e-5)
    assert h_divergence(BinnedMeasure.zeros(single_bin, pair=True), m) == math.inf


@pytest.mark.parametrize("t", [0.1, 0.5, 3.0])
def test_h_divergence_scaling_identity(t, rng):
    partition = make_partition(DomainConfig(), 2.0, 2, 1)
    n = partition.num_bins
    raw = rng.uniform(0.1, 1.0, size=(n, n))
    m = BinnedMeasure.create(raw + raw.T, partition)
    assert h_divergence(m.scaled(t), m) == pytest.approx(
        m.total * (t * math.log(t) + 1 - t)
    )


def test_h_divergence_is_convex(rng):
    partition = make_partition(DomainConfig(), 2.0, 2, 1)
    n = partition.num_bins
    m, a, b = (
        BinnedMeasure.create(x + x.T, partition)
        for x in rng.uniform(0.1, 1.0, size=(3, n, n))
    )
    for t in np.linspace(0.0, 1.0, 11):
        mix = BinnedMeasure.create(t * a.masses + (1 - t) * b.masses, partition)
        assert h_divergence(mix, m) <= (
            t * h_divergence(a, m) + (1 - t) * h_divergence(b, m) + 1e-12
        )


def test_rate_speed1(two_bins):
    qk = BinnedKernel.constant(two_bins, 0.5)
    ref = BinnedMeasure.create([0.25, 0.75], two_bins)
    tol = 1e-9

    assert rate_speed1(ref, qk.q_pi_pi(ref), ref, qk, tol) == 0.0

    perturbed = qk.q_pi_pi(ref).masses.copy()
    perturbed[0, 0] += 2 * tol
    nu = BinnedMeasure.create(perturbed, two_bins)
    assert rate_speed1(ref, nu, ref, qk, tol) == math.inf
    assert conditional_rate_speed1(nu, ref, qk, tol) == math.inf

    pi = BinnedMeasure.create([0.5, 0.5], two_bins)
    assert rate_speed1(pi, qk.q_pi_pi(pi), ref, qk, tol) == pytest.approx(
        relative_entropy(pi, ref)
    )


def test_rate_speed2(single_bin):
    qk = BinnedKernel.constant(single_bin, 1.0)
    pi = BinnedMeasure.create([1.0], single_bin)
    q_pi_pi = qk.q_pi_pi(pi)
    assert rate_speed2(pi, q_pi_pi, qk) == 0.0
    assert rate_speed2(pi, q_pi_pi.scaled(2.0), qk) == pytest.approx(
        0.5 * (2 * math.log(2) - 1)
    )
    assert rate_speed2(pi, q_pi_pi.scaled(2.0), qk) == pytest.approx(0.19315, abs=1e-5)


def test_rate_speed2_outside_the_support(two_bins):
    qk = BinnedKernel(values=np.array([[1.0, 0.0], [0.0, 1.0]]), partition=two_bins)
    pi = BinnedMeasure.create([1.0, 1.0], two_bins)
    nu = BinnedMeasure.create([[1.0, 0.5], [0.5, 1.0]], two_bins)
    assert rate_speed2(pi, nu, qk) == math.inf


def test_network_entropy(single_bin):
    qref = BinnedMeasure.create([[1.0]], single_bin)
    zero = BinnedMeasure.zeros(single_bin, pair=True)
    assert network_entropy(zero, qref, ref2_mass=0.0) == 0.0
    assert network_entropy(qref, qref) == 0.0
    half = BinnedMeasure.create([[0.5]], single_bin)
    assert network_entropy(half, qref, ref2_mass=1.0) == pytest.approx(
        (0.5 - 1 - 0.5 * math.log(0.5)) / 2
    )
    assert network_entropy(half, qref, ref2_mass=1.0) == pytest.approx(-0.07671, abs=1e-5)


def test_entropy_reference_masses(single_bin):
    qref = BinnedMeasure.create([[0.3]], single_bin)
    pi = BinnedMeasure.create([2.0], single_bin)
    assert entropy_ref2_mass(EntropyReference.Q_PI_PI, qref) == pytest.approx(0.3)
    assert entropy_ref2_mass(
        EntropyReference.LAMBDA_PI_PI, qref, pi, lam=5.0
    ) == pytest.approx(20.0)


def test_spectral_potential(single_bin):
    qk = BinnedKernel.constant(single_bin, 1.0)
    pi = BinnedMeasure.create([1.0], single_bin)
    assert spectral_potential(TiltFunction.constant(single_bin, 0.0), pi, qk) == 0.0
    assert spectral_potential(
        TiltFunction.constant(single_bin, math.log(2)), pi, qk
    ) == pytest.approx(1.0)
    assert spectral_potential(
        TiltFunction.constant(single_bin, -700.0), pi, qk
    ) == pytest.approx(-1.0)


def test_kullback_action_at_the_reference(single_bin):
    qk = BinnedKernel.constant(single_bin, 0.8)
    pi = BinnedMeasure.create([1.5], single_bin)
    result = maximize_kullback(
        qk.q_pi_pi(pi).masses, qk.q_pi_pi(pi).masses, KullbackOptimizerConfig()
    )
    assert result.value == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(result.g, 0.0)
    assert result.converged


@pytest.mark.parametrize("init", list(KullbackInit))
def test_legendre_duality(init, rng):
    partition = make_partition(DomainConfig(), 2.0, 2, 2)
    n = partition.num_bins
    raw = rng.uniform(0.0, 1.0, size=(n, n))
    qk = BinnedKernel(values=raw + raw.T, partition=partition)
    pi = BinnedMeasure.create(rng.uniform(0.1, 1.0, size=n), partition)
    scale = rng.uniform(0.2, 5.0, size=(n, n))
    nu = BinnedMeasure.create(qk.q_pi_pi(pi).masses * (scale + scale.T) / 2, partition)

    opt = KullbackOptimizerConfig(init=init)
    assert legendre_gap(nu, pi, qk, opt) < 1e-8
    assert kullback_action(nu, pi, qk, opt) == pytest.approx(
        h_divergence(nu, qk.q_pi_pi(pi)), rel=1e-10
    )


def test_kullback_action_without_support(two_bins):
    qk = BinnedKernel(values=np.array([[1.0, 0.0], [0.0, 1.0]]), partition=two_bins)
    pi = BinnedMeasure.create([1.0, 1.0], two_bins)
    nu = BinnedMeasure.create([[1.0, 0.5], [0.5, 1.0]], two_bins)
    assert kullback_action(nu, pi, qk) == math.inf
    assert legendre_gap(nu, pi, qk) == 0.0


def test_kullback_action_of_the_zero_measure(single_bin):
    qk = BinnedKernel.constant(single_bin, 1.0)
    pi = BinnedMeasure.create([2.0], single_bin)
    zero = BinnedMeasure.zeros(single_bin, pair=True)
    # the supremum is approached as g → -inf, while 𝓗 is +inf at ν ≡ 0
    assert kullback_action(zero, pi, qk) == pytest.approx(4.0)
    assert h_divergence(zero, qk.q_pi_pi(pi)) == math.inf
    assert legendre_gap(zero, pi, qk) == math.inf


def test_check_extended_real():
    assert check_extended_real(np.float64(2.5)) == 2.5
    assert check_extended_real(math.inf) == math.inf
    assert check_extended_real(-math.inf) == -math.inf
    with pytest.raises(DomainError):
        check_extended_real(math.nan)


def test_h_divergence_is_nonnegative():
    partition = make_partition(DomainConfig(), 2.0, 2, 1)
    n = partition.num_bins
    rng = np.random.default_rng(0)
    for _ in range(1000):
        nu_raw, m_raw = rng.exponential(size=(2, n, n))
        nu_raw[rng.random((n, n)) < 0.1] = 0.0
        nu = BinnedMeasure.create(nu_raw + nu_raw.T, partition)
        m = BinnedMeasure.create(m_raw + m_raw.T, partition)
        assert h_divergence(nu, m) >= 0.0
        assert h_divergence(m, m) == pytest.approx(0.0, abs=1e-12)


def random_instance(rng: np.random.Generator, partition):
    n = partition.num_bins
    raw = rng.uniform(0.05, 1.0, size=(n, n))
    qk = BinnedKernel(values=raw + raw.T, partition=partition)
    pi = BinnedMeasure.create(rng.uniform(0.1, 1.0, size=n), partition)
    scale = rng.uniform(0.2, 5.0, size=(n, n))
    nu = BinnedMeasure.create(qk.q_pi_pi(pi).masses * (scale + scale.T) / 2, partition)
    return nu, pi, qk


@pytest.mark.parametrize("init", list(KullbackInit))
def test_legendre_duality_on_random_instances(init):
    partition = make_partition(DomainConfig(), 2.0, 2, 2)
    rng = np.random.default_rng(50)
    opt = KullbackOptimizerConfig(init=init)
    for _ in range(50):
        nu, pi, qk = random_instance(rng, partition)
        assert legendre_gap(nu, pi, qk, opt) < 1e-8


def test_legendre_duality_with_empty_bins(rng):
    partition = make_partition(DomainConfig(), 2.0, 2, 2)
    nu, pi, qk = random_instance(rng, partition)
    masses = nu.masses.copy()
    masses[0, :] = masses[:, 0] = 0.0
    sparse = BinnedMeasure.create(masses, partition)
    assert legendre_gap(sparse, pi, qk) < 1e-8


def test_kullback_solver_runs_in_double_precision():
    partition = make_partition(DomainConfig(), 2.0, 2, 2)
    nu, pi, qk = random_instance(np.random.default_rng(1), partition)
    with disable_x64():
        gap = legendre_gap(nu, pi, qk)
    assert gap < 1e-8
