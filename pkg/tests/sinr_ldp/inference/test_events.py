import math

import numpy as np
import pytest

from sinr_ldp.config.inference import EventConfig
from sinr_ldp.config.utils import EventKind
from sinr_ldp.empirical import BinnedMeasure, TiltFunction
from sinr_ldp.errors import DomainError
from sinr_ldp.inference import EventSpec, event_infimum
from sinr_ldp.rates import h_divergence


def scalar_h(omega: float, m: float) -> float:
    return omega * math.log(omega / m) - omega + m


def test_tv_ball_membership(single_bin):
    event = EventSpec.create(
        kind=EventKind.TV_BALL,
        center=BinnedMeasure.create([[2.0]], single_bin),
        radius=0.1,
    )
    masses = np.array([[[1.85]], [[1.95]], [[2.05]], [[2.2]]])
    assert event.contains(masses).tolist() == [False, True, True, False]
    assert event.contains_measure(BinnedMeasure.create([[2.0]], single_bin))


def test_halfspace_membership(single_bin):
    event = EventSpec.create(
        kind=EventKind.HALFSPACE,
        center=BinnedMeasure.create([[2.0]], single_bin),
        radius=0.2,
        tilt_value=1.0,
    )
    assert event.threshold == pytest.approx(1.9)
    assert event.contains(np.array([[[1.85]], [[1.95]]])).tolist() == [False, True]
    assert event.to_json()["threshold"] == pytest.approx(1.9)


def test_whole_space(single_bin):
    event = EventSpec.whole_space(single_bin)
    assert event.contains(np.array([[[0.0]], [[1e9]]])).all()
    m = BinnedMeasure.create([[1.0]], single_bin)
    assert event_infimum(event, m).value == 0.0


def test_events_need_a_positive_radius(single_bin):
    with pytest.raises(DomainError):
        EventSpec.create(
            kind=EventKind.TV_BALL,
            center=BinnedMeasure.create([[1.0]], single_bin),
            radius=0.0,
        )
    with pytest.raises(DomainError):
        EventSpec.create(
            kind=EventKind.TV_BALL,
            center=BinnedMeasure.create([1.0], single_bin),
            radius=1.0,
        )


def test_tv_ball_infimum_on_one_bin(single_bin):
    m = BinnedMeasure.create([[1.0]], single_bin)
    event = EventConfig(center_scale=2.0, radius=0.05).spawn(m)
    assert event.radius == pytest.approx(0.1)

    infimum = event_infimum(event, m)
    assert infimum.minimizer is not None
    assert infimum.minimizer.masses[0, 0] == pytest.approx(1.9)
    assert infimum.value == pytest.approx(scalar_h(1.9, 1.0))

    typical = EventConfig(center_scale=1.02, radius=0.05).spawn(m)
    assert event_infimum(typical, m).value == 0.0


def test_tv_ball_infimum_on_many_bins(two_bins):
    m = BinnedMeasure.create([[1.0, 0.5], [0.5, 2.0]], two_bins)
    event = EventConfig(center_scale=3.0, radius=0.1).spawn(m)
    infimum = event_infimum(event, m)
    assert infimum.minimizer is not None
    omega = infimum.minimizer.masses
    # the minimizer sits on the boundary of the ball, between m and ν
    assert np.abs(omega - event.center.masses).sum() == pytest.approx(event.radius)
    assert np.all(omega >= m.masses) and np.all(omega <= event.center.masses)
    assert infimum.value < h_divergence(event.center, m)


def test_tv_ball_outside_the_support(two_bins):
    m = BinnedMeasure.create([[1.0, 0.0], [0.0, 1.0]], two_bins)
    center = BinnedMeasure.create([[1.0, 1.0], [1.0, 1.0]], two_bins)
    event = EventSpec.create(kind=EventKind.TV_BALL, center=center, radius=0.5)
    infimum = event_infimum(event, m)
    assert infimum.value == math.inf
    assert infimum.minimizer is None


def test_halfspace_infimum(single_bin):
    m = BinnedMeasure.create([[1.0]], single_bin)
    event = EventConfig(
        kind=EventKind.HALFSPACE, center_scale=2.0, radius=0.2, relative_radius=False
    ).spawn(m)
    assert event_infimum(event, m).value == pytest.approx(scalar_h(1.9, 1.0))

    below = EventSpec.create(
        kind=EventKind.HALFSPACE, center=m.scaled(0.5), radius=0.2, tilt_value=1.0
    )
    assert event_infimum(below, m).value == 0.0

    negative = EventSpec.create(
        kind=EventKind.HALFSPACE,
        center=m.scaled(2.0),
        radius=0.2,
        tilt=TiltFunction.constant(single_bin, -1.0),
    )
    # ⟨g, ω⟩ > -2.1 holds at ω = m
    assert event_infimum(negative, m).value == 0.0

