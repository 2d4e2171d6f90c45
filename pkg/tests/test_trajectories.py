import math

import numpy as np
import pytest

from lbfcontrol.errors import OutOfRange
from lbfcontrol.geometry import E3, angle_between, hat, rot_z
from lbfcontrol.scenario import builtin
from lbfcontrol.sets import LateralBoundSet, contains
from lbfcontrol.trajectories import (
    Chirp1D, PolynomialConnector, ReferenceSample, SinusoidalTilt, Trajectory,
    chirp_trajectory, feasibility_report, hover_trajectory, multisine_trajectory,
    nominal_inputs, satisfies_margin,
)


def _grid(traj, dt):
    return np.arange(0.0, traj.duration, dt)


@pytest.fixture(scope="module")
def exp11():
    return builtin("exp11").trajectory


def test_chirp_peak_acceleration(exp11):
    acc = np.array([exp11.sample(t).a[0] for t in _grid(exp11, 0.002)])
    assert 5.8 <= np.abs(acc).max() <= 6.0


def test_chirp_amplitude_and_rest_ends(exp11):
    xs = np.array([exp11.sample(t).p[0] for t in _grid(exp11, 0.01)])
    assert np.abs(xs).max() <= 1.2 + 1e-9
    assert np.abs(xs).max() > 1.19
    for t in (0.0, exp11.duration):
        s = exp11.sample(t)
        assert np.allclose(s.p, [0, 0, 1], atol=1e-12)
        assert np.allclose(s.v, 0, atol=1e-12)
        assert np.allclose(s.a, 0, atol=1e-9)


def test_chirp_envelope_is_triangular():
    ch = Chirp1D(1.2, 5.9, 88.0, smoothing=4.0)
    f_max = math.sqrt(5.9 / 1.2) / (2 * math.pi)
    assert max(ch.frequency(t) for t in np.linspace(0, 88, 8801)) == pytest.approx(f_max, rel=1e-9)
    # linear ramp away from the rounded corners
    slope = (ch.frequency(30.0) - ch.frequency(20.0)) / 10.0
    assert (ch.frequency(40.0) - ch.frequency(30.0)) / 10.0 == pytest.approx(slope, rel=1e-9)
    assert ch.frequency(0.0) == 0.0
    assert ch.frequency(88.0) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("traj", [
    chirp_trajectory(),
    multisine_trajectory(),
    hover_trajectory(),
])
def test_finite_difference_consistency(traj):
    h = 1e-4
    for t in np.linspace(h, traj.duration - h, 397):
        s0, sp, sm = traj.sample(t), traj.sample(t + h), traj.sample(t - h)
        assert np.allclose((sp.p - sm.p) / (2 * h), s0.v, atol=1e-6)
        assert np.allclose((sp.v - sm.v) / (2 * h), s0.a, atol=2e-5)


def test_segment_joints_are_c2():
    traj = chirp_trajectory()
    for t in traj._starts[1:-1]:
        a, b = traj.sample(t - 1e-9), traj.sample(t + 1e-9)
        assert np.allclose(a.p, b.p, atol=1e-7)
        assert np.allclose(a.v, b.v, atol=1e-6)
        assert np.allclose(a.a, b.a, atol=1e-5)


def test_quintic_boundary_conditions():
    c = PolynomialConnector([0, 0, 1], [1, 2, 3], 2.0, v1=[0.1, 0, 0], a1=[0, -0.3, 0])
    p, v, a = c.evaluate(0.0)
    assert np.allclose(p, [0, 0, 1]) and np.allclose(v, 0) and np.allclose(a, 0)
    p, v, a = c.evaluate(2.0)
    assert np.allclose(p, [1, 2, 3]) and np.allclose(v, [0.1, 0, 0]) and np.allclose(a, [0, -0.3, 0])


def test_out_of_range():
    traj = hover_trajectory(duration=5.0)
    with pytest.raises(OutOfRange):
        traj.sample(-0.1)
    with pytest.raises(OutOfRange):
        traj.sample(5.1)


def test_constant_orientation_zero_rates(exp11):
    for t in np.linspace(0, exp11.duration, 101):
        s = exp11.sample(t)
        assert np.array_equal(s.omega, np.zeros(3))
        assert np.array_equal(s.omega_dot, np.zeros(3))


def test_exp2_tilt_amplitude():
    traj = builtin("exp2").trajectory
    angles = [math.degrees(angle_between(traj.sample(t).R @ E3, E3))
              for t in _grid(traj, 0.002)]
    assert max(angles) == pytest.approx(10.0, abs=0.01)


def test_exp2_phase_opposition():
    # an underactuated vehicle pitches towards +x when accelerating to +x,
    # the reference pitches the other way: b3_x and a_x have opposite signs
    traj = builtin("exp2").trajectory
    for t in np.linspace(20, 80, 200):
        s = traj.sample(t)
        if abs(s.a[0]) > 1.0:
            assert s.R[0, 2] * s.a[0] < 0


@pytest.mark.parametrize("traj", [builtin("exp2").trajectory,
                                  Trajectory(hover_trajectory().segments,
                                             SinusoidalTilt("y", 0.3, 0.4))])
def test_orientation_rates_match_differences(traj):
    h = 1e-5
    for t in np.linspace(5, 9, 41):
        s = traj.sample(t)
        R_dot = (traj.sample(t + h).R - traj.sample(t - h).R) / (2 * h)
        W = s.R.T @ R_dot
        assert np.allclose(W, hat(s.omega), atol=1e-6)
        wd = (traj.sample(t + h).omega - traj.sample(t - h).omega) / (2 * h)
        assert np.allclose(wd, s.omega_dot, atol=1e-5)


def _sample(a, R=None):
    return ReferenceSample(0.0, np.zeros(3), np.zeros(3), np.array(a, float),
                           np.eye(3) if R is None else R, np.zeros(3), np.zeros(3))


def test_nominal_inputs_examples(params):
    u1, u2 = nominal_inputs(_sample([0, 0, 0]), params)
    assert np.allclose(u1, [0, 0, 17.658]) and np.allclose(u2, 0)
    u1, _ = nominal_inputs(_sample([1.66, 0, 0]), params)
    assert np.allclose(u1, [2.988, 0, 17.658])
    assert np.hypot(*u1[:2]) <= 3.0
    u1, _ = nominal_inputs(_sample([1, 0, 0], rot_z(math.pi / 2)), params)
    assert np.allclose(u1, [0, -1.8, 17.658])


def test_feasibility_exp11(exp11, params):
    rows = feasibility_report(exp11, LateralBoundSet.cylindric(3.0), params, 0.01)
    assert any(not r.feasible for r in rows)
    for r in rows:
        ax = exp11.sample(r.t).a[0]
        assert r.feasible == (params.m * abs(ax) <= 3.0)


def test_feasibility_exp12(exp11, params):
    rows = feasibility_report(exp11, LateralBoundSet.underactuated(), params, 0.01)
    for r in rows:
        assert r.feasible == (exp11.sample(r.t).a[0] == 0.0)


def test_feasibility_hover(params):
    traj = hover_trajectory(duration=2.0)
    for r_xy in (0.0, 1.0, 3.0):
        rows = feasibility_report(traj, LateralBoundSet.cylindric(r_xy), params, 0.1)
        assert all(r.feasible and r.margin == pytest.approx(r_xy) for r in rows)


def test_feasibility_agrees_with_contains(params):
    traj = builtin("exp3").trajectory
    bound = builtin("exp3").bound
    for r in feasibility_report(traj, bound, params, 0.05):
        u1, _ = nominal_inputs(traj.sample(r.t), params)
        assert r.feasible == contains(bound, u1, r.t)


def test_margin_condition(params):
    sc = builtin("exp3")
    rows = feasibility_report(sc.trajectory, sc.bound, params, 0.01)
    assert not satisfies_margin(rows, 0.5)
    assert satisfies_margin(rows, 0.5, after=38.0)
