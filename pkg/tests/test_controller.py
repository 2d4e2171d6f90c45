import math

import numpy as np
import pytest

from lbfcontrol.controller import Gains, control_step, force_command, moment_command, reference_force
from lbfcontrol.geometry import (
    E3, angular_velocity_error, attitude_error, exp_map, hat, random_rotation, rot_y,
)
from lbfcontrol.planner import DesiredAttitude, PlannerState, plan
from lbfcontrol.scenario import builtin
from lbfcontrol.sets import LateralBoundSet, contains
from lbfcontrol.trajectories import ReferenceSample
from lbfcontrol.vehicle import RigidBodyState, VehicleParams, integrate_step

MG = 1.8 * 9.81
CYL3 = LateralBoundSet.cylindric(3.0)


def hover_sample(p=(0, 0, 1), a=(0, 0, 0)):
    return ReferenceSample(0.0, np.array(p, float), np.zeros(3), np.array(a, float),
                           np.eye(3), np.zeros(3), np.zeros(3))


def test_gains_validation():
    with pytest.raises(ValueError):
        Gains(Kp=-np.eye(3))
    with pytest.raises(ValueError):
        Gains(Kv=[[1, 2, 0], [0, 1, 0], [0, 0, 1]])
    with pytest.raises(ValueError):
        Gains(kR=0.0)
    assert np.array_equal(Gains(Kp=[1, 2, 3]).Kp, np.diag([1.0, 2, 3]))
    assert np.array_equal(Gains(Kp=5.0).Kp, 5 * np.eye(3))


def test_reference_force_examples(params):
    g = Gains()
    s = RigidBodyState.at_rest(p=[0, 0, 1])
    assert np.allclose(reference_force(hover_sample(), s, g, params), [0, 0, MG])
    s = RigidBodyState.at_rest(p=[0.1, 0, 1])
    assert np.allclose(reference_force(hover_sample(), s, g, params), [-2, 0, MG])
    s = RigidBodyState.at_rest(p=[0, 0, 1])
    f = reference_force(hover_sample(a=[3.279, 0, 0]), s, g, params)
    assert np.allclose(f, [5.902, 0, MG], atol=1e-3)


def test_force_command_examples():
    u1, sat, clamped = force_command(np.array([0, 0, MG]), np.eye(3), CYL3)
    assert np.allclose(u1, [0, 0, MG]) and not sat and not clamped
    u1, sat, _ = force_command(np.array([10.62, 0, MG]), np.eye(3), CYL3)
    assert np.allclose(u1, [3, 0, MG]) and sat
    f = np.array([10.62, 0, MG])
    th = math.atan2(10.62, MG)
    assert math.degrees(th) == pytest.approx(31.02, abs=0.01)
    u1, sat, _ = force_command(f, rot_y(th), CYL3)
    assert np.allclose(u1, [0, 0, 20.61], atol=5e-3) and not sat


def test_force_command_clamps_u3():
    u1, _, clamped = force_command(np.array([1.0, 0, -5.0]), np.eye(3), CYL3)
    assert clamped and u1[2] == 0.0
    assert contains(CYL3, u1)


def test_saturation_containment(rng):
    bounds = [CYL3, LateralBoundSet.underactuated(), LateralBoundSet.conic(math.radians(35))]
    for _ in range(5000):
        bound = bounds[rng.integers(3)]
        u1, _, _ = force_command(rng.normal(scale=20, size=3), random_rotation(rng), bound)
        assert contains(bound, u1)


def test_moment_command_examples(params):
    g = Gains()
    des = DesiredAttitude(np.eye(3), np.zeros(3), np.zeros(3), True)
    u2, e_R, e_w = moment_command(RigidBodyState.at_rest(), des, g, params)
    assert np.array_equal(u2, np.zeros(3))
    s = RigidBodyState(np.zeros(3), np.zeros(3), np.eye(3), np.array([0, 0, 1.0]))
    u2, _, _ = moment_command(s, des, g, params)
    assert np.allclose(u2, [0, 0, -g.kw])


def test_errors_match_geometry(rng, params):
    for _ in range(50):
        R, Rd = random_rotation(rng), random_rotation(rng)
        w, wd = rng.normal(size=3), rng.normal(size=3)
        s = RigidBodyState(np.zeros(3), np.zeros(3), R, w)
        _, e_R, e_w = moment_command(s, DesiredAttitude(Rd, wd, np.zeros(3), True), Gains(), params)
        assert np.allclose(e_R, attitude_error(R, Rd))
        assert np.allclose(e_w, angular_velocity_error(w, R, Rd, wd))


def test_closed_loop_attitude_identity(rng):
    """J de_w/dt + kR e_R + kw e_w = 0 when u2 drives the plant."""
    params = VehicleParams(J=np.diag([0.04, 0.05, 0.07]))
    g = Gains()
    h = 1e-5
    for _ in range(20):
        R, Rd0 = random_rotation(rng), random_rotation(rng)
        w, wd = rng.normal(size=3), rng.normal(size=3)
        s = RigidBodyState(np.zeros(3), np.zeros(3), R, w)
        des = DesiredAttitude(Rd0, wd, np.zeros(3), True)
        u2, e_R, e_w = moment_command(s, des, g, params)
        s1 = integrate_step(s, np.zeros(3), u2, params, h)
        Rd1 = Rd0 @ exp_map(h * wd)  # constant body rate of R_d
        e_w1 = angular_velocity_error(s1.omega, s1.R, Rd1, wd)
        lhs = params.J @ (e_w1 - e_w) / h + g.kR * e_R + g.kw * e_w
        assert np.linalg.norm(lhs) < 1e-3 * (1 + np.linalg.norm(e_w))


def test_control_step_hover(params):
    s = RigidBodyState.at_rest(p=[0, 0, 1])
    out = control_step(hover_sample(), s, CYL3, Gains(), params, PlannerState(), 0.0)
    assert np.allclose(out.u1, [0, 0, MG]) and np.allclose(out.u2, 0)
    for e in (out.e_p, out.e_v, out.e_R, out.e_w, out.e_Rr, out.e_wr):
        assert np.allclose(e, 0)
    assert not out.saturated


def test_control_step_peak_instant(params):
    s = RigidBodyState.at_rest(p=[0, 0, 1])
    out = control_step(hover_sample(a=[5.9, 0, 0]), s, CYL3, Gains(), params, PlannerState(), 0.0)
    assert out.saturated and not out.desired.feasible_ref
    assert np.allclose(out.u1, [3, 0, MG])
    assert np.allclose(out.e_Rr, attitude_error(out.desired.R, np.eye(3)))


def test_feasible_reference_error_vanishes():
    sc = builtin("hover").with_overrides(**{"initial.p": [0.05, 0.0, 1.0]})
    pst = sc.planner_state()
    s = sc.initial.copy()
    for k in range(2500):
        out = control_step(sc.trajectory.sample(k * sc.dt), s, sc.bound, sc.gains, sc.params, pst, k * sc.dt)
        s = integrate_step(s, out.u1, out.u2, sc.params, sc.dt)
    assert np.array_equal(out.e_Rr, np.zeros(3))
    assert np.array_equal(out.e_wr, np.zeros(3))


def coplanar_controller(sample, s, gains, params, R_d, w_d, wd_d):
    """Independent coplanar-multirotor geometric controller (thrust along b3 only)."""
    e_p = s.p - sample.p
    e_v = s.v - sample.v
    F = -gains.Kp @ e_p - gains.Kv @ e_v + params.m * params.g * E3 + params.m * sample.a
    thrust = max(F @ s.R[:, 2], 0.0)
    eR = 0.5 * np.array([(R_d.T @ s.R - s.R.T @ R_d)[2, 1],
                         (R_d.T @ s.R - s.R.T @ R_d)[0, 2],
                         (R_d.T @ s.R - s.R.T @ R_d)[1, 0]])
    ew = s.omega - s.R.T @ R_d @ w_d
    J = params.J
    M = (-gains.kR * eR - gains.kw * ew + np.cross(s.omega, J @ s.omega)
         - J @ (hat(s.omega) @ s.R.T @ R_d @ w_d - s.R.T @ R_d @ wd_d))
    return np.array([0, 0, thrust]), M


def test_underactuated_reduction():
    sc = builtin("exp12").with_overrides(**{"initial.p": [0.05, -0.03, 1.02], "duration": 20.0,
                                            "trajectory.chirp": 20.0})
    bound = LateralBoundSet.underactuated()
    s_a, s_b = sc.initial.copy(), sc.initial.copy()
    pa, pb = sc.planner_state(), sc.planner_state()
    for k in range(int(round(6.0 / sc.dt))):
        t = k * sc.dt
        ref = sc.trajectory.sample(t)
        out = control_step(ref, s_a, bound, sc.gains, sc.params, pa, t)
        assert out.u1[0] == 0.0 and out.u1[1] == 0.0
        f_r = reference_force(ref, s_b, sc.gains, sc.params)
        d = plan(f_r, ref.R, bound, pb, t)
        u1, u2 = coplanar_controller(ref, s_b, sc.gains, sc.params, d.R, d.omega, d.omega_dot)
        s_a = integrate_step(s_a, out.u1, out.u2, sc.params, sc.dt)
        s_b = integrate_step(s_b, u1, u2, sc.params, sc.dt)
    assert np.abs(s_a.p - s_b.p).max() < 1e-9
    assert np.abs(s_a.R - s_b.R).max() < 1e-9
