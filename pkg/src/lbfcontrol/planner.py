"""Desired-attitude selection under a lateral force bound.

Among all orientations that can realise the reference force f_r, pick the
one whose thrust axis b3 is closest to the reference b3r (cost
1 - b3r . b3).  The optimum lies in the plane of b3r and f_r, so it is a
rotation of b3r by an angle theta about k = b3r x f_r / |b3r x f_r|, and
the smallest feasible theta is found by bisection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateAxis, DegenerateHeading
from .geometry import cross, log_map, norm
from .sets import LateralBoundSet, orientation_feasible

DEFAULT_ITERATIONS = 40
DEFAULT_FILTER_TAU = 0.02
_PARALLEL_TOL = 1e-12


@dataclass
class DesiredAttitude:
    R: np.ndarray
    omega: np.ndarray
    omega_dot: np.ndarray
    feasible_ref: bool
    theta: float = 0.0


@dataclass
class PlannerState:
    iterations: int = DEFAULT_ITERATIONS
    filter_tau: float = DEFAULT_FILTER_TAU
    t_prev: float | None = None
    R_prev: np.ndarray | None = None
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))
    omega_dot: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def reset(self):
        self.t_prev = None
        self.R_prev = None
        self.omega = np.zeros(3)
        self.omega_dot = np.zeros(3)


def _bisect(F0, F1, c, theta_max, n):
    """Smallest theta in [0, theta_max] with F0 cos(theta) + F1 sin(theta) >= c.

    The left side equals |f| cos(theta_max - theta) on the plane of b3r and
    f_r, hence increases monotonically on the bracket.  The feasible end of
    the bracket is returned so the result always satisfies the constraint.
    """
    lo, hi = 0.0, theta_max
    th = 0.5 * theta_max
    for _ in range(n):
        if F0 * math.cos(th) + F1 * math.sin(th) >= c:
            hi = th
        else:
            lo = th
        th = 0.5 * (lo + hi)
    return hi


def _tilt(b3r, f_r, c, n, axis=None):
    """Return (theta, b3) for threshold ``c`` on f_r . b3."""
    F0 = float(f_r @ b3r)
    if F0 >= c:
        return 0.0, b3r
    kv = cross(b3r, f_r)
    kn = norm(kv)
    fn = norm(f_r)
    if kn <= _PARALLEL_TOL * max(fn, 1.0):
        if axis is None:
            raise DegenerateAxis("f_r is anti-parallel to b3r")
        k = axis - (axis @ b3r) * b3r
        k = k / norm(k)
        theta_max = math.pi
    else:
        k = kv / kn
        theta_max = math.atan2(kn, F0)
    kxb = cross(k, b3r)
    F1 = float(f_r @ kxb)
    theta = _bisect(F0, F1, c, theta_max, n)
    if theta >= theta_max:
        return theta_max, f_r / fn
    # k is orthogonal to b3r, so Rodrigues reduces to two terms
    b3 = b3r * math.cos(theta) + kxb * math.sin(theta)
    return theta, b3 / norm(b3)


def solve_tilt_angle(b3r, f_r, r_xy, n=DEFAULT_ITERATIONS):
    """Minimal rotation of ``b3r`` towards ``f_r`` that fits the cylinder r_xy.

    Returns theta = 0 when b3r is already feasible.  Raises DegenerateAxis
    for an anti-parallel, infeasible pair.
    """
    b3r = np.asarray(b3r, dtype=float)
    f_r = np.asarray(f_r, dtype=float)
    fn = norm(f_r)
    d = fn * fn - r_xy * r_xy
    c = math.sqrt(d) if d > 0.0 else 0.0
    return _tilt(b3r, f_r, c, n)[0]


def build_desired_rotation(b3d, b1r):
    """R_d = [(b3d x b1r) x b3d, b3d x b1r, b3d], columns normalised."""
    b2 = cross(b3d, b1r)
    n2 = norm(b2)
    if n2 < 1e-9:
        raise DegenerateHeading("b3d is parallel to b1r")
    b2 = b2 / n2
    b1 = cross(b2, b3d)
    b1 = b1 / norm(b1)
    return np.column_stack((b1, b2, b3d))


def _select_b3(f_r, R_r, bound: LateralBoundSet, t, n):
    """(b3d, theta, reference_feasible)."""
    b3r = R_r[:, 2]
    fn = norm(f_r)
    if fn == 0.0:
        return b3r, 0.0, True
    c = bound.threshold(fn, t)
    if float(f_r @ b3r) >= c:
        return b3r, 0.0, True
    if bound.kind == "underactuated" or (bound.kind == "cylindric" and bound.r_at(t) == 0.0):
        # exact alignment; no bisection in the underactuated limit
        b3 = f_r / fn
        return b3, math.acos(max(-1.0, min(1.0, float(b3 @ b3r)))), False
    theta, b3 = _tilt(b3r, f_r, c, n, axis=R_r[:, 0])
    return b3, theta, False


def _tilted_rotation(f_r, R_r, bound, t, n):
    """(R_d, theta, reference_feasible), with R_d checked against the set.

    Rounding in the column construction can leave R_d^T f_r a few ulps
    outside U_1; the threshold is then raised by a tiny relative amount
    and the tilt solved again.
    """
    b3d, theta, ref_ok = _select_b3(f_r, R_r, bound, t, n)
    if ref_ok:
        return R_r, theta, True
    R_d = _heading_safe_rotation(b3d, R_r)
    if bound.kind == "underactuated" or (bound.kind == "cylindric" and bound.r_at(t) == 0.0):
        return R_d, theta, False
    fn = norm(f_r)
    c = bound.threshold(fn, t)
    bump = 1e-14 * fn
    while not orientation_feasible(bound, f_r, R_d, t) and bump < 1e-6 * fn:
        theta, b3d = _tilt(R_r[:, 2], f_r, min(c + bump, fn), n, axis=R_r[:, 0])
        R_d = _heading_safe_rotation(b3d, R_r)
        bump *= 10.0
    return R_d, theta, False


def _heading_safe_rotation(b3d, R_r):
    try:
        return build_desired_rotation(b3d, R_r[:, 0])
    except DegenerateHeading:
        # b3d along b1r: fall back to b2r for the heading
        R = build_desired_rotation(b3d, R_r[:, 1])
        return np.column_stack((-R[:, 1], R[:, 0], R[:, 2]))


def _lowpass(prev, x, dt, tau):
    if tau <= 0.0:
        return x
    return prev + (dt / (tau + dt)) * (x - prev)


def plan(f_r, R_r, bound: LateralBoundSet, state: PlannerState, t) -> DesiredAttitude:
    """Desired attitude for this control step; updates ``state`` history.

    If R_r can realise f_r it is returned unchanged.  Angular velocity and
    acceleration come from backward differences of the R_d history, each
    through a first-order low-pass of time constant ``state.filter_tau``.
    """
    R_d, theta, ref_ok = _tilted_rotation(f_r, R_r, bound, t, state.iterations)

    if state.R_prev is None:
        omega = np.zeros(3)
        omega_dot = np.zeros(3)
    else:
        dt = t - state.t_prev
        if dt <= 0.0:
            raise ValueError("planner timestamps must be strictly increasing")
        raw = log_map(state.R_prev.T @ R_d) / dt
        omega = _lowpass(state.omega, raw, dt, state.filter_tau)
        omega_dot = _lowpass(state.omega_dot, (omega - state.omega) / dt, dt, state.filter_tau)
    state.t_prev = t
    state.R_prev = R_d
    state.omega = omega
    state.omega_dot = omega_dot
    return DesiredAttitude(R_d, omega, omega_dot, ref_ok, theta)


def cost(R_r, R):
    """1 - b3r . b3."""
    return 1.0 - float(R_r[:, 2] @ R[:, 2])
