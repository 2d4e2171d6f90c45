"""Full-pose geometric controller for LBF vehicles.

Pipeline per step: reference force f_r (PD + feedforward), desired
attitude from the planner, body force with the lateral part saturated into
U_xy, and the geometric attitude moment tracking R_d.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import _vee_asym, cross
from .planner import DesiredAttitude, PlannerState, plan
from .sets import LateralBoundSet, scale_into_disc


def _spd(M, name):
    M = np.array(M, dtype=float)
    if M.ndim == 0:
        M = float(M) * np.eye(3)
    elif M.shape == (3,):
        M = np.diag(M)
    if not np.allclose(M, M.T) or np.linalg.eigvalsh(M).min() <= 0:
        raise ValueError(f"{name} must be symmetric positive definite")
    return M


@dataclass
class Gains:
    Kp: np.ndarray = field(default_factory=lambda: 20.0 * np.eye(3))
    Kv: np.ndarray = field(default_factory=lambda: 8.0 * np.eye(3))
    kR: float = 4.0
    kw: float = 0.8

    def __post_init__(self):
        self.Kp = _spd(self.Kp, "Kp")
        self.Kv = _spd(self.Kv, "Kv")
        if self.kR <= 0 or self.kw <= 0:
            raise ValueError("attitude gains must be positive")


@dataclass
class ControlOutput:
    u1: np.ndarray
    u2: np.ndarray
    f_r: np.ndarray
    desired: DesiredAttitude
    e_p: np.ndarray
    e_v: np.ndarray
    e_R: np.ndarray
    e_w: np.ndarray
    e_Rr: np.ndarray
    e_wr: np.ndarray
    saturated: bool
    u3_clamped: bool


def reference_force(sample, state, gains: Gains, params):
    """f_r = m a_r + m g e3 - Kp e_p - Kv e_v."""
    e_p = state.p - sample.p
    e_v = state.v - sample.v
    f = params.m * sample.a - gains.Kp @ e_p - gains.Kv @ e_v
    f[2] += params.m * params.g
    return f


def force_command(f_r, R, bound: LateralBoundSet, t=0.0):
    """Body force: lateral part of R^T f_r saturated into U_xy, u3 >= 0.

    Returns (u1, lateral_saturated, u3_clamped).
    """
    x = R.T @ f_r
    u3 = x[2]
    clamped = u3 < 0.0
    if clamped:
        u3 = 0.0
    lx, ly, sat = scale_into_disc(float(x[0]), float(x[1]), bound.radius(u3, t))
    return np.array((lx, ly, u3)), sat, clamped


def moment_command(state, desired: DesiredAttitude, gains: Gains, params):
    """u2 = w x Jw - kR e_R - kw e_w - J(hat(w) R^T R_d w_d - R^T R_d w_d')."""
    R, w = state.R, state.omega
    RtRd = R.T @ desired.R
    e_R = _vee_asym(desired.R.T @ R)
    w_d_body = RtRd @ desired.omega
    e_w = w - w_d_body
    J = params.J
    ff = J @ (cross(w, w_d_body) - RtRd @ desired.omega_dot)
    return cross(w, J @ w) - gains.kR * e_R - gains.kw * e_w - ff, e_R, e_w


def control_step(sample, state, bound: LateralBoundSet, gains: Gains, params,
                 planner_state: PlannerState, t) -> ControlOutput:
    e_p = state.p - sample.p
    e_v = state.v - sample.v
    f_r = reference_force(sample, state, gains, params)
    des = plan(f_r, sample.R, bound, planner_state, t)
    u1, sat, clamped = force_command(f_r, state.R, bound, t)
    u2, e_R, e_w = moment_command(state, des, gains, params)
    e_Rr = _vee_asym(sample.R.T @ des.R)
    e_wr = des.omega - des.R @ (sample.R.T @ sample.omega)
    return ControlOutput(u1, u2, f_r, des, e_p, e_v, e_R, e_w, e_Rr, e_wr, sat, clamped)

