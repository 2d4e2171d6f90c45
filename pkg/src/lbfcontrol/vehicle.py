"""Rigid-body plant: Newton-Euler dynamics and fixed-step integration."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import E3, cross, ensure_rotation, exp_map, hat

# Tilt-Hex mass; the inertia is a thin-disc estimate for a 0.8 m frame
DEFAULT_MASS = 1.8
DEFAULT_INERTIA = (0.04, 0.04, 0.07)
DEFAULT_GRAVITY = 9.81


@dataclass
class VehicleParams:
    m: float = DEFAULT_MASS
    J: np.ndarray = field(default_factory=lambda: np.diag(DEFAULT_INERTIA))
    g: float = DEFAULT_GRAVITY

    def __post_init__(self):
        self.J = np.array(self.J, dtype=float)
        if self.J.shape == (3,):
            self.J = np.diag(self.J)
        if self.m <= 0 or self.g <= 0:
            raise ValueError("mass and gravity must be positive")
        if not np.allclose(self.J, self.J.T) or np.linalg.eigvalsh(self.J).min() <= 0:
            raise ValueError("inertia must be symmetric positive definite")
        self.J_inv = np.linalg.inv(self.J)

    @property
    def weight(self):
        return self.m * self.g


@dataclass
class RigidBodyState:
    p: np.ndarray
    v: np.ndarray
    R: np.ndarray
    omega: np.ndarray

    @classmethod
    def at_rest(cls, p=(0.0, 0.0, 0.0), R=None):
        return cls(np.array(p, dtype=float), np.zeros(3),
                   np.eye(3) if R is None else np.array(R, dtype=float), np.zeros(3))

    def copy(self):
        return RigidBodyState(self.p.copy(), self.v.copy(), self.R.copy(), self.omega.copy())

    def is_finite(self):
        return bool(np.isfinite(self.p).all() and np.isfinite(self.v).all()
                    and np.isfinite(self.R).all() and np.isfinite(self.omega).all())


@dataclass
class StateDerivative:
    p_dot: np.ndarray
    v_dot: np.ndarray
    R_dot: np.ndarray
    omega_dot: np.ndarray


def _accelerations(R, omega, u1, u2, params):
    v_dot = R @ u1 / params.m
    v_dot[2] -= params.g
    omega_dot = params.J_inv @ (u2 - cross(omega, params.J @ omega))
    return v_dot, omega_dot


def dynamics_derivative(s: RigidBodyState, u1, u2, params: VehicleParams) -> StateDerivative:
    """Newton-Euler right-hand side.

    m p'' = -m g e3 + R u1,  J w' = -w x J w + u2,  R' = R hat(w).
    """
    v_dot, omega_dot = _accelerations(s.R, s.omega, np.asarray(u1, float), np.asarray(u2, float), params)
    return StateDerivative(s.v.copy(), v_dot, s.R @ hat(s.omega), omega_dot)


def _dexpinv(theta, w):
    # right-trivialised inverse dexp, truncated after the second bracket;
    # enough for a 4th-order Munthe-Kaas step since theta = O(dt)
    tw = cross(theta, w)
    return w + 0.5 * tw + cross(theta, tw) / 12.0


def integrate_step(s: RigidBodyState, u1, u2, params: VehicleParams, dt: float) -> RigidBodyState:
    """One classical RK4 step on (p, v, w) with R advanced on SO(3).

    The rotation is written R = R0 exp(hat(theta)) and theta is integrated
    alongside the vector states (Runge-Kutta-Munthe-Kaas), so every stage
    rotation is an exact group element.  Inputs are held over the step.
    """
    if not 0.0 < dt <= 0.01:
        raise ValueError("dt must lie in (0, 0.01] s")
    u1 = np.asarray(u1, float)
    u2 = np.asarray(u2, float)
    R0 = s.R
    p0, v0, w0 = s.p, s.v, s.omega
    zero = np.zeros(3)

    def stage(v, w, theta):
        R = R0 if theta is zero else R0 @ exp_map(theta)
        v_dot, w_dot = _accelerations(R, w, u1, u2, params)
        return v, v_dot, w_dot, _dexpinv(theta, w)

    k1 = stage(v0, w0, zero)
    h2 = 0.5 * dt
    k2 = stage(v0 + h2 * k1[1], w0 + h2 * k1[2], h2 * k1[3])
    k3 = stage(v0 + h2 * k2[1], w0 + h2 * k2[2], h2 * k2[3])
    k4 = stage(v0 + dt * k3[1], w0 + dt * k3[2], dt * k3[3])
    h6 = dt / 6.0
    p = p0 + h6 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    v = v0 + h6 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    w = w0 + h6 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    theta = h6 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
    R = ensure_rotation(R0 @ exp_map(theta))
    return RigidBodyState(p, v, R, w)


def hover_force(params: VehicleParams):
    return params.weight * E3
