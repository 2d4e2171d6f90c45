"""Tilt-Hex rotor allocation: wrench <-> squared spin rates.

Rotor i (i = 0..5) sits at azimuth 60 deg * i on an arm of length L.  Its
thrust axis is e3 rotated about the radial arm by alpha_i = +-alpha
(alternating), then about the tangential axis by beta.  Rotor i spins with
handedness h_i = sign(alpha_i), contributing a drag moment
h_i * c_tau * thrust_i along its own thrust axis.  Thrust is c_f * w_i^2
with w_i in Hz.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NegativeThrustDemand
from .geometry import rot_x, rot_y, rot_z

# A single rotor lifts at most 12 N, reached at DEFAULT_W_MAX.  The value
# places hover near 64 Hz so the 3 N lateral cylinder fits inside the
# 43-83 Hz band of the saturated-rotor experiment.
DEFAULT_W_MAX = 111.0
DEFAULT_CF = 12.0 / DEFAULT_W_MAX**2
DEFAULT_CTAU = 0.017
DEFAULT_ARM = 0.4


def allocation_matrix(arm=DEFAULT_ARM, alpha=math.radians(35.0), beta=math.radians(25.0),
                      cf=DEFAULT_CF, ctau=DEFAULT_CTAU):
    """6x6 map from squared spin rates (Hz^2) to the body wrench [u1; u2]."""
    A = np.zeros((6, 6))
    for i in range(6):
        sign = 1.0 if i % 2 == 0 else -1.0
        Rz = rot_z(math.pi / 3.0 * i)
        axis = Rz @ rot_x(sign * alpha) @ rot_y(beta) @ np.array([0.0, 0.0, 1.0])
        pos = Rz @ np.array([arm, 0.0, 0.0])
        f = cf * axis
        A[:3, i] = f
        A[3:, i] = np.cross(pos, f) + sign * ctau * f
    return A


@dataclass
class RotorLayout:
    arm: float = DEFAULT_ARM
    alpha: float = math.radians(35.0)
    beta: float = math.radians(25.0)
    cf: float = DEFAULT_CF
    ctau: float = DEFAULT_CTAU
    w_min: float = 0.0
    w_max: float = DEFAULT_W_MAX
    A: np.ndarray = field(init=False, repr=False)
    A_inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.w_min < self.w_max:
            raise ValueError("need 0 <= w_min < w_max")
        self.A = allocation_matrix(self.arm, self.alpha, self.beta, self.cf, self.ctau)
        cond = np.linalg.cond(self.A)
        if not np.isfinite(cond) or cond > 1e8:
            raise ValueError(f"allocation matrix is singular (condition number {cond:.3g})")
        self.A_inv = np.linalg.inv(self.A)


@dataclass
class RotorCommand:
    w: np.ndarray  # Hz
    saturated: np.ndarray  # bool per rotor

    @property
    def any_saturated(self):
        return bool(self.saturated.any())


def allocate(u1, u2, layout: RotorLayout, check=False):
    """Squared spin rates realising the wrench exactly (no clipping).

    Negative entries are returned as they are; with ``check=True`` they
    raise NegativeThrustDemand listing the offending rotors.
    """
    w2 = layout.A_inv @ np.concatenate((u1, u2))
    if check and (w2 < 0.0).any():
        raise NegativeThrustDemand(np.flatnonzero(w2 < 0.0), w2)
    return w2


def saturate_rotors(w2, layout: RotorLayout) -> RotorCommand:
    w2 = np.asarray(w2, dtype=float)
    w = np.sqrt(np.maximum(w2, 0.0))
    # negative demands count as saturated even when w_min = 0
    sat = (w2 < layout.w_min**2) | (w2 < 0.0) | (w > layout.w_max)
    return RotorCommand(np.clip(w, layout.w_min, layout.w_max), sat)


def realize_wrench(cmd: RotorCommand, layout: RotorLayout):
    """Forward model: (u1, u2) produced by the commanded spin rates."""
    wrench = layout.A @ (cmd.w * cmd.w)
    return wrench[:3], wrench[3:]


def rotor_thrusts(cmd: RotorCommand, layout: RotorLayout):
    return layout.cf * cmd.w * cmd.w
