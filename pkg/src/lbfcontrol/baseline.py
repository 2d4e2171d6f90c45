"""Full-wrench inverse-dynamics controller that ignores input bounds.

This is the comparison controller for the rotor-saturation experiment: it
asks for the whole reference force in the body frame and tracks R_r
directly, so it only works while the rotors can deliver what it asks.
"""
from __future__ import annotations

from .controller import Gains, moment_command, reference_force
from .planner import DesiredAttitude


def baseline_step(sample, state, gains: Gains, params):
    """Return (u1, u2) with u1 = R^T f_r unsaturated and R_d = R_r, w_d = w_r."""
    f_r = reference_force(sample, state, gains, params)
    u1 = state.R.T @ f_r
    ref = DesiredAttitude(sample.R, sample.omega, sample.omega_dot, True)
    u2 = moment_command(state, ref, gains, params)[0]
    return u1, u2
