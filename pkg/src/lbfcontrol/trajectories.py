"""Full-pose reference trajectories and their feasibility analysis.

A trajectory is a time-shifted sequence of position segments plus an
orientation program.  Segments return position and its first two
derivatives in local time; orientation programs return (R_r, w_r, w_r')
analytically so no differencing enters the reference.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfRange
from .geometry import E3, exp_map
from .sets import LateralBoundSet, boundary_margin, contains

AXES = {"x": 0, "y": 1, "z": 2}


@dataclass
class ReferenceSample:
    t: float
    p: np.ndarray
    v: np.ndarray
    a: np.ndarray
    R: np.ndarray
    omega: np.ndarray
    omega_dot: np.ndarray


# ---------------------------------------------------------------- segments

class Hold:
    """Stay at rest at ``point`` for ``duration`` seconds."""

    def __init__(self, point, duration):
        self.point = np.array(point, dtype=float)
        self.duration = float(duration)

    def evaluate(self, tau):
        return self.point.copy(), np.zeros(3), np.zeros(3)


class PolynomialConnector:
    """Quintic joining two (p, v, a) boundary states in ``duration`` seconds."""

    def __init__(self, p0, p1, duration, v0=(0, 0, 0), v1=(0, 0, 0), a0=(0, 0, 0), a1=(0, 0, 0)):
        T = float(duration)
        if T <= 0:
            raise ValueError("connector duration must be positive")
        self.duration = T
        p0, p1, v0, v1, a0, a1 = (np.array(x, dtype=float) for x in (p0, p1, v0, v1, a0, a1))
        M = np.array([
            [1, 0, 0, 0, 0, 0],
            [0, 1, 0, 0, 0, 0],
            [0, 0, 2, 0, 0, 0],
            [1, T, T**2, T**3, T**4, T**5],
            [0, 1, 2 * T, 3 * T**2, 4 * T**3, 5 * T**4],
            [0, 0, 2, 6 * T, 12 * T**2, 20 * T**3],
        ])
        rhs = np.vstack([p0, v0, a0, p1, v1, a1])
        self.coeffs = np.linalg.solve(M, rhs)  # (6, 3), ascending powers

    def evaluate(self, tau):
        c = self.coeffs
        tp = np.array([1.0, tau, tau**2, tau**3, tau**4, tau**5])
        p = tp @ c
        v = np.array([0.0, 1.0, 2 * tau, 3 * tau**2, 4 * tau**3, 5 * tau**4]) @ c
        a = np.array([0.0, 0.0, 2.0, 6 * tau, 12 * tau**2, 20 * tau**3]) @ c
        return p, v, a


def _tri(x):
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return 2.0 * x if x <= 0.5 else 2.0 * (1.0 - x)


def _tri_int(x):
    if x <= 0.0:
        return 0.0
    if x <= 0.5:
        return x * x
    if x <= 1.0:
        return 0.5 - (1.0 - x) ** 2
    return 0.5


def _tri_int2(x):
    if x <= 0.0:
        return 0.0
    if x <= 0.5:
        return x**3 / 3.0
    if x <= 1.0:
        return 0.5 * (x - 0.5) + (1.0 - x) ** 3 / 3.0
    return 0.5 * (x - 0.5)


class Chirp1D:
    """Constant-amplitude sinusoid along one axis with a swept frequency.

    The instantaneous frequency follows a triangle (0 -> peak -> 0) whose
    corners are rounded by a moving average of width ``smoothing`` seconds,
    so frequency and its rate are continuous and the segment both starts
    and ends at rest.  The acceleration envelope A*(2*pi*f)^2 therefore
    grows quasi-linearly to ``a_max`` and decays back to zero.
    """

    def __init__(self, amplitude, a_max, duration, axis="x", center=(0, 0, 0), smoothing=4.0):
        self.A = float(amplitude)
        self.a_max = float(a_max)
        self.duration = float(duration)
        self.axis = AXES[axis] if isinstance(axis, str) else int(axis)
        self.center = np.array(center, dtype=float)
        w = float(smoothing)
        if not 0.0 < w < self.duration:
            raise ValueError("smoothing must be shorter than the chirp")
        self._Tb = self.duration - w  # triangle base length
        self._w = w / self._Tb  # box width in normalised units
        f_max = math.sqrt(self.a_max / self.A) / (2.0 * math.pi)
        self._f_peak = f_max / (1.0 - 0.5 * self._w)  # moving average shaves the apex
        self.f_max = f_max

    def _x(self, tau):
        return (tau - 0.5 * self._w * self._Tb) / self._Tb

    def frequency(self, tau):
        x, w = self._x(tau), self._w
        return self._f_peak * (_tri_int(x + 0.5 * w) - _tri_int(x - 0.5 * w)) / w

    def _phase_terms(self, tau):
        x, w, Tb = self._x(tau), self._w, self._Tb
        hi, lo = x + 0.5 * w, x - 0.5 * w
        H = (_tri_int2(hi) - _tri_int2(lo)) / w
        h = (_tri_int(hi) - _tri_int(lo)) / w
        dh = (_tri(hi) - _tri(lo)) / w
        two_pi_f = 2.0 * math.pi * self._f_peak
        return two_pi_f * Tb * H, two_pi_f * h, two_pi_f * dh / Tb

    def end_position(self):
        return self.evaluate(self.duration)[0]

    def evaluate(self, tau):
        phi, dphi, ddphi = self._phase_terms(tau)
        s, c = math.sin(phi), math.cos(phi)
        A = self.A
        p = self.center.copy()
        v = np.zeros(3)
        a = np.zeros(3)
        k = self.axis
        p[k] += A * s
        v[k] = A * c * dphi
        a[k] = A * (c * ddphi - s * dphi * dphi)
        return p, v, a


class MultiSine:
    """Independent sinusoids per axis: p_i = c_i + A_i sin(2 pi f_i tau + phase_i)."""

    def __init__(self, amplitudes, frequencies, duration, center=(0, 0, 0), phases=(0, 0, 0)):
        self.A = np.array(amplitudes, dtype=float)
        self.w = 2.0 * math.pi * np.array(frequencies, dtype=float)
        self.phase = np.array(phases, dtype=float)
        self.center = np.array(center, dtype=float)
        self.duration = float(duration)

    def evaluate(self, tau):
        arg = self.w * tau + self.phase
        s, c = np.sin(arg), np.cos(arg)
        return self.center + self.A * s, self.A * self.w * c, -self.A * self.w**2 * s


# ---------------------------------------------------------- orientations

class ConstantOrientation:
    def __init__(self, R=None):
        self.R = np.eye(3) if R is None else np.array(R, dtype=float)

    def evaluate(self, t, p, v, a):
        return self.R.copy(), np.zeros(3), np.zeros(3)


class FollowTilt:
    """Rotation about a fixed world axis by an angle locked to the position.

    angle = amplitude * (p[follow] - center) / reach.  With a constant-
    amplitude oscillation of half-width ``reach`` the angle sweeps
    +-amplitude in phase with the displacement, which puts the top of the
    vehicle facing outwards at both ends of the stroke.
    """

    def __init__(self, axis, amplitude, follow="x", center=0.0, reach=1.0):
        a = np.array(E3 if axis is None else _axis_vector(axis), dtype=float)
        self.axis = a / np.linalg.norm(a)
        self.amplitude = float(amplitude)
        self.follow = AXES[follow] if isinstance(follow, str) else int(follow)
        self.center = float(center)
        self.reach = float(reach)

    def evaluate(self, t, p, v, a):
        k = self.amplitude / self.reach
        ang = k * (p[self.follow] - self.center)
        return exp_map(ang * self.axis), (k * v[self.follow]) * self.axis, (k * a[self.follow]) * self.axis


class SinusoidalTilt:
    """Rotation about a fixed world axis by amplitude * sin(2 pi f t + phase)."""

    def __init__(self, axis, amplitude, frequency, phase=0.0):
        a = np.array(_axis_vector(axis), dtype=float)
        self.axis = a / np.linalg.norm(a)
        self.amplitude = float(amplitude)
        self.w = 2.0 * math.pi * float(frequency)
        self.phase = float(phase)

    def evaluate(self, t, p, v, a):
        arg = self.w * t + self.phase
        ang = self.amplitude * math.sin(arg)
        rate = self.amplitude * self.w * math.cos(arg)
        acc = -self.amplitude * self.w**2 * math.sin(arg)
        return exp_map(ang * self.axis), rate * self.axis, acc * self.axis


def _axis_vector(axis):
    if isinstance(axis, str):
        e = np.zeros(3)
        e[AXES[axis]] = 1.0
        return e
    return axis


# ------------------------------------------------------------ trajectory

@dataclass
class Trajectory:
    """Segments played back to back, plus an orientation program."""

    segments: list
    orientation: object = field(default_factory=ConstantOrientation)

    def __post_init__(self):
        self._starts = np.cumsum([0.0] + [s.duration for s in self.segments])

    @property
    def duration(self):
        return float(self._starts[-1])

    def segment_at(self, t):
        i = int(np.searchsorted(self._starts, t, side="right")) - 1
        return min(max(i, 0), len(self.segments) - 1)

    def sample(self, t) -> ReferenceSample:
        if t < -1e-12 or t > self.duration + 1e-9:
            raise OutOfRange(f"t = {t} outside [0, {self.duration}]")
        i = self.segment_at(t)
        p, v, a = self.segments[i].evaluate(t - self._starts[i])
        R, w, wd = self.orientation.evaluate(t, p, v, a)
        return ReferenceSample(float(t), p, v, a, R, w, wd)


def chirp_trajectory(amplitude=1.2, a_max=5.9, center=(0.0, 0.0, 1.0), axis="x",
                     lead_in=1.0, chirp=88.0, settle=4.0, lead_out=2.0, smoothing=4.0,
                     orientation=None):
    """Hover, swept sinusoid, quintic return to ``center``, hover."""
    ch = Chirp1D(amplitude, a_max, chirp, axis=axis, center=center, smoothing=smoothing)
    segs = [Hold(center, lead_in), ch,
            PolynomialConnector(ch.end_position(), center, settle),
            Hold(center, lead_out)]
    return Trajectory([s for s in segs if s.duration > 0], orientation or ConstantOrientation())


def multisine_trajectory(amplitudes=(1.3, 0.5, 0.0), frequencies=(0.25, 0.4, 0.0),
                         center=(0.0, 0.0, 1.0), start=(0.0, 0.0, 1.0), connector=4.0,
                         duration=56.0, orientation=None):
    """Quintic from hover at ``start`` into a multi-axis sinusoid."""
    body = MultiSine(amplitudes, frequencies, duration - connector, center=center)
    p1, v1, a1 = body.evaluate(0.0)
    conn = PolynomialConnector(start, p1, connector, v1=v1, a1=a1)
    return Trajectory([conn, body], orientation or ConstantOrientation())


def hover_trajectory(point=(0.0, 0.0, 1.0), duration=10.0, R=None):
    return Trajectory([Hold(point, duration)], ConstantOrientation(R))


# ----------------------------------------------------------- feasibility

def nominal_inputs(sample: ReferenceSample, params):
    """Inverse dynamics of the reference: (u1_r, u2_r)."""
    f = params.m * sample.a
    f[2] += params.m * params.g
    u1 = sample.R.T @ f
    w = sample.omega
    u2 = np.cross(w, params.J @ w) + params.J @ sample.omega_dot
    return u1, u2


@dataclass
class FeasibilityRow:
    t: float
    feasible: bool
    margin: float


def feasibility_report(traj: Trajectory, bound: LateralBoundSet, params, dt):
    """Per-sample membership of u1_r in U_1 and its signed boundary distance."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = int(round(traj.duration / dt))
    rows = []
    for k in range(n + 1):
        t = min(k * dt, traj.duration)
        u1, _ = nominal_inputs(traj.sample(t), params)
        rows.append(FeasibilityRow(t, contains(bound, u1, t), boundary_margin(bound, u1, t)))
    return rows


def satisfies_margin(rows, eps, after=0.0):
    """Check dist(u1_r, boundary) > eps for every sample later than ``after``."""
    return all(r.margin > eps for r in rows if r.t > after)
