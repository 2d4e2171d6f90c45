"""Admissible total-force sets for laterally bounded force (LBF) vehicles.

A set is described by its lateral cross-section U_xy at a given vertical
body force u3:

* ``underactuated``: U_xy = {0}
* ``conic``:         |u_xy| <= tan(alpha) * u3
* ``cylindric``:     |u_xy| <= r_xy, optionally with r_xy(t) piecewise linear

In every case u3 >= 0 is also required.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

KINDS = ("underactuated", "conic", "cylindric")


@dataclass(frozen=True)
class LateralBoundSet:
    kind: str = "cylindric"
    r_xy: float = 0.0
    alpha: float = 0.0  # rad, conic only
    # ((t0, r0), (t1, r1), ...) sorted by t; overrides r_xy when given
    schedule: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown set kind {self.kind!r}")
        if self.kind == "conic" and not (0.0 < self.alpha < math.pi / 2):
            raise ValueError("conic half-angle must lie in (0, 90) deg")
        if self.r_xy < 0.0:
            raise ValueError("r_xy must be non-negative")
        if self.schedule:
            sched = tuple((float(t), float(r)) for t, r in self.schedule)
            ts = [t for t, _ in sched]
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise ValueError("schedule times must be strictly increasing")
            if any(r < 0.0 for _, r in sched):
                raise ValueError("scheduled r_xy must be non-negative")
            object.__setattr__(self, "schedule", sched)
            object.__setattr__(self, "_ts", np.array(ts))
            object.__setattr__(self, "_rs", np.array([r for _, r in sched]))
        object.__setattr__(self, "_tan", math.tan(self.alpha) if self.kind == "conic" else 0.0)

    @classmethod
    def underactuated(cls):
        return cls("underactuated")

    @classmethod
    def cylindric(cls, r_xy, schedule=()):
        return cls("cylindric", r_xy=float(r_xy), schedule=tuple(schedule))

    @classmethod
    def conic(cls, alpha):
        return cls("conic", alpha=float(alpha))

    def r_at(self, t=0.0):
        """Cylinder radius at time ``t`` (0 for the underactuated set)."""
        if self.kind != "cylindric":
            return 0.0
        if self.schedule:
            # clamps to the end values outside the schedule span
            return float(np.interp(t, self._ts, self._rs))
        return self.r_xy

    def radius(self, u3, t=0.0):
        """Radius of U_xy at vertical force ``u3`` and time ``t``."""
        if self.kind == "cylindric":
            return self.r_at(t)
        if self.kind == "conic":
            return self._tan * max(u3, 0.0)
        return 0.0

    def threshold(self, fnorm, t=0.0):
        """Smallest admissible f_r . b3 for a force of norm ``fnorm``.

        R is feasible for f_r iff f_r . (R e3) >= threshold(|f_r|).
        """
        if self.kind == "cylindric":
            r = self.r_at(t)
            d = fnorm * fnorm - r * r
            return math.sqrt(d) if d > 0.0 else 0.0
        if self.kind == "conic":
            return fnorm * math.cos(self.alpha)
        return fnorm


def contains(bound: LateralBoundSet, f, t=0.0) -> bool:
    """True iff the body force ``f`` lies in U_1 at time ``t``."""
    u3 = f[2]
    if u3 < 0.0:
        return False
    lat = math.hypot(f[0], f[1])
    return lat <= bound.radius(u3, t)


def scale_into_disc(x, y, r):
    """Radial projection of (x, y) onto the disc of radius ``r``.

    Returns (x', y', clipped).  The scale factor is nudged down when
    rounding would leave the result a few ulps outside the disc.
    """
    n = math.hypot(x, y)
    if n <= r:
        return x, y, False
    if r <= 0.0:
        return 0.0, 0.0, True
    s = r / n
    while math.hypot(x * s, y * s) > r:
        s = math.nextafter(s, 0.0)
    return x * s, y * s, True


def saturate_lateral(bound: LateralBoundSet, lateral, u3, t=0.0):
    """Direction-preserving projection of ``lateral`` into U_xy(t, u3)."""
    x, y, _ = scale_into_disc(float(lateral[0]), float(lateral[1]), bound.radius(u3, t))
    return np.array((x, y))


def orientation_feasible(bound: LateralBoundSet, f_r, R, t=0.0) -> bool:
    """True iff R^T f_r is in U_1, i.e. R belongs to the feasible orientations."""
    return contains(bound, R.T @ f_r, t)


def cylinder_feasible_closed_form(f_r, b3, r_xy) -> bool:
    """Closed-form cylindric test f_r . b3 >= sqrt(|f_r|^2 - r_xy^2).

    When the whole force fits in the lateral disc the square root is
    undefined and only the sign condition f_r . b3 >= 0 remains.
    """
    fb = float(f_r @ b3)
    d = float(f_r @ f_r) - r_xy * r_xy
    if d <= 0.0:
        return fb >= 0.0
    return fb >= math.sqrt(d)


def boundary_margin(bound: LateralBoundSet, f, t=0.0) -> float:
    """Signed distance from ``f`` to the boundary of U_1 (positive inside)."""
    rho = math.hypot(f[0], f[1])
    z = float(f[2])
    if bound.kind == "conic":
        sa, ca = math.sin(bound.alpha), math.cos(bound.alpha)
        inside = z * sa - rho * ca
        if inside >= 0.0:
            return inside
        if rho * sa + z * ca >= 0.0:
            return inside
        return -math.hypot(rho, z)
    r = bound.r_at(t)
    if z >= 0.0 and rho <= r:
        if bound.kind == "underactuated" or r == 0.0:
            return 0.0
        return min(r - rho, z)
    return -math.hypot(max(rho - r, 0.0), min(z, 0.0))
