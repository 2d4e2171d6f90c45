"""Scenario configuration: flat ``key = value`` files and built-in experiments.

One key per line, dotted paths for nesting, ``#`` starts a comment.
Values are JSON (numbers, lists, quoted strings, true/false); bare words
are read as strings.  Angles in the file are in degrees (``*_deg`` keys).
See README.md for the full key list.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .allocation import DEFAULT_CF, DEFAULT_W_MAX, RotorLayout
from .controller import Gains
from .errors import ConfigError
from .geometry import from_euler_zyx
from .planner import PlannerState
from .sets import LateralBoundSet
from .trajectories import (ConstantOrientation, FollowTilt, SinusoidalTilt, chirp_trajectory,
                           hover_trajectory, multisine_trajectory)
from .vehicle import RigidBodyState, VehicleParams

DEFAULTS = {
    "name": "custom",
    "controller": "proposed",  # proposed | baseline
    "actuation": "realized",  # realized | idealized
    "duration": 10.0,
    "dt": 0.002,
    "expect": "ok",  # ok | diverged
    "nominal": False,
    "vehicle.mass": 1.8,
    "vehicle.inertia": [0.04, 0.04, 0.07],
    "vehicle.gravity": 9.81,
    "gains.kp": 20.0,
    "gains.kv": 8.0,
    "gains.kr": 4.0,
    "gains.kw": 0.8,
    "bound.kind": "cylindric",  # cylindric | conic | underactuated
    "bound.r_xy": 3.0,
    "bound.alpha_deg": 35.0,
    "bound.schedule": [],  # [[t, r_xy], ...], piecewise linear
    "planner.iterations": 40,
    "planner.filter_tau": 0.02,
    "rotors.arm": 0.4,
    "rotors.alpha_deg": 35.0,
    "rotors.beta_deg": 25.0,
    "rotors.cf": DEFAULT_CF,
    "rotors.ctau": 0.017,
    "rotors.w_min": 0.0,
    "rotors.w_max": DEFAULT_W_MAX,
    "trajectory.kind": "hover",  # hover | chirp | multisine
    "trajectory.center": [0.0, 0.0, 1.0],
    "trajectory.axis": "x",
    "trajectory.amplitude": 1.2,
    "trajectory.a_max": 5.9,
    "trajectory.lead_in": 1.0,
    "trajectory.chirp": 88.0,
    "trajectory.settle": 4.0,
    "trajectory.lead_out": 2.0,
    "trajectory.smoothing": 4.0,
    "trajectory.amplitudes": [1.3, 0.5, 0.0],
    "trajectory.frequencies": [0.25, 0.4, 0.0],
    "trajectory.start": [0.0, 0.0, 1.0],
    "trajectory.connector": 4.0,
    "orientation.kind": "constant",  # constant | follow | sine
    "orientation.axis": "y",
    "orientation.amplitude_deg": 10.0,
    "orientation.follow": "x",
    "orientation.frequency": 0.2,
    "initial.p": None,  # defaults to the reference start
    "initial.v": [0.0, 0.0, 0.0],
    "initial.rpy_deg": [0.0, 0.0, 0.0],
    "initial.omega": [0.0, 0.0, 0.0],
    "initial.jitter": 0.0,  # m, seeded random position offset
    "guard.max_position_error": 2.0,
}

BUILTINS = {
    "hover": {
        "name": "hover", "duration": 10.0, "nominal": True,
    },
    "exp11": {
        "name": "exp11", "duration": 95.0, "nominal": True,
        "trajectory.kind": "chirp",
    },
    "exp12": {
        "name": "exp12", "duration": 95.0,
        "trajectory.kind": "chirp", "bound.kind": "underactuated", "bound.r_xy": 0.0,
    },
    "exp13": {
        "name": "exp13", "duration": 95.0, "controller": "baseline", "expect": "diverged",
        "trajectory.kind": "chirp", "rotors.w_min": 43.0, "rotors.w_max": 83.0,
    },
    "exp2": {
        "name": "exp2", "duration": 95.0,
        "trajectory.kind": "chirp",
        # top facing outwards at both ends of the stroke, opposite to the
        # tilt an underactuated vehicle needs
        "orientation.kind": "follow", "orientation.axis": "y",
        "orientation.amplitude_deg": 10.0, "orientation.follow": "x",
    },
    "exp3": {
        "name": "exp3", "duration": 56.0,
        # the 10 N bound exceeds what the default rotor layout can deliver
        # sideways (about 6.3 N in its weakest direction at hover), so the
        # bound is emulated on the commanded wrench
        "actuation": "idealized",
        "trajectory.kind": "multisine",
        "bound.schedule": [[0.0, 0.0], [18.0, 0.0], [38.0, 10.0], [56.0, 10.0]],
    },
}


def _parse_value(text):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_kv(text):
    """Parse ``key = value`` text into a flat dict (no validation)."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = _parse_value(value)
    return out


def dump_kv(flat):
    lines = []
    for key, value in flat.items():
        if value is None:
            continue
        lines.append(f"{key} = {json.dumps(value) if not isinstance(value, str) else value}")
    return "\n".join(lines) + "\n"


def _vec(value, key, n=3):
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: expected {n} numbers") from exc
    if arr.shape != (n,) or not np.isfinite(arr).all():
        raise ConfigError(f"{key}: expected {n} finite numbers")
    return arr


def _num(value, key):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    return float(value)


def _choice(value, key, options):
    if value not in options:
        raise ConfigError(f"{key}: expected one of {', '.join(options)}, got {value!r}")
    return value


def _gain(value, key):
    if isinstance(value, list):
        return np.diag(_vec(value, key))
    return _num(value, key) * np.eye(3)


@dataclass
class Scenario:
    """A fully built simulation case.  ``config`` is the flat source mapping."""

    name: str
    config: dict
    trajectory: object
    bound: LateralBoundSet
    params: VehicleParams
    gains: Gains
    layout: RotorLayout
    controller: str
    actuation: str
    duration: float
    dt: float
    initial: RigidBodyState
    expect: str
    nominal: bool
    iterations: int
    filter_tau: float
    guard: float
    seed: int = 0

    @classmethod
    def from_config(cls, flat, seed=0):
        unknown = sorted(set(flat) - set(DEFAULTS))
        if unknown:
            raise ConfigError(f"unknown keys: {', '.join(unknown)}")
        c = copy.deepcopy(DEFAULTS)
        c.update(copy.deepcopy(flat))
        try:
            return cls._build(c, seed)
        except ConfigError:
            raise
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def _build(cls, c, seed):
        dt = _num(c["dt"], "dt")
        duration = _num(c["duration"], "duration")
        if not 0.0 < dt <= 0.01:
            raise ConfigError("dt must lie in (0, 0.01] s")
        steps = duration / dt
        if duration <= 0 or abs(steps - round(steps)) > 1e-6:
            raise ConfigError("dt must divide duration")

        inertia = np.array(c["vehicle.inertia"], dtype=float)
        if inertia.size == 9:
            inertia = inertia.reshape(3, 3)
        params = VehicleParams(_num(c["vehicle.mass"], "vehicle.mass"), inertia,
                               _num(c["vehicle.gravity"], "vehicle.gravity"))
        gains = Gains(_gain(c["gains.kp"], "gains.kp"), _gain(c["gains.kv"], "gains.kv"),
                      _num(c["gains.kr"], "gains.kr"), _num(c["gains.kw"], "gains.kw"))

        kind = _choice(c["bound.kind"], "bound.kind", ("cylindric", "conic", "underactuated"))
        if kind == "cylindric":
            sched = [tuple(_vec(row, "bound.schedule", 2)) for row in c["bound.schedule"]]
            bound = LateralBoundSet.cylindric(_num(c["bound.r_xy"], "bound.r_xy"), sched)
        elif kind == "conic":
            bound = LateralBoundSet.conic(math.radians(_num(c["bound.alpha_deg"], "bound.alpha_deg")))
        else:
            bound = LateralBoundSet.underactuated()

        layout = RotorLayout(
            _num(c["rotors.arm"], "rotors.arm"),
            math.radians(_num(c["rotors.alpha_deg"], "rotors.alpha_deg")),
            math.radians(_num(c["rotors.beta_deg"], "rotors.beta_deg")),
            _num(c["rotors.cf"], "rotors.cf"), _num(c["rotors.ctau"], "rotors.ctau"),
            _num(c["rotors.w_min"], "rotors.w_min"), _num(c["rotors.w_max"], "rotors.w_max"),
        )

        traj = build_trajectory(c, duration)
        if traj.duration < duration - 1e-9:
            raise ConfigError(f"trajectory lasts {traj.duration} s, shorter than duration")

        start = traj.sample(0.0)
        p0 = start.p if c["initial.p"] is None else _vec(c["initial.p"], "initial.p")
        jitter = _num(c["initial.jitter"], "initial.jitter")
        if jitter > 0.0:
            p0 = p0 + jitter * np.random.default_rng(seed).uniform(-1.0, 1.0, 3)
        rpy = np.radians(_vec(c["initial.rpy_deg"], "initial.rpy_deg"))
        R0 = start.R @ from_euler_zyx(*rpy)
        initial = RigidBodyState(np.array(p0, float), _vec(c["initial.v"], "initial.v"), R0,
                                 _vec(c["initial.omega"], "initial.omega"))

        return cls(
            name=str(c["name"]), config=c, trajectory=traj, bound=bound, params=params,
            gains=gains, layout=layout,
            controller=_choice(c["controller"], "controller", ("proposed", "baseline")),
            actuation=_choice(c["actuation"], "actuation", ("realized", "idealized")),
            duration=duration, dt=dt, initial=initial,
            expect=_choice(c["expect"], "expect", ("ok", "diverged")),
            nominal=bool(c["nominal"]),
            iterations=int(_num(c["planner.iterations"], "planner.iterations")),
            filter_tau=_num(c["planner.filter_tau"], "planner.filter_tau"),
            guard=_num(c["guard.max_position_error"], "guard.max_position_error"),
            seed=int(seed),
        )

    def with_overrides(self, **flat):
        """Rebuild with some flat keys replaced (dotted keys via ``**{'a.b': v}``)."""
        c = {k: v for k, v in self.config.items() if k in DEFAULTS}
        c.update(flat)
        return Scenario.from_config(c, seed=self.seed)

    def planner_state(self):
        return PlannerState(iterations=self.iterations, filter_tau=self.filter_tau)

    @property
    def steps(self):
        return int(round(self.duration / self.dt))

    def to_kv(self):
        return dump_kv(self.config)


def build_trajectory(c, duration):
    kind = _choice(c["trajectory.kind"], "trajectory.kind", ("hover", "chirp", "multisine"))
    center = _vec(c["trajectory.center"], "trajectory.center")
    okind = _choice(c["orientation.kind"], "orientation.kind", ("constant", "follow", "sine"))
    amp = math.radians(_num(c["orientation.amplitude_deg"], "orientation.amplitude_deg"))
    if okind == "constant":
        orient = ConstantOrientation()
    elif okind == "follow":
        axis = _choice(c["orientation.follow"], "orientation.follow", ("x", "y", "z"))
        reach = _num(c["trajectory.amplitude"], "trajectory.amplitude")
        if kind == "multisine":
            reach = float(np.array(c["trajectory.amplitudes"], float)["xyz".index(axis)])
        orient = FollowTilt(c["orientation.axis"], amp, follow=axis,
                            center=center["xyz".index(axis)], reach=reach)
    else:
        orient = SinusoidalTilt(c["orientation.axis"], amp,
                                _num(c["orientation.frequency"], "orientation.frequency"))

    if kind == "hover":
        traj = hover_trajectory(center, duration)
        traj.orientation = orient
        return traj
    if kind == "chirp":
        return chirp_trajectory(
            amplitude=_num(c["trajectory.amplitude"], "trajectory.amplitude"),
            a_max=_num(c["trajectory.a_max"], "trajectory.a_max"),
            center=center,
            axis=_choice(c["trajectory.axis"], "trajectory.axis", ("x", "y", "z")),
            lead_in=_num(c["trajectory.lead_in"], "trajectory.lead_in"),
            chirp=_num(c["trajectory.chirp"], "trajectory.chirp"),
            settle=_num(c["trajectory.settle"], "trajectory.settle"),
            lead_out=_num(c["trajectory.lead_out"], "trajectory.lead_out"),
            smoothing=_num(c["trajectory.smoothing"], "trajectory.smoothing"),
            orientation=orient,
        )
    return multisine_trajectory(
        amplitudes=_vec(c["trajectory.amplitudes"], "trajectory.amplitudes"),
        frequencies=_vec(c["trajectory.frequencies"], "trajectory.frequencies"),
        center=center,
        start=_vec(c["trajectory.start"], "trajectory.start"),
        connector=_num(c["trajectory.connector"], "trajectory.connector"),
        duration=duration,
        orientation=orient,
    )


def builtin(name, seed=0):
    if name not in BUILTINS:
        raise ConfigError(f"no built-in scenario {name!r}")
    return Scenario.from_config(BUILTINS[name], seed=seed)


def load(source, seed=0):
    """Load a built-in by name or a scenario file by path."""
    if source in BUILTINS and not Path(source).exists():
        return builtin(source, seed)
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {source!r}: {exc}") from exc
    return Scenario.from_config(parse_kv(text), seed=seed)
