"""Closed-loop simulation, telemetry and run metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .allocation import allocate, realize_wrench, saturate_rotors
from .baseline import baseline_step
from .controller import control_step
from .geometry import euler_zyx, rotation_distance
from .sets import contains
from .trajectories import nominal_inputs
from .vehicle import integrate_step

CSV_SCHEMA_VERSION = 1
COLUMNS = (
    "t",
    "p_x", "p_y", "p_z",
    "v_x", "v_y", "v_z",
    "pr_x", "pr_y", "pr_z",
    "roll", "pitch", "yaw",
    "roll_r", "pitch_r", "yaw_r",
    "roll_d", "pitch_d", "yaw_d",
    "u1_x", "u1_y", "u1_z",
    "u2_x", "u2_y", "u2_z",
    "w1", "w2", "w3", "w4", "w5", "w6",
    "ep_norm", "d_R_Rd", "d_Rd_Rr",
    "r_xy", "sat_lateral", "sat_rotors", "u3_clamped",
    "feasible_ref", "feasible",
)
_IDX = {name: i for i, name in enumerate(COLUMNS)}

OK = "ok"
DIVERGED = "diverged"


@dataclass
class TelemetryLog:
    data: np.ndarray  # (steps, len(COLUMNS))

    def __getitem__(self, name):
        return self.data[:, _IDX[name]]

    def __len__(self):
        return self.data.shape[0]

    def to_csv(self, path):
        np.savetxt(path, self.data, delimiter=",", fmt="%.10g",
                   header=",".join(COLUMNS), comments="")

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data)


@dataclass
class MetricsSummary:
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def to_text(self):
        lines = []
        for k, v in self.values.items():
            if isinstance(v, float):
                v = f"{v:.10g}"
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"


@dataclass
class SimulationResult:
    status: str
    log: TelemetryLog
    metrics: MetricsSummary
    message: str = ""


def run_scenario(sc, max_steps=None) -> SimulationResult:
    """Fixed-step closed loop: reference -> controller -> actuation -> plant.

    Stops early with status ``diverged`` once |e_p| exceeds the scenario
    guard (2 m by default) or the state stops being finite.
    """
    traj, bound, params, gains, layout = sc.trajectory, sc.bound, sc.params, sc.gains, sc.layout
    dt = sc.dt
    n = sc.steps if max_steps is None else min(sc.steps, max_steps)
    rows = np.zeros((n, len(COLUMNS)))
    state = sc.initial.copy()
    pstate = sc.planner_state()
    proposed = sc.controller == "proposed"
    realized = sc.actuation == "realized"
    status, message = OK, ""
    filled = n
    for k in range(n):
        t = k * dt
        ref = traj.sample(t)
        if proposed:
            out = control_step(ref, state, bound, gains, params, pstate, t)
            u1, u2, R_d = out.u1, out.u2, out.desired.R
            sat_lat, clamped, feas_ref = out.saturated, out.u3_clamped, out.desired.feasible_ref
        else:
            u1, u2 = baseline_step(ref, state, gains, params)
            R_d = ref.R
            sat_lat = not contains(bound, u1, t)
            clamped, feas_ref = False, True
        cmd = saturate_rotors(allocate(u1, u2, layout), layout)
        if realized:
            f_app, m_app = realize_wrench(cmd, layout)
        else:
            f_app, m_app = u1, u2

        row = rows[k]
        e_p = state.p - ref.p
        ep = math.sqrt(float(e_p @ e_p))
        row[0] = t
        row[1:4] = state.p
        row[4:7] = state.v
        row[7:10] = ref.p
        row[10:13] = euler_zyx(state.R)
        row[13:16] = euler_zyx(ref.R)
        row[16:19] = euler_zyx(R_d)
        row[19:22] = u1
        row[22:25] = u2
        row[25:31] = cmd.w
        row[31] = ep
        row[32] = rotation_distance(state.R, R_d)
        row[33] = rotation_distance(R_d, ref.R)
        row[34] = bound.r_at(t) if bound.kind == "cylindric" else math.nan
        row[35] = sat_lat
        row[36] = int(cmd.saturated.sum())
        row[37] = clamped
        row[38] = feas_ref
        row[39] = contains(bound, nominal_inputs(ref, params)[0], t)

        if ep > sc.guard or not state.is_finite():
            status, message = DIVERGED, f"|e_p| = {ep:.3g} m at t = {t:.3f} s"
            filled = k + 1
            break
        state = integrate_step(state, f_app, m_app, params, dt)
    rows = rows[:filled]
    for c in ("roll", "pitch", "yaw", "roll_r", "pitch_r", "yaw_r", "roll_d", "pitch_d", "yaw_d"):
        rows[:, _IDX[c]] = np.degrees(rows[:, _IDX[c]])
    log = TelemetryLog(rows)
    m = metrics(log, dt=dt)
    m.values = {"scenario": sc.name, "status": status, "schema_version": CSV_SCHEMA_VERSION,
                **m.values}
    return SimulationResult(status, log, m, message)


# ----------------------------------------------------------------- metrics

def phases(feasible, t):
    """Split a run into (head, middle, tail) around the infeasible samples.

    Returns a list of (name, start_index, stop_index) with stop exclusive.
    ``head`` and ``tail`` are the leading and trailing feasible stretches;
    ``middle`` spans from the first to the last infeasible sample.
    """
    bad = np.flatnonzero(np.asarray(feasible) < 0.5)
    n = len(t)
    if bad.size == 0:
        return [("head", 0, n)]
    out = []
    if bad[0] > 0:
        out.append(("head", 0, int(bad[0])))
    out.append(("middle", int(bad[0]), int(bad[-1]) + 1))
    if bad[-1] + 1 < n:
        out.append(("tail", int(bad[-1]) + 1, n))
    return out


def upper_envelope(y):
    """Tightest non-increasing upper bound: env[i] = max(y[i:])."""
    return np.maximum.accumulate(np.asarray(y)[::-1])[::-1]


def exp_envelope_fit(t, y, floor=1e-12):
    """Fit log(envelope(y)) = a + b t from the envelope peak until it hits ``floor``.

    Returns (rate b, R^2).  A negative rate means exponential decay.
    """
    t = np.asarray(t, float)
    env = upper_envelope(y)
    i0 = int(np.argmax(env))
    keep = np.arange(len(env)) >= i0
    keep &= env > floor
    if keep.sum() < 3:
        return math.nan, math.nan
    tt, ly = t[keep], np.log(env[keep])
    b, a = np.polyfit(tt, ly, 1)
    resid = ly - (a + b * tt)
    ss = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss if ss > 0 else math.nan
    return float(b), r2


def metrics(log: TelemetryLog, dt=None, steady_margin=2.0) -> MetricsSummary:
    """Aggregate a telemetry log.

    Per phase (head/middle/tail, from the nominal feasibility column):
    max |e_p|, max |pitch - pitch_r|, max |pitch_d - pitch_r|, and the
    pitch deviation restricted to the phase interior (``steady_margin``
    seconds trimmed at each internal boundary).
    """
    v = {}
    t = log["t"]
    if len(t) == 0:
        raise ValueError("empty telemetry log")
    if dt is None:
        dt = float(t[1] - t[0]) if len(t) > 1 else 0.0
    ep = log["ep_norm"]
    pitch_dev = np.abs(log["pitch"] - log["pitch_r"])
    dpitch_dev = np.abs(log["pitch_d"] - log["pitch_r"])
    lat = np.hypot(log["u1_x"], log["u1_y"])
    v["steps"] = len(t)
    v["t_end"] = float(t[-1])
    v["max_position_error"] = float(ep.max())
    v["max_pitch_dev_deg"] = float(pitch_dev.max())
    v["max_desired_pitch_dev_deg"] = float(dpitch_dev.max())
    v["max_lateral_force"] = float(lat.max())
    r = log["r_xy"]
    if np.isfinite(r).all():
        v["max_lateral_excess"] = float((lat - r).max())
    v["lateral_saturation_duty"] = float(log["sat_lateral"].mean())
    v["rotor_saturation_duty"] = float((log["sat_rotors"] > 0).mean())
    w = np.array([log[f"w{i}"] for i in range(1, 7)])
    v["rotor_speed_min"] = float(w.min())
    v["rotor_speed_max"] = float(w.max())
    v["infeasible_fraction"] = float(1.0 - log["feasible"].mean())
    off = np.flatnonzero(log["feasible_ref"] < 0.5)
    v["orientation_switch_time"] = float(t[off[-1]] + dt) if off.size else 0.0

    t0, t1 = float(t[0]), float(t[-1])
    for name, a, b in phases(log["feasible"], t):
        v[f"{name}.start"] = float(t[a])
        v[f"{name}.stop"] = float(t[b - 1] + dt)
        v[f"{name}.max_position_error"] = float(ep[a:b].max())
        v[f"{name}.max_pitch_dev_deg"] = float(pitch_dev[a:b].max())
        v[f"{name}.max_desired_pitch_dev_deg"] = float(dpitch_dev[a:b].max())
        lo = t[a] + (steady_margin if t[a] > t0 else 0.0)
        hi = t[b - 1] - (steady_margin if t[b - 1] < t1 else 0.0)
        inner = (t[a:b] >= lo) & (t[a:b] <= hi)
        if inner.any():
            v[f"{name}.steady_pitch_dev_deg"] = float(pitch_dev[a:b][inner].max())

    rate, r2 = exp_envelope_fit(t, ep)
    v["position_decay_rate"] = rate
    v["position_decay_r2"] = r2
    rate, r2 = exp_envelope_fit(t, log["d_R_Rd"])
    v["attitude_decay_rate"] = rate
    v["attitude_decay_r2"] = r2
    return MetricsSummary(v)


def write_outputs(result: SimulationResult, out_dir, name):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{name}.csv"
    result.log.to_csv(csv_path)
    metrics_path = out / f"{name}.metrics"
    metrics_path.write_text(result.metrics.to_text())
    return csv_path, metrics_path
