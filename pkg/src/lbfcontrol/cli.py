"""Command line front end: ``lbf run|list|analyze|sweep|bench``.

Exit status: 0 when a run ends as expected (including an expected
divergence), 1 on a configuration error, 2 on an unexpected divergence.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .scenario import BUILTINS, load
from .simulation import DIVERGED, OK, run_scenario, write_outputs
from .trajectories import feasibility_report

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED = 0, 1, 2


def _out_dir(arg):
    return Path(arg or os.environ.get("LBF_OUT_DIR") or ".")


def _exit_code(sc, status):
    if status == OK and sc.expect == "ok":
        return EXIT_OK
    if status == DIVERGED and sc.expect == "diverged":
        return EXIT_OK
    return EXIT_DIVERGED


def cmd_run(args):
    sc = load(args.scenario, seed=args.seed)
    t0 = time.perf_counter()
    result = run_scenario(sc)
    elapsed = time.perf_counter() - t0
    csv_path, metrics_path = write_outputs(result, _out_dir(args.out), sc.name)
    line = f"{sc.name}: {result.status} ({len(result.log)} steps, {elapsed:.1f} s)"
    if result.message:
        line += f" {result.message}"
    print(line)
    print(f"wrote {csv_path} and {metrics_path}")
    return _exit_code(sc, result.status)


def cmd_list(args):
    for name in BUILTINS:
        print(name)
    return EXIT_OK


def cmd_analyze(args):
    sc = load(args.scenario, seed=args.seed)
    dt = args.dt or sc.dt
    rows = feasibility_report(sc.trajectory, sc.bound, sc.params, dt)
    out = sys.stdout
    out.write("t,feasible,margin\n")
    for r in rows[::max(1, args.every)]:
        out.write(f"{r.t:.6g},{int(r.feasible)},{r.margin:.6g}\n")
    bad = sum(not r.feasible for r in rows)
    print(f"# infeasible fraction = {bad / len(rows):.6g}", file=sys.stderr)
    return EXIT_OK


def _parse_range(text):
    try:
        a, b, n = text.split(":")
        return np.linspace(float(a), float(b), int(n))
    except ValueError as exc:
        raise ConfigError(f"--range expects a:b:n, got {text!r}") from exc


def _sweep_one(job):
    source, seed, param, value = job
    sc = load(source, seed=seed).with_overrides(**{param: value})
    result = run_scenario(sc)
    return value, result.status, result.metrics["max_position_error"]


def cmd_sweep(args):
    load(args.scenario, seed=args.seed)  # fail fast on a bad file
    values = [float(v) for v in _parse_range(args.range)]
    jobs = [(args.scenario, args.seed, args.param, v) for v in values]
    print(f"{args.param},status,max_position_error")
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        for value, status, ep in pool.map(_sweep_one, jobs):
            print(f"{value:.6g},{status},{ep:.6g}")
    return EXIT_OK


def cmd_bench(args):
    from .controller import control_step

    sc = load(args.scenario, seed=args.seed)
    pstate = sc.planner_state()
    state = sc.initial.copy()
    n = min(args.steps, sc.steps)
    samples = [sc.trajectory.sample(k * sc.dt) for k in range(n)]
    t0 = time.perf_counter()
    for k, ref in enumerate(samples):
        control_step(ref, state, sc.bound, sc.gains, sc.params, pstate, k * sc.dt)
    mean = (time.perf_counter() - t0) / n
    print(f"control_step mean over {n} steps: {mean * 1e6:.1f} us")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="lbf", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a scenario and write CSV + metrics")
    r.add_argument("scenario", help="built-in name or scenario file")
    r.add_argument("--out", help="output directory (default $LBF_OUT_DIR or .)")
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_run)

    sub.add_parser("list", help="list built-in scenarios").set_defaults(func=cmd_list)

    a = sub.add_parser("analyze", help="feasibility report of the reference")
    a.add_argument("scenario")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--dt", type=float, default=None)
    a.add_argument("--every", type=int, default=1, help="print every k-th row")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sweep", help="run a scenario over a range of one parameter")
    s.add_argument("scenario")
    s.add_argument("--param", required=True, help="dotted config key, e.g. bound.r_xy")
    s.add_argument("--range", required=True, help="a:b:n")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--jobs", type=int, default=None)
    s.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bench", help="time control_step on a scenario")
    b.add_argument("scenario", nargs="?", default="exp11")
    b.add_argument("--steps", type=int, default=20000)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
