"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--model ur10e_like] [--repeat 5]

Each kernel runs on the same random inputs under both backends; the table
reports the best per-call time and the speedup. ``--plan`` also times one
planning run per backend in a fresh interpreter.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from hareplan import _fallback
from hareplan.kinematics import load_model

SSM = (0.1, 0.15, 1.6, 2.5)


def kernels(chain, m, rng):
    q = rng.uniform(m.q_min, m.q_max)
    q2 = rng.uniform(m.q_min, m.q_max)
    qd = rng.uniform(-m.qdot_max, m.qdot_max)
    hpos = rng.uniform(-1.0, 1.0, (14, 3))
    hvel = rng.normal(scale=0.3, size=(14, 3))
    sp = np.array([[0.6, 0.3, 0.4, 0.15]])
    bx = np.array([[0.3, -0.6, -0.05, 0.9, -0.2, 0.3]])
    cp = np.zeros((0, 7))
    return {
        "points": lambda: chain.points(q),
        "point_velocities": lambda: chain.point_velocities(q, qd),
        "lambda": lambda: chain.lam(q, qd, hpos, hvel, 0.1, 0, SSM, 1e3, True),
        "segment_lambda_mean(z=20)": lambda: chain.segment_lambda_mean(
            q, q2, qd, 20, hpos, hvel, 0.1, 0, SSM, 1e3),
        "clearances": lambda: chain.clearances(q, sp, bx, cp, hpos, 0.1),
        "segment_free(step=0.05)": lambda: chain.segment_free(
            q, q + 0.3, 0.05, sp, bx, cp, np.zeros((0, 3)), 0.1),
    }


def best_time(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


PLAN_SNIPPET = """
import time
from hareplan import BACKEND
from hareplan.executor import load_scenario, sample_human
from hareplan.cost import HampTime
from hareplan.planner import plan
sc = load_scenario("long")
h = sample_human(sc.script, 0.0, noise=False)
t = time.perf_counter()
plan(sc.model, sc.scene, h, sc.q_start, sc.q_goal,
     HampTime(mode=sc.ssm, clearance=sc.scene.human_clearance), 0.5, 0)
print(BACKEND, time.perf_counter() - t)
"""


def time_plan(pure):
    env = dict(os.environ)
    env.pop("HAREPLAN_PURE", None)
    if pure:
        env["HAREPLAN_PURE"] = "1"
    out = subprocess.run([sys.executable, "-c", PLAN_SNIPPET], env=env, check=True,
                         capture_output=True, text=True).stdout.split()
    return out[0], float(out[1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--model", default="ur10e_like")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--plan", action="store_true", help="also time a HAMP planning run")
    args = ap.parse_args(argv)

    try:
        from hareplan import _core
    except ImportError:
        print("compiled extension not built; only the fallback is available", file=sys.stderr)
        return 1
    m = load_model(args.model)
    fast = kernels(_core.Chain(*m.chain_args()), m, np.random.default_rng(args.seed))
    slow = kernels(_fallback.Chain(*m.chain_args()), m, np.random.default_rng(args.seed))
    print(f"model {args.model}  ({m.n} joints, {m.p} points)")
    print(f"{'kernel':28s} {'cython [us]':>12s} {'numpy [us]':>12s} {'speedup':>8s}")
    for name in fast:
        tf = best_time(fast[name], args.repeat)
        ts = best_time(slow[name], args.repeat)
        print(f"{name:28s} {tf * 1e6:12.2f} {ts * 1e6:12.2f} {ts / tf:8.1f}x")
    if args.plan:
        for pure in (False, True):
            backend, secs = time_plan(pure)
            print(f"HAMP plan, 750 iterations, {backend:7s} backend: {secs:.2f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
