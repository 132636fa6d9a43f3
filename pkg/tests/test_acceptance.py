"""Acceptance suite: one pass/fail line per criterion.

The benchmark fixtures are session scoped; criteria 6 and 8 reuse every
episode run for criteria 1, 2, 3 and 10. Expect tens of minutes on one core.
"""
import math

import numpy as np
import pytest

from hareplan import executor as ex
from hareplan.cli import load_suite
from hareplan.cost import HampTime, MarshaTime, connection_cost
from hareplan.kinematics import load_model, point_jacobian
from hareplan.safety import PFLParams, SSMParams
from hareplan.sampling import InformedSet, heuristic_many, sample_informed
from hareplan.world import HumanState

from conftest import ACCEPTANCE_LINES
from oracles import admissibility_violations, fd_jacobian, pruning_violations

pytestmark = pytest.mark.slow

SWEEP_REPS = 5
PERMISSIVE = SSMParams(C=0.10, T_r=0.15, v_h=0.0, a_s=2.50)
CONSERVATIVE = SSMParams(C=0.30, T_r=0.30, v_h=1.6, a_s=0.10)


def report(number, title, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {number:>2} {title}: {detail}")
    assert ok, detail


def suite_configs(name):
    s = load_suite(name)
    cfgs = []
    for ref in s["scenarios"]:
        sc = ex.load_scenario(ref)
        for f in s.get("speed_fractions", [1.0]):
            for st in s["strategies"]:
                cfgs.append(ex.EpisodeConfig(sc, st, speed_fraction=float(f)))
    return cfgs, int(s["repetitions"]), int(s.get("seed", 0))


def run_suite(name):
    cfgs, reps, seed = suite_configs(name)
    rows, metrics = ex.run_benchmark(cfgs, reps, seed)
    assert not any(r["error"] for r in rows), [r["error"] for r in rows if r["error"]]
    return rows, metrics


def means(rows, metric="exec_time_norm", **match):
    out = {}
    for r in rows:
        if all(str(r[k]) == str(v) for k, v in match.items()):
            out.setdefault(r["strategy"], []).append(float(r[metric]))
    return {k: float(np.mean(v)) for k, v in out.items()}


@pytest.fixture(scope="session")
def long_bench():
    return run_suite("long")


@pytest.fixture(scope="session")
def speed_bench():
    return run_suite("speed")


@pytest.fixture(scope="session")
def proactive_bench():
    return run_suite("proactive")


@pytest.fixture(scope="session")
def sweep_bench():
    sc = ex.load_scenario("sweep")
    cfgs, labels = ex.sweep_suite(sc, ["dSSM", "MARSHA+dSSM"])
    rows, metrics = ex.run_benchmark(cfgs, SWEEP_REPS, 0, ssm_labels=labels)
    assert not any(r["error"] for r in rows)
    return rows, metrics


# ------------------------------------------------------------ benchmarks

def test_c01_long_interaction(long_bench):
    rows, _ = long_bench
    t = means(rows)
    s = means(rows, "avg_scaling")
    ma, d, mr = t["MARSHA+dSSM"], t["dSSM"], t["MARS+dSSM"]
    ok = (ma <= 0.7 * d and ma <= 0.85 * mr
          and s["MARSHA+dSSM"] > s["dSSM"] and s["MARSHA+dSSM"] > s["MARS+dSSM"])
    report(1, "long interaction", ok,
           f"exec_time_norm MARSHA {ma:.3f} dSSM {d:.3f} MARS {mr:.3f} "
           f"(ratios {ma / d:.3f} <= 0.70, {ma / mr:.3f} <= 0.85); avg_scaling MARSHA "
           f"{s['MARSHA+dSSM']:.1f} dSSM {s['dSSM']:.1f} MARS {s['MARS+dSSM']:.1f}")


def test_c02_speed_fraction_trend(speed_bench):
    rows, _ = speed_bench
    gaps = {}
    for f in ("0.3", "0.6", "1"):
        t = means(rows, speed_fraction=f)
        gaps[f] = t["dSSM"] - t["MARSHA+dSSM"]
    ok = gaps["0.3"] <= gaps["0.6"] <= gaps["1"]
    report(2, "speed-fraction trend", ok,
           "gap dSSM-MARSHA " + ", ".join(f"v={k}: {v:.3f}" for k, v in gaps.items()))


def test_c03_proactive(proactive_bench):
    rows, _ = proactive_bench
    t = means(rows)
    ml, mh, base = t["MARSHA_LEN+dSSM"], t["MARSHA+dSSM"], t["MINLEN+dSSM"]
    ok = abs(ml - mh) <= 0.15 * mh and ml <= 0.75 * base and mh <= 0.75 * base
    report(3, "proactive", ok,
           f"MARSHA_LEN {ml:.3f} MARSHA {mh:.3f} (diff {abs(ml - mh) / mh:.1%} <= 15%); "
           f"MINLEN {base:.3f} (ratios {ml / base:.3f}, {mh / base:.3f} <= 0.75)")


def test_c10_ssm_sweep(sweep_bench):
    rows, _ = sweep_bench
    sets = ex.load_ssm_sets()
    impr, ratio = {}, {}
    for k in range(1, len(sets) + 1):
        t = means(rows, ssm_set=k)
        impr[k] = t["dSSM"] - t["MARSHA+dSSM"]
        ratio[k] = t["MARSHA+dSSM"] / t["dSSM"]
    perm = [k for k, s in enumerate(sets, 1) if s == PERMISSIVE]
    cons = [k for k, s in enumerate(sets, 1) if s == CONSERVATIVE]
    assert perm and cons
    ip = np.mean([impr[k] for k in perm])
    ic = np.mean([impr[k] for k in cons])
    worst = max(ratio, key=ratio.get)
    ok = ic < ip and ratio[worst] <= 1.05
    report(10, "SSM sweep", ok,
           f"improvement permissive {ip:.3f} > conservative {ic:.3f}; worst MARSHA/dSSM "
           f"{ratio[worst]:.3f} on set {worst} (<= 1.05); {SWEEP_REPS} reps per set")


# ---------------------------------------------------------------- suites

def test_c04_marsha_dominates_hamp():
    model = load_model("ur10e_like")
    r = np.random.default_rng(4)
    bad = 0
    for i in range(1000):
        a = r.uniform(model.q_min, model.q_max)
        b = np.clip(a + r.normal(scale=0.6, size=model.n), model.q_min, model.q_max)
        k = int(r.integers(1, 7))
        h = HumanState(0.0, r.uniform(-1.3, 1.3, (k, 3)), r.normal(scale=0.5, size=(k, 3)))
        mode = PFLParams(140.0, 75000.0, 10.0, 4.0) if i % 2 else SSMParams()
        m = connection_cost(model, a, b, h, MarshaTime(mode=mode, clearance=0.1))
        hp = connection_cost(model, a, b, h, HampTime(mode=mode, clearance=0.1))
        bad += m < hp * (1 - 1e-12)
    report(4, "MarshaTime >= HampTime", bad == 0, f"{bad} violations in 1000 instances")


def test_c05_informed_set():
    r = np.random.default_rng(5)
    s = InformedSet(np.zeros(6), np.ones(6), 4.0, np.linspace(0.4, 1.2, 6))
    Q = sample_informed(s, r, 100_000)
    outside = int(np.sum(heuristic_many(Q, s) >= s.c_best))
    adm = admissibility_violations(r, 1000)
    grid = pruning_violations()
    report(5, "informed set", outside == 0 and adm == 0 and grid == 0,
           f"{outside} of 100000 samples outside; {adm} admissibility violations in 1000 "
           f"paths; {grid} grid pruning violations")


def test_c07_jacobian():
    r = np.random.default_rng(7)
    worst = 0.0
    for name in ("planar2", "ur10e_like"):
        model = load_model(name)
        for _ in range(1000):
            q = r.uniform(model.q_min, model.q_max)
            for k in range(model.p):
                err = np.max(np.abs(point_jacobian(model, q, k) - fd_jacobian(model, q, k)))
                worst = max(worst, err)
    report(7, "Jacobian vs finite differences", worst <= 1e-5,
           f"max abs error {worst:.2e} over 1000 configurations per model")


# ------------------------------------------------- all-episode contracts

def all_metrics(*benches):
    return [m for _, ms in benches for m in ms]


def test_c06_safety(long_bench, speed_bench, proactive_bench, sweep_bench):
    ms = all_metrics(long_bench, speed_bench, proactive_bench, sweep_bench)
    excess = max(m.max_closing_excess for m in ms)
    stops = sum(m.stop_violations for m in ms)
    report(6, "safety", excess <= 1e-6 and stops == 0,
           f"max closing speed - v_max {excess:.2e} m/s (<= 1e-6); {stops} ticks moving "
           f"inside C; {len(ms)} episodes")


def test_c08_replanner_contracts(long_bench, speed_bench, proactive_bench, sweep_bench):
    ms = all_metrics(long_bench, speed_bench, proactive_bench, sweep_bench)
    adoptions = sum(m.replan_adoptions for m in ms)
    acc = sum(m.acceptance_violations for m in ms)
    lazy = sum(m.lazy_violations for m in ms)
    el = np.array([e for m in ms for e in m.replan_elapsed])
    within = float(np.mean(el <= 0.240)) if len(el) else 1.0
    ok = acc == 0 and lazy == 0 and within >= 0.95
    report(8, "replanner contracts", ok,
           f"{acc} acceptance violations over {adoptions} adoptions; {lazy} lazy violations; "
           f"{within:.1%} of {len(el)} calls <= 240 ms (p95 {np.percentile(el, 95) * 1e3:.1f} "
           f"ms)")


def test_c09_determinism(long_bench):
    rows, _ = long_bench
    again, _ = run_suite("long")
    a, b = ex.write_csv(rows), ex.write_csv(again)
    report(9, "determinism", a == b,
           f"long benchmark rerun: {len(again)} rows, CSV bytes "
           f"{'identical' if a == b else 'differ'}")
