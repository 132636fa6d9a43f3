"""Trajectory parametrization and simulated-clock episode execution.

One logical timeline interleaves three rate-scheduled tasks: trajectory
execution with runtime speed scaling, a collision-check task that refreshes
the human snapshot and path validity, and the replanner.
"""
from __future__ import annotations

import bisect
import csv
import dataclasses
import io
import json
import math
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .cost import HampTime, MarshaTime, PathLength, WeightedLength
from .kinematics import RobotModel, load_model
from .planner import PathP, plan, plan_path_set
from .replanner import Replanner, ReplanRequest, project_on_path
from .safety import SSMParams, execution_scale
from .world import (HumanScript, HumanState, Scene, check_config, check_connection,
                    sample_human, scene_from_dict, script_from_dict)

STRATEGIES = ("dSSM", "MARS+dSSM", "MARSHA+dSSM", "HAMP+dSSM", "MINLEN+dSSM", "MARSHA_LEN+dSSM")
# corner velocity jumps are limited to what the acceleration limit covers in this window
CORNER_WINDOW = 0.1  # s
PATH_NODE_SPACING = 0.3  # rad between waypoints of precomputed paths


# ------------------------------------------------------------ trajectory

@dataclass(frozen=True)
class _Segment:
    t0: float
    a: np.ndarray
    u: np.ndarray     # unit direction in joint space
    length: float
    v_in: float
    v_peak: float
    v_out: float
    acc: float
    t_acc: float
    t_cruise: float
    t_dec: float

    @property
    def duration(self) -> float:
        return self.t_acc + self.t_cruise + self.t_dec

    def state(self, t: float):
        """(arc position, path speed) at local time ``t``."""
        if t <= self.t_acc:
            return self.v_in * t + 0.5 * self.acc * t * t, self.v_in + self.acc * t
        s1 = self.v_in * self.t_acc + 0.5 * self.acc * self.t_acc ** 2
        t -= self.t_acc
        if t <= self.t_cruise:
            return s1 + self.v_peak * t, self.v_peak
        s2 = s1 + self.v_peak * self.t_cruise
        t = min(t - self.t_cruise, self.t_dec)
        return (min(s2 + self.v_peak * t - 0.5 * self.acc * t * t, self.length),
                max(self.v_peak - self.acc * t, 0.0))


def _profile(length, v_in, v_out, vmax, amax):
    if math.isinf(amax):
        return vmax, 0.0, length / vmax, 0.0
    v_peak = min(vmax, math.sqrt(max(amax * length + 0.5 * (v_in ** 2 + v_out ** 2), 0.0)))
    v_peak = max(v_peak, v_in, v_out)
    t_acc = (v_peak - v_in) / amax
    t_dec = (v_peak - v_out) / amax
    d_acc = (v_peak ** 2 - v_in ** 2) / (2 * amax)
    d_dec = (v_peak ** 2 - v_out ** 2) / (2 * amax)
    t_cruise = max(length - d_acc - d_dec, 0.0) / v_peak
    return v_peak, t_acc, t_cruise, t_dec


class Trajectory:
    """Synchronized trapezoidal joint motion along a path."""

    def __init__(self, path: PathP, segments, speed_fraction):
        self.path = path
        self.segments = segments
        self.speed_fraction = speed_fraction
        self._t0 = [s.t0 for s in segments]
        last = segments[-1]
        self.duration = last.t0 + last.duration

    def sample(self, t: float):
        """Position and velocity at trajectory time ``t`` (clamped)."""
        if t >= self.duration:
            return self.path.goal.copy(), np.zeros_like(self.path.goal), len(self.segments) - 1
        t = max(t, 0.0)
        i = bisect.bisect_right(self._t0, t) - 1
        seg = self.segments[i]
        s, v = seg.state(t - seg.t0)
        return seg.a + s * seg.u, v * seg.u, i


def parametrize(model: RobotModel, path: PathP, speed_fraction: float = 1.0,
                v0: float = 0.0) -> Trajectory:
    """Time law along ``path``: per-connection trapezoid (triangle when short).

    Path speed is zero at waypoints where any joint reverses direction;
    elsewhere it is bounded by the per-joint velocity jump the acceleration
    limit absorbs in ``CORNER_WINDOW``. ``v0`` is the initial path speed.
    """
    if not 0.0 < speed_fraction <= 1.0:
        raise ValueError("speed_fraction must be in (0, 1]")
    w = path.waypoints
    d = np.diff(w, axis=0)
    L = np.linalg.norm(d, axis=1)
    if np.any(L <= 0):
        raise ValueError("degenerate path")
    U = d / L[:, None]
    k = len(L)
    V = np.empty(k)
    A = np.empty(k)
    for i in range(k):
        nz = U[i] != 0
        V[i] = speed_fraction * np.min(model.qdot_max[nz] / np.abs(U[i][nz]))
        A[i] = np.min(model.qddot_max[nz] / np.abs(U[i][nz]))
    # junction speed limits
    vj = np.zeros(k + 1)
    vj[0] = min(v0, V[0])
    for j in range(1, k):
        if np.any(d[j - 1] * d[j] < 0):
            vj[j] = 0.0
            continue
        jump = np.abs(U[j] - U[j - 1])
        lim = min(V[j - 1], V[j])
        nz = jump > 1e-12
        if np.any(nz):
            lim = min(lim, float(np.min(model.qddot_max[nz] * CORNER_WINDOW / jump[nz])))
        vj[j] = lim
    # forward / backward reachability passes
    for i in range(k):
        vj[i + 1] = min(vj[i + 1], math.sqrt(vj[i] ** 2 + 2 * A[i] * L[i]))
    for i in range(k - 1, -1, -1):
        vj[i] = min(vj[i], math.sqrt(vj[i + 1] ** 2 + 2 * A[i] * L[i]))
    segs = []
    t = 0.0
    for i in range(k):
        v_peak, ta, tc, td = _profile(L[i], vj[i], vj[i + 1], V[i], A[i])
        segs.append(_Segment(t, w[i], U[i], float(L[i]), float(vj[i]), float(v_peak),
                             float(vj[i + 1]), float(A[i]), ta, tc, td))
        t += ta + tc + td
    return Trajectory(path, segs, speed_fraction)


# -------------------------------------------------------------- scenarios

@dataclass(frozen=True, eq=False)
class PathSetConfig:
    count: int = 3
    budget: float = 1.0
    seed: int = 100
    human_time: float | None = None  # snapshot time used to shape alternatives


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    model: RobotModel
    q_start: np.ndarray
    q_goal: np.ndarray
    scene: Scene
    script: HumanScript
    ssm: SSMParams = SSMParams()
    plan_budget: float = 2.0
    plan_seed: int = 7
    path_set: PathSetConfig = PathSetConfig()
    timing_jitter: float = 0.0
    timeout_factor: float = 6.0
    source: dict = field(default_factory=dict)

    def with_ssm(self, ssm: SSMParams) -> "Scenario":
        return dataclasses.replace(self, ssm=ssm)


def scenario_from_dict(data: dict) -> Scenario:
    model = load_model(data.get("robot", "ur10e_like"))
    q_start = model.check_q(np.array(data["q_start"], dtype=np.float64))
    q_goal = model.check_q(np.array(data["q_goal"], dtype=np.float64))
    scene = scene_from_dict(data.get("scene", {}))
    script = script_from_dict(data.get("human", {}))
    ssm = SSMParams(**data.get("ssm", {}))
    pl = data.get("plan", {})
    ps = PathSetConfig(**pl.get("path_set", {}))
    return Scenario(data.get("name", "scenario"), model, q_start, q_goal, scene, script, ssm,
                    float(pl.get("budget", 2.0)), int(pl.get("seed", 7)), ps,
                    float(data.get("timing_jitter", 0.0)), float(data.get("timeout_factor", 6.0)),
                    data)


def validate_scenario(sc: Scenario) -> list:
    """Human-readable problems; empty when the scenario is usable."""
    problems = []
    for name, q in (("q_start", sc.q_start), ("q_goal", sc.q_goal)):
        if not sc.model.within_limits(q):
            problems.append(f"{name} violates joint limits")
        elif not check_config(sc.model, q, None, sc.scene):
            problems.append(f"{name} collides with the static scene")
    if np.array_equal(sc.q_start, sc.q_goal):
        problems.append("q_start equals q_goal")
    try:
        h0 = sample_human(sc.script, 0.0, noise=False)
        if not check_config(sc.model, sc.q_start, h0, sc.scene):
            problems.append("q_start collides with the human at t=0")
    except ValueError as exc:
        problems.append(str(exc))
    return problems


def load_scenario(source) -> Scenario:
    """Load from a JSON path or the name of a bundled scenario."""
    path = Path(str(source))
    if path.suffix == ".json" and path.exists():
        data = json.loads(path.read_text())
    else:
        ref = resources.files("hareplan") / "data" / "scenarios" / f"{source}.json"
        if not ref.is_file():
            raise FileNotFoundError(f"unknown scenario {source!r}")
        data = json.loads(ref.read_text())
    return scenario_from_dict(data)


def bundled_scenarios() -> list:
    base = resources.files("hareplan") / "data" / "scenarios"
    return sorted(p.name[:-5] for p in base.iterdir() if p.name.endswith(".json"))


def load_ssm_sets() -> list:
    """The 16 bundled SSM parameter sets, in table order."""
    ref = resources.files("hareplan") / "data" / "ssm_sets.json"
    rows = json.loads(ref.read_text())
    return [SSMParams(C=r["C"], T_r=r["T_r"], v_h=r["v_h"], a_s=r["a_s"]) for r in rows]


# ---------------------------------------------------------- path caching

_PATH_CACHE: dict = {}


def speed_model(model: RobotModel, speed_fraction: float) -> RobotModel:
    if speed_fraction == 1.0:
        return model
    return dataclasses.replace(model, qdot_max=model.qdot_max * speed_fraction)


def _cache_key(sc: Scenario, what: str, speed_fraction: float):
    return (sc.name, json.dumps(sc.source, sort_keys=True), what, sc.ssm, speed_fraction)


def scenario_paths(sc: Scenario, speed_fraction: float = 1.0) -> dict:
    """Initial paths and path set of a scenario, planned once and cached.

    Planning uses the scenario's plan seed and the noise-free human at
    t = 0, so every episode of a scenario starts from the same paths.
    """
    key = _cache_key(sc, "paths", speed_fraction)
    hit = _PATH_CACHE.get(key)
    if hit is not None:
        return hit
    model = speed_model(sc.model, speed_fraction)
    h0 = sample_human(sc.script, 0.0, noise=False)
    clr = sc.scene.human_clearance
    res_len = plan(model, sc.scene, h0, sc.q_start, sc.q_goal, PathLength(), sc.plan_budget,
                   sc.plan_seed)
    if not res_len.solved:
        raise RuntimeError(f"scenario {sc.name}: no minimum-length path")
    hamp_cm = HampTime(mode=sc.ssm, clearance=clr)
    res_hamp = plan(model, sc.scene, h0, sc.q_start, sc.q_goal, hamp_cm, sc.plan_budget,
                    sc.plan_seed)
    if not res_hamp.solved:
        raise RuntimeError(f"scenario {sc.name}: no HAMP path")
    ps = sc.path_set
    extra = []
    if ps.count > 1:
        if ps.human_time is not None:
            hs = sample_human(sc.script, ps.human_time, noise=False)
            cm = MarshaTime(mode=sc.ssm, clearance=clr)
        else:
            hs, cm = h0, WeightedLength()
        extra, _ = plan_path_set(model, sc.scene, hs, sc.q_start, sc.q_goal, ps.count - 1,
                                 ps.budget, ps.seed, cm)
    # dense waypoints give the replanner many switch points along each path
    dense = PATH_NODE_SPACING
    out = {"minlen": res_len.path.densified(dense).replace(meta={"role": "minlen"}),
           "hamp": res_hamp.path.densified(dense).replace(meta={"role": "hamp"}),
           "set": [res_len.path.densified(dense).replace(meta={"role": "set", "index": 0})]
           + [p.densified(dense).replace(meta={"role": "set", "index": i + 1})
              for i, p in enumerate(extra)]}
    _PATH_CACHE[key] = out
    return out


# --------------------------------------------------------------- episodes

@dataclass(frozen=True)
class Rates:
    exec_hz: float = 500.0
    check_hz: float = 25.0
    replan_hz: float = 5.0
    budget: float = 0.2  # s per replan call

    def __post_init__(self):
        if min(self.exec_hz, self.check_hz, self.replan_hz, self.budget) <= 0:
            raise ValueError("rates and budget must be positive")
        if not self.exec_hz >= self.check_hz >= self.replan_hz:
            raise ValueError("need exec_hz >= check_hz >= replan_hz")


@dataclass(frozen=True, eq=False)
class EpisodeConfig:
    scenario: Scenario
    strategy: str
    rates: Rates = Rates()
    speed_fraction: float = 1.0
    seed: int = 0
    human: bool = True          # False: run without the mannequin
    replan_iterations: int | None = None
    trace: bool = False
    wall_clock: bool = False    # real-time pacing with replans on a worker thread

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; choose from {STRATEGIES}")
        if not 0.0 < self.speed_fraction <= 1.0:
            raise ValueError("speed_fraction must be in (0, 1]")


@dataclass
class EpisodeMetrics:
    exec_time: float
    nominal_time: float
    exec_time_norm: float
    avg_scaling: float
    replan_calls: int
    replan_adoptions: int
    min_separation_observed: float
    completed: bool
    max_closing_excess: float     # max over ticks of closing speed - v_max
    stop_violations: int          # ticks moving while a closing pair is inside C
    acceptance_violations: int
    lazy_violations: int
    replan_elapsed: list = field(default_factory=list)
    trace: list = field(default_factory=list)


def _strategy_setup(strategy):
    """(initial path role, replanning cost name or None)."""
    return {
        "dSSM": ("minlen", None),
        "MINLEN+dSSM": ("minlen", None),
        "HAMP+dSSM": ("hamp", None),
        "MARS+dSSM": ("minlen", "weighted"),
        "MARSHA+dSSM": ("hamp", "marsha"),
        "MARSHA_LEN+dSSM": ("minlen", "marsha"),
    }[strategy]


def _episode_script(sc: Scenario, seed: int) -> HumanScript:
    script = sc.script.with_seed(seed)
    if sc.timing_jitter > 0:
        rng = np.random.default_rng([seed, 7919])
        shift = float(rng.uniform(-sc.timing_jitter, sc.timing_jitter))
        shift = round(shift, 3)
        script = script.shifted(shift)
    return script


def _pair_safety(model, q, qdot, human, ssm, clearance):
    """Per-pair robot closing speed, separation and SSM limit."""
    pos, vel = model.chain.point_velocities(q, qdot)
    diff = human.positions[None, :, :] - pos[:, None, :]
    d = np.sqrt(np.sum(diff * diff, axis=2))
    u = diff / np.maximum(d, 1e-300)[:, :, None]
    closing = np.einsum("jc,jkc->jk", vel, u)
    S = d - clearance
    rad = ssm.v_h ** 2 + (ssm.a_s * ssm.T_r) ** 2 - 2 * ssm.a_s * (ssm.C - S)
    vmax = np.maximum(np.sqrt(np.maximum(rad, 0.0)) - ssm.a_s * ssm.T_r - ssm.v_h, 0.0)
    return closing, S, vmax


def run_episode(cfg: EpisodeConfig) -> EpisodeMetrics:
    sc = cfg.scenario
    role, replan_cost = _strategy_setup(cfg.strategy)
    paths = scenario_paths(sc, cfg.speed_fraction)
    cost_model = speed_model(sc.model, cfg.speed_fraction)
    model = sc.model
    clr = sc.scene.human_clearance
    script = _episode_script(sc, cfg.seed) if cfg.human else HumanScript(())
    if not check_config(model, sc.q_start, sample_human(script, 0.0, noise=False), sc.scene):
        raise ValueError("start configuration is infeasible")

    current = paths[role]
    path_set = list(paths["set"])
    traj = parametrize(model, current, cfg.speed_fraction)
    nominal = parametrize(model, paths["minlen"], cfg.speed_fraction).duration

    replanner = None
    cm = None
    if replan_cost is not None:
        cm = (WeightedLength() if replan_cost == "weighted"
              else MarshaTime(mode=sc.ssm, clearance=clr))
        replanner = Replanner(cost_model, sc.scene)

    dt = 1.0 / cfg.rates.exec_hz
    check_every = max(1, int(round(cfg.rates.exec_hz / cfg.rates.check_hz)))
    replan_every = max(1, int(round(cfg.rates.exec_hz / cfg.rates.replan_hz)))
    max_ticks = int(math.ceil(sc.timeout_factor * nominal / dt))

    tau = 0.0
    snapshot = sample_human(script, 0.0)
    last_proj = None
    scale_sum = 0.0
    ticks = 0
    calls = adoptions = acc_viol = lazy_viol = stop_viol = 0
    max_excess = -math.inf
    min_sep = math.inf
    elapsed = []
    trace = []
    completed = False
    call_seed = np.random.SeedSequence([cfg.seed, 104729])

    pool = None
    pending = None
    if cfg.wall_clock and replanner is not None:
        from concurrent.futures import ThreadPoolExecutor

        pool = ThreadPoolExecutor(1)
    wall0 = time.perf_counter()

    for tick in range(max_ticks):
        t = tick * dt
        if cfg.wall_clock:
            lag = wall0 + t - time.perf_counter()
            if lag > 0:
                time.sleep(lag)
        q, qdot_nom, seg = traj.sample(tau)
        if tau >= traj.duration:
            completed = True
            break

        if replanner is not None and tick % check_every == 0:
            # collision-check task: fresh human snapshot, revalidate paths
            snapshot = sample_human(script, t)
            path_set = [_revalidate(model, p, snapshot, sc.scene) for p in path_set]

        if pending is not None and pending[0].done():
            fut, req = pending
            pending = None
            res = fut.result()
            calls, adoptions, acc_viol, lazy_viol = _account(
                res, elapsed, calls, adoptions, acc_viol, lazy_viol)
            if res.solved and res.cost < res.current_cost:
                new_path = _rejoin(model, res.path, q, snapshot, sc.scene)
                if new_path is not None:
                    traj = parametrize(model, new_path, cfg.speed_fraction,
                                       v0=float(np.linalg.norm(qdot_nom)))
                    last_proj = None
                    tau = 0.0
                    q, qdot_nom, seg = traj.sample(0.0)

        if replanner is not None and tick % replan_every == 0 and tick > 0 and pending is None:
            proj = project_on_path(q, traj.path, last_proj)
            last_proj = proj
            if not np.allclose(proj.q, traj.path.goal):
                seed = int(call_seed.spawn(1)[0].generate_state(1)[0])
                req = ReplanRequest(traj.path, proj.q, path_set, snapshot, cfg.rates.budget, cm,
                                    seed, proj.seg, cfg.replan_iterations)
                if pool is not None:
                    pending = (pool.submit(replanner.replan, req), req)
                else:
                    res = replanner.replan(req)
                    calls, adoptions, acc_viol, lazy_viol = _account(
                        res, elapsed, calls, adoptions, acc_viol, lazy_viol)
                    if res.solved and res.cost < res.current_cost:
                        new_path = res.path
                        if not np.array_equal(new_path.waypoints[0], q):
                            new_path = _prepend(new_path, q)
                        traj = parametrize(model, new_path, cfg.speed_fraction,
                                           v0=float(np.linalg.norm(qdot_nom)))
                        last_proj = None
                        tau = 0.0
                        q, qdot_nom, seg = traj.sample(0.0)

        # execution task: speed scaling with the live (noisy) human sample
        human = sample_human(script, t)
        if human.m:
            scale = execution_scale(model, q, qdot_nom, human, sc.ssm, clr)
            closing, S, vmax = _pair_safety(model, q, qdot_nom, human, sc.ssm, clr)
            actual = scale * closing
            excess = float(np.max(actual - vmax))
            max_excess = max(max_excess, excess)
            if scale > 0 and np.any((S <= sc.ssm.C) & (closing > 0)):
                stop_viol += 1
            min_sep = min(min_sep, float(np.min(S)))
        else:
            scale = 1.0
        scale_sum += 100.0 * scale
        ticks += 1
        if cfg.trace and tick % 10 == 0:
            trace.append((round(t, 6), scale, min_sep if human.m else math.inf, *q))
        tau += scale * dt

    if pool is not None:
        pool.shutdown(wait=True)
    exec_time = ticks * dt
    return EpisodeMetrics(
        exec_time=exec_time,
        nominal_time=nominal,
        exec_time_norm=exec_time / nominal,
        avg_scaling=scale_sum / max(ticks, 1),
        replan_calls=calls,
        replan_adoptions=adoptions,
        min_separation_observed=min_sep,
        completed=completed,
        max_closing_excess=max_excess if math.isfinite(max_excess) else 0.0,
        stop_violations=stop_viol,
        acceptance_violations=acc_viol,
        lazy_violations=lazy_viol,
        replan_elapsed=elapsed,
        trace=trace,
    )


def _account(res, elapsed, calls, adoptions, acc_viol, lazy_viol):
    """Update the replan counters with one call result."""
    elapsed.append(res.elapsed)
    calls += 1
    if res.evaluations > res.chain_connections:
        lazy_viol += 1
    if res.solved:
        if res.cost < res.current_cost:
            adoptions += 1
        else:
            acc_viol += 1
    return calls, adoptions, acc_viol, lazy_viol


def _rejoin(model, path: PathP, q, human, scene) -> PathP | None:
    """Continue on ``path`` from where the robot is now, if that link is free."""
    proj = project_on_path(q, path)
    try:
        tail = path.tail_from(proj.seg, proj.q)
    except ValueError:  # already at the goal
        return None
    if np.array_equal(tail.waypoints[0], q):
        return tail
    if not check_connection(model, q, tail.waypoints[0], human, scene):
        return None
    return _prepend(tail, q)


def _revalidate(model, path: PathP, human: HumanState, scene: Scene) -> PathP:
    w = path.waypoints
    valid = [check_connection(model, a, b, human, scene) for a, b in zip(w[:-1], w[1:])]
    return path.replace(valid=valid)


def _prepend(path: PathP, q) -> PathP:
    w = np.vstack([q, path.waypoints])
    return PathP(w, np.concatenate([[np.nan], path.costs]), np.concatenate([[True], path.valid]),
                 np.concatenate([[0], path.order]), dict(path.meta))


# -------------------------------------------------------------- benchmark

CSV_FIELDS = ("scenario", "strategy", "speed_fraction", "ssm_set", "seed", "exec_time_norm",
              "avg_scaling", "replan_calls", "replan_adoptions", "min_separation_observed",
              "completed", "max_closing_excess", "stop_violations", "acceptance_violations",
              "lazy_violations", "error")


def metrics_row(cfg: EpisodeConfig, m: EpisodeMetrics | None, ssm_set="", error="") -> dict:
    row = {"scenario": cfg.scenario.name, "strategy": cfg.strategy,
           "speed_fraction": f"{cfg.speed_fraction:g}", "ssm_set": ssm_set, "seed": cfg.seed}
    if m is None:
        row.update({k: "" for k in CSV_FIELDS if k not in row})
        row["error"] = error
        return row
    row.update({
        "exec_time_norm": f"{m.exec_time_norm:.6f}",
        "avg_scaling": f"{m.avg_scaling:.4f}",
        "replan_calls": m.replan_calls,
        "replan_adoptions": m.replan_adoptions,
        "min_separation_observed": ("inf" if math.isinf(m.min_separation_observed)
                                    else f"{m.min_separation_observed:.5f}"),
        "completed": int(m.completed),
        "max_closing_excess": f"{m.max_closing_excess:.3e}",
        "stop_violations": m.stop_violations,
        "acceptance_violations": m.acceptance_violations,
        "lazy_violations": m.lazy_violations,
        "error": error,
    })
    return row


def _run_one(args):
    cfg, ssm_set = args
    try:
        m = run_episode(cfg)
        return metrics_row(cfg, m, ssm_set), m
    except Exception as exc:  # one bad row must not abort a suite
        return metrics_row(cfg, None, ssm_set, f"{type(exc).__name__}: {exc}"), None


def run_benchmark(suite, repetitions: int = 1, base_seed: int = 0, parallel: int = 1,
                  ssm_labels=None):
    """Run every config ``repetitions`` times with seeds base_seed..base_seed+reps-1.

    Returns ``(rows, metrics)`` ordered by suite position, then seed,
    regardless of completion order.
    """
    suite = list(suite)
    if not suite:
        raise ValueError("suite is empty")
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    labels = ssm_labels or [""] * len(suite)
    jobs = []
    for cfg, label in zip(suite, labels):
        for r in range(repetitions):
            jobs.append((dataclasses.replace(cfg, seed=base_seed + r), label))
    if parallel > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(parallel) as ex:
            out = list(ex.map(_run_one, jobs))
    else:
        out = [_run_one(j) for j in jobs]
    return [o[0] for o in out], [o[1] for o in out]


def write_csv(rows, path=None) -> str:
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow(r)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def sweep_suite(sc: Scenario, strategies, speed_fraction=1.0, rates=Rates()):
    """Configs over the 16 bundled SSM sets; returns (configs, labels)."""
    cfgs, labels = [], []
    for k, ssm in enumerate(load_ssm_sets(), start=1):
        for st in strategies:
            cfgs.append(EpisodeConfig(sc.with_ssm(ssm), st, rates, speed_fraction))
            labels.append(str(k))
    return cfgs, labels
