"""Command-line front end.

    hareplan plan --scenario long --cost hamp --out path.json
    hareplan replay --scenario long --strategy MARSHA+dSSM --seed 3
    hareplan bench long --reps 20
    hareplan sweep --reps 5
    hareplan validate long short

Exit codes: 0 success, 1 usage error, 2 no solution, 3 episode failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .cost import cost_from_dict
from .executor import (STRATEGIES, EpisodeConfig, Rates, bundled_scenarios, load_scenario,
                       metrics_row, run_benchmark, run_episode, speed_model, sweep_suite,
                       validate_scenario, write_csv)
from .planner import plan
from .world import check_config, sample_human

EXIT_OK, EXIT_USAGE, EXIT_NO_SOLUTION, EXIT_EPISODE = 0, 1, 2, 3
OUT_ENV = "HAREPLAN_OUT"
DEFAULT_REPS = 20


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    scenarios: list
    strategies: list
    repetitions: int
    seeds: list
    out: str
    engine: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.engine:
            self.engine = engine_hash()

    def write(self, directory: Path) -> Path:
        path = Path(directory) / "manifest.json"
        path.write_text(json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n")
        return path


def engine_hash() -> str:
    """Version plus a digest of the package sources."""
    h = hashlib.sha256(__version__.encode())
    base = resources.files("hareplan")
    for name in sorted(p.name for p in base.iterdir()):
        if name.endswith((".py", ".pyx")):
            h.update(name.encode())
            h.update((base / name).read_bytes())
    return f"{__version__}+{h.hexdigest()[:12]}"


# ---------------------------------------------------------------- parsing

def _scenario(ref):
    try:
        sc = load_scenario(ref)
    except FileNotFoundError:
        raise UsageError(f"unknown scenario {ref!r}; bundled: {', '.join(bundled_scenarios())}")
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"scenario {ref!r} is malformed: {exc}")
    problems = validate_scenario(sc)
    if problems:
        raise UsageError(f"scenario {ref!r}: " + "; ".join(problems))
    return sc


def _strategies(text):
    names = [s.strip() for s in text.split(",") if s.strip()]
    aliases = {s.split("+")[0].lower(): s for s in STRATEGIES}
    out = []
    for n in names:
        s = n if n in STRATEGIES else aliases.get(n.lower())
        if s is None:
            raise UsageError(f"unknown strategy {n!r}; choose from {', '.join(STRATEGIES)}")
        out.append(s)
    if not out:
        raise UsageError("no strategy given")
    return out


def _rates(text, budget_ms):
    r = Rates()
    if text:
        try:
            hz = [float(x) for x in text.split(",")]
        except ValueError:
            raise UsageError("--rates expects EXEC,CHECK,REPLAN in Hz, e.g. 500,25,5")
        if len(hz) != 3:
            raise UsageError("--rates expects three values: EXEC,CHECK,REPLAN")
        try:
            r = Rates(*hz, budget=r.budget)
        except ValueError as exc:
            raise UsageError(f"--rates: {exc}")
    if budget_ms is not None:
        if budget_ms <= 0:
            raise UsageError("--budget-ms must be positive")
        r = dataclasses.replace(r, budget=budget_ms / 1000.0)
    return r


def _speed(v):
    if not 0.0 < v <= 1.0:
        raise UsageError("--speed-fraction must be in (0, 1]")
    return v


def _reps(v):
    if v is None:
        return None
    if v < 1:
        raise UsageError("--reps must be at least 1")
    return v


def _out_dir(args, default_name):
    base = args.out or os.environ.get(OUT_ENV) or "runs"
    path = Path(base) if args.out else Path(base) / default_name
    path.mkdir(parents=True, exist_ok=True)
    return path


def load_suite(ref) -> dict:
    """A suite file or the name of a bundled suite."""
    path = Path(str(ref))
    if path.suffix == ".json" and path.exists():
        data = json.loads(path.read_text())
    else:
        res = resources.files("hareplan") / "data" / "suites" / f"{ref}.json"
        if not res.is_file():
            raise UsageError(f"unknown suite {ref!r}; bundled: {', '.join(bundled_suites())}")
        data = json.loads(res.read_text())
    for key in ("scenarios", "strategies"):
        if not data.get(key):
            raise UsageError(f"suite {ref!r} needs a non-empty {key!r} list")
    return data


def bundled_suites() -> list:
    base = resources.files("hareplan") / "data" / "suites"
    return sorted(p.name[:-5] for p in base.iterdir() if p.name.endswith(".json"))


# ---------------------------------------------------------------- outputs

def summarize(rows) -> list:
    """Quartiles of the two headline metrics per group."""
    groups = {}
    for r in rows:
        key = (r["scenario"], r["strategy"], r["speed_fraction"], r["ssm_set"])
        groups.setdefault(key, []).append(r)
    out = []
    for key, rs in groups.items():
        ok = [r for r in rs if not r["error"]]
        row = dict(zip(("scenario", "strategy", "speed_fraction", "ssm_set"), key))
        row["n"] = len(ok)
        row["errors"] = len(rs) - len(ok)
        for metric in ("exec_time_norm", "avg_scaling"):
            x = np.array([float(r[metric]) for r in ok])
            if len(x):
                q1, med, q3 = np.percentile(x, [25, 50, 75])
                stats = (x.mean(), x.min(), q1, med, q3, x.max())
            else:
                stats = (math.nan,) * 6
            for name, v in zip(("mean", "min", "q1", "median", "q3", "max"), stats):
                row[f"{metric}_{name}"] = f"{v:.6f}"
        out.append(row)
    return out


def _csv_text(rows) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    wr.writeheader()
    wr.writerows(rows)
    return buf.getvalue()


def plot_summary(rows, directory: Path) -> list:
    """Box plots of both metrics per strategy, one panel per scenario/speed/set group."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "hareplan"
    written = []
    panels = {}
    for r in rows:
        if r["error"]:
            continue
        key = (r["scenario"], r["speed_fraction"], r["ssm_set"])
        panels.setdefault(key, {}).setdefault(r["strategy"], []).append(r)
    for metric, label in (("exec_time_norm", "normalized execution time"),
                          ("avg_scaling", "average speed scaling [%]")):
        if not panels:
            break
        keys = sorted(panels)
        fig, axes = plt.subplots(1, len(keys), figsize=(3.2 * len(keys), 3.4), squeeze=False)
        for ax, key in zip(axes[0], keys):
            strat = [s for s in STRATEGIES if s in panels[key]]
            data = [[float(r[metric]) for r in panels[key][s]] for s in strat]
            ax.boxplot(data)
            ax.set_xticks(range(1, len(strat) + 1))
            ax.set_xticklabels([s.replace("+dSSM", "") for s in strat], rotation=30, fontsize=8)
            title = f"{key[0]} v={key[1]}" + (f" set {key[2]}" if key[2] else "")
            ax.set_title(title, fontsize=9)
        axes[0][0].set_ylabel(label)
        fig.tight_layout()
        path = directory / f"{metric}.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(path)
    return written


def _print_summary(summary):
    for s in summary:
        tag = f"{s['scenario']:10s} {s['strategy']:16s} v={s['speed_fraction']:>4s}"
        if s["ssm_set"]:
            tag += f" set={s['ssm_set']:>2s}"
        print(f"{tag}  exec_time_norm mean {float(s['exec_time_norm_mean']):.3f} "
              f"median {float(s['exec_time_norm_median']):.3f}  "
              f"avg_scaling {float(s['avg_scaling_mean']):.1f}  n={s['n']} errors={s['errors']}")


def _emit(rows, directory, manifest, plots=True):
    write_csv(rows, directory / "results.csv")
    summary = summarize(rows)
    (directory / "summary.csv").write_text(_csv_text(summary))
    manifest.write(directory)
    if plots:
        plot_summary(rows, directory)
    _print_summary(summary)
    errors = [r for r in rows if r["error"]]
    for r in errors:
        print(f"episode failed: {r['scenario']} {r['strategy']} seed={r['seed']}: {r['error']}",
              file=sys.stderr)
    print(f"wrote {directory}")
    return EXIT_EPISODE if errors else EXIT_OK


# --------------------------------------------------------------- commands

def cmd_plan(args):
    sc = _scenario(args.scenario)
    cm = cost_from_dict({"name": args.cost, "mode": dataclasses.asdict(sc.ssm)},
                        clearance=sc.scene.human_clearance)
    model = speed_model(sc.model, _speed(args.speed_fraction))
    human = sample_human(sc.script, args.human_time, noise=False)
    for name, q in (("start", sc.q_start), ("goal", sc.q_goal)):
        if not check_config(model, q, human, sc.scene):
            print(f"no solution: {name} configuration is in collision", file=sys.stderr)
            return EXIT_NO_SOLUTION
    budget = (args.budget_ms / 1000.0) if args.budget_ms is not None else sc.plan_budget
    seed = sc.plan_seed if args.seed is None else args.seed
    res = plan(model, sc.scene, human, sc.q_start, sc.q_goal, cm, budget, seed)
    if not res.solved:
        print(f"no solution after {res.iterations} iterations", file=sys.stderr)
        return EXIT_NO_SOLUTION
    out = Path(args.out) if args.out else _out_dir(args, "plan") / f"{sc.name}_{args.cost}.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    path = res.path.replace(meta={"scenario": sc.name, "cost": args.cost, "seed": seed,
                                  "human_time": args.human_time})
    path.save(out)
    print(f"cost {res.cost:.6f}  waypoints {len(path.waypoints)}  iterations {res.iterations}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_replay(args):
    sc = _scenario(args.scenario)
    strategy = _strategies(args.strategy)[0]
    cfg = EpisodeConfig(sc, strategy, _rates(args.rates, args.budget_ms),
                        _speed(args.speed_fraction), args.seed or 0, trace=True)
    directory = _out_dir(args, f"replay_{sc.name}")
    try:
        m = run_episode(cfg)
    except Exception as exc:
        print(f"episode failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_EPISODE
    names = ["t", "scale", "min_separation"] + [f"q{i}" for i in range(sc.model.n)]
    rows = [dict(zip(names, (f"{v:.6g}" for v in r))) for r in m.trace]
    (directory / "trace.csv").write_text(_csv_text(rows))
    write_csv([metrics_row(cfg, m)], directory / "results.csv")
    RunManifest("replay", [args.scenario], [strategy], 1, [cfg.seed], str(directory),
                extra={"speed_fraction": cfg.speed_fraction}).write(directory)
    print(f"exec_time_norm {m.exec_time_norm:.3f}  avg_scaling {m.avg_scaling:.1f}  "
          f"replans {m.replan_calls} adopted {m.replan_adoptions}  completed {m.completed}")
    print(f"wrote {directory}")
    return EXIT_OK if m.completed else EXIT_EPISODE


def cmd_bench(args):
    suite = load_suite(args.suite)
    scen_refs = args.scenario.split(",") if args.scenario else suite["scenarios"]
    strategies = _strategies(args.strategy) if args.strategy else _strategies(
        ",".join(suite["strategies"]))
    reps = _reps(args.reps) or int(suite.get("repetitions", DEFAULT_REPS))
    if reps < 1:
        raise UsageError("repetitions must be at least 1")
    fractions = ([_speed(args.speed_fraction)] if args.speed_fraction is not None
                 else [_speed(float(v)) for v in suite.get("speed_fractions", [1.0])])
    rates = _rates(args.rates, args.budget_ms)
    seed = int(suite.get("seed", 0)) if args.seed is None else args.seed
    scenarios = [_scenario(s) for s in scen_refs]
    cfgs = [EpisodeConfig(sc, st, rates, f) for sc in scenarios for f in fractions
            for st in strategies]
    directory = _out_dir(args, f"bench_{suite.get('name', 'suite')}")
    rows, _ = run_benchmark(cfgs, reps, seed, args.parallel)
    manifest = RunManifest("bench", scen_refs, strategies, reps, list(range(seed, seed + reps)),
                           str(directory), extra={"suite": str(args.suite),
                                                  "speed_fractions": fractions,
                                                  "rates": dataclasses.asdict(rates)})
    return _emit(rows, directory, manifest, not args.no_plots)


def cmd_sweep(args):
    sc = _scenario(args.scenario or "sweep")
    strategies = _strategies(args.strategy or "dSSM,MARS+dSSM,MARSHA+dSSM")
    reps = _reps(args.reps) or DEFAULT_REPS
    rates = _rates(args.rates, args.budget_ms)
    seed = args.seed or 0
    cfgs, labels = sweep_suite(sc, strategies, _speed(args.speed_fraction or 1.0), rates)
    directory = _out_dir(args, f"sweep_{sc.name}")
    rows, _ = run_benchmark(cfgs, reps, seed, args.parallel, labels)
    manifest = RunManifest("sweep", [args.scenario or "sweep"], strategies, reps,
                           list(range(seed, seed + reps)), str(directory),
                           extra={"rates": dataclasses.asdict(rates)})
    return _emit(rows, directory, manifest, not args.no_plots)


def cmd_validate(args):
    refs = args.scenarios or bundled_scenarios()
    bad = 0
    for ref in refs:
        try:
            _scenario(ref)
            print(f"ok   {ref}")
        except UsageError as exc:
            bad += 1
            print(f"FAIL {exc}")
    return EXIT_USAGE if bad else EXIT_OK


# ------------------------------------------------------------------- main

def build_parser():
    p = argparse.ArgumentParser(prog="hareplan", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, strategy=True):
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help=f"output location (default: ${OUT_ENV} or ./runs)")
        sp.add_argument("--budget-ms", type=float, help="replan budget (plan: planning budget)")
        sp.add_argument("--speed-fraction", type=float)
        if strategy:
            sp.add_argument("--strategy", help=f"comma list of {', '.join(STRATEGIES)}")
            sp.add_argument("--rates", help="EXEC,CHECK,REPLAN loop rates in Hz")

    sp = sub.add_parser("plan", help="plan one path offline")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--cost", default="length", choices=["length", "weighted", "hamp", "marsha"])
    sp.add_argument("--human-time", type=float, default=0.0)
    common(sp, strategy=False)
    sp.set_defaults(func=cmd_plan, speed_fraction=1.0)

    sp = sub.add_parser("replay", help="run one traced episode")
    sp.add_argument("--scenario", required=True)
    common(sp)
    sp.set_defaults(func=cmd_replay, strategy="MARSHA+dSSM", speed_fraction=1.0)

    for name, func, helptext in (("bench", cmd_bench, "run a benchmark suite"),
                                 ("sweep", cmd_sweep, "run the 16 SSM parameter sets")):
        sp = sub.add_parser(name, help=helptext)
        if name == "bench":
            sp.add_argument("suite", help=f"suite file or one of: {', '.join(bundled_suites())}")
        sp.add_argument("--scenario")
        sp.add_argument("--reps", type=int)
        sp.add_argument("--parallel", type=int, default=1)
        sp.add_argument("--no-plots", action="store_true")
        common(sp)
        sp.set_defaults(func=func)

    sp = sub.add_parser("validate", help="check scenario files")
    sp.add_argument("scenarios", nargs="*")
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "parallel", 1) is not None and getattr(args, "parallel", 1) < 1:
        print("error: --parallel must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
