import csv
import json
import subprocess
import sys

import pytest

from hareplan import cli
from hareplan.planner import PathP


def run(*argv):
    return cli.main([str(a) for a in argv])


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_help_and_usage_errors(capsys):
    assert run("--help") == cli.EXIT_OK
    assert run() == cli.EXIT_USAGE
    assert run("frobnicate") == cli.EXIT_USAGE
    assert run("bench", "long", "--reps", "0") == cli.EXIT_USAGE
    assert run("bench", "nosuch") == cli.EXIT_USAGE
    assert run("replay", "--scenario", "nosuch") == cli.EXIT_USAGE
    assert run("replay", "--scenario", "empty", "--strategy", "rrt") == cli.EXIT_USAGE
    assert run("replay", "--scenario", "empty", "--rates", "500,25") == cli.EXIT_USAGE
    assert run("replay", "--scenario", "empty", "--rates", "5,25,500") == cli.EXIT_USAGE
    assert run("replay", "--scenario", "empty", "--speed-fraction", "2") == cli.EXIT_USAGE
    assert run("bench", "long", "--parallel", "0") == cli.EXIT_USAGE
    err = capsys.readouterr().err
    assert "unknown strategy" in err and "bundled" in err


def test_strategy_aliases():
    assert cli._strategies("marsha, dSSM,MARS+dSSM") == ["MARSHA+dSSM", "dSSM", "MARS+dSSM"]
    with pytest.raises(cli.UsageError):
        cli._strategies(" , ")


def test_validate(tmp_path, capsys):
    assert run("validate") == cli.EXIT_OK
    bad = tmp_path / "bad.json"
    src = json.loads(open(cli.resources.files("hareplan") / "data" / "scenarios"
                          / "empty.json").read())
    src["q_goal"] = src["q_start"]
    bad.write_text(json.dumps(src))
    assert run("validate", "empty", bad) == cli.EXIT_USAGE
    out = capsys.readouterr().out
    assert "ok   empty" in out and "FAIL" in out


def test_plan_writes_path(tmp_path):
    out = tmp_path / "p.json"
    assert run("plan", "--scenario", "empty", "--cost", "weighted", "--out", out) == 0
    path = PathP.load(out)
    assert path.meta["cost"] == "weighted"
    assert len(path.waypoints) >= 2


def test_plan_reports_no_solution(tmp_path):
    sc = cli.load_scenario("empty")
    mid = 0.5 * (sc.q_start + sc.q_goal)
    tip = sc.model.chain.points(mid)[-1]
    src = dict(sc.source)
    # an obstacle on the direct sweep; a one-iteration budget cannot get around it
    src["scene"] = {"obstacles": [{"type": "sphere", "center": [float(x) for x in tip],
                                   "radius": 0.2}]}
    f = tmp_path / "blocked.json"
    f.write_text(json.dumps(src))
    code = run("plan", "--scenario", f, "--budget-ms", 1, "--out", tmp_path / "p.json")
    assert code == cli.EXIT_NO_SOLUTION
    assert not (tmp_path / "p.json").exists()


def test_replay_outputs(tmp_path):
    d = tmp_path / "r"
    assert run("replay", "--scenario", "empty", "--strategy", "dSSM", "--out", d) == 0
    trace = read_csv(d / "trace.csv")
    assert trace and float(trace[0]["scale"]) == 1.0
    res = read_csv(d / "results.csv")
    assert res[0]["completed"] == "1"
    man = json.loads((d / "manifest.json").read_text())
    assert man["command"] == "replay" and man["engine"].startswith("0.1.0+")


def test_bench_outputs(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path))
    suite = tmp_path / "s.json"
    suite.write_text(json.dumps({"name": "tiny", "scenarios": ["empty"],
                                 "strategies": ["dSSM", "MINLEN+dSSM"], "repetitions": 2,
                                 "seed": 5}))
    assert run("bench", suite) == 0
    d = tmp_path / "bench_tiny"
    rows = read_csv(d / "results.csv")
    assert [r["seed"] for r in rows] == ["5", "6", "5", "6"]
    summary = read_csv(d / "summary.csv")
    assert len(summary) == 2 and summary[0]["n"] == "2"
    man = json.loads((d / "manifest.json").read_text())
    assert man["seeds"] == [5, 6] and man["repetitions"] == 2
    for name in ("exec_time_norm.svg", "avg_scaling.svg"):
        assert (d / name).read_text().lstrip().startswith("<?xml")


def test_bench_flags_override_suite(tmp_path):
    d = tmp_path / "b"
    assert run("bench", "long", "--scenario", "empty", "--strategy", "dssm", "--reps", 1,
               "--seed", 9, "--speed-fraction", 0.5, "--no-plots", "--out", d) == 0
    rows = read_csv(d / "results.csv")
    assert len(rows) == 1
    assert rows[0]["scenario"] == "empty" and rows[0]["seed"] == "9"
    assert rows[0]["speed_fraction"] == "0.5"
    assert not (d / "exec_time_norm.svg").exists()


def test_suite_validation(tmp_path):
    s = tmp_path / "s.json"
    s.write_text(json.dumps({"scenarios": [], "strategies": ["dSSM"]}))
    assert run("bench", s) == cli.EXIT_USAGE
    assert set(cli.bundled_suites()) >= {"long", "speed", "proactive", "interaction"}


def test_episode_errors_give_exit_3(tmp_path, monkeypatch):
    def boom(cfg):
        raise RuntimeError("simulated failure")

    monkeypatch.setattr("hareplan.executor.run_episode", boom)
    d = tmp_path / "e"
    code = run("bench", "long", "--scenario", "empty", "--strategy", "dSSM", "--reps", 1,
               "--no-plots", "--out", d)
    assert code == cli.EXIT_EPISODE
    assert "simulated failure" in read_csv(d / "results.csv")[0]["error"]


def test_bench_is_reproducible_across_processes(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        subprocess.run([sys.executable, "-m", "hareplan.cli", "bench", "long", "--scenario",
                        "short", "--strategy", "dSSM,MARSHA", "--reps", "1", "--no-plots",
                        "--out", str(d)], check=True, capture_output=True)
        outs.append((d / "results.csv").read_bytes())
    assert outs[0] == outs[1]
