import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from tapf.cli import EXIT_CHECK, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE, main
from tapf.model import parse_plan, serialize_instance

from conftest import DATA, instance_on, line_graph

FIG1 = str(DATA / "fig1.json")


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def solved(tmp_path):
    plan = tmp_path / "plan.json"
    sched = tmp_path / "sched.json"
    assert run("solve", "--instance", FIG1, "--out", plan) == EXIT_OK
    assert run("postprocess", "--instance", FIG1, "--plan", plan, "--out", sched,
               "--delta", 0.5, "--epsilon", 0) == EXIT_OK
    return plan, sched


def test_solve_postprocess_check(solved, capsys):
    plan, sched = solved
    assert parse_plan(plan.read_bytes()).makespan == 4
    obj = json.loads(sched.read_text())
    assert obj["makespan"] == pytest.approx(4.0)
    assert obj["delta"] == 0.5
    capsys.readouterr()
    assert run("check", "--instance", FIG1, "--schedule", sched) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["pass"] is True and report["segment_violations"] == []


def test_check_failure_exit_code(solved, tmp_path, capsys):
    _, sched = solved
    obj = json.loads(sched.read_text())
    for ev in obj["events"]:
        ev["time"] /= 2          # twice the allowed speed
    obj["makespan"] /= 2
    fast = tmp_path / "fast.json"
    fast.write_text(json.dumps(obj))
    assert run("check", "--instance", FIG1, "--schedule", fast) == EXIT_CHECK
    assert json.loads(capsys.readouterr().out)["velocity_violations"]


def test_infeasible_exit_code(tmp_path):
    inst = tmp_path / "swap.json"
    inst.write_text(serialize_instance(instance_on(line_graph(2), [(["A"], ["B"]),
                                                                  (["B"], ["A"])])))
    assert run("solve", "--instance", inst, "--out", tmp_path / "p.json") == EXIT_INFEASIBLE
    assert not (tmp_path / "p.json").exists()


def test_usage_and_io_errors(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run("solve", "--instance", FIG1)
    assert exc.value.code == EXIT_USAGE
    assert run("solve", "--instance", tmp_path / "missing.json", "--out", tmp_path / "p") \
        == EXIT_USAGE
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("solve", "--instance", bad, "--out", tmp_path / "p") == EXIT_USAGE


def test_tpg_dump(solved, tmp_path):
    plan, _ = solved
    dump = tmp_path / "tpg.json"
    assert run("postprocess", "--instance", FIG1, "--plan", plan, "--out", tmp_path / "s.json",
               "--tpg-out", dump) == EXIT_OK
    assert len(json.loads(dump.read_text())["type2"]) == 4


def test_gen_bench_render(tmp_path, solved):
    inst = tmp_path / "gen.json"
    assert run("gen", "--width", 4, "--height", 4, "--depth", 1, "--obstacles", 2,
               "--groups", 2, "--robots-per-group", 2, "--seed", 9, "--out", inst) == EXIT_OK
    cfg = tmp_path / "bench.json"
    cfg.write_text(json.dumps({"runs": [{"instance": "gen.json"},
                                        {"width": 4, "height": 4, "depth": 1, "obstacles": 2,
                                         "groups": 2, "robots_per_group": 2, "seeds": [9]}]}))
    out = tmp_path / "bench.csv"
    assert run("bench", "--config", cfg, "--out", out, "--no-timing") == EXIT_OK
    lines = out.read_text().splitlines()
    assert len(lines) == 3 and lines[1].split(",")[1:] == lines[2].split(",")[1:]
    _, sched = solved
    svg = tmp_path / "fig1.svg"
    assert run("render", "--instance", FIG1, "--schedule", sched, "--times", "0,1.5,4",
               "--out", svg) == EXIT_OK
    ET.parse(svg)
    assert run("render", "--instance", FIG1, "--schedule", sched, "--times", "x",
               "--out", svg) == EXIT_USAGE


def test_module_entry_point(tmp_path):
    out = tmp_path / "plan.json"
    proc = subprocess.run([sys.executable, "-m", "tapf", "solve", "--instance", FIG1,
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
