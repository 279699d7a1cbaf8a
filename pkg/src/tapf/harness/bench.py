"""Benchmark runs over generated (or given) instances, written as CSV."""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, fields
from pathlib import Path

from ..cbm import solve
from ..errors import Inconsistent, Infeasible, SolveTimeout, TapfError
from ..model import Instance, load_json, parse_instance
from ..pipeline import postprocess
from .generate import generate_instance


@dataclass
class BenchRecord:
    seed: int | None
    width: int | None
    height: int | None
    depth: int | None
    obstacles: int | None
    groups: int
    robots: int
    delta: float
    solve_ms: float | None = None
    stn_ms: float | None = None
    makespan_steps: int | None = None
    makespan_seconds: float | None = None
    events: int | None = None
    type2_edges: int | None = None


BENCH_COLUMNS = tuple(f.name for f in fields(BenchRecord)) + ("status",)


@dataclass
class BenchRun:
    """One table row per seed, or a single row for a fixed instance file."""

    width: int = 10
    height: int = 10
    depth: int = 5
    obstacles: int = 150
    groups: int = 5
    robots_per_group: int = 20
    seeds: tuple[int, ...] = (1,)
    delta: float | None = None
    instance: str | None = None


def load_bench_config(text, base_dir: str | Path = ".") -> tuple[list[BenchRun], dict]:
    """Parse ``{"runs": [...], ...}``; returns the runs and the remaining options.

    Relative ``instance`` paths are resolved against ``base_dir``.
    """
    obj = load_json(text)
    if not isinstance(obj, dict) or not isinstance(obj.get("runs", []), list):
        raise ValueError("bench config must be an object with a 'runs' list")
    allowed = {f.name for f in fields(BenchRun)}
    runs = []
    for k, item in enumerate(obj.get("runs", [])):
        if not isinstance(item, dict) or set(item) - allowed:
            raise ValueError(f"run {k}: unknown keys {sorted(set(item) - allowed)}")
        item = dict(item)
        if "seeds" in item:
            item["seeds"] = tuple(int(s) for s in item["seeds"])
        if item.get("instance") is not None:
            item["instance"] = str(Path(base_dir) / item["instance"])
        runs.append(BenchRun(**item))
    options = {k: v for k, v in obj.items() if k != "runs"}
    return runs, options


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}".rstrip("0").rstrip(".") if value == value else "nan"
    return str(value)


def _measure(instance: Instance, record: BenchRecord, timing: bool, t_cap, time_limit) -> str:
    t0 = time.perf_counter()
    try:
        plan = solve(instance, t_cap=t_cap, time_limit=time_limit)
    except Infeasible:
        return "infeasible"
    except SolveTimeout:
        return "timeout"
    t1 = time.perf_counter()
    record.makespan_steps = plan.makespan
    try:
        result = postprocess(instance, plan, delta=record.delta, validate=False)
    except Inconsistent:
        return "inconsistent"
    t2 = time.perf_counter()
    if timing:
        record.solve_ms = (t1 - t0) * 1000.0
        record.stn_ms = (t2 - t1) * 1000.0
    record.makespan_seconds = result.schedule.makespan
    record.events = len(result.tpg.events)
    record.type2_edges = len(result.tpg.type2)
    return "ok"


def _rows(runs, timing, t_cap, time_limit):
    for run in runs:
        if run.instance is not None:
            inst = parse_instance(Path(run.instance).read_bytes())
            g = inst.graph.grid
            items = [(None, inst, g)]
        else:
            items = []
            for seed in run.seeds:
                try:
                    inst = generate_instance(run.width, run.height, run.depth, run.obstacles,
                                             run.groups, run.robots_per_group, seed,
                                             delta=run.delta)
                except TapfError as exc:
                    rec = BenchRecord(seed, run.width, run.height, run.depth, run.obstacles,
                                      run.groups, run.groups * run.robots_per_group,
                                      run.delta if run.delta is not None else 1.0)
                    yield rec, f"error: {exc}"
                    continue
                items.append((seed, inst, inst.graph.grid))
        for seed, inst, grid in items:
            delta = inst.delta if run.delta is None else run.delta
            rec = BenchRecord(seed, grid and grid.width, grid and grid.height, grid and grid.depth,
                              grid and len(grid.obstacles), len(inst.groups), inst.n_robots, delta)
            try:
                status = _measure(inst, rec, timing, t_cap, time_limit)
            except TapfError as exc:
                status = f"error: {exc}"
            yield rec, status


def run_bench(runs, *, timing: bool = True, t_cap: int | None = None,
              time_limit: float | None = None) -> str:
    """CSV text with a fixed header and one row per run, in config order.

    Failed runs keep their row and report it in ``status``. With
    ``timing=False`` the wall-clock columns stay empty, which makes the
    output reproducible byte for byte.
    """
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(BENCH_COLUMNS)
    for rec, status in _rows(runs, timing, t_cap, time_limit):
        writer.writerow([_fmt(getattr(rec, c)) for c in BENCH_COLUMNS[:-1]] + [status])
    return out.getvalue()

