"""Command-line entry point (``tapf``).

Exit codes: 0 success, 1 usage or I/O error, 2 infeasible or inconsistent,
3 safety check failed.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .cbm import solve
from .errors import Inconsistent, Infeasible, SolveTimeout, TapfError
from .harness.bench import load_bench_config, run_bench
from .harness.generate import generate_instance
from .harness.render import render_svg
from .model import parse_instance, parse_plan, serialize_instance, serialize_plan
from .pipeline import parse_schedule, postprocess, serialize_schedule
from .tpg import tpg_to_dict
from .trajectory import DEFAULT_DT, check_safety, check_velocity

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_CHECK = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write(path: str, text: str):
    Path(path).write_text(text, encoding="utf-8")


def _load_instance(path: str):
    return parse_instance(Path(path).read_bytes())


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    try:
        plan = solve(inst, t_cap=args.t_cap, time_limit=args.time_limit)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    _write(args.out, serialize_plan(plan))
    return EXIT_OK


def cmd_postprocess(args) -> int:
    inst = _load_instance(args.instance)
    plan = parse_plan(Path(args.plan).read_bytes())
    try:
        result = postprocess(inst, plan, delta=args.delta, epsilon=args.epsilon)
    except Inconsistent as exc:
        print(f"inconsistent: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    _write(args.out, serialize_schedule(result))
    if args.tpg_out:
        _write(args.tpg_out, json.dumps(tpg_to_dict(result.tpg), indent=1) + "\n")
    return EXIT_OK


def cmd_check(args) -> int:
    inst = _load_instance(args.instance)
    loaded = parse_schedule(Path(args.schedule).read_bytes(), inst.graph, inst.n_robots)
    delta = loaded.delta if loaded.delta is not None else inst.delta
    report = check_safety(loaded.trajectories, inst.graph, delta, args.dt).merge(
        check_velocity(loaded.trajectories, inst.graph, inst.kinematics))
    print(json.dumps(report.to_dict(), indent=1))
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_gen(args) -> int:
    try:
        inst = generate_instance(args.width, args.height, args.depth, args.obstacles,
                                 args.groups, args.robots_per_group, args.seed)
    except Infeasible as exc:
        print(f"generation failed: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    _write(args.out, serialize_instance(inst))
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = Path(args.config)
    runs, options = load_bench_config(cfg.read_bytes(), cfg.parent)
    timing = options.get("timing", True) and not args.no_timing
    csv_text = run_bench(runs, timing=timing, t_cap=options.get("t_cap"),
                         time_limit=options.get("time_limit"))
    _write(args.out, csv_text)
    return EXIT_OK


def cmd_render(args) -> int:
    inst = _load_instance(args.instance)
    loaded = parse_schedule(Path(args.schedule).read_bytes(), inst.graph, inst.n_robots)
    try:
        times = [float(t) for t in args.times.split(",") if t.strip()]
    except ValueError:
        print(f"bad --times value {args.times!r}", file=sys.stderr)
        return EXIT_USAGE
    _write(args.out, render_svg(inst, loaded.trajectories, times))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tapf", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="makespan-optimal discrete plan")
    s.add_argument("--instance", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--t-cap", type=int, default=None, help="largest horizon to try")
    s.add_argument("--time-limit", type=float, default=None, help="seconds")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("postprocess", help="continuous schedule for a plan")
    s.add_argument("--instance", required=True)
    s.add_argument("--plan", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--delta", type=float, default=None)
    s.add_argument("--epsilon", type=float, default=None)
    s.add_argument("--tpg-out", default=None, help="also write the plan graph as JSON")
    s.set_defaults(func=cmd_postprocess)

    s = sub.add_parser("check", help="safety and velocity report for a schedule")
    s.add_argument("--instance", required=True)
    s.add_argument("--schedule", required=True)
    s.add_argument("--dt", type=float, default=DEFAULT_DT)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("gen", help="random grid instance")
    for flag in ("--width", "--height", "--depth", "--obstacles", "--groups",
                 "--robots-per-group", "--seed"):
        s.add_argument(flag, type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("bench", help="benchmark table as CSV")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--no-timing", action="store_true",
                   help="leave the wall-clock columns empty (reproducible output)")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("render", help="SVG snapshots of a schedule")
    s.add_argument("--instance", required=True)
    s.add_argument("--schedule", required=True)
    s.add_argument("--times", required=True, help="comma-separated seconds")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SolveTimeout as exc:
        print(f"timeout: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, TapfError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
