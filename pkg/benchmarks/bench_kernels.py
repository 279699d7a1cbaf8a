"""Compiled vs pure-Python kernels on full-scale inputs.

    python benchmarks/bench_kernels.py [--repeat N] [--seed S]

Times one group's max-flow (plain and min-cost) on a 10x10x5 map with 150
obstacles, and the Bellman-Ford pass behind an earliest schedule for the
full 100-robot plan. Both backends must return identical results.
"""
import argparse
import statistics
import sys
import time

import numpy as np

from tapf import _core
from tapf.cbm import solve
from tapf.flow import Reservations, build_network, max_flow, min_group_horizon
from tapf.harness.generate import generate_instance
from tapf.stn import build_stn, earliest_schedule
from tapf.tpg import tpg_from_plan


def timed(fn, repeat):
    out, samples = None, []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        samples.append(time.perf_counter() - t0)
    return out, statistics.median(samples)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)
    try:
        _core.backend_module("cython")
    except ImportError:
        print("compiled extension not built; run `pip install -e .` first", file=sys.stderr)
        return 1

    inst = generate_instance(10, 10, 5, 150, 5, 20, args.seed)
    plan = solve(inst)
    group = inst.groups[0]
    T = min_group_horizon(inst.graph, group)
    others = [p for r, p in enumerate(plan.paths) if inst.group_of[r] != 0]
    plain = build_network(inst.graph, group, T)
    costed = build_network(inst.graph, group, plan.makespan,
                           reservations=Reservations.from_paths(inst.graph, others))
    stn = build_stn(tpg_from_plan(plan, inst.graph, 0.25), inst.kinematics, inst.epsilon)

    cases = [
        (f"max-flow BFS ({plain.n_nodes} nodes)", lambda b: max_flow(plain, b)),
        (f"min-cost flow ({costed.n_nodes} nodes)", lambda b: max_flow(costed, b)),
        (f"Bellman-Ford STN ({stn.n_nodes} events)", lambda b: earliest_schedule(stn, b).times),
    ]
    print(f"{'kernel':<34}{'cython ms':>12}{'python ms':>12}{'speedup':>10}")
    for name, fn in cases:
        res_c, t_c = timed(lambda: fn("cython"), args.repeat)
        res_p, t_p = timed(lambda: fn("python"), max(1, min(args.repeat, 3)))
        same = all(np.array_equal(a, b) for a, b in zip(
            res_c if isinstance(res_c, tuple) else (res_c,),
            res_p if isinstance(res_p, tuple) else (res_p,)))
        if not same:
            print(f"{name}: backends disagree", file=sys.stderr)
            return 2
        print(f"{name:<34}{t_c * 1e3:>12.2f}{t_p * 1e3:>12.2f}{t_p / t_c:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
