"""Makespan-optimal TAPF: conflict-tree search over per-group flows.

The horizon grows from the largest single-group optimum. At each horizon a
best-first conflict tree (fewest constraints first, FIFO among ties) is
searched; a node re-solves only the group whose constraint set changed. The
first conflict-free node returns a plan, which is makespan-optimal because
every shorter horizon was exhausted.
"""
from __future__ import annotations

import heapq
import itertools
import time
from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum

from .errors import Infeasible, SolveTimeout, StateCapExceeded
from .flow import (FlowConstraintSet, Reservations, default_t_cap, min_group_horizon,
                   network_layout, solve_group)
from .model import DiscretePlan, Instance


class ConflictKind(IntEnum):
    # order doubles as the tie-break among conflicts at one timestep
    VERTEX = 0
    EDGE = 1
    ROTATION = 2


@dataclass(frozen=True)
class Conflict:
    """A cross-group collision at step ``time``.

    ``participants`` are ``(group, robot)`` pairs. ``location`` is ``(vertex,)``
    for vertex conflicts; otherwise it lists each participant's directed move
    ``(u, v)`` in participant order.
    """

    kind: ConflictKind
    participants: tuple[tuple[int, int], ...]
    location: tuple
    time: int

    def branches(self) -> list[tuple[int, str, tuple]]:
        """Child constraints as ``(group, "vertex"|"move", args)``.

        Every plan that contains this conflict violates each returned
        constraint, so each child excludes it.
        """
        out = []
        for k, (g, _) in enumerate(self.participants):
            if self.kind == ConflictKind.VERTEX:
                item = (g, "vertex", (self.location[0], self.time))
            else:
                item = (g, "move", (self.location[k], self.time))
            if item not in out:
                out.append(item)
        return out


def _rotation_cycles(paths, t):
    """Cycles (robot lists, length >= 3) of simultaneous moves during step t."""
    at = {p[t]: r for r, p in enumerate(paths)}

    def successor(r):
        p = paths[r]
        if p[t] == p[t + 1]:
            return None
        nxt = at.get(p[t + 1])
        if nxt is None or paths[nxt][t] == paths[nxt][t + 1]:
            return None
        return nxt

    done: set[int] = set()
    cycles = []
    for r0 in range(len(paths)):
        if r0 in done:
            continue
        chain, pos = [], {}
        r = r0
        while r is not None and r not in done and r not in pos:
            pos[r] = len(chain)
            chain.append(r)
            r = successor(r)
        done.update(chain)
        if r is not None and r in pos and len(chain) - pos[r] >= 3:
            cycles.append(chain[pos[r]:])
    return cycles


def detect_first_conflict(paths, group_of) -> Conflict | None:
    """Earliest cross-group conflict, or None.

    Ties at one timestep: vertex before edge before rotation, then lowest
    robot index.
    """
    if not paths:
        return None
    T = len(paths[0]) - 1
    if any(len(p) != T + 1 for p in paths):
        raise ValueError("paths must all have the same length")
    for t in range(T + 1):
        first_at: dict[str, list[int]] = {}
        for r, p in enumerate(paths):
            here = first_at.setdefault(p[t], [])
            for other in here:
                if group_of[other] != group_of[r]:
                    return Conflict(ConflictKind.VERTEX,
                                    ((group_of[other], other), (group_of[r], r)), (p[t],), t)
            here.append(r)
        if t == T:
            break
        moves: dict[tuple[str, str], int] = {}
        for r, p in enumerate(paths):
            u, v = p[t], p[t + 1]
            if u == v:
                continue
            other = moves.get((v, u))
            if other is not None and group_of[other] != group_of[r]:
                return Conflict(ConflictKind.EDGE,
                                ((group_of[other], other), (group_of[r], r)), ((v, u), (u, v)), t)
            moves[(u, v)] = r
        for cycle in _rotation_cycles(paths, t):
            if len({group_of[r] for r in cycle}) < 2:
                continue
            start = cycle.index(min(cycle))
            cycle = cycle[start:] + cycle[:start]
            return Conflict(ConflictKind.ROTATION,
                            tuple((group_of[r], r) for r in cycle),
                            tuple((paths[r][t], paths[r][t + 1]) for r in cycle), t)
    return None


@dataclass
class ConflictTreeNode:
    constraints: tuple[FlowConstraintSet, ...]
    group_paths: tuple[tuple[tuple[str, ...], ...], ...]
    horizon: int

    @property
    def size(self) -> int:
        return sum(len(c) for c in self.constraints)

    def paths(self) -> list[tuple[str, ...]]:
        return [p for group in self.group_paths for p in group]


@dataclass
class SolveStats:
    horizons: list[int] = field(default_factory=list)
    nodes_expanded: int = 0
    nodes_generated: int = 0
    branches: int = 0
    flow_calls: int = 0
    seconds: float = 0.0


@dataclass
class SolveResult:
    plan: DiscretePlan
    stats: SolveStats


class _Search:
    def __init__(self, instance: Instance, deadline: float | None, stats: SolveStats, backend):
        self.instance = instance
        self.graph = instance.graph
        self.deadline = deadline
        self.stats = stats
        self.backend = backend
        self.group_of = instance.group_of
        self.layouts = {}

    def _flow(self, gi, T, constraints, others):
        self.stats.flow_calls += 1
        group = self.instance.groups[gi]
        layout = self.layouts.get(gi)
        if layout is None or layout.horizon != T:
            layout = self.layouts[gi] = network_layout(self.graph, group, T)
        reservations = Reservations.from_paths(self.graph, others)
        paths = solve_group(self.graph, group, T, constraints, reservations, self.backend, layout)
        return None if paths is None else tuple(paths)

    def _check_time(self):
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise SolveTimeout("time limit exceeded")

    def at_horizon(self, T: int) -> list[tuple[str, ...]] | None:
        groups = self.instance.groups
        empty = FlowConstraintSet()
        solved: list[tuple] = []
        for gi in range(len(groups)):
            others = [p for g in solved for p in g]
            paths = self._flow(gi, T, empty, others)
            if paths is None:
                return None
            solved.append(paths)
        root = ConflictTreeNode(tuple(empty for _ in groups), tuple(solved), T)
        counter = itertools.count()
        open_list = [(0, next(counter), root)]
        seen = {frozenset()}
        self.stats.nodes_generated += 1
        while open_list:
            self._check_time()
            _, _, node = heapq.heappop(open_list)
            self.stats.nodes_expanded += 1
            paths = node.paths()
            conflict = detect_first_conflict(paths, self.group_of)
            if conflict is None:
                return paths
            for gi, kind, args in conflict.branches():
                cons = node.constraints[gi]
                if kind == "vertex":
                    new = cons.forbid_vertex(*args)
                else:
                    (u, v), t = args
                    new = cons.forbid_move(u, v, t)
                if len(new) == len(cons):
                    continue
                constraints = node.constraints[:gi] + (new,) + node.constraints[gi + 1:]
                key = frozenset((g, c) for g, cs in enumerate(constraints)
                                for c in itertools.chain(
                                    (("v",) + x for x in cs.forbidden_vertices),
                                    (("m",) + x for x in cs.forbidden_moves)))
                if key in seen:
                    continue
                seen.add(key)
                self.stats.branches += 1
                others = [p for g, grp in enumerate(node.group_paths) if g != gi for p in grp]
                replanned = self._flow(gi, T, new, others)
                if replanned is None:
                    continue
                group_paths = node.group_paths[:gi] + (replanned,) + node.group_paths[gi + 1:]
                child = ConflictTreeNode(constraints, group_paths, T)
                self.stats.nodes_generated += 1
                heapq.heappush(open_list, (child.size, next(counter), child))
        return None


def solve_detailed(instance: Instance, *, t_cap: int | None = None,
                   time_limit: float | None = None, backend=None) -> SolveResult:
    start = time.perf_counter()
    stats = SolveStats()
    if t_cap is None:
        t_cap = default_t_cap(instance.graph, instance.n_robots)
    deadline = None if time_limit is None else start + time_limit
    t0 = max(min_group_horizon(instance.graph, g, t_cap) for g in instance.groups)
    search = _Search(instance, deadline, stats, backend)
    for T in range(t0, t_cap + 1):
        stats.horizons.append(T)
        paths = search.at_horizon(T)
        if paths is not None:
            stats.seconds = time.perf_counter() - start
            return SolveResult(DiscretePlan(T, tuple(paths)), stats)
    raise Infeasible(f"no conflict-free plan up to horizon cap {t_cap}")


def solve(instance: Instance, *, t_cap: int | None = None, time_limit: float | None = None,
          backend=None) -> DiscretePlan:
    """Conflict-free plan of minimal makespan; raises :class:`Infeasible`."""
    return solve_detailed(instance, t_cap=t_cap, time_limit=time_limit, backend=backend).plan


# --------------------------------------------------------------------------
# exhaustive oracle

def _has_cycle(current, nxt, allow_rotations):
    at = {v: r for r, v in enumerate(current)}
    for r, (u, v) in enumerate(zip(current, nxt)):
        if u != v:
            other = at.get(v)
            if other is not None and nxt[other] == u:
                return True     # head-on swap
    if allow_rotations:
        return False
    done = set()
    for r0 in range(len(current)):
        seen = []
        r = r0
        while r is not None and r not in done and r not in seen:
            seen.append(r)
            if current[r] == nxt[r]:
                r = None
                break
            nr = at.get(nxt[r])
            r = nr if nr is not None and current[nr] != nxt[nr] else None
        done.update(seen)
        if r is not None and r in seen:
            return True
    return False


def brute_force_solve(instance: Instance, state_cap: int = 10 ** 6,
                      allow_rotations: bool = True) -> DiscretePlan | None:
    """Breadth-first search over joint configurations.

    Returns a makespan-minimal plan, or None when no goal configuration is
    reachable. With ``allow_rotations=False`` (the mode that matches
    :func:`solve`) cyclic exchanges of three or more robots are not allowed
    moves.
    """
    graph = instance.graph
    n = instance.n_robots
    if graph.n_vertices ** n > state_cap:
        raise StateCapExceeded(f"{graph.n_vertices}^{n} states exceed cap {state_cap}")
    group_of = instance.group_of
    goal_sets = [frozenset(graph.index(v) for v in g.goals) for g in instance.groups]
    options = [(i,) + graph.neighbor_indices(i) for i in range(graph.n_vertices)]

    def is_goal(state):
        for gi, goals in enumerate(goal_sets):
            if frozenset(state[r] for r in range(n) if group_of[r] == gi) != goals:
                return False
        return True

    start = tuple(graph.index(s) for s in instance.starts)
    parent = {start: None}
    queue = deque([start])
    found = None
    while queue:
        state = queue.popleft()
        if is_goal(state):
            found = state
            break
        for nxt in itertools.product(*(options[v] for v in state)):
            if nxt in parent or len(set(nxt)) < n:
                continue
            if _has_cycle(state, nxt, allow_rotations):
                continue
            parent[nxt] = state
            queue.append(nxt)
    if found is None:
        return None
    chain = []
    state = found
    while state is not None:
        chain.append(state)
        state = parent[state]
    chain.reverse()
    paths = tuple(tuple(graph.vertices[c[r]] for c in chain) for r in range(n))
    return DiscretePlan(len(chain) - 1, paths)
