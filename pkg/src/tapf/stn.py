"""Simple temporal networks compiled from temporal plan graphs.

Node 0 is the origin X0, node 1 the terminal X_end, and TPG event ``i`` is
node ``i + 2``. Constraints ``lb <= t[j] - t[i] <= ub`` become distance-graph
arcs ``i -> j`` (weight ub, when finite) and ``j -> i`` (weight -lb); all
schedules are shortest distances in that graph.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _core
from .errors import Inconsistent, InstanceError
from .model import KinematicProfile
from .tpg import TemporalPlanGraph, topological_order

X0 = 0
X_END = 1
TIME_TOL = 1e-9


@dataclass(frozen=True)
class TemporalNetwork:
    """Events and ``[lb, ub]`` edges; ``ub`` may be ``inf``.

    ``rank`` orders the nodes so that most edges point forward; it only
    speeds up relaxation and never changes results. ``tpg`` is set when the
    network was compiled from one.
    """

    n_nodes: int
    src: np.ndarray
    dst: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    rank: np.ndarray
    tpg: TemporalPlanGraph | None = None

    def __post_init__(self):
        if np.any(self.lb > self.ub):
            raise InstanceError("edge with lb > ub")
        for arr in (self.src, self.dst, self.lb, self.ub, self.rank):
            arr.flags.writeable = False

    @classmethod
    def from_edges(cls, n_nodes: int, edges, rank=None) -> TemporalNetwork:
        """Network from ``(i, j, lb, ub)`` tuples over nodes ``0..n_nodes-1``."""
        edges = list(edges)
        src = np.array([e[0] for e in edges], dtype=np.int32)
        dst = np.array([e[1] for e in edges], dtype=np.int32)
        lb = np.array([e[2] for e in edges], dtype=np.float64)
        ub = np.array([e[3] for e in edges], dtype=np.float64)
        if len(edges) and (src.min() < 0 or dst.min() < 0
                           or max(src.max(), dst.max()) >= n_nodes):
            raise InstanceError("edge endpoint outside the network")
        if rank is None:
            rank = np.arange(n_nodes)
        return cls(n_nodes, src, dst, lb, ub, np.asarray(rank, dtype=np.int64))

    @property
    def n_edges(self) -> int:
        return len(self.src)

    def edges(self):
        for k in range(self.n_edges):
            yield int(self.src[k]), int(self.dst[k]), float(self.lb[k]), float(self.ub[k])


@dataclass(frozen=True)
class Schedule:
    """``times[k]`` is the time of network node ``k`` in seconds."""

    times: np.ndarray
    makespan: float

    def __getitem__(self, node: int) -> float:
        return float(self.times[node])

    def event_time(self, tpg_index: int) -> float:
        return float(self.times[tpg_index + 2])


def build_stn(tpg: TemporalPlanGraph, kinematics: KinematicProfile,
              epsilon: float) -> TemporalNetwork:
    """Kinematic bounds on Type-1 edges, ``[epsilon, inf)`` on Type-2 edges."""
    if epsilon < 0:
        raise InstanceError("epsilon must be non-negative")
    d = tpg.piece_length
    vmin = kinematics.vmin
    src, dst, lb, ub = [], [], [], []
    for seq in tpg.sequences:
        first = tpg.index(seq[0].robot, 0)
        last = first + len(seq) - 1
        src += [X0, last + 2]
        dst += [first + 2, X_END]
        lb += [0.0, 0.0]
        ub += [0.0, math.inf]
    for i, j in tpg.type1:
        u, v = tpg.edge_of(i, j)
        src.append(i + 2)
        dst.append(j + 2)
        lb.append(d / kinematics.vmax(tpg.events[i].robot, u, v))
        ub.append(math.inf if vmin == 0 else d / vmin)
    for i, j in tpg.type2:
        src.append(i + 2)
        dst.append(j + 2)
        lb.append(float(epsilon))
        ub.append(math.inf)
    n = len(tpg.events) + 2
    rank = np.empty(n, dtype=np.int64)
    rank[X0] = 0
    rank[X_END] = n - 1
    for pos, i in enumerate(topological_order(tpg)):
        rank[i + 2] = pos + 1
    return TemporalNetwork(n, np.array(src, dtype=np.int32), np.array(dst, dtype=np.int32),
                           np.array(lb), np.array(ub), rank, tpg)


def _distance_arcs(stn: TemporalNetwork, extra=()):
    """Distance-graph arcs as (tail, head, weight) arrays."""
    finite = np.isfinite(stn.ub)
    tails = [stn.src[finite], stn.dst]
    heads = [stn.dst[finite], stn.src]
    weights = [stn.ub[finite], -stn.lb]
    for a, b, w in extra:
        tails.append(np.array([a], dtype=np.int32))
        heads.append(np.array([b], dtype=np.int32))
        weights.append(np.array([w], dtype=np.float64))
    return (np.concatenate(tails).astype(np.int32), np.concatenate(heads).astype(np.int32),
            np.concatenate(weights).astype(np.float64))


def _shortest(stn: TemporalNetwork, tail, head, w, source: int, backend=None):
    """Bellman-Ford from ``source`` (virtual source when negative).

    Arcs are relaxed in order of their tail's rank (descending when most
    arcs point backwards), which settles acyclic parts in one sweep.
    Raises :class:`Inconsistent` with a cycle witness on a negative cycle.
    """
    kernels = _core if backend is None else _core.backend_module(backend)
    key = stn.rank[tail]
    if np.count_nonzero(stn.rank[head] < key) > len(key) // 2:
        key = -key
    order = np.argsort(key, kind="stable")
    tail, head, w = tail[order], head[order], w[order]
    dist = np.empty(stn.n_nodes, dtype=np.float64)
    pred = np.empty(stn.n_nodes, dtype=np.int32)
    last = kernels.bellman_ford(stn.n_nodes, np.ascontiguousarray(tail),
                                np.ascontiguousarray(head), np.ascontiguousarray(w),
                                source, dist, pred)
    if last >= 0:
        raise Inconsistent("temporal network has a negative cycle",
                           _cycle_witness(last, pred, tail, stn.n_nodes))
    return dist


def _cycle_witness(node: int, pred, tail, n: int) -> list[int]:
    # n steps back along predecessors is guaranteed to land on the cycle
    for _ in range(n):
        node = int(tail[pred[node]])
    cycle = [node]
    v = int(tail[pred[node]])
    while v != node:
        cycle.append(v)
        v = int(tail[pred[v]])
    cycle.reverse()
    return cycle


def check_consistency(stn: TemporalNetwork, backend=None) -> bool:
    """True iff the distance graph has no negative cycle."""
    tail, head, w = _distance_arcs(stn)
    try:
        _shortest(stn, tail, head, w, -1, backend)
    except Inconsistent:
        return False
    return True


def earliest_schedule(stn: TemporalNetwork, backend=None) -> Schedule:
    """Every node at its earliest feasible time (minus the distance to X0)."""
    tail, head, w = _distance_arcs(stn)
    # distances *to* X0 are distances from X0 in the reversed graph
    dist = _shortest(stn, head, tail, w, X0, backend)
    times = -dist
    times[X0] = 0.0
    if not np.all(np.isfinite(times)):
        raise InstanceError("some events are not reachable from the origin")
    times += 0.0   # turn -0.0 into 0.0
    return Schedule(times, float(times[X_END]))


def latest_schedule(stn: TemporalNetwork, deadline: float, backend=None) -> Schedule:
    """Every node at its latest feasible time with ``X_end - X0 <= deadline``."""
    tail, head, w = _distance_arcs(stn, [(X0, X_END, float(deadline)), (X_END, X0, 0.0)])
    try:
        dist = _shortest(stn, tail, head, w, X0, backend)
    except Inconsistent as exc:
        raise Inconsistent(f"deadline {deadline} is below the minimal makespan",
                           exc.witness) from None
    if not np.all(np.isfinite(dist)):
        raise InstanceError("some events are not bounded by the deadline")
    return Schedule(dist, float(dist[X_END]))


def slack(stn: TemporalNetwork, deadline: float, backend=None) -> np.ndarray:
    """Latest minus earliest time per node."""
    early = earliest_schedule(stn, backend)
    late = latest_schedule(stn, deadline, backend)
    return late.times - early.times


def violations(stn: TemporalNetwork, schedule: Schedule, tol: float = TIME_TOL):
    """Edges whose bounds ``schedule`` breaks by more than ``tol``."""
    diff = schedule.times[stn.dst] - schedule.times[stn.src]
    bad = (diff < stn.lb - tol) | (diff > stn.ub + tol)
    return [(int(stn.src[k]), int(stn.dst[k]), float(stn.lb[k]), float(stn.ub[k]),
             float(diff[k])) for k in np.flatnonzero(bad)]
