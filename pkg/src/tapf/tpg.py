"""Temporal plan graphs: per-robot arrival events with safety markers.

Waits are compressed away, so every event is an arrival. A robot departs a
location at its arrival event for the next location. Markers are interior
points that split an edge into delta-long pieces; they are locations of
their own and so get ordered between robots like vertices do.
"""
from __future__ import annotations

import heapq
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence, Union

from .errors import InstanceError, TpgCyclic
from .model import DiscretePlan, EnvironmentGraph, Position, canonical_edge, subdivisions


@dataclass(frozen=True, order=True)
class MarkerId:
    """Interior point ``k`` of edge ``(u, v)``, counted from ``u``."""

    u: str
    v: str
    k: int

    def __post_init__(self):
        if (self.u, self.v) != canonical_edge(self.u, self.v):
            raise InstanceError(f"marker edge {(self.u, self.v)!r} is not canonical")
        if self.k < 1:
            raise InstanceError("marker index must be at least 1")

    def __str__(self) -> str:
        return f"m({self.u},{self.v},{self.k})"


Location = Union[str, MarkerId]

_MARKER_RE = re.compile(r"^m\((.+),(.+),(\d+)\)$")


def parse_location(text: str, graph: EnvironmentGraph | None = None) -> Location:
    """Inverse of ``str`` on locations.

    Vertex ids win over the marker syntax when ``graph`` knows them.
    """
    if graph is not None and text in graph:
        return text
    m = _MARKER_RE.match(text)
    if m is None:
        return text
    return MarkerId(m.group(1), m.group(2), int(m.group(3)))


@dataclass(frozen=True)
class Event:
    robot: int
    seq: int
    location: Location
    discrete_time: Fraction

    @property
    def label(self) -> str:
        return f"r{self.robot}.arr({self.location})@{self.discrete_time}"


def compress_paths(plan: DiscretePlan) -> list[list[Event]]:
    """One event per location change; the start is event 0 at time 0."""
    out = []
    for r, path in enumerate(plan.paths):
        events = [Event(r, 0, path[0], Fraction(0))]
        for t in range(1, len(path)):
            if path[t] != path[t - 1]:
                events.append(Event(r, len(events), path[t], Fraction(t)))
        out.append(events)
    return out


def insert_markers(graph: EnvironmentGraph, sequences: Sequence[Sequence[Event]],
                   delta: float) -> list[list[Event]]:
    """Add the interior marker events of every traversed edge.

    A move into a vertex reached at step ``t`` happens during ``[t - 1, t]``;
    its markers get the interpolated times ``t - 1 + j/n``.
    """
    n = subdivisions(graph.edge_length, delta)
    out = []
    for events in sequences:
        seq: list[Event] = []
        for i, ev in enumerate(events):
            if isinstance(ev.location, MarkerId):
                raise InstanceError("sequence already contains markers")
            if i:
                prev = events[i - 1]
                a, b = prev.location, ev.location
                if not graph.has_edge(a, b):
                    raise InstanceError(f"robot {ev.robot} jumps from {a!r} to {b!r}")
                u, v = canonical_edge(a, b)
                t0 = ev.discrete_time - 1
                for j in range(1, n):
                    k = j if a == u else n - j
                    seq.append(Event(ev.robot, len(seq), MarkerId(u, v, k),
                                     t0 + Fraction(j, n)))
            seq.append(Event(ev.robot, len(seq), ev.location, ev.discrete_time))
        out.append(seq)
    return out


def location_position(graph: EnvironmentGraph, location: Location, n: int) -> Position:
    """World position of a vertex, or of a marker on edges split into ``n`` pieces."""
    if not isinstance(location, MarkerId):
        return graph.position(location)
    if location.k >= n:
        raise InstanceError(f"marker {location} does not exist with {n} subdivisions")
    pu, pv = graph.position(location.u), graph.position(location.v)
    f = location.k / n
    return tuple(a + f * (b - a) for a, b in zip(pu, pv))


@dataclass(frozen=True)
class TemporalPlanGraph:
    """Events of all robots, in robot then sequence order.

    ``type1``/``type2`` hold ``(source, target)`` indices into ``events``.
    ``sequences`` keeps the per-robot event lists; ``subdivisions`` is the
    number of pieces each edge was split into.
    """

    events: tuple[Event, ...]
    sequences: tuple[tuple[Event, ...], ...]
    type1: tuple[tuple[int, int], ...]
    type2: tuple[tuple[int, int], ...]
    graph: EnvironmentGraph | None = None
    subdivisions: int = 1

    @property
    def n_robots(self) -> int:
        return len(self.sequences)

    def index(self, robot: int, seq: int) -> int:
        return self._offsets[robot] + seq

    @cached_property
    def _offsets(self) -> list[int]:
        offsets, total = [], 0
        for s in self.sequences:
            offsets.append(total)
            total += len(s)
        return offsets

    @property
    def piece_length(self) -> float:
        """Distance between consecutive events of one robot."""
        edge_length = 1.0 if self.graph is None else self.graph.edge_length
        return edge_length / self.subdivisions

    def edge_of(self, i: int, j: int) -> tuple[str, str]:
        """Graph edge on which the motion between events ``i`` and ``j`` happens."""
        a, b = self.events[i].location, self.events[j].location
        if isinstance(a, MarkerId):
            return a.u, a.v
        if isinstance(b, MarkerId):
            return b.u, b.v
        return canonical_edge(a, b)


def build_tpg(sequences: Sequence[Sequence[Event]], graph: EnvironmentGraph | None = None,
              delta: float | None = None) -> TemporalPlanGraph:
    """Type-1 chains per robot plus Type-2 edges between consecutive visitors.

    For each location, visits are ordered by discrete time; when robot ``i``
    is followed by a different robot ``j``, ``i``'s next event (its
    departure) must precede ``j``'s arrival. ``graph`` and ``delta`` are only
    needed later to turn Type-1 edges into travel distances.
    """
    events: list[Event] = []
    seqs = []
    for r, seq in enumerate(sequences):
        seq = tuple(seq)
        for k, ev in enumerate(seq):
            if ev.robot != r or ev.seq != k:
                raise InstanceError(f"event {ev.label} out of place (robot {r}, seq {k})")
            if k and ev.discrete_time <= seq[k - 1].discrete_time:
                raise InstanceError(f"event times of robot {r} not increasing at seq {k}")
        events.extend(seq)
        seqs.append(seq)
    if any(not s for s in seqs):
        raise InstanceError("every robot needs at least its start event")

    type1 = []
    idx = 0
    for seq in seqs:
        type1.extend((idx + k, idx + k + 1) for k in range(len(seq) - 1))
        idx += len(seq)

    visits: dict[Location, list[int]] = {}
    for i, ev in enumerate(events):
        visits.setdefault(ev.location, []).append(i)
    type2 = []
    for loc, idxs in visits.items():
        idxs.sort(key=lambda i: events[i].discrete_time)
        for a, b in zip(idxs, idxs[1:]):
            ea, eb = events[a], events[b]
            if ea.discrete_time == eb.discrete_time:
                raise InstanceError(f"robots {ea.robot} and {eb.robot} both visit {loc} "
                                    f"at time {ea.discrete_time}")
            if ea.robot == eb.robot:
                continue
            if ea.seq + 1 < len(seqs[ea.robot]):
                type2.append((a + 1, b))
    type2.sort()

    n = 1
    if graph is not None:
        n = subdivisions(graph.edge_length, graph.edge_length if delta is None else delta)
    tpg = TemporalPlanGraph(tuple(events), tuple(seqs), tuple(type1), tuple(type2), graph, n)
    topological_order(tpg)
    return tpg


def topological_order(tpg: TemporalPlanGraph) -> list[int]:
    """Event indices in an order consistent with every edge.

    Among ready events the lowest ``(robot, seq)`` goes first.
    """
    n = len(tpg.events)
    succ: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n
    for a, b in (*tpg.type1, *tpg.type2):
        succ[a].append(b)
        indeg[b] += 1
    # events are stored in (robot, seq) order, so the index is the priority
    ready = [i for i in range(n) if indeg[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        i = heapq.heappop(ready)
        order.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(ready, j)
    if len(order) < n:
        stuck = sorted(i for i in range(n) if indeg[i] > 0)
        raise TpgCyclic("temporal plan graph has a cycle through "
                        + ", ".join(tpg.events[i].label for i in stuck[:6]))
    return order


def tpg_from_plan(plan: DiscretePlan, graph: EnvironmentGraph, delta: float) -> TemporalPlanGraph:
    return build_tpg(insert_markers(graph, compress_paths(plan), delta), graph, delta)


def tpg_to_dict(tpg: TemporalPlanGraph) -> dict:
    """Debug dump with events listed in topological order."""
    order = topological_order(tpg)
    pos = {i: k for k, i in enumerate(order)}

    def dtime(f: Fraction):
        return int(f) if f.denominator == 1 else float(f)

    return {
        "events": [{"robot": tpg.events[i].robot, "seq": tpg.events[i].seq,
                    "location": str(tpg.events[i].location),
                    "dtime": dtime(tpg.events[i].discrete_time)} for i in order],
        "type1": [[pos[a], pos[b]] for a, b in tpg.type1],
        "type2": [[pos[a], pos[b]] for a, b in tpg.type2],
    }
