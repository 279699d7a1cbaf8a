"""Instances, discrete plans, their JSON formats, and plan validation.

Robots are numbered globally in group order, then in within-group order.
Every file and every API in this package uses that numbering.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .errors import InstanceError, ParseError

Position = tuple[float, float, float]
Edge = tuple[str, str]

DIVISIBILITY_RTOL = 1e-9
GEOMETRY_RTOL = 1e-6


def canonical_edge(u: str, v: str) -> Edge:
    """Endpoints of an undirected edge in lexicographic order."""
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class GridSpec:
    width: int
    height: int
    depth: int
    obstacles: tuple[tuple[int, int, int], ...] = ()


@dataclass(frozen=True)
class EnvironmentGraph:
    """Undirected environment graph with a uniform edge length.

    ``edges`` holds canonical (lexicographically ordered) endpoint pairs in
    construction order. ``grid`` is set for graphs produced by
    :func:`grid_to_graph` and lets serializers and renderers recover the cells.
    """

    vertices: tuple[str, ...]
    positions: tuple[Position, ...]
    edges: tuple[Edge, ...]
    edge_length: float = 1.0
    grid: GridSpec | None = None
    _index: dict = field(init=False, repr=False, compare=False)
    _adj: tuple = field(init=False, repr=False, compare=False)
    _edge_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.edge_length > 0:
            raise InstanceError("edge_length must be positive")
        if len(self.positions) != len(self.vertices):
            raise InstanceError("one position per vertex required")
        index: dict[str, int] = {}
        for i, v in enumerate(self.vertices):
            if v in index:
                raise InstanceError(f"duplicate vertex id {v!r}")
            index[v] = i
        adj: list[list[int]] = [[] for _ in self.vertices]
        edge_index: dict[Edge, int] = {}
        for k, (u, v) in enumerate(self.edges):
            for x in (u, v):
                if x not in index:
                    raise InstanceError(f"edge endpoint {x!r} is not a vertex")
            if u == v:
                raise InstanceError(f"self-loop at {u!r}")
            if (u, v) != canonical_edge(u, v):
                raise InstanceError(f"edge {(u, v)!r} is not in canonical order")
            if (u, v) in edge_index:
                raise InstanceError(f"duplicate edge {(u, v)!r}")
            d = math.dist(self.positions[index[u]], self.positions[index[v]])
            if abs(d - self.edge_length) > GEOMETRY_RTOL * self.edge_length:
                raise InstanceError(
                    f"edge {u}-{v} has length {d:g}, expected {self.edge_length:g}"
                )
            edge_index[(u, v)] = k
            adj[index[u]].append(index[v])
            adj[index[v]].append(index[u])
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))
        object.__setattr__(self, "_edge_index", edge_index)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def index(self, v: str) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise InstanceError(f"unknown vertex {v!r}") from None

    def __contains__(self, v) -> bool:
        return v in self._index

    def neighbors(self, v: str) -> list[str]:
        return [self.vertices[j] for j in self._adj[self.index(v)]]

    def neighbor_indices(self, i: int) -> tuple[int, ...]:
        return self._adj[i]

    def has_edge(self, u: str, v: str) -> bool:
        return canonical_edge(u, v) in self._edge_index

    def edge_index(self, u: str, v: str) -> int:
        try:
            return self._edge_index[canonical_edge(u, v)]
        except KeyError:
            raise InstanceError(f"unknown edge {u}-{v}") from None

    def position(self, v: str) -> Position:
        return self.positions[self.index(v)]

    def components(self) -> list[int]:
        """Connected-component label for each vertex index."""
        label = [-1] * self.n_vertices
        for s in range(self.n_vertices):
            if label[s] >= 0:
                continue
            label[s] = s
            stack = [s]
            while stack:
                x = stack.pop()
                for y in self._adj[x]:
                    if label[y] < 0:
                        label[y] = s
                        stack.append(y)
        return label


@dataclass(frozen=True)
class Group:
    starts: tuple[str, ...]
    goals: tuple[str, ...]

    def __post_init__(self):
        if len(self.starts) == 0:
            raise InstanceError("group must contain at least one robot")
        if len(self.starts) != len(self.goals):
            raise InstanceError("group needs as many goals as starts")

    @property
    def size(self) -> int:
        return len(self.starts)


@dataclass(frozen=True)
class KinematicProfile:
    default_vmax: float = 1.0
    per_robot_vmax: dict = field(default_factory=dict)
    per_edge_vmax: dict = field(default_factory=dict)
    vmin: float = 0.0

    def __post_init__(self):
        values = [self.default_vmax, *self.per_robot_vmax.values(), *self.per_edge_vmax.values()]
        if any(not (v > 0 and math.isfinite(v)) for v in values):
            raise InstanceError("every vmax must be positive and finite")
        if not self.vmin >= 0:
            raise InstanceError("vmin must be non-negative")
        if self.vmin > min(values):
            raise InstanceError("vmin exceeds an applicable vmax")

    def robot_vmax(self, robot: int) -> float:
        return self.per_robot_vmax.get(robot, self.default_vmax)

    def vmax(self, robot: int, u: str, v: str) -> float:
        """Speed limit for ``robot`` on edge ``u``-``v``."""
        limit = self.robot_vmax(robot)
        edge_limit = self.per_edge_vmax.get(canonical_edge(u, v))
        return limit if edge_limit is None else min(limit, edge_limit)

    def scaled(self, c: float) -> KinematicProfile:
        return KinematicProfile(
            default_vmax=self.default_vmax * c,
            per_robot_vmax={r: v * c for r, v in self.per_robot_vmax.items()},
            per_edge_vmax={e: v * c for e, v in self.per_edge_vmax.items()},
            vmin=self.vmin * c,
        )


def delta_divides(edge_length: float, delta: float) -> bool:
    if not delta > 0:
        return False
    ratio = edge_length / delta
    n = round(ratio)
    return n >= 1 and abs(ratio - n) <= DIVISIBILITY_RTOL * ratio


def subdivisions(edge_length: float, delta: float) -> int:
    """Number of delta-segments per edge."""
    if not delta_divides(edge_length, delta):
        raise InstanceError("delta must divide edge length")
    return round(edge_length / delta)


@dataclass(frozen=True)
class Instance:
    graph: EnvironmentGraph
    groups: tuple[Group, ...]
    kinematics: KinematicProfile = field(default_factory=KinematicProfile)
    delta: float = 1.0
    epsilon: float = 1e-4
    name: str = ""

    def __post_init__(self):
        if not self.groups:
            raise InstanceError("instance needs at least one group")
        if not self.delta > 0:
            raise InstanceError("delta must be positive")
        if not self.epsilon > 0:
            raise InstanceError("epsilon must be positive")
        subdivisions(self.graph.edge_length, self.delta)
        seen_starts: set[str] = set()
        seen_goals: set[str] = set()
        for g in self.groups:
            for s in g.starts:
                self.graph.index(s)
                if s in seen_starts:
                    raise InstanceError(f"duplicate start {s!r}")
                seen_starts.add(s)
            for s in g.goals:
                self.graph.index(s)
                if s in seen_goals:
                    raise InstanceError(f"duplicate goal {s!r}")
                seen_goals.add(s)
        n = len(seen_starts)
        for r in self.kinematics.per_robot_vmax:
            if not 0 <= r < n:
                raise InstanceError(f"per_robot_vmax names unknown robot {r}")
        for e in self.kinematics.per_edge_vmax:
            if not self.graph.has_edge(*e):
                raise InstanceError(f"per_edge_vmax names unknown edge {e}")

    @property
    def n_robots(self) -> int:
        return sum(g.size for g in self.groups)

    @property
    def starts(self) -> tuple[str, ...]:
        return tuple(s for g in self.groups for s in g.starts)

    @property
    def group_of(self) -> tuple[int, ...]:
        return tuple(i for i, g in enumerate(self.groups) for _ in g.starts)

    def robots_of(self, group: int) -> range:
        first = sum(g.size for g in self.groups[:group])
        return range(first, first + self.groups[group].size)

    def replace(self, **changes) -> Instance:
        fields = dict(
            graph=self.graph, groups=self.groups, kinematics=self.kinematics,
            delta=self.delta, epsilon=self.epsilon, name=self.name,
        )
        fields.update(changes)
        return Instance(**fields)


@dataclass(frozen=True)
class DiscretePlan:
    makespan: int
    paths: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if not self.paths:
            raise InstanceError("no robots")
        if self.makespan < 0:
            raise InstanceError("makespan must be non-negative")
        for r, p in enumerate(self.paths):
            if len(p) != self.makespan + 1:
                raise InstanceError(
                    f"path {r} has length {len(p)}, expected makespan+1 = {self.makespan + 1}"
                )

    @classmethod
    def from_paths(cls, paths: Iterable[Sequence[str]]) -> DiscretePlan:
        paths = tuple(tuple(p) for p in paths)
        if not paths:
            raise InstanceError("no robots")
        return cls(len(paths[0]) - 1, paths)


def grid_vertex_id(x: int, y: int, z: int) -> str:
    return f"{x}_{y}_{z}"


def grid_to_graph(width: int, height: int, depth: int, obstacles: Iterable = (),
                  edge_length: float = 1.0) -> EnvironmentGraph:
    """One vertex per free cell; 6-connected (4-connected when depth is 1)."""
    if min(width, height, depth) < 1:
        raise InstanceError("grid dimensions must be at least 1")
    blocked = set()
    for cell in obstacles:
        x, y, z = (int(c) for c in cell)
        if not (0 <= x < width and 0 <= y < height and 0 <= z < depth):
            raise InstanceError(f"obstacle {(x, y, z)} out of range")
        if (x, y, z) in blocked:
            raise InstanceError(f"duplicate obstacle {(x, y, z)}")
        blocked.add((x, y, z))
    vertices, positions, edges = [], [], []
    for z in range(depth):
        for y in range(height):
            for x in range(width):
                if (x, y, z) in blocked:
                    continue
                vertices.append(grid_vertex_id(x, y, z))
                positions.append((x * edge_length, y * edge_length, z * edge_length))
                for nx, ny, nz in ((x + 1, y, z), (x, y + 1, z), (x, y, z + 1)):
                    if nx < width and ny < height and nz < depth and (nx, ny, nz) not in blocked:
                        edges.append(canonical_edge(grid_vertex_id(x, y, z), grid_vertex_id(nx, ny, nz)))
    spec = GridSpec(width, height, depth, tuple(sorted(blocked)))
    return EnvironmentGraph(tuple(vertices), tuple(positions), tuple(edges), edge_length, spec)


# --------------------------------------------------------------------------
# JSON formats

def load_json(text) -> object:
    if isinstance(text, (bytes, bytearray)):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not UTF-8: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _require(obj: dict, key: str, kind, where: str):
    if key not in obj:
        raise ParseError(f"{where}: missing key {key!r}")
    value = obj[key]
    if kind is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif kind is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    else:
        ok = isinstance(value, kind)
    if not ok:
        raise ParseError(f"{where}: {key!r} has wrong type")
    return value


def _optional(obj: dict, key: str, kind, where: str, default):
    return _require(obj, key, kind, where) if key in obj else default


def _id_list(value, where: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ParseError(f"{where}: expected a list of vertex ids")
    return tuple(value)


def _triple(value, kind, where: str):
    if (not isinstance(value, list) or len(value) != 3
            or not all(isinstance(c, kind) and not isinstance(c, bool) for c in value)):
        raise ParseError(f"{where}: expected a 3-element list")
    return tuple(value)


def parse_instance(text) -> Instance:
    """Parse an instance file (UTF-8 JSON); grid shorthand is expanded."""
    doc = load_json(text)
    if not isinstance(doc, dict):
        raise ParseError("instance: top level must be an object")
    name = _optional(doc, "name", str, "instance", "")
    edge_length = float(_optional(doc, "edge_length", float, "instance", 1.0))
    if ("grid" in doc) == ("graph" in doc):
        raise ParseError("instance: exactly one of 'grid' or 'graph' is required")
    if "grid" in doc:
        g = _require(doc, "grid", dict, "instance")
        obstacles = [_triple(o, int, "grid.obstacles") for o in _optional(g, "obstacles", list, "grid", [])]
        graph = grid_to_graph(
            _require(g, "width", int, "grid"), _require(g, "height", int, "grid"),
            _require(g, "depth", int, "grid"), obstacles, edge_length,
        )
    else:
        g = _require(doc, "graph", dict, "instance")
        vertices, positions = [], []
        for k, v in enumerate(_require(g, "vertices", list, "graph")):
            if not isinstance(v, dict):
                raise ParseError(f"graph.vertices[{k}]: expected an object")
            vertices.append(_require(v, "id", str, f"graph.vertices[{k}]"))
            positions.append(tuple(float(c) for c in _triple(v.get("pos"), (int, float), f"graph.vertices[{k}].pos")))
        edges = []
        for k, e in enumerate(_require(g, "edges", list, "graph")):
            if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, str) for x in e)):
                raise ParseError(f"graph.edges[{k}]: expected [id, id]")
            edges.append(canonical_edge(*e))
        graph = EnvironmentGraph(tuple(vertices), tuple(positions), tuple(edges), edge_length)

    groups = []
    for k, g in enumerate(_require(doc, "groups", list, "instance")):
        if not isinstance(g, dict):
            raise ParseError(f"groups[{k}]: expected an object")
        groups.append(Group(_id_list(g.get("starts"), f"groups[{k}].starts"),
                            _id_list(g.get("goals"), f"groups[{k}].goals")))

    kin = _optional(doc, "kinematics", dict, "instance", {})
    per_robot = {}
    for key, v in _optional(kin, "per_robot_vmax", dict, "kinematics", {}).items():
        try:
            r = int(key)
        except ValueError:
            raise ParseError(f"kinematics.per_robot_vmax: bad robot index {key!r}") from None
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError("kinematics.per_robot_vmax: values must be numbers")
        per_robot[r] = float(v)
    per_edge = {}
    for k, item in enumerate(_optional(kin, "per_edge_vmax", list, "kinematics", [])):
        where = f"kinematics.per_edge_vmax[{k}]"
        if not isinstance(item, dict):
            raise ParseError(f"{where}: expected an object")
        e = item.get("edge")
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, str) for x in e)):
            raise ParseError(f"{where}: expected edge [id, id]")
        per_edge[canonical_edge(*e)] = float(_require(item, "vmax", float, where))
    kinematics = KinematicProfile(
        default_vmax=float(_optional(kin, "default_vmax", float, "kinematics", 1.0)),
        per_robot_vmax=per_robot,
        per_edge_vmax=per_edge,
        vmin=float(_optional(kin, "vmin", float, "kinematics", 0.0)),
    )
    return Instance(
        graph=graph,
        groups=tuple(groups),
        kinematics=kinematics,
        delta=float(_require(doc, "delta", float, "instance")),
        epsilon=float(_optional(doc, "epsilon", float, "instance", 1e-4)),
        name=name,
    )


def instance_to_dict(instance: Instance) -> dict:
    g = instance.graph
    doc: dict = {"name": instance.name}
    if g.grid is not None:
        doc["grid"] = {
            "width": g.grid.width, "height": g.grid.height, "depth": g.grid.depth,
            "obstacles": [list(o) for o in g.grid.obstacles],
        }
    else:
        doc["graph"] = {
            "vertices": [{"id": v, "pos": list(p)} for v, p in zip(g.vertices, g.positions)],
            "edges": [list(e) for e in g.edges],
        }
    doc["edge_length"] = g.edge_length
    doc["groups"] = [{"starts": list(gr.starts), "goals": list(gr.goals)} for gr in instance.groups]
    kin = instance.kinematics
    k: dict = {"default_vmax": kin.default_vmax}
    if kin.per_robot_vmax:
        k["per_robot_vmax"] = {str(r): v for r, v in sorted(kin.per_robot_vmax.items())}
    if kin.per_edge_vmax:
        k["per_edge_vmax"] = [{"edge": list(e), "vmax": v} for e, v in sorted(kin.per_edge_vmax.items())]
    k["vmin"] = kin.vmin
    doc["kinematics"] = k
    doc["delta"] = instance.delta
    doc["epsilon"] = instance.epsilon
    return doc


def _pretty(obj, level: int = 0) -> str:
    # objects are expanded, arrays of objects get one item per line, and
    # everything else stays on one line
    pad = "  " * (level + 1)
    if isinstance(obj, dict) and obj:
        items = [f"{pad}{json.dumps(k)}: {_pretty(v, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * level + "}"
    if isinstance(obj, list) and obj and isinstance(obj[0], (list, dict)):
        items = [pad + json.dumps(v) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + "  " * level + "]"
    return json.dumps(obj)


def serialize_instance(instance: Instance) -> str:
    return _pretty(instance_to_dict(instance)) + "\n"


def serialize_plan(plan: DiscretePlan) -> str:
    rows = ",\n".join("    " + json.dumps(list(p)) for p in plan.paths)
    return f'{{\n  "makespan": {plan.makespan},\n  "paths": [\n{rows}\n  ]\n}}\n'


def parse_plan(text) -> DiscretePlan:
    doc = load_json(text)
    if not isinstance(doc, dict):
        raise ParseError("plan: top level must be an object")
    makespan = _require(doc, "makespan", int, "plan")
    paths = _require(doc, "paths", list, "plan")
    return DiscretePlan(makespan, tuple(_id_list(p, f"paths[{k}]") for k, p in enumerate(paths)))


# --------------------------------------------------------------------------
# validation

class VertexConflict(NamedTuple):
    robots: tuple[int, int]
    vertex: str
    t: int


class EdgeConflict(NamedTuple):
    robots: tuple[int, int]
    edge: Edge
    t: int


class ContinuityViolation(NamedTuple):
    robot: int
    t: int
    detail: str


class GoalFailure(NamedTuple):
    group: int
    missing: tuple[str, ...]
    unexpected: tuple[str, ...]


@dataclass
class ValidationReport:
    vertex_conflicts: list[VertexConflict] = field(default_factory=list)
    edge_conflicts: list[EdgeConflict] = field(default_factory=list)
    continuity_violations: list[ContinuityViolation] = field(default_factory=list)
    goal_failures: list[GoalFailure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.vertex_conflicts or self.edge_conflicts
                    or self.continuity_violations or self.goal_failures)

    def __bool__(self) -> bool:
        # truthy when there are findings, so ``if report:`` reads naturally
        return not self.ok

    def summary(self) -> str:
        parts = [f"{len(items)} {name}" for name, items in (
            ("vertex conflicts", self.vertex_conflicts), ("edge conflicts", self.edge_conflicts),
            ("continuity violations", self.continuity_violations),
            ("goal failures", self.goal_failures)) if items]
        return ", ".join(parts) or "valid"


def validate_plan(instance: Instance, plan: DiscretePlan) -> ValidationReport:
    report = ValidationReport()
    graph = instance.graph
    starts = instance.starts
    if len(plan.paths) != len(starts):
        report.continuity_violations.append(ContinuityViolation(
            -1, 0, f"plan has {len(plan.paths)} paths for {len(starts)} robots"))
        return report
    known = True
    for r, path in enumerate(plan.paths):
        if path[0] != starts[r]:
            report.continuity_violations.append(
                ContinuityViolation(r, 0, f"starts at {path[0]!r}, expected {starts[r]!r}"))
        for t, v in enumerate(path):
            if v not in graph:
                report.continuity_violations.append(ContinuityViolation(r, t, f"unknown vertex {v!r}"))
                known = False
        for t in range(plan.makespan):
            u, v = path[t], path[t + 1]
            if u != v and u in graph and v in graph and not graph.has_edge(u, v):
                report.continuity_violations.append(
                    ContinuityViolation(r, t, f"jump {u!r} -> {v!r} is not an edge"))
    if not known:
        return report

    for t in range(plan.makespan + 1):
        at: dict[str, int] = {}
        for r, path in enumerate(plan.paths):
            v = path[t]
            if v in at:
                report.vertex_conflicts.append(VertexConflict((at[v], r), v, t))
            else:
                at[v] = r
    for t in range(plan.makespan):
        moves: dict[tuple[str, str], int] = {}
        for r, path in enumerate(plan.paths):
            u, v = path[t], path[t + 1]
            if u == v:
                continue
            other = moves.get((v, u))
            if other is not None:
                report.edge_conflicts.append(EdgeConflict((other, r), canonical_edge(u, v), t))
            moves[(u, v)] = r

    for gi, g in enumerate(instance.groups):
        final = {plan.paths[r][-1] for r in instance.robots_of(gi)}
        goals = set(g.goals)
        if final != goals:
            report.goal_failures.append(GoalFailure(
                gi, tuple(sorted(goals - final)), tuple(sorted(final - goals))))
    return report
