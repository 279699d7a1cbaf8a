"""Single-group feasibility on a time-expanded flow network.

Layout of a network with horizon ``T`` over ``n`` vertices and ``m`` edges:

* nodes ``in(v, t)`` and ``out(v, t)`` for every vertex and ``t = 0..T``,
  joined by a unit *split* arc that makes vertices exclusive;
* a *wait* arc ``out(v, t) -> in(v, t + 1)``;
* per edge ``{a, b}`` and step ``t`` a swap gadget: entry arcs from
  ``out(a, t)`` and ``out(b, t)`` into a merge node, one unit bottleneck arc,
  and exit arcs to ``in(a, t + 1)`` and ``in(b, t + 1)``. Only one robot can
  use the edge per step, so head-on swaps are impossible. A unit that leaves
  through its own endpoint is equivalent to a wait and is read as one;
* source arcs into ``in(s, 0)`` per start, sink arcs out of ``out(g, T)``
  per goal.

Forward arcs are numbered in exactly that order (source, split, wait,
gadget, sink) and stored at even residual positions; ``2f + 1`` is the
reverse of forward arc ``f``. Augmenting-path ties are broken by this order.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import _core
from .errors import Infeasible, InstanceError
from .model import EnvironmentGraph, Group

MOVE_COST = 1


@dataclass(frozen=True)
class FlowConstraintSet:
    """Vertex-time and directed-move prohibitions for one group."""

    forbidden_vertices: frozenset = frozenset()   # {(vertex, t)}
    forbidden_moves: frozenset = frozenset()      # {((u, v), t)}

    def __len__(self) -> int:
        return len(self.forbidden_vertices) + len(self.forbidden_moves)

    def forbid_vertex(self, v: str, t: int) -> FlowConstraintSet:
        return FlowConstraintSet(self.forbidden_vertices | {(v, t)}, self.forbidden_moves)

    def forbid_move(self, u: str, v: str, t: int) -> FlowConstraintSet:
        return FlowConstraintSet(self.forbidden_vertices, self.forbidden_moves | {((u, v), t)})

    def allows(self, path) -> bool:
        """True when ``path`` (a vertex sequence) violates no constraint."""
        for t, v in enumerate(path):
            if (v, t) in self.forbidden_vertices:
                return False
        for t in range(len(path) - 1):
            if ((path[t], path[t + 1]), t) in self.forbidden_moves:
                return False
        return True


@dataclass(frozen=True)
class Reservations:
    """Space-time cells used by other groups; the flow search avoids them.

    ``vertices`` holds ``(vertex_index, t)``; ``moves`` holds directed
    ``(u_index, v_index, t)`` traversals.
    """

    vertices: frozenset = frozenset()
    moves: frozenset = frozenset()

    @classmethod
    def from_paths(cls, graph: EnvironmentGraph, paths) -> Reservations:
        verts, moves = set(), set()
        for path in paths:
            idx = [graph.index(v) for v in path]
            for t, i in enumerate(idx):
                verts.add((i, t))
            for t in range(len(idx) - 1):
                if idx[t] != idx[t + 1]:
                    moves.add((idx[t], idx[t + 1], t))
        return cls(frozenset(verts), frozenset(moves))


@dataclass
class TimeExpandedNetwork:
    graph: EnvironmentGraph
    group: Group
    horizon: int
    n_nodes: int
    source: int
    sink: int
    tail: np.ndarray        # per residual arc
    head: np.ndarray        # per residual arc
    cap: np.ndarray         # per residual arc, initial residual capacities
    adj_start: np.ndarray
    adj_arc: np.ndarray
    cost: np.ndarray | None = None
    _edge_ends: np.ndarray = field(default=None, repr=False)

    # node and arc numbering ---------------------------------------------
    @property
    def n_forward_arcs(self) -> int:
        return len(self.tail) // 2

    def node_in(self, v: int, t: int) -> int:
        return 2 * (t * self.graph.n_vertices + v)

    def node_out(self, v: int, t: int) -> int:
        return 2 * (t * self.graph.n_vertices + v) + 1

    def split_arc(self, v: int, t: int) -> int:
        return self.group.size + t * self.graph.n_vertices + v

    def wait_arc(self, v: int, t: int) -> int:
        n = self.graph.n_vertices
        return self.group.size + (self.horizon + 1) * n + t * n + v

    def gadget_arc(self, e: int, t: int, j: int) -> int:
        """``j``: 0/1 entry from first/second endpoint, 2 bottleneck, 3/4 exit."""
        n = self.graph.n_vertices
        return self.group.size + (2 * self.horizon + 1) * n + (t * len(self.graph.edges) + e) * 5 + j

    def move_arc(self, u: int, v: int, t: int) -> int:
        """Entry arc used by a robot moving from vertex index u to v during step t."""
        e = self.graph.edge_index(self.graph.vertices[u], self.graph.vertices[v])
        return self.gadget_arc(e, t, 0 if self._edge_ends[e, 0] == u else 1)

    def sink_arc(self, k: int) -> int:
        return self.gadget_arc(0, self.horizon, 0) + k

    @property
    def n_layers(self) -> int:
        return self.horizon + 1


def _forward_arcs(graph: EnvironmentGraph, group: Group, T: int):
    n = graph.n_vertices
    m = len(graph.edges)
    gadget_base = 2 * n * (T + 1)
    source = gadget_base + 2 * m * T
    sink = source + 1
    v = np.arange(n, dtype=np.int64)
    ends = np.array([[graph.index(a), graph.index(b)] for a, b in graph.edges], dtype=np.int64).reshape(m, 2)

    tails, heads = [], []
    starts = np.array([graph.index(s) for s in group.starts], dtype=np.int64)
    goals = np.array([graph.index(g) for g in group.goals], dtype=np.int64)
    tails.append(np.full(len(starts), source))
    heads.append(2 * starts)
    for t in range(T + 1):
        tails.append(2 * (t * n + v))
        heads.append(2 * (t * n + v) + 1)
    for t in range(T):
        tails.append(2 * (t * n + v) + 1)
        heads.append(2 * ((t + 1) * n + v))
    if m:
        a, b = ends[:, 0], ends[:, 1]
        for t in range(T):
            g1 = gadget_base + 2 * (t * m + np.arange(m))
            g2 = g1 + 1
            block_t = np.stack([2 * (t * n + a) + 1, 2 * (t * n + b) + 1, g1, g2, g2], axis=1)
            block_h = np.stack([g1, g1, g2, 2 * ((t + 1) * n + a), 2 * ((t + 1) * n + b)], axis=1)
            tails.append(block_t.reshape(-1))
            heads.append(block_h.reshape(-1))
    tails.append(2 * (T * n + goals) + 1)
    heads.append(np.full(len(goals), sink))
    return np.concatenate(tails), np.concatenate(heads), source, sink, ends


@dataclass(frozen=True)
class NetworkLayout:
    """Arc layout of a network; depends only on (graph, group, horizon).

    The conflict tree rebuilds the same network many times with different
    capacities and costs, so callers may compute the layout once and pass it
    to :func:`build_network`.
    """

    graph: EnvironmentGraph
    group: Group
    horizon: int
    tail: np.ndarray
    head: np.ndarray
    adj_start: np.ndarray
    adj_arc: np.ndarray
    ends: np.ndarray
    source: int
    sink: int
    move_cost: np.ndarray       # per forward arc, before penalties


def network_layout(graph: EnvironmentGraph, group: Group, horizon: int) -> NetworkLayout:
    T = horizon
    ftail, fhead, source, sink, ends = _forward_arcs(graph, group, T)
    n_fwd = len(ftail)
    tail = np.empty(2 * n_fwd, dtype=np.int32)
    head = np.empty(2 * n_fwd, dtype=np.int32)
    tail[0::2] = ftail
    tail[1::2] = fhead
    head[0::2] = fhead
    head[1::2] = ftail
    n_nodes = sink + 1
    order = np.argsort(tail, kind="stable").astype(np.int32)
    adj_start = np.zeros(n_nodes + 1, dtype=np.int32)
    np.cumsum(np.bincount(tail, minlength=n_nodes), out=adj_start[1:])
    move_cost = np.zeros(n_fwd, dtype=np.int64)
    m = len(graph.edges)
    if T and m:
        first_gadget = group.size + (2 * T + 1) * graph.n_vertices
        move_cost[first_gadget:first_gadget + 5 * T * m].reshape(-1, 5)[:, 0:2] = MOVE_COST
    for arr in (tail, head, adj_start, order, move_cost):
        arr.flags.writeable = False
    return NetworkLayout(graph, group, T, tail, head, adj_start, order, ends, source, sink,
                         move_cost)


def build_network(graph: EnvironmentGraph, group: Group, horizon: int,
                  constraints: FlowConstraintSet | None = None,
                  reservations: Reservations | None = None,
                  layout: NetworkLayout | None = None) -> TimeExpandedNetwork:
    """Time-expanded network for ``group`` at ``horizon``.

    With ``reservations`` the network carries arc costs: one unit per move and
    a dominating penalty per use of a cell reserved by another group, so that
    :func:`max_flow` returns a cheapest maximum flow.
    """
    if horizon < 0:
        raise InstanceError("horizon must be non-negative")
    T = horizon
    if layout is None:
        layout = network_layout(graph, group, T)
    elif (layout.graph, layout.group, layout.horizon) != (graph, group, T):
        raise ValueError("layout was built for a different network")
    st = layout
    n_fwd = len(st.move_cost)
    cap = np.zeros(2 * n_fwd, dtype=np.int32)
    cap[0::2] = 1
    net = TimeExpandedNetwork(graph, group, T, st.sink + 1, st.source, st.sink, st.tail,
                              st.head, cap, st.adj_start, st.adj_arc, None, st.ends)

    if constraints is not None:
        for v, t in constraints.forbidden_vertices:
            if not 0 <= t <= T:
                raise InstanceError(f"vertex constraint time {t} outside horizon {T}")
            cap[2 * net.split_arc(graph.index(v), t)] = 0
        for (u, v), t in constraints.forbidden_moves:
            if not 0 <= t < T:
                raise InstanceError(f"move constraint time {t} outside horizon {T}")
            cap[2 * net.move_arc(graph.index(u), graph.index(v), t)] = 0

    if reservations is not None:
        penalty = group.size * max(T, 1) * MOVE_COST + 1
        fcost = st.move_cost.copy()
        for vi, t in reservations.vertices:
            if 0 <= t <= T:
                fcost[net.split_arc(vi, t)] += penalty
        for ui, wi, t in reservations.moves:
            if 0 <= t < T:
                # another group moves u -> w; charge our w -> u entry
                fcost[net.move_arc(wi, ui, t)] += penalty
        cost = np.empty(2 * n_fwd, dtype=np.int64)
        cost[0::2] = fcost
        cost[1::2] = -fcost
        net.cost = cost
    return net


def max_flow(network: TimeExpandedNetwork, backend=None) -> tuple[int, np.ndarray]:
    """Integral maximum flow; returns ``(value, flow per forward arc)``.

    Without costs this is the shortest-augmenting-path method (breadth-first,
    fewest arcs); with costs each augmentation follows a cheapest residual
    path, which yields a minimum-cost maximum flow.
    """
    kernels = _core if backend is None else _core.backend_module(backend)
    cap = network.cap.copy()
    limit = network.group.size
    if network.cost is None:
        value = kernels.max_flow_bfs(network.n_nodes, network.adj_start, network.adj_arc,
                                     network.head, cap, network.source, network.sink, limit)
    else:
        value, _ = kernels.max_flow_spfa(network.n_nodes, network.adj_start, network.adj_arc,
                                         network.head, cap, network.cost, network.source,
                                         network.sink, limit)
    # reverse residual capacities start at zero, so they equal the forward flow
    return int(value), cap[1::2].copy()


def extract_paths(network: TimeExpandedNetwork, arc_flows: np.ndarray) -> list[tuple[str, ...]]:
    """Decompose a full flow into one path per group robot (start order).

    Rotations inside the group are replaced by waits (see
    :func:`canonicalize_rotations`).
    """
    graph, group, T = network.graph, network.group, network.horizon
    for k in range(group.size):
        if arc_flows[k] <= 0:
            raise InstanceError(f"flow does not cover robot {k}; value below group size")
    incident: list[list[tuple[int, int]]] = [[] for _ in graph.vertices]
    for e, (a, b) in enumerate(network._edge_ends):
        incident[a].append((e, 0))
        incident[b].append((e, 1))
    paths = []
    for s in group.starts:
        v = graph.index(s)
        seq = [v]
        for t in range(T):
            if arc_flows[network.wait_arc(v, t)] > 0:
                seq.append(v)
                continue
            for e, j in incident[v]:
                if arc_flows[network.gadget_arc(e, t, j)] > 0:
                    a, b = network._edge_ends[e]
                    v = int(a) if arc_flows[network.gadget_arc(e, t, 3)] > 0 else int(b)
                    break
            else:
                raise InstanceError(f"flow leaves vertex {graph.vertices[v]!r} at t={t} nowhere")
            seq.append(v)
        paths.append(seq)
    for k, p in enumerate(paths):
        if arc_flows[network.split_arc(p[-1], T)] <= 0 or graph.vertices[p[-1]] not in group.goals:
            raise InstanceError(f"robot {k} does not end on a goal")
    paths = canonicalize_rotations(paths)
    return [tuple(graph.vertices[i] for i in p) for p in paths]


def canonicalize_rotations(paths: list[list]) -> list[list]:
    """Replace every cyclic exchange of positions by waits.

    At step ``t``, robots ``r1..rk`` form a cycle when each moves onto the
    vertex the next one occupies. Making all of them wait and handing each
    the remaining path of the robot that would have arrived keeps every
    per-timestep occupancy (and so the goal set) unchanged.
    """
    paths = [list(p) for p in paths]
    if not paths:
        return paths
    T = len(paths[0]) - 1
    for t in range(T):
        at = {p[t]: r for r, p in enumerate(paths)}

        def successor(r):
            p = paths[r]
            if p[t] == p[t + 1]:
                return None
            nxt = at.get(p[t + 1])
            if nxt is None or paths[nxt][t] == paths[nxt][t + 1]:
                return None
            return nxt

        done = set()
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
            if r is None or r not in pos:
                continue
            cycle = chain[pos[r]:]
            suffixes = [paths[c][t + 1:] for c in cycle]
            for i, c in enumerate(cycle):
                # c stays put and inherits the suffix of its predecessor, which
                # was heading to c's vertex
                paths[c] = paths[c][:t + 1] + suffixes[i - 1]
    return paths


def solve_group(graph: EnvironmentGraph, group: Group, horizon: int,
                constraints: FlowConstraintSet | None = None,
                reservations: Reservations | None = None,
                backend=None, layout: NetworkLayout | None = None) -> list[tuple[str, ...]] | None:
    """Paths for the group at ``horizon`` under constraints, or None."""
    net = build_network(graph, group, horizon, constraints, reservations, layout)
    value, flows = max_flow(net, backend)
    if value < group.size:
        return None
    return extract_paths(net, flows)


def bfs_distances(graph: EnvironmentGraph, sources) -> list[float]:
    dist = [float("inf")] * graph.n_vertices
    queue = deque()
    for s in sources:
        i = graph.index(s)
        dist[i] = 0
        queue.append(i)
    while queue:
        x = queue.popleft()
        for y in graph.neighbor_indices(x):
            if dist[y] == float("inf"):
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def default_t_cap(graph: EnvironmentGraph, n_robots: int) -> int:
    return 4 * graph.n_vertices + n_robots


def group_connected(graph: EnvironmentGraph, group: Group) -> bool:
    """Every connected component holds as many group starts as goals."""
    label = graph.components()
    balance: dict[int, int] = {}
    for s in group.starts:
        c = label[graph.index(s)]
        balance[c] = balance.get(c, 0) + 1
    for g in group.goals:
        c = label[graph.index(g)]
        balance[c] = balance.get(c, 0) - 1
    return all(b == 0 for b in balance.values())


def min_group_horizon(graph: EnvironmentGraph, group: Group, t_cap: int | None = None) -> int:
    """Smallest horizon at which the group alone has a full flow.

    Horizons below the largest start-to-nearest-goal (and goal-to-nearest-start)
    distance cannot carry a full flow and are skipped.
    """
    if t_cap is None:
        t_cap = default_t_cap(graph, group.size)
    if not group_connected(graph, group):
        raise Infeasible("group starts and goals lie in different components")
    from_goals = bfs_distances(graph, group.goals)
    from_starts = bfs_distances(graph, group.starts)
    lower = int(max(max(from_goals[graph.index(s)] for s in group.starts),
                    max(from_starts[graph.index(g)] for g in group.goals)))
    for T in range(lower, t_cap + 1):
        value, _ = max_flow(build_network(graph, group, T))
        if value == group.size:
            return T
    raise Infeasible(f"group has no full flow up to horizon cap {t_cap}")
