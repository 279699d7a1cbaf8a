"""Pure-Python kernels; the reference twin of ``_kernels.pyx``.

Both modules must produce identical results for identical inputs. The flow
kernels work on a residual network in forward-star form: arc ``a`` and its
reverse ``a ^ 1`` are stored as a pair, ``adj_start``/``adj_arc`` list the
arcs leaving each node in construction order, ``cap`` is mutated in place.
"""
from collections import deque

INF_COST = 1 << 60
RELAX_TOL = 1e-11


def _push(parent, arc_head, cap, source, sink):
    # walk the parent arcs back from the sink and push one bottleneck unit
    bottleneck = INF_COST
    v = sink
    while v != source:
        a = parent[v]
        if cap[a] < bottleneck:
            bottleneck = cap[a]
        v = arc_head[a ^ 1]
    v = sink
    while v != source:
        a = parent[v]
        cap[a] -= bottleneck
        cap[a ^ 1] += bottleneck
        v = arc_head[a ^ 1]
    return bottleneck


def max_flow_bfs(n_nodes, adj_start, adj_arc, arc_head, cap, source, sink, limit):
    """Shortest (fewest-arc) augmenting paths until ``limit`` units or no path."""
    adj_start = adj_start.tolist()
    adj_arc = adj_arc.tolist()
    heads = arc_head.tolist()
    residual = cap.tolist()
    flow = 0
    while flow < limit:
        parent = [-1] * n_nodes
        seen = [False] * n_nodes
        seen[source] = True
        queue = deque([source])
        found = False
        while queue and not found:
            u = queue.popleft()
            for k in range(adj_start[u], adj_start[u + 1]):
                a = adj_arc[k]
                v = heads[a]
                if residual[a] > 0 and not seen[v]:
                    seen[v] = True
                    parent[v] = a
                    if v == sink:
                        found = True
                        break
                    queue.append(v)
        if not found:
            break
        flow += _push(parent, heads, residual, source, sink)
    cap[:] = residual
    return flow


def max_flow_spfa(n_nodes, adj_start, adj_arc, arc_head, cap, cost, source, sink, limit):
    """Successive cheapest augmenting paths (FIFO label-correcting search).

    Returns ``(flow, total_cost)``.
    """
    adj_start = adj_start.tolist()
    adj_arc = adj_arc.tolist()
    heads = arc_head.tolist()
    residual = cap.tolist()
    costs = cost.tolist()
    flow = 0
    total = 0
    while flow < limit:
        dist = [INF_COST] * n_nodes
        parent = [-1] * n_nodes
        inq = [False] * n_nodes
        dist[source] = 0
        queue = deque([source])
        inq[source] = True
        while queue:
            u = queue.popleft()
            inq[u] = False
            du = dist[u]
            for k in range(adj_start[u], adj_start[u + 1]):
                a = adj_arc[k]
                if residual[a] > 0:
                    v = heads[a]
                    nd = du + costs[a]
                    if nd < dist[v]:
                        dist[v] = nd
                        parent[v] = a
                        if not inq[v]:
                            inq[v] = True
                            queue.append(v)
        if dist[sink] >= INF_COST:
            break
        pushed = _push(parent, heads, residual, source, sink)
        flow += pushed
        total += pushed * dist[sink]
    cap[:] = residual
    return flow, total


def bellman_ford(n_nodes, arc_src, arc_dst, arc_w, source, dist, pred):
    """Sweep-based relaxation bounded by ``n_nodes + 1`` sweeps.

    ``source < 0`` starts every node at distance 0 (virtual source). Fills
    ``dist``/``pred`` in place and returns -1, or a node whose distance was
    still dropping in the final sweep (it lies on or behind a negative cycle).
    """
    src = arc_src.tolist()
    dst = arc_dst.tolist()
    w = arc_w.tolist()
    inf = float("inf")
    d = [0.0 if source < 0 else inf] * n_nodes
    if source >= 0:
        d[source] = 0.0
    p = [-1] * n_nodes
    last = -1
    for sweep in range(n_nodes + 1):
        last = -1
        for a in range(len(src)):
            du = d[src[a]]
            if du == inf:
                continue
            nd = du + w[a]
            v = dst[a]
            if nd < d[v] - RELAX_TOL:
                d[v] = nd
                p[v] = a
                last = v
        if last < 0:
            break
    dist[:] = d
    pred[:] = p
    return last
