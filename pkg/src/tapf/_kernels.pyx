# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; must stay result-identical to ``_pure.py``."""
import numpy as np

from libc.math cimport INFINITY

cdef long long INF_COST = 1LL << 60
cdef double RELAX_TOL = 1e-11


cdef long long _push(int[::1] parent, const int[::1] arc_head, int[::1] cap,
                     int source, int sink) noexcept:
    cdef long long bottleneck = INF_COST
    cdef int v = sink
    cdef int a
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


def max_flow_bfs(int n_nodes, const int[::1] adj_start, const int[::1] adj_arc,
                 const int[::1] arc_head, int[::1] cap, int source, int sink, long long limit):
    cdef int[::1] parent = np.empty(n_nodes, dtype=np.int32)
    cdef int[::1] seen = np.empty(n_nodes, dtype=np.int32)
    cdef int[::1] queue = np.empty(n_nodes, dtype=np.int32)
    cdef long long flow = 0
    cdef int qh, qt, u, v, a, k
    cdef bint found
    while flow < limit:
        parent[:] = -1
        seen[:] = 0
        seen[source] = 1
        qh = 0
        qt = 0
        queue[qt] = source
        qt += 1
        found = False
        while qh < qt and not found:
            u = queue[qh]
            qh += 1
            for k in range(adj_start[u], adj_start[u + 1]):
                a = adj_arc[k]
                v = arc_head[a]
                if cap[a] > 0 and not seen[v]:
                    seen[v] = 1
                    parent[v] = a
                    if v == sink:
                        found = True
                        break
                    queue[qt] = v
                    qt += 1
        if not found:
            break
        flow += _push(parent, arc_head, cap, source, sink)
    return flow


def max_flow_spfa(int n_nodes, const int[::1] adj_start, const int[::1] adj_arc,
                  const int[::1] arc_head, int[::1] cap, const long long[::1] cost,
                  int source, int sink, long long limit):
    cdef long long[::1] dist = np.empty(n_nodes, dtype=np.int64)
    cdef int[::1] parent = np.empty(n_nodes, dtype=np.int32)
    cdef int[::1] inq = np.empty(n_nodes, dtype=np.int32)
    # each node is queued at most once at a time, so a ring of n_nodes slots suffices
    cdef int[::1] ring = np.empty(n_nodes, dtype=np.int32)
    cdef long long flow = 0, total = 0, du, nd, pushed
    cdef int qh, size, u, v, a, k
    while flow < limit:
        dist[:] = INF_COST
        parent[:] = -1
        inq[:] = 0
        dist[source] = 0
        qh = 0
        size = 1
        ring[0] = source
        inq[source] = 1
        while size > 0:
            u = ring[qh]
            qh += 1
            if qh == n_nodes:
                qh = 0
            size -= 1
            inq[u] = 0
            du = dist[u]
            for k in range(adj_start[u], adj_start[u + 1]):
                a = adj_arc[k]
                if cap[a] > 0:
                    v = arc_head[a]
                    nd = du + cost[a]
                    if nd < dist[v]:
                        dist[v] = nd
                        parent[v] = a
                        if not inq[v]:
                            inq[v] = 1
                            ring[(qh + size) % n_nodes] = v
                            size += 1
        if dist[sink] >= INF_COST:
            break
        pushed = _push(parent, arc_head, cap, source, sink)
        flow += pushed
        total += pushed * dist[sink]
    return flow, total


def bellman_ford(int n_nodes, const int[::1] arc_src, const int[::1] arc_dst,
                 const double[::1] arc_w, int source, double[::1] dist, int[::1] pred):
    cdef Py_ssize_t n_arcs = arc_src.shape[0]
    cdef Py_ssize_t a
    cdef int sweep, v, last = -1
    cdef double du, nd
    for v in range(n_nodes):
        dist[v] = 0.0 if source < 0 else INFINITY
        pred[v] = -1
    if source >= 0:
        dist[source] = 0.0
    for sweep in range(n_nodes + 1):
        last = -1
        for a in range(n_arcs):
            du = dist[arc_src[a]]
            if du == INFINITY:
                continue
            nd = du + arc_w[a]
            v = arc_dst[a]
            if nd < dist[v] - RELAX_TOL:
                dist[v] = nd
                pred[v] = <int>a
                last = v
        if last < 0:
            break
    return last
