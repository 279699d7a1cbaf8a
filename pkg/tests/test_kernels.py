import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tapf import _core
from tapf.flow import Reservations, build_network, max_flow

from conftest import small_grid_instances

pytestmark = pytest.mark.skipif(_core.BACKEND != "cython", reason="compiled kernels not built")


def test_fallback_is_selectable():
    assert _core.backend_module("python").__name__ == "tapf._pure"
    assert _core.backend_module("cython").__name__ == "tapf._kernels"
    with pytest.raises(ValueError):
        _core.backend_module("fortran")


@settings(max_examples=60, deadline=None)
@given(small_grid_instances(), st.integers(0, 5), st.booleans())
def test_flow_twins_agree(inst, T, reserve):
    group = inst.groups[0]
    res = None
    if reserve and len(inst.groups) > 1:
        other = inst.groups[1]
        res = Reservations.from_paths(inst.graph, [[s] * (T + 1) for s in other.starts])
    net = build_network(inst.graph, group, T, reservations=res)
    py = max_flow(net, backend="python")
    cy = max_flow(net, backend="cython")
    assert py[0] == cy[0]
    assert np.array_equal(py[1], cy[1])


@st.composite
def weighted_graphs(draw):
    n = draw(st.integers(1, 8))
    m = draw(st.integers(0, 20))
    node = st.integers(0, n - 1)
    src = np.array(draw(st.lists(node, min_size=m, max_size=m)), dtype=np.int32)
    dst = np.array(draw(st.lists(node, min_size=m, max_size=m)), dtype=np.int32)
    w = np.array(draw(st.lists(st.integers(-3, 6).map(float), min_size=m, max_size=m)))
    return n, src, dst, w, draw(st.integers(-1, n - 1))


@settings(max_examples=200, deadline=None)
@given(weighted_graphs())
def test_bellman_ford_twins_agree(case):
    n, src, dst, w, source = case
    out = []
    for name in ("python", "cython"):
        dist = np.empty(n)
        pred = np.empty(n, dtype=np.int32)
        last = _core.backend_module(name).bellman_ford(n, src, dst, w, source, dist, pred)
        out.append((last, dist, pred))
    (l1, d1, p1), (l2, d2, p2) = out
    assert l1 == l2
    if l1 < 0:
        assert np.array_equal(d1, d2)
        reached = np.isfinite(d1)
        assert np.array_equal(p1[reached], p2[reached])
