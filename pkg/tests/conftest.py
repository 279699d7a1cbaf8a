import itertools
from pathlib import Path

import pytest
from hypothesis import strategies as st

from tapf.model import EnvironmentGraph, Group, Instance, grid_to_graph, parse_instance

DATA = Path(__file__).parent / "data"
FIG1_PATHS = (("A", "B", "C", "D", "E"), ("B", "C", "F", "C", "D"))


@pytest.fixture
def fig1():
    return parse_instance((DATA / "fig1.json").read_bytes())


def line_graph(n: int, edge_length: float = 1.0) -> EnvironmentGraph:
    """Vertices A, B, C, ... on the x axis."""
    names = [chr(ord("A") + i) for i in range(n)]
    pos = tuple((i * edge_length, 0.0, 0.0) for i in range(n))
    return EnvironmentGraph(tuple(names), pos, tuple(zip(names, names[1:])), edge_length)


def instance_on(graph, groups, **kw) -> Instance:
    return Instance(graph, tuple(Group(tuple(s), tuple(g)) for s, g in groups), **kw)


@st.composite
def small_grid_instances(draw, max_vertices=9, max_robots=3, max_groups=2):
    """Random grid instances with at most ``max_vertices`` free cells."""
    dims = draw(st.sampled_from([(2, 2, 1), (3, 1, 1), (4, 1, 1), (5, 1, 1), (3, 2, 1),
                                 (4, 2, 1), (3, 3, 1), (2, 2, 2)]))
    w, h, d = dims
    cells = list(itertools.product(range(w), range(h), range(d)))
    n_obs = draw(st.integers(0, max(0, min(2, len(cells) - 2))))
    obstacles = draw(st.permutations(cells))[:n_obs]
    graph = grid_to_graph(w, h, d, obstacles)
    if graph.n_vertices > max_vertices or graph.n_vertices < 2:
        graph = grid_to_graph(w, h, d)
    n = draw(st.integers(1, min(max_robots, graph.n_vertices // 2 or 1)))
    k = draw(st.integers(1, min(max_groups, n)))
    verts = list(graph.vertices)
    starts = draw(st.permutations(verts))[:n]
    goals = draw(st.permutations(verts))[:n]
    cuts = sorted(draw(st.lists(st.integers(1, n - 1), min_size=k - 1, max_size=k - 1,
                                unique=True))) if k > 1 else []
    bounds = [0, *cuts, n]
    groups = [(starts[a:b], goals[a:b]) for a, b in zip(bounds, bounds[1:])]
    return instance_on(graph, groups)
