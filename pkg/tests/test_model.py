import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tapf.errors import InstanceError, ParseError
from tapf.model import (DiscretePlan, EnvironmentGraph, KinematicProfile, delta_divides,
                        grid_to_graph, instance_to_dict, parse_instance, parse_plan,
                        serialize_instance, serialize_plan, validate_plan)

from conftest import FIG1_PATHS, instance_on, line_graph, small_grid_instances


def test_fig1_parses(fig1):
    assert fig1.n_robots == 2
    assert len(fig1.groups) == 2
    assert set(fig1.graph.vertices) == set("ABCDEF")
    assert set(fig1.graph.edges) == {("A", "B"), ("B", "C"), ("C", "D"), ("D", "E"), ("C", "F")}
    assert fig1.group_of == (0, 1)


def test_delta_must_divide_edge_length(fig1):
    doc = instance_to_dict(fig1)
    doc["delta"] = 0.3
    with pytest.raises(InstanceError, match="delta must divide edge length"):
        parse_instance(json.dumps(doc))


@pytest.mark.parametrize("delta,ok", [(1.0, True), (0.5, True), (0.25, True), (0.1, True),
                                      (0.3, False), (2.0, False), (0.0, False)])
def test_delta_divides(delta, ok):
    assert delta_divides(1.0, delta) is ok


def test_grid_shorthand_smallest():
    inst = parse_instance(json.dumps({
        "grid": {"width": 2, "height": 1, "depth": 1},
        "groups": [{"starts": ["0_0_0"], "goals": ["1_0_0"]}], "delta": 1.0}))
    assert inst.graph.n_vertices == 2
    assert len(inst.graph.edges) == 1


def test_syntax_error_reports_position():
    with pytest.raises(ParseError, match="line 2 column"):
        parse_instance('{"name": "x",\n  "grid": }')


@pytest.mark.parametrize("bad", [
    {"graph": {"vertices": [{"id": "A", "pos": [0, 0, 0]}], "edges": [["A", "Z"]]}},
    {"graph": {"vertices": [{"id": "A", "pos": [0, 0, 0]}, {"id": "A", "pos": [1, 0, 0]}],
               "edges": []}},
])
def test_semantic_errors(bad):
    doc = {**bad, "groups": [{"starts": ["A"], "goals": ["A"]}], "delta": 1.0}
    with pytest.raises(InstanceError):
        parse_instance(json.dumps(doc))


def test_duplicate_start_rejected():
    g = line_graph(3)
    with pytest.raises(InstanceError, match="duplicate start"):
        instance_on(g, [(["A"], ["B"]), (["A"], ["C"])])


def test_grid_counts_examples():
    g = grid_to_graph(2, 1, 1)
    assert (g.n_vertices, len(g.edges)) == (2, 1)
    ring = grid_to_graph(3, 3, 1, {(1, 1, 0)})
    assert (ring.n_vertices, len(ring.edges)) == (8, 8)
    assert "1_1_0" not in ring


def test_grid_obstacle_out_of_range():
    with pytest.raises(InstanceError, match="out of range"):
        grid_to_graph(2, 2, 1, [(2, 0, 0)])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(1, 3), st.data())
def test_grid_vertex_and_edge_counts(w, h, d, data):
    cells = [(x, y, z) for x in range(w) for y in range(h) for z in range(d)]
    obstacles = set(data.draw(st.lists(st.sampled_from(cells), unique=True)))
    g = grid_to_graph(w, h, d, obstacles, edge_length=0.5)
    assert g.n_vertices == w * h * d - len(obstacles)
    free = set(cells) - obstacles
    expected = sum((x + dx, y + dy, z + dz) in free for (x, y, z) in free
                   for dx, dy, dz in ((1, 0, 0), (0, 1, 0), (0, 0, 1)))
    assert len(g.edges) == expected


def test_geometry_must_match_edge_length():
    with pytest.raises(InstanceError):
        EnvironmentGraph(("A", "B"), ((0, 0, 0), (2, 0, 0)), (("A", "B"),), 1.0)


def test_validate_fig1_solution(fig1):
    assert validate_plan(fig1, DiscretePlan.from_paths(FIG1_PATHS)).ok


def test_validate_head_on_swap():
    inst = instance_on(line_graph(2), [(["A"], ["B"]), (["B"], ["A"])])
    report = validate_plan(inst, DiscretePlan.from_paths([("A", "B"), ("B", "A")]))
    assert [(c.edge, c.t) for c in report.edge_conflicts] == [(("A", "B"), 0)]
    assert not report.vertex_conflicts


def test_validate_vertex_conflict(fig1):
    inst = instance_on(fig1.graph, [(["A"], ["C"]), (["F"], ["D"])])
    report = validate_plan(inst, DiscretePlan.from_paths([("A", "B", "C"), ("F", "C", "C")]))
    assert [(c.vertex, c.t) for c in report.vertex_conflicts] == [("C", 2)]


def test_validate_continuity_and_goals(fig1):
    plan = DiscretePlan.from_paths([("A", "C", "D", "E", "E"), ("B", "C", "F", "C", "C")])
    report = validate_plan(fig1, plan)
    assert report.continuity_violations and report.goal_failures
    assert report   # findings make the report truthy


def test_plan_round_trip_fig1():
    plan = DiscretePlan.from_paths(FIG1_PATHS)
    assert parse_plan(serialize_plan(plan)) == plan


def test_plan_errors():
    with pytest.raises(InstanceError):
        parse_plan('{"makespan": 3, "paths": [["A", "B"]]}')
    with pytest.raises(InstanceError, match="no robots"):
        parse_plan('{"makespan": 1, "paths": []}')


@settings(max_examples=40, deadline=None)
@given(small_grid_instances())
def test_instance_round_trip(inst):
    assert parse_instance(serialize_instance(inst)) == inst


def test_instance_round_trip_with_kinematics(fig1):
    kin = KinematicProfile(1.5, {1: 0.5}, {("C", "D"): 0.25}, 0.1)
    inst = fig1.replace(kinematics=kin, delta=0.5, epsilon=0.01)
    assert parse_instance(serialize_instance(inst)) == inst


def test_kinematic_limits():
    kin = KinematicProfile(1.0, {1: 0.5}, {("C", "D"): 0.5})
    assert kin.vmax(0, "D", "C") == 0.5
    assert kin.vmax(1, "A", "B") == 0.5
    assert kin.vmax(0, "A", "B") == 1.0
    with pytest.raises(InstanceError):
        KinematicProfile(1.0, vmin=2.0)
