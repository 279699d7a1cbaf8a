from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from tapf.cbm import solve
from tapf.errors import Infeasible, InstanceError, TpgCyclic
from tapf.model import DiscretePlan
from tapf.tpg import (Event, MarkerId, build_tpg, compress_paths, insert_markers,
                      location_position, parse_location, tpg_from_plan, tpg_to_dict,
                      topological_order)

from conftest import FIG1_PATHS, line_graph, small_grid_instances


def summary(seq):
    return [(str(e.location), e.discrete_time) for e in seq]


def label_edges(tpg, edges):
    return {(tpg.events[a].label, tpg.events[b].label) for a, b in edges}


def test_compress_waits():
    [seq] = compress_paths(DiscretePlan.from_paths([("A", "A", "B")]))
    assert summary(seq) == [("A", 0), ("B", 2)]


def test_compress_fig1_second_robot():
    seq = compress_paths(DiscretePlan.from_paths(FIG1_PATHS))[1]
    assert [e.discrete_time for e in seq] == [0, 1, 2, 3, 4]
    assert [e.seq for e in seq] == [0, 1, 2, 3, 4]


def test_compress_all_wait():
    [seq] = compress_paths(DiscretePlan.from_paths([("A", "A", "A")]))
    assert summary(seq) == [("A", 0)]


def test_one_marker_per_half():
    seqs = compress_paths(DiscretePlan.from_paths([("A", "B")]))
    [seq] = insert_markers(line_graph(2), seqs, 0.5)
    assert summary(seq) == [("A", 0), ("m(A,B,1)", Fraction(1, 2)), ("B", 1)]


def test_delta_equal_to_edge_length_adds_nothing():
    seqs = compress_paths(DiscretePlan.from_paths(FIG1_PATHS))
    assert insert_markers(line_graph(6), [seqs[0]], 1.0) == [seqs[0]]


def test_quarter_markers_and_direction():
    graph = line_graph(2)
    [fwd] = insert_markers(graph, compress_paths(DiscretePlan.from_paths([("A", "A", "B")])), 0.25)
    assert summary(fwd)[1:4] == [("m(A,B,1)", Fraction(5, 4)), ("m(A,B,2)", Fraction(3, 2)),
                                 ("m(A,B,3)", Fraction(7, 4))]
    [back] = insert_markers(graph, compress_paths(DiscretePlan.from_paths([("B", "A")])), 0.25)
    assert [e.location.k for e in back[1:4]] == [3, 2, 1]


def test_markers_need_divisible_delta():
    seqs = compress_paths(DiscretePlan.from_paths([("A", "B")]))
    with pytest.raises(InstanceError):
        insert_markers(line_graph(2), seqs, 0.3)


def test_marker_position_and_parsing():
    graph = line_graph(3, edge_length=2.0)
    m = MarkerId("A", "B", 3)
    assert location_position(graph, m, 4) == (1.5, 0.0, 0.0)
    assert parse_location("m(A,B,3)", graph) == m
    assert parse_location("B", graph) == "B"
    with pytest.raises(InstanceError):
        MarkerId("B", "A", 1)
    with pytest.raises(InstanceError):
        location_position(graph, m, 3)


def test_fig1_type2_edges(fig1):
    tpg = tpg_from_plan(DiscretePlan.from_paths(FIG1_PATHS), fig1.graph, 1.0)
    assert len(tpg.events) == 10
    assert len(tpg.type1) == 8
    assert label_edges(tpg, tpg.type2) == {
        ("r1.arr(C)@1", "r0.arr(B)@1"),
        ("r1.arr(F)@2", "r0.arr(C)@2"),
        ("r0.arr(D)@3", "r1.arr(C)@3"),
        ("r0.arr(E)@4", "r1.arr(D)@4"),
    }


def test_single_robot_has_no_type2():
    graph = line_graph(4)
    tpg = tpg_from_plan(DiscretePlan.from_paths([("A", "B", "C", "B")]), graph, 0.5)
    assert tpg.type2 == ()
    assert topological_order(tpg) == list(range(len(tpg.events)))


def rotation_sequences():
    moves = [("A", "B"), ("B", "C"), ("C", "A")]
    return [[Event(r, 0, a, Fraction(0)), Event(r, 1, b, Fraction(1))]
            for r, (a, b) in enumerate(moves)]


def test_three_robot_rotation_is_cyclic():
    with pytest.raises(TpgCyclic):
        build_tpg(rotation_sequences())


def test_topological_order_respects_fig1_type2(fig1):
    tpg = tpg_from_plan(DiscretePlan.from_paths(FIG1_PATHS), fig1.graph, 1.0)
    order = topological_order(tpg)
    labels = [tpg.events[i].label for i in order]
    assert labels.index("r1.arr(C)@1") < labels.index("r0.arr(B)@1")
    pos = {i: k for k, i in enumerate(order)}
    assert all(pos[a] < pos[b] for a, b in tpg.type1 + tpg.type2)


def test_equal_visit_times_rejected():
    seqs = [[Event(0, 0, "A", Fraction(0)), Event(0, 1, "B", Fraction(1))],
            [Event(1, 0, "C", Fraction(0)), Event(1, 1, "B", Fraction(1))]]
    with pytest.raises(InstanceError):
        build_tpg(seqs)


def test_misplaced_event_rejected():
    with pytest.raises(InstanceError):
        build_tpg([[Event(1, 0, "A", Fraction(0))]])


def test_dump_uses_topological_indices(fig1):
    tpg = tpg_from_plan(DiscretePlan.from_paths(FIG1_PATHS), fig1.graph, 0.5)
    dump = tpg_to_dict(tpg)
    assert len(dump["events"]) == len(tpg.events) == 18
    assert dump["events"][0] == {"robot": 0, "seq": 0, "location": "A", "dtime": 0}
    assert all(a < b for a, b in dump["type1"] + dump["type2"])
    assert any(e["dtime"] == 0.5 for e in dump["events"])


@settings(max_examples=40, deadline=None)
@given(small_grid_instances(), st.sampled_from([1.0, 0.5, 0.25]))
def test_invariants_on_solved_plans(inst, delta):
    try:
        plan = solve(inst, t_cap=6)
    except Infeasible:
        assume(False)
    tpg = tpg_from_plan(plan, inst.graph, delta)
    n = 1 if delta == 1.0 else round(1 / delta)
    moves = sum(1 for p in plan.paths for a, b in zip(p, p[1:]) if a != b)
    assert len(tpg.events) == inst.n_robots + moves * n
    for a, b in tpg.type2:
        ea, eb = tpg.events[a], tpg.events[b]
        assert ea.robot != eb.robot
        assert ea.discrete_time <= eb.discrete_time
    chains = {}
    for a, b in tpg.type1:
        ea, eb = tpg.events[a], tpg.events[b]
        assert ea.robot == eb.robot and eb.seq == ea.seq + 1
        chains[ea.robot] = chains.get(ea.robot, 0) + 1
    assert all(chains.get(r, 0) == len(s) - 1 for r, s in enumerate(tpg.sequences))
    assert sorted(topological_order(tpg)) == list(range(len(tpg.events)))
