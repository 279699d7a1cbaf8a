import pytest
from hypothesis import given, settings

from tapf.cbm import (Conflict, ConflictKind, brute_force_solve, detect_first_conflict, solve,
                      solve_detailed)
from tapf.errors import Infeasible, SolveTimeout, StateCapExceeded
from tapf.flow import FlowConstraintSet, min_group_horizon
from tapf.model import validate_plan

from conftest import FIG1_PATHS, instance_on, line_graph, small_grid_instances

# horizon cap for random small instances; every oracle optimum seen is far below it
SMALL_T_CAP = 7


def test_detect_edge_conflict():
    c = detect_first_conflict([("A", "B"), ("B", "A")], (0, 1))
    assert (c.kind, c.time, c.location) == (ConflictKind.EDGE, 0, (("A", "B"), ("B", "A")))


def test_detect_vertex_conflict():
    c = detect_first_conflict([("A", "B", "C"), ("F", "C", "C")], (0, 1))
    assert (c.kind, c.location, c.time) == (ConflictKind.VERTEX, ("C",), 2)


def test_fig1_solution_has_no_conflict():
    assert detect_first_conflict(list(FIG1_PATHS), (0, 1)) is None


def test_same_group_is_never_a_conflict():
    assert detect_first_conflict([("A", "B"), ("B", "A")], (0, 0)) is None


def test_earliest_conflict_first():
    paths = [("A", "B", "C"), ("B", "A", "A"), ("D", "D", "C")]
    c = detect_first_conflict(paths, (0, 1, 2))
    assert c.kind == ConflictKind.EDGE and c.time == 0


def test_vertex_before_edge_then_lowest_robot():
    paths = [("A", "B"), ("B", "A"), ("C", "C"), ("C", "D"), ("E", "F"), ("E", "G")]
    c = detect_first_conflict(paths, (0, 1, 2, 3, 4, 5))
    assert c.kind == ConflictKind.VERTEX and c.participants == ((2, 2), (3, 3))


def test_detect_rotation():
    paths = [("A", "B"), ("B", "C"), ("C", "A")]
    c = detect_first_conflict(paths, (0, 0, 1))
    assert c.kind == ConflictKind.ROTATION
    assert [r for _, r in c.participants] == [0, 1, 2]
    assert len(c.branches()) == 3


def test_rotation_inside_one_group_is_ignored():
    assert detect_first_conflict([("A", "B"), ("B", "C"), ("C", "A")], (0, 0, 0)) is None


def test_detect_rejects_ragged_paths():
    with pytest.raises(ValueError):
        detect_first_conflict([("A", "B"), ("A",)], (0, 1))


@pytest.mark.parametrize("conflict,plans", [
    (Conflict(ConflictKind.VERTEX, ((0, 0), (1, 1)), ("C",), 2),
     [[("A", "B", "C")], [("F", "C", "C")]]),
    (Conflict(ConflictKind.EDGE, ((0, 0), (1, 1)), (("A", "B"), ("B", "A")), 0),
     [[("A", "B")], [("B", "A")]]),
])
def test_branches_exclude_the_conflict(conflict, plans):
    # the conflicting paths violate every child's new constraint
    for gi, kind, args in conflict.branches():
        cons = FlowConstraintSet()
        cons = cons.forbid_vertex(*args) if kind == "vertex" else cons.forbid_move(*args[0], args[1])
        assert not any(cons.allows(p) for p in plans[gi])


def test_solve_fig1(fig1):
    plan = solve(fig1)
    assert plan.makespan == 4
    assert validate_plan(fig1, plan).ok
    assert plan.paths == FIG1_PATHS


def test_opposing_singletons_on_a_line_are_infeasible():
    inst = instance_on(line_graph(2), [(["A"], ["B"]), (["B"], ["A"])])
    with pytest.raises(Infeasible):
        solve(inst)
    assert brute_force_solve(inst) is None


def test_single_group_needs_no_branching(fig1):
    inst = instance_on(fig1.graph, [(["A", "B"], ["E", "F"])])
    result = solve_detailed(inst)
    assert result.stats.branches == 0
    assert result.plan.makespan == min_group_horizon(inst.graph, inst.groups[0]) == 3


def test_solve_is_deterministic(fig1):
    assert solve(fig1) == solve(fig1)


def test_time_limit():
    inst = instance_on(line_graph(4), [(["B"], ["D"]), (["C"], ["C"])])
    with pytest.raises(SolveTimeout):
        solve(inst, t_cap=30, time_limit=0.05)


def test_brute_force_examples(fig1):
    assert brute_force_solve(fig1, allow_rotations=False).makespan == 4
    line = instance_on(line_graph(3), [(["A"], ["C"])])
    assert brute_force_solve(line).makespan == 2
    with pytest.raises(StateCapExceeded):
        brute_force_solve(fig1, state_cap=10)


def test_brute_force_rotation_mode(fig1):
    # three robots of different groups can only finish by rotating on the triangle
    from test_flow import triangle
    inst = instance_on(triangle(), [(["A"], ["B"]), (["B"], ["C"]), (["C"], ["A"])])
    assert brute_force_solve(inst, allow_rotations=True).makespan == 1
    assert brute_force_solve(inst, allow_rotations=False) is None
    with pytest.raises(Infeasible):
        solve(inst, t_cap=3)


@settings(max_examples=60, deadline=None)
@given(small_grid_instances())
def test_solve_matches_oracle(inst):
    oracle = brute_force_solve(inst, allow_rotations=False)
    try:
        plan = solve(inst, t_cap=SMALL_T_CAP)
    except Infeasible:
        assert oracle is None
        return
    assert oracle is not None and plan.makespan == oracle.makespan
    assert validate_plan(inst, plan).ok
    assert detect_first_conflict(plan.paths, inst.group_of) is None


@settings(max_examples=30, deadline=None)
@given(small_grid_instances(max_robots=3, max_groups=3))
def test_oracle_plans_are_valid(inst):
    plan = brute_force_solve(inst, allow_rotations=False)
    if plan is not None:
        assert validate_plan(inst, plan).ok
        assert detect_first_conflict(plan.paths, inst.group_of) is None
