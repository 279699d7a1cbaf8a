"""Discrete plan -> TPG -> STN -> schedule -> trajectories, and schedule files."""
from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import InstanceError, ParseError
from .model import DiscretePlan, EnvironmentGraph, Instance, load_json, validate_plan
from .stn import Schedule, TemporalNetwork, build_stn, earliest_schedule
from .tpg import TemporalPlanGraph, location_position, parse_location, tpg_from_plan
from .trajectory import Trajectory, Waypoint, schedule_to_trajectories


@dataclass(frozen=True)
class PostprocessResult:
    tpg: TemporalPlanGraph
    stn: TemporalNetwork
    schedule: Schedule
    trajectories: list[Trajectory]
    delta: float


def postprocess(instance: Instance, plan: DiscretePlan, *, delta: float | None = None,
                epsilon: float | None = None, validate: bool = True,
                backend=None) -> PostprocessResult:
    """Earliest continuous schedule for ``plan``.

    ``delta`` and ``epsilon`` default to the instance values.
    """
    if validate:
        report = validate_plan(instance, plan)
        if report:
            raise InstanceError(f"plan is not valid: {report.summary()}")
    delta = instance.delta if delta is None else delta
    epsilon = instance.epsilon if epsilon is None else epsilon
    tpg = tpg_from_plan(plan, instance.graph, delta)
    stn = build_stn(tpg, instance.kinematics, epsilon)
    schedule = earliest_schedule(stn, backend)
    return PostprocessResult(tpg, stn, schedule, schedule_to_trajectories(tpg, schedule), delta)


def schedule_to_dict(result: PostprocessResult) -> dict:
    """Schedule file content; events sorted by time, then robot.

    ``delta`` is recorded so a checker uses the subdivision the schedule
    was built with.
    """
    tpg, sched = result.tpg, result.schedule
    rows = []
    for i, ev in enumerate(tpg.events):
        pos = location_position(tpg.graph, ev.location, tpg.subdivisions)
        rows.append((sched.event_time(i), ev.robot, ev.seq, {
            "robot": ev.robot, "location": str(ev.location),
            "pos": [float(x) for x in pos], "time": sched.event_time(i)}))
    rows.sort(key=lambda r: r[:3])
    return {"makespan": sched.makespan, "delta": result.delta,
            "events": [r[3] for r in rows]}


def serialize_schedule(result: PostprocessResult) -> str:
    obj = schedule_to_dict(result)
    events = ",\n".join("  " + json.dumps(e) for e in obj["events"])
    return (f'{{"makespan": {json.dumps(obj["makespan"])}, "delta": {json.dumps(obj["delta"])},\n'
            f' "events": [\n{events}\n ]}}\n')


@dataclass(frozen=True)
class LoadedSchedule:
    makespan: float
    delta: float | None
    trajectories: list[Trajectory]


def parse_schedule(text, graph: EnvironmentGraph, n_robots: int | None = None) -> LoadedSchedule:
    """Read a schedule file back into held-to-makespan trajectories."""
    obj = load_json(text)
    if not isinstance(obj, dict) or "events" not in obj or "makespan" not in obj:
        raise ParseError("schedule needs 'makespan' and 'events'")
    try:
        makespan = float(obj["makespan"])
        delta = None if obj.get("delta") is None else float(obj["delta"])
        per_robot: dict[int, list[Waypoint]] = {}
        for k, ev in enumerate(obj["events"]):
            robot = int(ev["robot"])
            pos = tuple(float(x) for x in ev["pos"])
            if len(pos) != 3:
                raise ParseError(f"event {k}: pos must have three coordinates")
            loc = parse_location(str(ev["location"]), graph)
            per_robot.setdefault(robot, []).append(Waypoint(pos, float(ev["time"]), loc))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed schedule event: {exc}") from None
    robots = sorted(per_robot)
    if n_robots is not None and robots != list(range(n_robots)):
        raise ParseError(f"schedule covers robots {robots}, expected 0..{n_robots - 1}")
    trajectories = []
    for r in robots:
        wps = sorted(per_robot[r], key=lambda w: w.time)
        if wps[-1].time < makespan:
            wps.append(Waypoint(wps[-1].position, makespan, wps[-1].location))
        try:
            trajectories.append(Trajectory(r, tuple(wps)))
        except ValueError as exc:
            raise ParseError(str(exc)) from None
    return LoadedSchedule(makespan, delta, trajectories)
