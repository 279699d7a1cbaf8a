"""Continuous trajectories and independent safety / velocity checks.

Robots move at constant speed between consecutive waypoints and hold at
their last waypoint until the makespan. The segment-exclusivity check splits
every edge into delta-long pieces: a robot is either exactly on a point (a
vertex or an interior subdivision point) or strictly inside one open piece,
and no two robots may share a point or a piece at the same instant.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .model import EnvironmentGraph, KinematicProfile, canonical_edge, subdivisions
from .stn import Schedule
from .tpg import Location, MarkerId, TemporalPlanGraph, location_position

SPEED_RTOL = 1e-9
POINT_TOL = 1e-9      # in units of delta
DEFAULT_DT = 0.01


class Waypoint(NamedTuple):
    position: tuple[float, float, float]
    time: float
    location: Location


@dataclass(frozen=True)
class Trajectory:
    robot: int
    waypoints: tuple[Waypoint, ...]

    def __post_init__(self):
        if not self.waypoints:
            raise ValueError("trajectory needs at least one waypoint")
        if self.waypoints[0].time != 0:
            raise ValueError("trajectory must start at time 0")
        for a, b in zip(self.waypoints, self.waypoints[1:]):
            if b.time < a.time or (b.time == a.time and a.position != b.position):
                raise ValueError(f"waypoint times of robot {self.robot} not increasing")

    @property
    def end_time(self) -> float:
        return self.waypoints[-1].time

    @property
    def times(self) -> list[float]:
        return [w.time for w in self.waypoints]


def schedule_to_trajectories(tpg: TemporalPlanGraph, schedule: Schedule) -> list[Trajectory]:
    """One waypoint per event at its scheduled time, held to the makespan."""
    graph = tpg.graph
    if graph is None:
        raise ValueError("the plan graph carries no environment graph")
    out = []
    for seq in tpg.sequences:
        wps = []
        for ev in seq:
            t = schedule.event_time(tpg.index(ev.robot, ev.seq))
            if not math.isfinite(t):
                raise ValueError(f"no time for event {ev.label}")
            pos = location_position(graph, ev.location, tpg.subdivisions)
            wps.append(Waypoint(tuple(float(x) for x in pos), t, ev.location))
        if schedule.makespan > wps[-1].time:
            wps.append(Waypoint(wps[-1].position, schedule.makespan, wps[-1].location))
        out.append(Trajectory(seq[0].robot, tuple(wps)))
    return out


def sample(trajectory: Trajectory, t: float) -> tuple[float, float, float]:
    wps = trajectory.waypoints
    if not 0 <= t <= trajectory.end_time:
        raise ValueError(f"time {t} outside [0, {trajectory.end_time}]")
    k = bisect.bisect_right(trajectory.times, t) - 1
    if k >= len(wps) - 1:
        return wps[-1].position
    a, b = wps[k], wps[k + 1]
    f = (t - a.time) / (b.time - a.time)
    return tuple(pa + f * (pb - pa) for pa, pb in zip(a.position, b.position))


# --------------------------------------------------------------------------
# reports

class SegmentViolation(NamedTuple):
    robots: tuple[int, int]
    segment: str
    time: float       # first sample time of the episode
    until: float      # last sample time of the episode


class VelocityViolation(NamedTuple):
    robot: int
    segment: tuple[str, str]    # waypoint locations
    speed: float
    limit: float


@dataclass
class SafetyReport:
    segment_violations: list[SegmentViolation] = field(default_factory=list)
    min_distance: float | None = None
    min_distance_at: tuple[float, tuple[int, int]] | None = None
    velocity_violations: list[VelocityViolation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.segment_violations and not self.velocity_violations

    def merge(self, other: SafetyReport) -> SafetyReport:
        a, b = self, other
        return SafetyReport(a.segment_violations + b.segment_violations,
                            a.min_distance if a.min_distance is not None else b.min_distance,
                            a.min_distance_at if a.min_distance_at is not None
                            else b.min_distance_at,
                            a.velocity_violations + b.velocity_violations)

    def to_dict(self) -> dict:
        at = None
        if self.min_distance_at is not None:
            at = {"t": self.min_distance_at[0], "robots": list(self.min_distance_at[1])}
        return {
            "pass": self.passed,
            "min_distance": self.min_distance,
            "min_distance_at": at,
            "segment_violations": [
                {"robots": list(v.robots), "segment": v.segment, "t": v.time, "until": v.until}
                for v in self.segment_violations],
            "velocity_violations": [
                {"robot": v.robot, "segment": [str(x) for x in v.segment], "speed": v.speed,
                 "limit": v.limit} for v in self.velocity_violations],
        }


# --------------------------------------------------------------------------
# segment exclusivity

def _motion_edge(graph: EnvironmentGraph, a: Location, b: Location):
    if isinstance(a, MarkerId):
        return a.u, a.v
    if isinstance(b, MarkerId):
        return b.u, b.v
    if a == b:
        return None
    if not graph.has_edge(a, b):
        raise ValueError(f"consecutive waypoints {a!r} and {b!r} are not on one edge")
    return canonical_edge(a, b)


class _Keys:
    """Integer codes for points and open pieces of the subdivided graph."""

    def __init__(self, graph: EnvironmentGraph, n: int):
        self.graph, self.n = graph, n
        self.nv, self.m = graph.n_vertices, len(graph.edges)
        self.interval_base = self.nv + self.m * (n - 1)

    def point(self, e: int, s: int) -> int:
        if s == 0:
            return self.graph.index(self.graph.edges[e][0])
        if s == self.n:
            return self.graph.index(self.graph.edges[e][1])
        return self.nv + e * (self.n - 1) + (s - 1)

    def label(self, key: int) -> str:
        g = self.graph
        if key < self.nv:
            return g.vertices[key]
        if key < self.interval_base:
            e, s = divmod(key - self.nv, self.n - 1)
            u, v = g.edges[e]
            return str(MarkerId(u, v, s + 1))
        e, j = divmod(key - self.interval_base, self.n)
        u, v = g.edges[e]
        return f"({u},{v})[{j}]"


def _robot_keys(traj: Trajectory, graph: EnvironmentGraph, keys: _Keys, delta: float,
                times: np.ndarray) -> np.ndarray:
    wps = traj.waypoints
    wt = np.array([w.time for w in wps])
    n_seg = len(wps) - 1
    if n_seg == 0:
        return np.full(len(times), graph.index(wps[0].location), dtype=np.int64)
    edge = np.full(n_seg, -1, dtype=np.int64)
    sa = np.zeros(n_seg)
    sb = np.zeros(n_seg)
    hold_key = np.zeros(n_seg, dtype=np.int64)
    for k in range(n_seg):
        a, b = wps[k], wps[k + 1]
        uv = _motion_edge(graph, a.location, b.location)
        if uv is None:
            hold_key[k] = graph.index(a.location)
            continue
        e = graph.edge_index(*uv)
        pu = graph.position(uv[0])
        edge[k] = e
        sa[k] = math.dist(a.position, pu) / delta
        sb[k] = math.dist(b.position, pu) / delta
    idx = np.clip(np.searchsorted(wt, times, side="right") - 1, 0, n_seg - 1)
    span = wt[idx + 1] - wt[idx]
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(span > 0, (times - wt[idx]) / span, 1.0)
    f = np.clip(f, 0.0, 1.0)
    s = sa[idx] + f * (sb[idx] - sa[idx])
    near = np.rint(s)
    on_point = np.abs(s - near) <= POINT_TOL
    e = edge[idx]
    out = np.empty(len(times), dtype=np.int64)
    n = keys.n
    near_i = near.astype(np.int64)
    for k in np.flatnonzero(on_point & (e >= 0)):
        out[k] = keys.point(int(e[k]), int(near_i[k]))
    inside = ~on_point & (e >= 0)
    out[inside] = keys.interval_base + e[inside] * n + np.floor(s[inside]).astype(np.int64)
    held = e < 0
    out[held] = hold_key[idx[held]]
    return out


def sample_times(trajectories: Sequence[Trajectory], dt: float) -> np.ndarray:
    """Multiples of ``dt`` up to the makespan plus every waypoint time."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    end = max(t.end_time for t in trajectories)
    grid = np.arange(int(math.floor(end / dt + 1e-9)) + 1) * dt
    grid = grid[grid <= end]
    wp = np.array([w.time for t in trajectories for w in t.waypoints])
    return np.unique(np.concatenate([grid, wp, [end]]))


def positions_at(traj: Trajectory, times: np.ndarray) -> np.ndarray:
    """Vectorized :func:`sample`; times past the end hold the final position."""
    wt = np.array(traj.times)
    pos = np.array([w.position for w in traj.waypoints], dtype=np.float64)
    if len(wt) == 1:
        return np.repeat(pos, len(times), axis=0)
    return np.stack([np.interp(times, wt, pos[:, c]) for c in range(pos.shape[1])], axis=1)


def check_safety(trajectories: Sequence[Trajectory], graph: EnvironmentGraph, delta: float,
                 dt: float = DEFAULT_DT) -> SafetyReport:
    """Segment exclusivity (asserted) and minimum Euclidean distance (reported)."""
    report = SafetyReport()
    if not trajectories:
        return report
    times = sample_times(trajectories, dt)
    n = subdivisions(graph.edge_length, delta)
    keys = _Keys(graph, n)
    K = np.stack([_robot_keys(t, graph, keys, delta, times) for t in trajectories])
    robots = [t.robot for t in trajectories]

    order = np.argsort(K, axis=0, kind="stable")
    sk = np.take_along_axis(K, order, axis=0)
    dup_r, dup_c = np.nonzero(sk[1:] == sk[:-1])
    hits: dict[tuple, list[int]] = {}
    for r, c in zip(dup_r, dup_c):
        a, b = sorted((robots[order[r, c]], robots[order[r + 1, c]]))
        hits.setdefault((a, b, int(sk[r, c])), []).append(int(c))
    for (a, b, key), cols in hits.items():
        cols.sort()
        start = prev = cols[0]
        for c in cols[1:] + [None]:
            if c is not None and c == prev + 1:
                prev = c
                continue
            report.segment_violations.append(
                SegmentViolation((a, b), keys.label(key), float(times[start]), float(times[prev])))
            if c is not None:
                start = prev = c
    report.segment_violations.sort(key=lambda v: (v.time, v.robots))

    if len(trajectories) > 1:
        P = np.stack([positions_at(t, times) for t in trajectories], axis=1)   # (M, R, 3)
        R = P.shape[1]
        iu, ju = np.triu_indices(R, 1)
        best, best_at = math.inf, None
        chunk = max(1, 2_000_000 // max(1, len(iu)))
        for c0 in range(0, len(times), chunk):
            block = P[c0:c0 + chunk]
            d = np.linalg.norm(block[:, iu, :] - block[:, ju, :], axis=2)
            k = int(np.argmin(d))
            tk, pk = divmod(k, len(iu))
            if d[tk, pk] < best:
                best = float(d[tk, pk])
                best_at = (float(times[c0 + tk]), (robots[iu[pk]], robots[ju[pk]]))
        report.min_distance, report.min_distance_at = best, best_at
    return report


def check_velocity(trajectories: Sequence[Trajectory], graph: EnvironmentGraph,
                   kinematics: KinematicProfile) -> SafetyReport:
    """Every straight piece at most as fast as its robot/edge limit allows."""
    report = SafetyReport()
    for traj in trajectories:
        for a, b in zip(traj.waypoints, traj.waypoints[1:]):
            uv = _motion_edge(graph, a.location, b.location)
            d = math.dist(a.position, b.position)
            if uv is None or d == 0:
                continue
            limit = kinematics.vmax(traj.robot, *uv)
            dt = b.time - a.time
            speed = math.inf if dt <= 0 else d / dt
            if speed > limit * (1 + SPEED_RTOL):
                report.velocity_violations.append(
                    VelocityViolation(traj.robot, (a.location, b.location), speed, limit))
    return report
