"""SVG snapshots: one panel per z-layer, one group element per frame."""
from __future__ import annotations

import xml.etree.ElementTree as ET
from typing import Sequence

from ..model import Instance
from ..trajectory import Trajectory, sample

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#17becf", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22")
SCALE = 40.0        # pixels per edge length
MARGIN = 1.0        # in edge lengths
GAP = 1.0


def _color(group: int) -> str:
    return PALETTE[group % len(PALETTE)]


def render_svg(instance: Instance, trajectories: Sequence[Trajectory],
               frame_times: Sequence[float]) -> str:
    graph = instance.graph
    L = graph.edge_length
    makespan = max((t.end_time for t in trajectories), default=0.0)
    for t in frame_times:
        if not 0 <= t <= makespan:
            raise ValueError(f"frame time {t} outside [0, {makespan}]")

    layers = sorted({round(p[2] / L) for p in graph.positions})
    xs = [p[0] / L for p in graph.positions]
    ys = [p[1] / L for p in graph.positions]
    grid = graph.grid
    if grid is not None:
        xs += [0, grid.width - 1]
        ys += [0, grid.height - 1]
        layers = list(range(grid.depth))
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    panel_w = x1 - x0 + 2 * MARGIN
    panel_h = y1 - y0 + 2 * MARGIN
    offset = {z: i * (panel_w + GAP) for i, z in enumerate(layers)}

    def to_px(p):
        z = round(p[2] / L)
        z = min(layers, key=lambda q: abs(q - z))
        px = (offset[z] + p[0] / L - x0 + MARGIN) * SCALE
        py = (y1 - p[1] / L + MARGIN) * SCALE     # y grows upwards in the world
        return f"{px:.3f}", f"{py:.3f}"

    width = (len(layers) * panel_w + (len(layers) - 1) * GAP) * SCALE
    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", version="1.1",
                     width=f"{width:.0f}", height=f"{panel_h * SCALE:.0f}")
    ET.SubElement(svg, "title").text = instance.name or "instance"

    scene = ET.SubElement(svg, "g", id="scene")
    for z in layers:
        ET.SubElement(scene, "rect", x=f"{offset[z] * SCALE:.3f}", y="0",
                      width=f"{panel_w * SCALE:.3f}", height=f"{panel_h * SCALE:.3f}",
                      fill="white", stroke="#999999")
        ET.SubElement(scene, "text", x=f"{(offset[z] + 0.2) * SCALE:.3f}",
                      y=f"{0.6 * SCALE:.3f}", fill="#555555").text = f"z={z}"
    if grid is not None:
        for (x, y, z) in grid.obstacles:
            px, py = to_px((x * L, y * L, z * L))
            ET.SubElement(scene, "rect", x=f"{float(px) - SCALE / 2:.3f}",
                          y=f"{float(py) - SCALE / 2:.3f}", width=f"{SCALE:.3f}",
                          height=f"{SCALE:.3f}", fill="#444444")
    for u, v in graph.edges:
        pu, pv = graph.position(u), graph.position(v)
        if round(pu[2] / L) != round(pv[2] / L):
            continue        # vertical edges join panels; leave them out
        (ax, ay), (bx, by) = to_px(pu), to_px(pv)
        ET.SubElement(scene, "line", x1=ax, y1=ay, x2=bx, y2=by, stroke="#cccccc")
    r = instance.delta / 2 / L * SCALE
    for gi, group in enumerate(instance.groups):
        for goal in group.goals:
            cx, cy = to_px(graph.position(goal))
            ET.SubElement(scene, "circle", cx=cx, cy=cy, r=f"{r:.3f}", fill="none",
                          stroke=_color(gi), attrib={"stroke-width": "2", "class": "goal"})

    group_of = instance.group_of
    for t in frame_times:
        frame = ET.SubElement(svg, "g", attrib={"class": "frame", "data-t": repr(float(t))})
        for traj in trajectories:
            cx, cy = to_px(sample(traj, min(t, traj.end_time)))
            ET.SubElement(frame, "circle", cx=cx, cy=cy, r=f"{r:.3f}",
                          fill=_color(group_of[traj.robot]),
                          attrib={"class": "robot", "data-robot": str(traj.robot)})
    ET.indent(svg)
    return ET.tostring(svg, encoding="unicode") + "\n"
