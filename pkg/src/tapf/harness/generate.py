"""Random grid instances with obstacles and robot groups."""
from __future__ import annotations

from ..errors import Infeasible, InstanceError
from ..flow import min_group_horizon
from ..model import Group, Instance, KinematicProfile, grid_to_graph, grid_vertex_id
from .rng import XorShift64Star

MAX_RETRIES = 50


def generate_instance(width: int, height: int, depth: int, n_obstacles: int, K: int,
                      robots_per_group: int, seed: int, *, edge_length: float = 1.0,
                      delta: float | None = None, vmax: float = 1.0, epsilon: float = 1e-4,
                      max_retries: int = MAX_RETRIES) -> Instance:
    """Obstacles first, then ``2N`` distinct free cells for starts and goals.

    Cells are enumerated z, then y, then x. Draws that leave some group
    without a flow solution are discarded and redrawn from the same stream.
    """
    if min(width, height, depth) < 1:
        raise InstanceError("grid dimensions must be at least 1")
    if K < 1 or robots_per_group < 1:
        raise InstanceError("need at least one group of at least one robot")
    cells = [(x, y, z) for z in range(depth) for y in range(height) for x in range(width)]
    n = K * robots_per_group
    if n_obstacles < 0 or n_obstacles + 2 * n > len(cells):
        raise InstanceError(f"{len(cells)} cells cannot hold {n_obstacles} obstacles "
                            f"and {2 * n} distinct start/goal cells")
    rng = XorShift64Star(seed)
    name = f"grid{width}x{height}x{depth}_o{n_obstacles}_k{K}_r{robots_per_group}_s{seed}"
    for _ in range(max_retries):
        picked = rng.sample(range(len(cells)), n_obstacles)
        obstacles = sorted(cells[i] for i in picked)
        blocked = set(picked)
        free = [i for i in range(len(cells)) if i not in blocked]
        chosen = [grid_vertex_id(*cells[i]) for i in rng.sample(free, 2 * n)]
        starts, goals = chosen[:n], chosen[n:]
        groups = tuple(Group(tuple(starts[g * robots_per_group:(g + 1) * robots_per_group]),
                             tuple(goals[g * robots_per_group:(g + 1) * robots_per_group]))
                       for g in range(K))
        graph = grid_to_graph(width, height, depth, obstacles, edge_length)
        try:
            for g in groups:
                min_group_horizon(graph, g)
        except Infeasible:
            continue
        return Instance(graph, groups, KinematicProfile(default_vmax=vmax),
                        edge_length if delta is None else delta, epsilon, name)
    raise Infeasible(f"no draw with per-group solutions after {max_retries} attempts")
