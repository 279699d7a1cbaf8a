"""Makespan-optimal target assignment and path finding, post-processed into
velocity-feasible, collision-safe continuous schedules."""
from ._core import BACKEND
from .errors import (Inconsistent, Infeasible, InstanceError, ParseError, SolveTimeout,
                     StateCapExceeded, TapfError, TpgCyclic)
from .model import (DiscretePlan, EnvironmentGraph, Group, Instance, KinematicProfile,
                    grid_to_graph, parse_instance, parse_plan, serialize_instance,
                    serialize_plan, validate_plan)

__version__ = "0.1.0"
