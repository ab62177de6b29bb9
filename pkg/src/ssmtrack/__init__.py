"""Time-optimal path tracking with precomputed stop guarantees.

The package splits into an offline and an online half.  Offline,
build_constraints turns a discretized joint path plus limits into
per-stage linear rows, compute_stoppable_sets sweeps them into the
family of stoppable intervals, and compute_tables fills the braking
time tables on a velocity grid.  Online, SafeExecutor consumes the
tables at a fixed control period and guarantees the robot is already
stationary whenever a person could have closed the distance.
"""

from .artifact import ArtifactBundle, load_artifact, save_artifact
from .constraints import LimitSpec, StageConstraint, admissible_u, build_constraints
from .executor import (DistanceField, ExecutorState, ObstacleInfo, SafeExecutor,
                       compute_distance_field, select_stop_stage, time_to_arrive)
from .lp import Lp1Batch, solve_1d, solve_1d_batch, solve_2d_project_x
from .path import (JointPath, PathGrid, build_spline, discretize, line_path,
                   load_waypoints_json)
from .reach import (ReachTables, StoppableSetFamily, compute_delta_v,
                    compute_stoppable_sets, compute_tables, precompute,
                    trace_route, velocity_index)
from .robots import (PointBody, SerialArm, centers_over_grid, min_distances,
                     planar_arm, spatial_arm)
from .sim import Scenario, load_scenario, run_race, run_scenario

__version__ = "0.1.0"

__all__ = [
    "ArtifactBundle", "load_artifact", "save_artifact",
    "LimitSpec", "StageConstraint", "admissible_u", "build_constraints",
    "DistanceField", "ExecutorState", "ObstacleInfo", "SafeExecutor",
    "compute_distance_field", "select_stop_stage", "time_to_arrive",
    "Lp1Batch", "solve_1d", "solve_1d_batch", "solve_2d_project_x",
    "JointPath", "PathGrid", "build_spline", "discretize", "line_path",
    "load_waypoints_json",
    "ReachTables", "StoppableSetFamily", "compute_delta_v",
    "compute_stoppable_sets", "compute_tables", "precompute", "trace_route",
    "velocity_index",
    "PointBody", "SerialArm", "centers_over_grid", "min_distances",
    "planar_arm", "spatial_arm",
    "Scenario", "load_scenario", "run_race", "run_scenario",
]
