"""Adaptive-dimensionality path planning for robots among moving obstacles.

Plans in a 2D lattice everywhere except adaptively discovered regions where
full (x, y, heading, time) states are required, alongside a full space-time
baseline planner, environment generators, and a benchmark harness.
"""

from .adplanner import (
    EXHAUSTED,
    FOUND,
    NO_PATH,
    PlanOutcome,
    PlannerConfig,
    plan,
    validate_outcome,
)
from .baseline import BaselineConfig, plan_full
from .bench import ResultRow, SuiteSpec, render_svg, run_suite
from .envgen import GenSpec, generate_map, generate_scenario
from .lattice import CostModel, Lattice, MotionPrimitive, default_primitives
from .world import (
    DynamicObstacle,
    GridMap,
    RobotFootprint,
    Scenario,
    load_scenario,
    save_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "BaselineConfig",
    "CostModel",
    "DynamicObstacle",
    "EXHAUSTED",
    "FOUND",
    "GenSpec",
    "GridMap",
    "Lattice",
    "MotionPrimitive",
    "NO_PATH",
    "PlanOutcome",
    "PlannerConfig",
    "ResultRow",
    "RobotFootprint",
    "Scenario",
    "SuiteSpec",
    "default_primitives",
    "generate_map",
    "generate_scenario",
    "load_scenario",
    "plan",
    "plan_full",
    "render_svg",
    "run_suite",
    "save_scenario",
    "validate_outcome",
]
