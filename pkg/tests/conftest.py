import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from adplan.world import DynamicObstacle, GridMap, RobotFootprint, Scenario


def make_grid(rows, cell_size: float = 1.0) -> GridMap:
    """Build a map from strings of '.'/'#'; rows[0] is the y=0 row."""
    height = len(rows)
    width = len(rows[0])
    occ = np.zeros((width, height), dtype=bool)
    for y, row in enumerate(rows):
        assert len(row) == width
        for x, ch in enumerate(row):
            if ch == "#":
                occ[x, y] = True
    return GridMap(width, height, cell_size, occ)


def make_scenario(
    rows_or_grid,
    obstacles=(),
    horizon: int = 300,
    dt: float = 0.1,
    half_width: float = 0.45,
) -> Scenario:
    grid = rows_or_grid if isinstance(rows_or_grid, GridMap) else make_grid(rows_or_grid)
    return Scenario(
        map=grid,
        footprint=RobotFootprint.square(half_width),
        obstacles=list(obstacles),
        time_horizon_steps=horizon,
        dt=dt,
    )


def empty_scenario(n: int, horizon: int = 300, obstacles=()) -> Scenario:
    return make_scenario(GridMap.empty(n, n), obstacles=obstacles, horizon=horizon)


def parked(x: float, y: float, radius: float) -> DynamicObstacle:
    return DynamicObstacle(radius=radius, speed=1.0, waypoints=[(x, y)])
