"""
Environment model: static occupancy grid, robot footprint, disc-shaped moving
obstacles, and the collision predicates everything else is built on.

Conventions:
  - Grid cell (i, j) spans [i*cs, (i+1)*cs) x [j*cs, (j+1)*cs) in meters,
    with center ((i+0.5)*cs, (j+0.5)*cs).  Queries outside the map count as
    occupied.
  - Poses are (x, y, theta) in meters/radians, world frame.
  - Time is continuous seconds for the predicates; the planners sample at
    multiples of the scenario's dt.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage
from shapely.geometry import Polygon, box

Pose = Tuple[float, float, float]

# Overlap smaller than this is treated as touching, not collision.
_AREA_EPS = 1e-12


@dataclass
class GridMap:
    """Static occupancy grid. `occupancy[x, y]` is True for obstacle cells."""

    width: int
    height: int
    cell_size: float
    occupancy: np.ndarray

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("map dimensions must be positive")
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        self.occupancy = np.asarray(self.occupancy, dtype=bool)
        if self.occupancy.shape != (self.width, self.height):
            raise ValueError(
                f"occupancy shape {self.occupancy.shape} != "
                f"({self.width}, {self.height})"
            )

    @classmethod
    def empty(cls, width: int, height: int, cell_size: float = 1.0) -> "GridMap":
        return cls(width, height, cell_size, np.zeros((width, height), dtype=bool))

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def is_occupied(self, x: int, y: int) -> bool:
        """Out-of-bounds cells are occupied."""
        if not self.in_bounds(x, y):
            return True
        return bool(self.occupancy[x, y])

    def cell_center(self, x: int, y: int) -> Tuple[float, float]:
        return ((x + 0.5) * self.cell_size, (y + 0.5) * self.cell_size)

    def point_to_cell(self, px: float, py: float) -> Tuple[int, int]:
        return (int(math.floor(px / self.cell_size)), int(math.floor(py / self.cell_size)))

    # --- text map format: line 1 "width height cell_size", then `height`
    # --- rows of '.'/'#', row 0 = y 0.

    def to_text(self) -> str:
        lines = [f"{self.width} {self.height} {self.cell_size:g}"]
        for y in range(self.height):
            lines.append("".join("#" if self.occupancy[x, y] else "." for x in range(self.width)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GridMap":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty map file")
        head = lines[0].split()
        if len(head) != 3:
            raise ValueError("map header must be 'width height cell_size'")
        width, height, cell_size = int(head[0]), int(head[1]), float(head[2])
        if len(lines) != height + 1:
            raise ValueError(f"expected {height} map rows, got {len(lines) - 1}")
        occ = np.zeros((width, height), dtype=bool)
        for y, row in enumerate(lines[1:]):
            if len(row) != width:
                raise ValueError(f"row {y} has length {len(row)}, expected {width}")
            for x, ch in enumerate(row):
                if ch == "#":
                    occ[x, y] = True
                elif ch != ".":
                    raise ValueError(f"bad map character {ch!r}")
        return cls(width, height, cell_size, occ)

    def save(self, path: Path | str) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: Path | str) -> "GridMap":
        return cls.from_text(Path(path).read_text())


@dataclass
class RobotFootprint:
    """Robot body polygon in the robot frame plus its bounding radii."""

    polygon: List[Tuple[float, float]]
    inscribed_radius: float
    circumscribed_radius: float

    def __post_init__(self) -> None:
        if len(self.polygon) < 3:
            raise ValueError("footprint polygon needs at least 3 vertices")
        if self.inscribed_radius < 0 or self.circumscribed_radius < 0:
            raise ValueError("radii must be non-negative")
        if self.inscribed_radius > self.circumscribed_radius + 1e-9:
            raise ValueError("inscribed radius exceeds circumscribed radius")
        circ = max(math.hypot(vx, vy) for vx, vy in self.polygon)
        if abs(circ - self.circumscribed_radius) > 1e-6:
            raise ValueError(
                f"circumscribed_radius {self.circumscribed_radius} inconsistent "
                f"with polygon (max vertex norm {circ})"
            )
        shp = Polygon(self.polygon)
        if not shp.contains(shp.representative_point()):
            raise ValueError("degenerate footprint polygon")
        # Largest origin-centered disc inside the polygon = distance from the
        # origin to the boundary (the origin must be interior).
        from shapely.geometry import Point

        if not shp.contains(Point(0.0, 0.0)):
            raise ValueError("footprint polygon must contain the origin")
        ins = shp.exterior.distance(Point(0.0, 0.0))
        if abs(ins - self.inscribed_radius) > 1e-6:
            raise ValueError(
                f"inscribed_radius {self.inscribed_radius} inconsistent with "
                f"polygon (origin-to-boundary distance {ins})"
            )

    @classmethod
    def square(cls, half_width: float) -> "RobotFootprint":
        """Axis-aligned square of the given half-width, centered on the origin."""
        hw = float(half_width)
        poly = [(hw, hw), (-hw, hw), (-hw, -hw), (hw, -hw)]
        return cls(poly, hw, hw * math.sqrt(2.0))

    def transformed(self, pose: Pose) -> List[Tuple[float, float]]:
        px, py, theta = pose
        c, s = math.cos(theta), math.sin(theta)
        return [(px + c * vx - s * vy, py + s * vx + c * vy) for vx, vy in self.polygon]


@dataclass
class DynamicObstacle:
    """Disc mover following a waypoint polyline at constant speed.

    After the polyline is exhausted the obstacle stays parked at the final
    waypoint forever; the planner never assumes a mover vanishes.
    """

    radius: float
    speed: float
    waypoints: List[Tuple[float, float]]

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError("obstacle radius must be positive")
        if self.speed <= 0:
            raise ValueError("obstacle speed must be positive")
        if not self.waypoints:
            raise ValueError("obstacle needs at least one waypoint")
        for a, b in zip(self.waypoints, self.waypoints[1:]):
            if a == b:
                raise ValueError("consecutive waypoints must be distinct")

    @cached_property
    def _cumlen(self) -> List[float]:
        acc = [0.0]
        for (ax, ay), (bx, by) in zip(self.waypoints, self.waypoints[1:]):
            acc.append(acc[-1] + math.hypot(bx - ax, by - ay))
        return acc

    def position(self, t: float) -> Tuple[float, float]:
        """Position at time t >= 0 seconds (clamped past the trajectory end)."""
        if len(self.waypoints) == 1:
            return self.waypoints[0]
        dist = self.speed * t
        cum = self._cumlen
        if dist >= cum[-1]:
            return self.waypoints[-1]
        # Find the segment containing `dist`.
        lo, hi = 0, len(cum) - 1
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            if cum[mid] <= dist:
                lo = mid
            else:
                hi = mid
        (ax, ay), (bx, by) = self.waypoints[lo], self.waypoints[lo + 1]
        seg = cum[lo + 1] - cum[lo]
        f = (dist - cum[lo]) / seg
        return (ax + f * (bx - ax), ay + f * (by - ay))


def obstacle_position(o: DynamicObstacle, t: float) -> Tuple[float, float]:
    """Arc-length position of obstacle `o` at time `t` seconds."""
    return o.position(t)


@dataclass
class Scenario:
    """Immutable world description: map, robot, movers, and the time lattice."""

    map: GridMap
    footprint: RobotFootprint
    obstacles: List[DynamicObstacle]
    time_horizon_steps: int
    dt: float

    def __post_init__(self) -> None:
        if self.time_horizon_steps <= 0:
            raise ValueError("time_horizon_steps must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def horizon_seconds(self) -> float:
        return self.time_horizon_steps * self.dt

    # ------------------------------------------------------------------
    # Derived caches (pure functions of the immutable fields)
    # ------------------------------------------------------------------

    @cached_property
    def inflated(self) -> np.ndarray:
        """Cells blocked for the 2D lattice: some occupied cell's square lies
        strictly within inscribed_radius of the cell center.

        This under-approximates the true footprint blockage at every heading
        (the inscribed disc fits inside the polygon however it is rotated),
        which keeps 2D costs a lower bound on 4D costs.
        """
        r = self.footprint.inscribed_radius / self.map.cell_size
        k = int(math.ceil(r + 0.5))
        offs = []
        for i in range(-k, k + 1):
            for j in range(-k, k + 1):
                d = math.hypot(max(abs(i) - 0.5, 0.0), max(abs(j) - 0.5, 0.0))
                if d < r - 1e-12:
                    offs.append((i, j))
        if not offs:
            offs = [(0, 0)]
        size = 2 * k + 1
        struct = np.zeros((size, size), dtype=bool)
        for i, j in offs:
            struct[i + k, j + k] = True
        return ndimage.binary_dilation(
            self.map.occupancy, structure=struct, border_value=True
        )

    @cached_property
    def _footprint_edges(self) -> List[Tuple[float, float, float, float]]:
        verts = self.footprint.polygon
        return [
            (ax, ay, bx, by)
            for (ax, ay), (bx, by) in zip(verts, verts[1:] + verts[:1])
        ]

    @cached_property
    def obstacle_steps(self) -> List[List[Tuple[float, float]]]:
        """Obstacle positions sampled at every time step 0..horizon."""
        out = []
        for o in self.obstacles:
            out.append([o.position(k * self.dt) for k in range(self.time_horizon_steps + 1)])
        return out

    # ------------------------------------------------------------------
    # Collision predicates
    # ------------------------------------------------------------------

    def footprint_cells(self, pose: Pose) -> List[Tuple[int, int]]:
        """Grid cells overlapped by the footprint polygon at `pose`."""
        return polygon_cells(self.footprint.transformed(pose), self.map.cell_size)

    def _dist_sq_to_footprint(self, pose: Pose, px: float, py: float) -> float:
        """Squared distance from point (px, py) to the footprint at `pose`."""
        x, y, theta = pose
        c, s = math.cos(theta), math.sin(theta)
        # Transform the point into the robot frame.
        dx, dy = px - x, py - y
        lx = c * dx + s * dy
        ly = -s * dx + c * dy
        best = math.inf
        inside = False
        verts = self.footprint.polygon
        n = len(verts)
        j = n - 1
        for i in range(n):
            ax, ay = verts[i]
            bx, by = verts[j]
            # Ray cast for containment.
            if (ay > ly) != (by > ly):
                xint = (bx - ax) * (ly - ay) / (by - ay) + ax
                if lx < xint:
                    inside = not inside
            # Point-segment distance.
            ex, ey = bx - ax, by - ay
            L2 = ex * ex + ey * ey
            if L2 > 0:
                tproj = ((lx - ax) * ex + (ly - ay) * ey) / L2
                tproj = 0.0 if tproj < 0.0 else (1.0 if tproj > 1.0 else tproj)
            else:
                tproj = 0.0
            qx, qy = ax + tproj * ex, ay + tproj * ey
            d2 = (lx - qx) ** 2 + (ly - qy) ** 2
            if d2 < best:
                best = d2
            j = i
        return 0.0 if inside else best


def polygon_cells(vertices: Sequence[Tuple[float, float]], cell_size: float) -> List[Tuple[int, int]]:
    """All grid cells whose square has positive-area overlap with the polygon."""
    poly = Polygon(vertices)
    minx, miny, maxx, maxy = poly.bounds
    x0 = int(math.floor(minx / cell_size))
    x1 = int(math.floor((maxx - 1e-12) / cell_size))
    y0 = int(math.floor(miny / cell_size))
    y1 = int(math.floor((maxy - 1e-12) / cell_size))
    cells = []
    for i in range(x0, x1 + 1):
        for j in range(y0, y1 + 1):
            cell = box(i * cell_size, j * cell_size, (i + 1) * cell_size, (j + 1) * cell_size)
            if poly.intersection(cell).area > _AREA_EPS:
                cells.append((i, j))
    return cells


def static_collision(s: Scenario, pose: Pose) -> bool:
    """True iff the footprint at `pose` overlaps an occupied cell or leaves the map."""
    for cx, cy in s.footprint_cells(pose):
        if s.map.is_occupied(cx, cy):
            return True
    return False


def dynamic_collision(s: Scenario, pose: Pose, t: float) -> bool:
    """True iff some obstacle disc at time `t` intersects the footprint at `pose`."""
    for o in s.obstacles:
        ox, oy = o.position(t)
        # Cheap bounding-circle rejection first.
        d2 = (ox - pose[0]) ** 2 + (oy - pose[1]) ** 2
        reach = o.radius + s.footprint.circumscribed_radius
        if d2 > reach * reach:
            continue
        if s._dist_sq_to_footprint(pose, ox, oy) <= o.radius * o.radius:
            return True
    return False


def transition_collision(s: Scenario, swept: Iterable[Tuple[int, Pose]]) -> bool:
    """Check a time-stamped pose sequence (stamps are time-step indices).

    True iff any sample is in static or dynamic collision.
    """
    for step, pose in swept:
        if static_collision(s, pose):
            return True
        if dynamic_collision(s, pose, step * s.dt):
            return True
    return False


# ----------------------------------------------------------------------
# Scenario file I/O
# ----------------------------------------------------------------------


def scenario_to_dict(s: Scenario, map_file: str) -> dict:
    return {
        "map_file": map_file,
        "dt": s.dt,
        "time_horizon_steps": s.time_horizon_steps,
        "footprint": {
            "polygon": [list(v) for v in s.footprint.polygon],
            "inscribed_radius": s.footprint.inscribed_radius,
            "circumscribed_radius": s.footprint.circumscribed_radius,
        },
        "obstacles": [
            {
                "radius": o.radius,
                "speed": o.speed,
                "waypoints": [list(w) for w in o.waypoints],
            }
            for o in s.obstacles
        ],
    }


def save_scenario(s: Scenario, scenario_path: Path | str, map_file: Optional[str] = None) -> None:
    """Write `scenario.json` plus the referenced map file next to it."""
    scenario_path = Path(scenario_path)
    if map_file is None:
        map_file = scenario_path.stem + "_map.txt"
    s.map.save(scenario_path.parent / map_file)
    doc = scenario_to_dict(s, map_file)
    scenario_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_scenario(scenario_path: Path | str) -> Scenario:
    scenario_path = Path(scenario_path)
    doc = json.loads(scenario_path.read_text())
    grid = GridMap.load(scenario_path.parent / doc["map_file"])
    fp = doc["footprint"]
    footprint = RobotFootprint(
        polygon=[tuple(v) for v in fp["polygon"]],
        inscribed_radius=fp["inscribed_radius"],
        circumscribed_radius=fp["circumscribed_radius"],
    )
    obstacles = [
        DynamicObstacle(
            radius=o["radius"],
            speed=o["speed"],
            waypoints=[tuple(w) for w in o["waypoints"]],
        )
        for o in doc["obstacles"]
    ]
    return Scenario(
        map=grid,
        footprint=footprint,
        obstacles=obstacles,
        time_horizon_steps=doc["time_horizon_steps"],
        dt=doc["dt"],
    )
