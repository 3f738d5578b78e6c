"""
Seeded generation of benchmark worlds: maze-like maps (parallel walls with
gaps) and indoor maps (a grid of hallways and doored rooms), plus dynamic
obstacle trajectories routed through free space with 2D graph search.

Everything is a pure function of the GenSpec, so identical specs yield
bit-identical scenarios.
"""
from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage, sparse
from scipy.sparse import csgraph

from .lattice import NUM_HEADINGS, LD_MOVES, StateHD, StateLD, heading_angle
from .world import (
    DynamicObstacle,
    GridMap,
    RobotFootprint,
    Scenario,
    dynamic_collision,
    static_collision,
)

HALLWAY_WIDTH = 5  # cells; indoor hallways and maze wall gaps
LARGE_RADIUS = 2.5  # large obstacle disc fills a hallway exactly
SMALL_RADIUS = 1.25  # small obstacle fills half a hallway
ROBOT_HALF_WIDTH = 0.45  # meters, with cell_size 1.0

MAX_MAP_RETRIES = 10
MAX_CHAIN_RETRIES = 20


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenSpec:
    kind: str  # "maze" | "indoor"
    size: int
    seed: int
    n_obstacles: int
    large_fraction: float = 0.5
    obstacle_speed: float = 1.0  # cells (= meters) per second
    dt: float = 0.1
    cell_size: float = 1.0
    horizon_factor: float = 2.5  # horizon seconds = factor * size / robot speed
    min_traj_fraction: float = 0.5  # of the map diagonal

    def __post_init__(self) -> None:
        if self.kind not in ("maze", "indoor"):
            raise ValueError(f"unknown map kind {self.kind!r}")
        if self.size < 25:  # below this the maze/indoor generators degenerate
            raise ValueError("map size too small")

    @classmethod
    def from_dict(cls, doc: dict) -> "GenSpec":
        return cls(**doc)


# ----------------------------------------------------------------------
# Map generation
# ----------------------------------------------------------------------


def generate_map(spec: GenSpec) -> GridMap:
    """Generate a maze or indoor map; retries with derived seeds until the
    default start/goal corner cells are statically connected."""
    seed = spec.seed
    for _ in range(MAX_MAP_RETRIES):
        rng = random.Random(f"{spec.kind}:{spec.size}:{seed}")
        if spec.kind == "maze":
            grid = _maze_map(spec, rng)
        else:
            grid = _indoor_map(spec, rng)
        start, goal = default_query(grid)
        if start is not None and goal is not None and _connected(grid.occupancy, start, goal):
            return grid
        seed = seed * 1000003 + 1
    raise GenerationError(f"could not generate a solvable {spec.kind} map for {spec}")


def _maze_map(spec: GenSpec, rng: random.Random) -> GridMap:
    n = spec.size
    occ = np.zeros((n, n), dtype=bool)
    gap_w = HALLWAY_WIDTH
    x = rng.randint(8, 14)
    while x < n - 6:
        occ[x, :] = True
        for _ in range(rng.randint(1, 3)):
            y0 = rng.randint(0, n - gap_w)
            occ[x, y0 : y0 + gap_w] = False
        x += rng.randint(max(8, n // 30), max(12, n // 18))
    return GridMap(n, n, spec.cell_size, occ)


def _indoor_map(spec: GenSpec, rng: random.Random) -> GridMap:
    n = spec.size
    hw = HALLWAY_WIDTH
    occ = np.ones((n, n), dtype=bool)
    lo = max(16, n // 12)
    hi = max(lo + 4, n // 7)
    pitch = rng.randint(lo, hi)
    # Hallway stripe origins along each axis.
    starts = list(range(2, n - hw - 1, pitch))
    for s in starts:
        occ[s : s + hw, :] = False  # vertical hallways
        occ[:, s : s + hw] = False  # horizontal hallways
    # Rooms in each block between hallways: free interior behind a one-cell
    # wall ring, with door gaps cut into adjacent hallways.
    door_w = 3
    edges = [s + hw for s in starts]  # block start coordinates
    for bx0, bx1 in zip(edges, starts[1:]):
        for by0, by1 in zip(edges, starts[1:]):
            if bx1 - bx0 < 7 or by1 - by0 < 7:
                continue
            occ[bx0 + 1 : bx1 - 1, by0 + 1 : by1 - 1] = False
            for _ in range(rng.randint(1, 2)):
                side = rng.randrange(4)
                if side == 0:  # door through the left wall
                    dy = rng.randint(by0 + 1, by1 - 1 - door_w)
                    occ[bx0, dy : dy + door_w] = False
                elif side == 1:
                    dy = rng.randint(by0 + 1, by1 - 1 - door_w)
                    occ[bx1 - 1, dy : dy + door_w] = False
                elif side == 2:
                    dx = rng.randint(bx0 + 1, bx1 - 1 - door_w)
                    occ[dx : dx + door_w, by0] = False
                else:
                    dx = rng.randint(bx0 + 1, bx1 - 1 - door_w)
                    occ[dx : dx + door_w, by1 - 1] = False
    return GridMap(n, n, spec.cell_size, occ)


def default_query(grid: GridMap) -> Tuple[Optional[StateLD], Optional[StateLD]]:
    """Robot start/goal cells: free cells nearest the opposite map corners."""
    start = _nearest_free(grid.occupancy, (1, 1))
    goal = _nearest_free(grid.occupancy, (grid.width - 2, grid.height - 2))
    return start, goal


def _nearest_free(occ: np.ndarray, target: StateLD) -> Optional[StateLD]:
    w, h = occ.shape
    tx, ty = target
    if not occ[tx, ty]:
        return target
    seen = {target}
    queue = deque([target])
    while queue:
        x, y = queue.popleft()
        for dx, dy, _ in LD_MOVES:
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h and (nx, ny) not in seen:
                if not occ[nx, ny]:
                    return (nx, ny)
                seen.add((nx, ny))
                queue.append((nx, ny))
    return None


def _connected(occ: np.ndarray, a: StateLD, b: StateLD) -> bool:
    labels, _ = ndimage.label(~occ, structure=np.ones((3, 3), dtype=int))
    return labels[a] != 0 and labels[a] == labels[b]


# ----------------------------------------------------------------------
# Obstacle trajectory generation
# ----------------------------------------------------------------------


def _clearance_free(occ: np.ndarray, radius: float) -> np.ndarray:
    """Cells whose center keeps a disc of `radius` off every occupied square
    (touching allowed)."""
    r = radius
    k = int(math.ceil(r + 0.5))
    size = 2 * k + 1
    struct = np.zeros((size, size), dtype=bool)
    for i in range(-k, k + 1):
        for j in range(-k, k + 1):
            d = math.hypot(max(abs(i) - 0.5, 0.0), max(abs(j) - 0.5, 0.0))
            if d < r - 1e-9:
                struct[i + k, j + k] = True
    blocked = ndimage.binary_dilation(occ, structure=struct, border_value=True)
    return ~blocked


class _RouteGraph:
    """Reusable 8-connected shortest-path router over a free-cell mask."""

    def __init__(self, free: np.ndarray):
        self.free = free
        w, h = free.shape
        self.shape = (w, h)
        n = w * h
        idx = np.arange(n).reshape(w, h)
        rows, cols, data = [], [], []
        for dx, dy, dist in LD_MOVES:
            sx = slice(max(dx, 0), w + min(dx, 0))
            sy = slice(max(dy, 0), h + min(dy, 0))
            tx = slice(max(-dx, 0), w + min(-dx, 0))
            ty = slice(max(-dy, 0), h + min(-dy, 0))
            ok = free[tx, ty] & free[sx, sy]
            rows.append(idx[tx, ty][ok])
            cols.append(idx[sx, sy][ok])
            data.append(np.full(ok.sum(), dist))
        self.graph = sparse.csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n),
        )

    def route(self, a: StateLD, b: StateLD) -> Optional[List[StateLD]]:
        w, h = self.shape
        if not (self.free[a] and self.free[b]):
            return None
        src, dst = a[0] * h + a[1], b[0] * h + b[1]
        _, pred = csgraph.dijkstra(
            self.graph, indices=src, return_predecessors=True
        )
        if pred[dst] < 0 and src != dst:
            return None
        cells = [dst]
        while cells[-1] != src:
            cells.append(int(pred[cells[-1]]))
        cells.reverse()
        return [(c // h, c % h) for c in cells]


def _simplify(cells: Sequence[StateLD]) -> List[StateLD]:
    """Keep only direction-change cells of a cell path."""
    if len(cells) <= 2:
        return list(cells)
    out = [cells[0]]
    for prev, cur, nxt in zip(cells, cells[1:], cells[2:]):
        d1 = (cur[0] - prev[0], cur[1] - prev[1])
        d2 = (nxt[0] - cur[0], nxt[1] - cur[1])
        if d1 != d2:
            out.append(cur)
    out.append(cells[-1])
    return out


def generate_obstacles(grid: GridMap, spec: GenSpec) -> List[DynamicObstacle]:
    """Route each obstacle through random goal points with shortest paths in
    free space, keeping trajectories long and clear of the robot's query."""
    rng = random.Random(f"{spec.kind}:{spec.size}:{spec.seed}:obstacles")
    if spec.n_obstacles == 0:
        return []
    start, goal = default_query(grid)
    keepout = {c for c in (start, goal) if c is not None}
    cs = grid.cell_size
    routers: dict = {}
    occ = grid.occupancy
    min_len = spec.min_traj_fraction * math.hypot(grid.width, grid.height)

    obstacles = []
    for _ in range(spec.n_obstacles):
        big = rng.random() < spec.large_fraction
        radius = LARGE_RADIUS if big else SMALL_RADIUS
        if radius not in routers:
            routers[radius] = _RouteGraph(_clearance_free(occ, radius))
        router = routers[radius]
        candidates = np.argwhere(router.free)
        if len(candidates) == 0:
            continue
        obstacle = None
        for _ in range(MAX_CHAIN_RETRIES):
            c0 = tuple(int(v) for v in candidates[rng.randrange(len(candidates))])
            if _near_keepout(c0, keepout):
                continue
            cells: List[StateLD] = [c0]
            total = 0.0
            for _ in range(8):
                tgt = tuple(int(v) for v in candidates[rng.randrange(len(candidates))])
                seg = router.route(cells[-1], tgt)
                if seg is None or len(seg) < 2:
                    continue
                cells.extend(seg[1:])
                total += sum(
                    math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(seg, seg[1:])
                )
                if total >= min_len and not _near_keepout(cells[-1], keepout):
                    break
            if len(cells) >= 2 and total >= min_len and not _near_keepout(cells[-1], keepout):
                waypoints = [grid.cell_center(x, y) for x, y in _simplify(cells)]
                obstacle = DynamicObstacle(
                    radius=radius * cs,
                    speed=spec.obstacle_speed * cs,
                    waypoints=waypoints,
                )
                break
        if obstacle is None:
            # Last resort: a parked obstacle away from the query cells.
            for _ in range(MAX_CHAIN_RETRIES):
                c0 = tuple(int(v) for v in candidates[rng.randrange(len(candidates))])
                if not _near_keepout(c0, keepout):
                    obstacle = DynamicObstacle(
                        radius=radius * cs,
                        speed=spec.obstacle_speed * cs,
                        waypoints=[grid.cell_center(*c0)],
                    )
                    break
        if obstacle is not None:
            obstacles.append(obstacle)
    return obstacles


def _near_keepout(cell: StateLD, keepout, margin: float = 8.0) -> bool:
    return any(
        math.hypot(cell[0] - k[0], cell[1] - k[1]) < margin for k in keepout
    )


# ----------------------------------------------------------------------
# Full scenarios
# ----------------------------------------------------------------------


def generate_scenario(spec: GenSpec) -> Tuple[Scenario, StateHD, StateLD]:
    """Map + obstacles + robot query, packaged with a time horizon scaled to
    the map size."""
    grid = generate_map(spec)
    obstacles = generate_obstacles(grid, spec)
    footprint = RobotFootprint.square(ROBOT_HALF_WIDTH * spec.cell_size)
    horizon_steps = int(math.ceil(spec.horizon_factor * spec.size / spec.dt))
    scenario = Scenario(
        map=grid,
        footprint=footprint,
        obstacles=obstacles,
        time_horizon_steps=horizon_steps,
        dt=spec.dt,
    )
    start, goal = default_query(grid)
    dx, dy = goal[0] - start[0], goal[1] - start[1]
    h0 = int(round(math.atan2(dy, dx) / (2 * math.pi / NUM_HEADINGS))) % NUM_HEADINGS
    h0 = _feasible_heading(scenario, start, h0)
    return scenario, (start[0], start[1], h0, 0), goal


def _feasible_heading(scenario: Scenario, cell: StateLD, preferred: int) -> int:
    """Closest heading to `preferred` whose start pose is collision-free at
    t=0 (a rotated footprint can clip a wall the cell itself clears)."""
    cx, cy = scenario.map.cell_center(*cell)
    for k in sorted(range(NUM_HEADINGS), key=lambda k: (min(k, NUM_HEADINGS - k), k)):
        h = (preferred + k) % NUM_HEADINGS
        pose = (cx, cy, heading_angle(h))
        if not static_collision(scenario, pose) and not dynamic_collision(scenario, pose, 0.0):
            return h
    return preferred
