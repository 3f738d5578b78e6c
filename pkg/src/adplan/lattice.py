"""
Search-space definition: the 4D (x, y, heading, time) motion-primitive lattice,
the 8-connected 2D grid, and the shared cost model.

Costs are positive integers: each edge costs the seconds it takes to traverse
times COST_SCALE.  Durations round *up* to whole time steps in both lattices,
so a 2D edge costs exactly what the matching straight 4D primitive costs
(1000 cardinal, 1500 diagonal at the defaults) and the optimal 2D cost
between two cells never exceeds the optimal 4D cost between states above
them.  That shared quantization is what makes the 2D layer usable both as a
heuristic and as a relaxed search space, and it keeps the two layers' costs
comparable enough for the tracking-phase acceptance test at tight epsilon.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from heapq import heappush, heappop
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .world import Scenario, polygon_cells

log = logging.getLogger(__name__)

NUM_HEADINGS = 16
SQRT2 = math.sqrt(2.0)

StateLD = Tuple[int, int]
StateHD = Tuple[int, int, int, int]

# Quantized motion direction for each of the 16 headings.  Even indices are
# the 8-connected directions; odd indices use the (2,1)-style moves closest
# to the 22.5-degree diagonals.
HEADING_VECS: List[Tuple[int, int]] = [
    (1, 0), (2, 1), (1, 1), (1, 2),
    (0, 1), (-1, 2), (-1, 1), (-2, 1),
    (-1, 0), (-2, -1), (-1, -1), (-1, -2),
    (0, -1), (1, -2), (1, -1), (2, -1),
]


def heading_angle(h: int) -> float:
    return 2.0 * math.pi * h / NUM_HEADINGS


def octile(dx: int, dy: int) -> float:
    """Length of the shortest 8-connected cell path for displacement (dx, dy)."""
    ax, ay = abs(dx), abs(dy)
    return max(ax, ay) + (SQRT2 - 1.0) * min(ax, ay)


@dataclass(frozen=True)
class CostModel:
    """Speed and cost scaling shared by both lattices."""

    max_speed: float = 1.0  # cells per second
    cost_scale: int = 1000  # cost units per second

    def ld_edge_cost(self, dist_cells: float, dt: float = 0.1) -> int:
        """Cost of a 2D move, time-quantized exactly like the 4D primitives."""
        steps = int(math.ceil(dist_cells / self.max_speed / dt - 1e-9))
        return int(round(steps * dt * self.cost_scale))


@dataclass
class MotionPrimitive:
    """One precomputed maneuver: displacement, heading change, swept poses.

    Poses are (x, y, theta) in cell units relative to the start cell center,
    one sample per time step, duration+1 samples total.
    """

    start_heading: int
    dx: int
    dy: int
    end_heading: int
    duration: int  # time steps
    cost: int
    poses: List[Tuple[float, float, float]]

    def validate(self, dt: float, cost_model: CostModel) -> None:
        if not (0 <= self.start_heading < NUM_HEADINGS and 0 <= self.end_heading < NUM_HEADINGS):
            raise ValueError("heading index out of range")
        if self.duration <= 0:
            raise ValueError("primitive duration must be positive")
        if len(self.poses) != self.duration + 1:
            raise ValueError("primitive needs duration+1 pose samples")
        if self.cost != int(round(self.duration * dt * cost_model.cost_scale)):
            raise ValueError("primitive cost inconsistent with duration")
        x0, y0, th0 = self.poses[0]
        xn, yn, thn = self.poses[-1]
        if math.hypot(x0, y0) > 1e-9 or _angdiff(th0, heading_angle(self.start_heading)) > 1e-9:
            raise ValueError("first pose must be the origin at the start heading")
        if (
            math.hypot(xn - self.dx, yn - self.dy) > 1e-9
            or _angdiff(thn, heading_angle(self.end_heading)) > 1e-9
        ):
            raise ValueError("last pose must be (dx, dy) at the end heading")


def _angdiff(a: float, b: float) -> float:
    d = (a - b) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


def _make_primitive(
    start_h: int, end_h: int, dt: float, cost_model: CostModel
) -> MotionPrimitive:
    dx, dy = HEADING_VECS[end_h]
    length = octile(dx, dy)
    duration = int(math.ceil(length / cost_model.max_speed / dt - 1e-9))
    cost = int(round(duration * dt * cost_model.cost_scale))
    th0 = heading_angle(start_h)
    dth = end_h - start_h
    if dth > NUM_HEADINGS // 2:
        dth -= NUM_HEADINGS
    elif dth < -NUM_HEADINGS // 2:
        dth += NUM_HEADINGS
    dth *= 2.0 * math.pi / NUM_HEADINGS
    poses = []
    for i in range(duration + 1):
        f = i / duration
        poses.append((f * dx, f * dy, th0 + f * dth))
    # Snap the final sample exactly onto the lattice.
    poses[-1] = (float(dx), float(dy), th0 + dth)
    return MotionPrimitive(start_h, dx, dy, end_h, duration, cost, poses)


def default_primitives(dt: float, cost_model: CostModel) -> List[MotionPrimitive]:
    """Unicycle set: per heading a straight move plus forward arcs turning
    one heading index left or right.  No waiting move exists."""
    prims = []
    for h in range(NUM_HEADINGS):
        prims.append(_make_primitive(h, h, dt, cost_model))
        prims.append(_make_primitive(h, (h + 1) % NUM_HEADINGS, dt, cost_model))
        prims.append(_make_primitive(h, (h - 1) % NUM_HEADINGS, dt, cost_model))
    return prims


def save_primitives(prims: Sequence[MotionPrimitive], path: Path | str) -> None:
    doc = [
        {
            "start_heading": p.start_heading,
            "dx": p.dx,
            "dy": p.dy,
            "end_heading": p.end_heading,
            "duration_steps": p.duration,
            "poses": [[x, y, th] for x, y, th in p.poses],
        }
        for p in prims
    ]
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_primitives(path: Path | str, dt: float, cost_model: CostModel) -> List[MotionPrimitive]:
    doc = json.loads(Path(path).read_text())
    prims = []
    for entry in doc:
        p = MotionPrimitive(
            start_heading=entry["start_heading"],
            dx=entry["dx"],
            dy=entry["dy"],
            end_heading=entry["end_heading"],
            duration=entry["duration_steps"],
            cost=int(round(entry["duration_steps"] * dt * cost_model.cost_scale)),
            poses=[tuple(s) for s in entry["poses"]],
        )
        p.validate(dt, cost_model)
        prims.append(p)
    return prims


# 8-connected moves: (dx, dy, distance in cells).
LD_MOVES: List[Tuple[int, int, float]] = [
    (1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
    (1, 1, SQRT2), (1, -1, SQRT2), (-1, 1, SQRT2), (-1, -1, SQRT2),
]


class Lattice:
    """Successor generation over one scenario, with precomputed collision data.

    Immutable after construction; all queries are pure.
    """

    def __init__(
        self,
        scenario: Scenario,
        primitives: Optional[Sequence[MotionPrimitive]] = None,
        cost_model: Optional[CostModel] = None,
    ):
        self.scenario = scenario
        self.cost_model = cost_model or CostModel()
        if primitives is None:
            primitives = default_primitives(scenario.dt, self.cost_model)
        for p in primitives:
            p.validate(scenario.dt, self.cost_model)
        self.primitives = list(primitives)
        self.by_heading: List[List[MotionPrimitive]] = [[] for _ in range(NUM_HEADINGS)]
        for p in self.primitives:
            self.by_heading[p.start_heading].append(p)

        grid = scenario.map
        self.width, self.height = grid.width, grid.height
        self.horizon = scenario.time_horizon_steps
        self._occ = grid.occupancy.tolist()
        self._inflated = scenario.inflated.tolist()
        cs = grid.cell_size
        self._cs = cs

        # Per primitive: cells swept by the footprint (offsets from the start
        # cell), and per-sample world-frame offsets from the start cell center.
        self._cover: Dict[int, List[Tuple[int, int]]] = {}
        self._samples: Dict[int, List[Tuple[float, float, float, float, float]]] = {}
        fp = scenario.footprint
        for idx, p in enumerate(self.primitives):
            cover = set()
            samples = []
            for (px, py, th) in p.poses:
                wx, wy = (0.5 + px) * cs, (0.5 + py) * cs
                for cx, cy in polygon_cells(fp.transformed((wx, wy, th)), cs):
                    cover.add((cx, cy))
                samples.append((px * cs, py * cs, th, math.cos(th), math.sin(th)))
            self._cover[idx] = sorted(cover)
            self._samples[idx] = samples
        self._prim_index = {id(p): i for i, p in enumerate(self.primitives)}

        self._verts = list(fp.polygon)
        r_ins, r_circ = fp.inscribed_radius, fp.circumscribed_radius
        self._reach2 = [(o.radius + r_circ) ** 2 for o in scenario.obstacles]
        self._hit2 = [(o.radius + r_ins) ** 2 for o in scenario.obstacles]

        self._ld_moves = [
            (dx, dy, self.cost_model.ld_edge_cost(dist, scenario.dt))
            for dx, dy, dist in LD_MOVES
        ]

    # ------------------------------------------------------------------
    # 4D successors
    # ------------------------------------------------------------------

    def static_free(self, prim_idx: int, x: int, y: int) -> bool:
        occ = self._occ
        w, h = self.width, self.height
        for di, dj in self._cover[prim_idx]:
            cx, cy = x + di, y + dj
            if cx < 0 or cy < 0 or cx >= w or cy >= h or occ[cx][cy]:
                return False
        return True

    def dynamic_free(self, prim_idx: int, x: int, y: int, t: int) -> bool:
        steps = self.scenario.obstacle_steps
        if not steps:
            return True
        cs = self._cs
        bx, by = (x + 0.5) * cs, (y + 0.5) * cs
        reach2, hit2 = self._reach2, self._hit2
        verts = self._verts
        obstacles = self.scenario.obstacles
        for i, (sx, sy, th, c, s) in enumerate(self._samples[prim_idx]):
            px, py = bx + sx, by + sy
            tt = t + i
            for k, positions in enumerate(steps):
                ox, oy = positions[tt]
                ddx, ddy = ox - px, oy - py
                d2 = ddx * ddx + ddy * ddy
                if d2 > reach2[k]:
                    continue
                if d2 <= hit2[k]:
                    return False
                # Exact disc-polygon test in the robot frame.
                lx = c * ddx + s * ddy
                ly = -s * ddx + c * ddy
                r = obstacles[k].radius
                if _pt_poly_d2(verts, lx, ly) <= r * r:
                    return False
        return True

    def hd_successors(self, s: StateHD, check_dynamic: bool = True) -> List[Tuple[StateHD, int]]:
        """Successors of a 4D state via the primitive set, collision checked."""
        x, y, h, t = s
        horizon = self.horizon
        out = []
        for p in self.by_heading[h]:
            t2 = t + p.duration
            if t2 > horizon:
                continue
            idx = self._prim_index[id(p)]
            if not self.static_free(idx, x, y):
                continue
            if check_dynamic and not self.dynamic_free(idx, x, y, t):
                continue
            out.append(((x + p.dx, y + p.dy, p.end_heading, t2), p.cost))
        return out

    def swept(self, prim: MotionPrimitive, x: int, y: int, t: int):
        """Time-stamped world-frame poses of `prim` applied at cell (x, y), step t."""
        cs = self._cs
        bx, by = (x + 0.5) * cs, (y + 0.5) * cs
        return [
            (t + i, (bx + px * cs, by + py * cs, th))
            for i, (px, py, th) in enumerate(prim.poses)
        ]

    # ------------------------------------------------------------------
    # 2D successors
    # ------------------------------------------------------------------

    def ld_free(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height and not self._inflated[x][y]

    def ld_successors(self, s: StateLD) -> List[Tuple[StateLD, int]]:
        """8-connected neighbors surviving the static inflation check.
        Dynamic obstacles are intentionally ignored at this layer."""
        x, y = s
        out = []
        for dx, dy, cost in self._ld_moves:
            nx, ny = x + dx, y + dy
            if self.ld_free(nx, ny):
                out.append(((nx, ny), cost))
        return out


def _pt_poly_d2(verts: List[Tuple[float, float]], lx: float, ly: float) -> float:
    """Squared distance from a point to a polygon (0 inside), local frame."""
    best = math.inf
    inside = False
    n = len(verts)
    j = n - 1
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[j]
        if (ay > ly) != (by > ly):
            xint = (bx - ax) * (ly - ay) / (by - ay) + ax
            if lx < xint:
                inside = not inside
        ex, ey = bx - ax, by - ay
        L2 = ex * ex + ey * ey
        if L2 > 0:
            tp = ((lx - ax) * ex + (ly - ay) * ey) / L2
            tp = 0.0 if tp < 0.0 else (1.0 if tp > 1.0 else tp)
        else:
            tp = 0.0
        qx, qy = ax + tp * ex, ay + tp * ey
        d2 = (lx - qx) ** 2 + (ly - qy) ** 2
        if d2 < best:
            best = d2
        j = i
    return 0.0 if inside else best


# ----------------------------------------------------------------------
# Cost dominance check (test-support operation)
# ----------------------------------------------------------------------


def check_cost_dominance(
    scenario: Scenario,
    pairs: Sequence[Tuple[StateHD, StateHD]],
    lattice: Optional[Lattice] = None,
    max_pops: int = 2_000_000,
) -> bool:
    """Verify, by exhaustive Dijkstra on both lattices, that the optimal 2D
    cost between projected endpoints never exceeds the optimal 4D cost.

    Pairs whose 4D target is unreachable are skipped (counted in a warning).
    """
    lat = lattice or Lattice(scenario)
    by_source: Dict[StateHD, List[StateHD]] = {}
    for a, b in pairs:
        by_source.setdefault(a, []).append(b)

    skipped = 0
    for src, targets in by_source.items():
        # Target times are free variables: the optimal HD path may arrive at
        # the target pose at any step, so match on (x, y, heading) only.
        poses = {(b[0], b[1], b[2]) for b in targets}
        hd_costs = _hd_dijkstra(lat, src, poses, max_pops)
        ld_costs = _ld_dijkstra(lat, (src[0], src[1]))
        for tgt in targets:
            hd_c = hd_costs.get((tgt[0], tgt[1], tgt[2]))
            if hd_c is None:
                skipped += 1
                continue
            ld_c = ld_costs.get((tgt[0], tgt[1]))
            if ld_c is None or ld_c > hd_c:
                log.warning("cost dominance violated: %s -> %s (2D %s, 4D %s)", src, tgt, ld_c, hd_c)
                return False
    if skipped:
        log.warning("cost dominance check skipped %d unreachable pairs", skipped)
    return True


def _hd_dijkstra(
    lat: Lattice, src: StateHD, targets: set, max_pops: int
) -> Dict[Tuple[int, int, int], int]:
    """Optimal cost from src to each (x, y, heading) target, any arrival time."""
    dist: Dict[StateHD, int] = {src: 0}
    found: Dict[Tuple[int, int, int], int] = {}
    if src[:3] in targets:
        found[src[:3]] = 0
    heap = [(0, src)]
    pops = 0
    done: set = set()
    while heap and len(found) < len(targets) and pops < max_pops:
        d, s = heappop(heap)
        if s in done:
            continue
        done.add(s)
        pops += 1
        if s[:3] in targets and s[:3] not in found:
            found[s[:3]] = d
        for nxt, c in lat.hd_successors(s):
            nd = d + c
            if nd < dist.get(nxt, 1 << 60):
                dist[nxt] = nd
                heappush(heap, (nd, nxt))
    return found


def _ld_dijkstra(lat: Lattice, src: StateLD) -> Dict[StateLD, int]:
    dist: Dict[StateLD, int] = {src: 0}
    heap = [(0, src)]
    done: set = set()
    while heap:
        d, s = heappop(heap)
        if s in done:
            continue
        done.add(s)
        for nxt, c in lat.ld_successors(s):
            nd = d + c
            if nd < dist.get(nxt, 1 << 60):
                dist[nxt] = nd
                heappush(heap, (nd, nxt))
    return dist
