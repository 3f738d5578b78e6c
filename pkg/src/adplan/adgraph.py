"""
The mixed-dimensionality search space: circular high-dimensional (HD) regions
over a 2D base grid, the projection between the two layers, per-cell arrival
time lower bounds used to prune HD pre-images, and the combined successor
function.

States are plain tuples: (x, y) low-dimensional, (x, y, heading, t)
high-dimensional.  A state is HD exactly when its cell falls inside one of
the regions; regions only ever grow.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .lattice import Lattice, NUM_HEADINGS, StateHD, StateLD
from .search import grid_time_dijkstra
from .world import Scenario

log = logging.getLogger(__name__)

UNREACHABLE = -1


def project(s: StateHD) -> StateLD:
    """Drop heading and time: (x, y, h, t) -> (x, y)."""
    return (s[0], s[1])


@dataclass
class HDRegion:
    """Circular region (cell units); membership tests only (x, y)."""

    center: StateLD
    radius: float
    reason: str = "start"

    def contains(self, x: int, y: int) -> bool:
        dx, dy = x - self.center[0], y - self.center[1]
        return dx * dx + dy * dy <= self.radius * self.radius


@dataclass
class TimeLowerBoundMap:
    """Per-cell lower bound (in time steps) on any arrival time from the start,
    ignoring dynamic obstacles.  UNREACHABLE marks statically sealed cells."""

    t_dep: np.ndarray  # int64
    start: StateLD

    def value(self, x: int, y: int) -> int:
        return int(self.t_dep[x, y])


def compute_time_lower_bounds(
    scenario: Scenario, start: StateLD, lattice: Optional[Lattice] = None
) -> TimeLowerBoundMap:
    """Time-optimal 2D Dijkstra from the start over the inflated static grid,
    floored to whole steps so it stays a lower bound on 4D arrival times."""
    lat = lattice or Lattice(scenario)
    free = ~scenario.inflated
    sx, sy = start
    if not free[sx, sy]:
        raise ValueError("start blocked")
    cm = lat.cost_model
    # Per-move times quantized exactly like the 4D primitives, so the bound
    # is tight on straight-line travel while still never overestimating.
    t_straight = cm.ld_edge_cost(1.0, scenario.dt) / cm.cost_scale
    t_diag = cm.ld_edge_cost(math.sqrt(2.0), scenario.dt) / cm.cost_scale
    dist = grid_time_dijkstra(free, [start], t_straight, t_diag)
    out = np.full(free.shape, UNREACHABLE, dtype=np.int64)
    reachable = np.isfinite(dist)
    # The small epsilon only absorbs float noise in sums of 1 and sqrt(2);
    # exact multiples of dt map to their exact step count.
    steps = np.floor(dist[reachable] / scenario.dt + 1e-6).astype(np.int64)
    out[reachable] = np.maximum(steps, 0)
    return TimeLowerBoundMap(out, start)


class PreimageSet:
    """Lazy inverse projection of one cell: states (x, y, h, t) with any
    heading and t between the cell's arrival lower bound and the horizon."""

    def __init__(self, cell: StateLD, t_dep: int, horizon: int):
        self.cell = cell
        self.t_dep = t_dep
        self.horizon = horizon

    @property
    def empty(self) -> bool:
        return self.t_dep == UNREACHABLE or self.t_dep > self.horizon

    def __contains__(self, s) -> bool:
        if self.empty or len(s) != 4:
            return False
        x, y, h, t = s
        return (
            (x, y) == self.cell
            and 0 <= h < NUM_HEADINGS
            and self.t_dep <= t <= self.horizon
        )

    def __iter__(self) -> Iterator[StateHD]:
        if self.empty:
            return
        x, y = self.cell
        for h in range(NUM_HEADINGS):
            for t in range(self.t_dep, self.horizon + 1):
                yield (x, y, h, t)

    def __len__(self) -> int:
        if self.empty:
            return 0
        return NUM_HEADINGS * (self.horizon - self.t_dep + 1)


class AdaptiveGraph:
    """Mutable between planner iterations, read-only during a search."""

    def __init__(
        self,
        scenario: Scenario,
        lattice: Lattice,
        start: StateHD,
        goal: StateLD,
        tlb: Optional[TimeLowerBoundMap] = None,
        new_region_radius: float = 20.0,
        grow_increment: float = 10.0,
    ):
        self.scenario = scenario
        self.lattice = lattice
        self.start = start
        self.goal = goal
        self.new_region_radius = float(new_region_radius)
        self.grow_increment = float(grow_increment)
        self.tlb = tlb if tlb is not None else compute_time_lower_bounds(
            scenario, project(start), lattice
        )
        self._tdep = self.tlb.t_dep.tolist()
        self.regions: List[HDRegion] = []
        self._trace: List[dict] = []
        self._covered = np.zeros((scenario.map.width, scenario.map.height), dtype=bool)
        self.add_region(project(start), reason="start")

    # ------------------------------------------------------------------
    # Region management
    # ------------------------------------------------------------------

    def in_region(self, x: int, y: int) -> bool:
        for r in self.regions:
            dx, dy = x - r.center[0], y - r.center[1]
            if dx * dx + dy * dy <= r.radius * r.radius:
                return True
        return False

    def covered_count(self) -> int:
        return int(self._covered.sum())

    def _paint(self, center: StateLD, radius: float) -> int:
        """Mark the disc as covered; return the number of newly covered cells."""
        w, h = self._covered.shape
        cx, cy = center
        r = int(math.ceil(radius))
        x0, x1 = max(cx - r, 0), min(cx + r, w - 1)
        y0, y1 = max(cy - r, 0), min(cy + r, h - 1)
        if x0 > x1 or y0 > y1:
            return 0
        xs = np.arange(x0, x1 + 1)[:, None] - cx
        ys = np.arange(y0, y1 + 1)[None, :] - cy
        mask = xs * xs + ys * ys <= radius * radius
        sub = self._covered[x0 : x1 + 1, y0 : y1 + 1]
        newly = int((mask & ~sub).sum())
        sub |= mask
        return newly

    def add_region(self, center: StateLD, reason: str = "discrepancy") -> int:
        """Append a fresh region of the configured radius at `center`."""
        region = HDRegion(center, self.new_region_radius, reason)
        self.regions.append(region)
        self._trace.append({"center": list(center), "radius": region.radius, "reason": reason})
        return self._paint(center, region.radius)

    def grow_region(self, center: StateLD, reason: str = "discrepancy") -> int:
        """Grow the region containing `center` (nearest center wins).  Falls
        back to adding a region when nothing contains the cell."""
        containing = [r for r in self.regions if r.contains(*center)]
        if not containing:
            log.warning("grow_region at %s hit no region; adding one instead", center)
            return self.add_region(center, reason)
        best = min(
            containing,
            key=lambda r: ((r.center[0] - center[0]) ** 2 + (r.center[1] - center[1]) ** 2, r.center),
        )
        best.radius += self.grow_increment
        self._trace.append({"center": list(best.center), "radius": best.radius, "reason": reason})
        return self._paint(best.center, best.radius)

    def region_trace(self) -> List[dict]:
        """One entry per region action (adds and grows), in order."""
        return [dict(e) for e in self._trace]

    # ------------------------------------------------------------------
    # Projection
    # ------------------------------------------------------------------

    def inverse_project(self, s: StateLD) -> PreimageSet:
        x, y = s
        return PreimageSet(s, self._tdep[x][y], self.scenario.time_horizon_steps)

    # ------------------------------------------------------------------
    # Mixed successor function (reference implementation)
    # ------------------------------------------------------------------

    def ad_successors(self, s) -> List[Tuple[tuple, int]]:
        """Successors of a mixed state, straight from the two construction
        rules: HD states follow primitives (projected on exiting a region),
        LD states follow the 2D grid plus the HD transitions of their
        pruned pre-images that land inside a region.

        Inside regions the graph relaxes the no-waiting constraint: a
        primitive executes at the earliest collision-free departure at or
        after the state's time, and the implied waiting is charged at one
        per-step unit.  Edge costs equal elapsed time throughout, so any
        real 4D path arriving at time t costs exactly t steps of units and
        the mixed graph stays a relaxation of the full space-time graph,
        while each (state, primitive) pair yields at most one successor
        instead of a fan over the whole horizon.  Region entries from an LD
        cell work the same way, charged relative to the cell's arrival
        lower bound t_dep.

        Dynamic obstacles are only consulted on HD-to-HD transitions.  The
        planner uses an equivalent flattened form of this function; this
        one is the contract (and test oracle) version.
        """
        lat = self.lattice
        horizon = self.scenario.time_horizon_steps
        wait_unit = int(round(self.scenario.dt * lat.cost_model.cost_scale))
        out: List[Tuple[tuple, int]] = []
        if len(s) == 4:
            x, y, h, t = s
            for p in lat.by_heading[h]:
                idx = lat._prim_index[id(p)]
                if not lat.static_free(idx, x, y):
                    continue
                tx, ty = x + p.dx, y + p.dy
                if self.in_region(tx, ty):
                    tmax = horizon - p.duration
                    tt = t
                    while tt <= tmax and not lat.dynamic_free(idx, x, y, tt):
                        tt += 1
                    if tt <= tmax:
                        out.append((
                            (tx, ty, p.end_heading, tt + p.duration),
                            p.cost + (tt - t) * wait_unit,
                        ))
                elif t + p.duration <= horizon:
                    out.append(((tx, ty), p.cost))
        else:
            x, y = s
            for nxt, c in lat.ld_successors(s):
                if not self.in_region(*nxt):
                    out.append((nxt, c))
            pre = self.inverse_project(s)
            if not pre.empty:
                for h in range(NUM_HEADINGS):
                    for p in lat.by_heading[h]:
                        tx, ty = x + p.dx, y + p.dy
                        if not self.in_region(tx, ty):
                            continue
                        idx = lat._prim_index[id(p)]
                        if not lat.static_free(idx, x, y):
                            continue
                        tmax = horizon - p.duration
                        tt = pre.t_dep
                        while tt <= tmax and not lat.dynamic_free(idx, x, y, tt):
                            tt += 1
                        if tt <= tmax:
                            out.append((
                                (tx, ty, p.end_heading, tt + p.duration),
                                p.cost + (tt - pre.t_dep) * wait_unit,
                            ))
        return out
