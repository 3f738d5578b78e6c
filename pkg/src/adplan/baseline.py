"""
Baseline planner: one weighted A* straight over the full 4D space-time
lattice, dynamic obstacles checked on every transition, guided by the same
2D Dijkstra heuristic as the adaptive planner.  Shares primitives, collision
model, and tie-breaking so benchmark differences isolate the adaptive
mechanism.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import List, Optional

from .adplanner import EXHAUSTED, FOUND, NO_PATH, PlanOutcome
from .lattice import Lattice, NUM_HEADINGS, StateHD, StateLD
from .search import SearchStats, dijkstra_heuristic, weighted_astar
from .world import Scenario


@dataclass
class BaselineConfig:
    epsilon: float = 1.5
    timeout_s: float = 300.0

    def __post_init__(self) -> None:
        if self.epsilon < 1.0:
            raise ValueError("epsilon must be >= 1")


def plan_full(
    scenario: Scenario,
    start: StateHD,
    goal: StateLD,
    config: Optional[BaselineConfig] = None,
    lattice: Optional[Lattice] = None,
) -> PlanOutcome:
    """Plan from an HD start state at t=0 to any state above the goal cell."""
    cfg = config or BaselineConfig()
    if start[3] != 0:
        raise ValueError("start state must have t = 0")
    t_begin = time.monotonic()
    lat = lattice or Lattice(scenario)
    horizon = scenario.time_horizon_steps
    gx, gy = goal

    heur = dijkstra_heuristic(scenario, goal, lat)  # raises "goal blocked"
    hgrid = heur.as_lists()
    scale_dt = lat.cost_model.cost_scale * scenario.dt
    hsteps = [
        [(-1 if v < 0 else int((v + 1e-9) // scale_dt)) for v in row] for row in hgrid
    ]

    prim_rows: List[List[tuple]] = [[] for _ in range(NUM_HEADINGS)]
    for idx, p in enumerate(lat.primitives):
        prim_rows[p.start_heading].append(
            (idx, p.duration, p.cost, p.dx, p.dy, p.end_heading)
        )
    static_free = lat.static_free
    dynamic_free = lat.dynamic_free

    def successors(s):
        x, y, h, t = s
        out = []
        for idx, dur, cost, dx, dy, eh in prim_rows[h]:
            t2 = t + dur
            if t2 > horizon:
                continue
            tx, ty = x + dx, y + dy
            hs = hsteps[tx][ty] if 0 <= tx < lat.width and 0 <= ty < lat.height else -1
            if hs < 0 or t2 + hs > horizon:
                continue
            if static_free(idx, x, y) and dynamic_free(idx, x, y, t):
                out.append(((tx, ty, eh, t2), cost))
        return out

    def hfun(s) -> float:
        v = hgrid[s[0]][s[1]]
        return math.inf if v < 0 else v

    def goal_test(s) -> bool:
        return s[0] == gx and s[1] == gy

    res = weighted_astar(
        successors, start, goal_test, hfun, cfg.epsilon, timeout_s=cfg.timeout_s
    )
    stats = SearchStats(
        hd_expansions=res.stats.hd_expansions,
        ld_expansions=0,
        elapsed=time.monotonic() - t_begin,
        peak_open_size=res.stats.peak_open_size,
    )
    if res.found:
        status = FOUND
    elif res.exhausted:
        status = EXHAUSTED
    else:
        status = NO_PATH
    return PlanOutcome(
        status=status,
        path=res.path,
        cost=res.cost,
        iterations=1,
        trace=[],
        stats=stats,
        start=start,
        goal=goal,
    )
