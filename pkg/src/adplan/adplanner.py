"""
The adaptive-dimensionality planner: iterate a mixed-dimensional planning
search, a full 4D tracking search inside a tunnel around the planned path,
and targeted growth of the HD regions until the tracked path is acceptable
or provably absent within the time horizon.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Set, Tuple

import numpy as np

from .adgraph import AdaptiveGraph, compute_time_lower_bounds, project
from .lattice import Lattice, NUM_HEADINGS, StateHD, StateLD
from .search import (
    SearchResult,
    SearchStats,
    dijkstra_heuristic,
    grid_time_dijkstra,
    weighted_astar,
)
from .world import Scenario, transition_collision

FOUND = "found"
NO_PATH = "no_path_within_horizon"
EXHAUSTED = "resource_exhausted"


@dataclass
class PlannerConfig:
    epsilon_plan: float = math.sqrt(1.5)
    epsilon_track: float = math.sqrt(1.5)
    tunnel_width: int = 10
    new_region_radius: float = 20.0
    grow_increment: float = 10.0
    timeout_s: float = 300.0
    max_iterations: int = 200
    # Per-iteration expansion budget for the tracking search, so a tunnel
    # with no feasible path fails fast into region growth instead of
    # sweeping the whole tunnel x horizon space.  It escalates every few
    # iterations so later, better-informed tunnels can always be searched
    # to completion.  The returned path's quality guarantee is unaffected:
    # acceptance always re-checks the explicit suboptimality bound.
    tracking_budget: int = 4_000

    def __post_init__(self) -> None:
        if self.epsilon_plan < 1.0 or self.epsilon_track < 1.0:
            raise ValueError("suboptimality factors must be >= 1")
        if self.tracking_budget <= 0:
            raise ValueError("tracking budget must be positive")

    @classmethod
    def from_epsilon(cls, epsilon: float, **kwargs) -> "PlannerConfig":
        """Give the whole bound to the tracking phase.

        The planning search is cheap (mostly 2D with an exact 2D heuristic),
        so running it unweighted costs little, while every bit of slack in
        epsilon_track makes the acceptance threshold easier to meet and the
        4D tracking search dramatically cheaper.  The product of the two
        factors, and hence the overall guarantee, is unchanged.
        """
        return cls(epsilon_plan=1.0, epsilon_track=epsilon, **kwargs)

    @property
    def epsilon(self) -> float:
        return self.epsilon_plan * self.epsilon_track


@dataclass
class Tunnel:
    """Cell set around a planning-phase path; the tracking search is the 4D
    lattice restricted to these cells."""

    cells: Set[StateLD]
    width: int


@dataclass
class IterationRecord:
    planning: SearchResult
    tracking: Optional[SearchResult]
    action: Optional[dict]  # {"op": add|grow, "reason", "cell", "newly_covered"}
    covered_cells: int


@dataclass
class PlanOutcome:
    status: str
    path: Optional[List[StateHD]]
    cost: int
    iterations: int
    trace: List[IterationRecord]
    stats: SearchStats
    start: StateHD
    goal: StateLD
    region_trace: List[dict] = field(default_factory=list)


def build_tunnel(planning_path: List[tuple], width: int, lattice: Lattice) -> Tunnel:
    """Cells within euclidean `width` of any projected path cell, minus
    statically occupied cells."""
    offsets = [
        (di, dj)
        for di in range(-width, width + 1)
        for dj in range(-width, width + 1)
        if di * di + dj * dj <= width * width
    ]
    occ = lattice._occ
    w, h = lattice.width, lattice.height
    cells: Set[StateLD] = set()
    for s in planning_path:
        x, y = s[0], s[1]
        for di, dj in offsets:
            cx, cy = x + di, y + dj
            if 0 <= cx < w and 0 <= cy < h and not occ[cx][cy]:
                cells.add((cx, cy))
    return Tunnel(cells, width)


def find_most_progress(tracking_result: SearchResult, start_cell: StateLD) -> StateLD:
    """Cell of the expanded state closest to the goal by heuristic; falls back
    to the start cell when nothing was expanded."""
    s = tracking_result.frontier_best
    if s is None:
        return start_cell
    return (s[0], s[1])


def find_discrepancy(
    tunnel_path: List[StateHD],
    tunnel_g: List[int],
    planning_path: List[tuple],
    planning_g: List[int],
) -> StateLD:
    """Cell where the tracked path's cumulative cost pulls ahead of the
    planned path's by the largest single increment.

    Both paths are aligned on shared projected cells in path order; ties go
    to the earliest cell.  With no shared cell beyond the start, the planned
    path's midpoint cell is returned.
    """
    plan_cells = [(s[0], s[1]) for s in planning_path]
    shared: List[Tuple[StateLD, int, int]] = []
    j = 0
    for i, cell in enumerate(plan_cells):
        k = j if i == 0 else j + 1
        while k < len(tunnel_path):
            if (tunnel_path[k][0], tunnel_path[k][1]) == cell:
                shared.append((cell, planning_g[i], tunnel_g[k]))
                j = k
                break
            k += 1
    if len(shared) < 2:
        return plan_cells[len(plan_cells) // 2]
    best_cell = None
    best_delta = -math.inf
    prev_diff = shared[0][2] - shared[0][1]
    for cell, gp, gt in shared[1:]:
        diff = gt - gp
        delta = diff - prev_diff
        if delta > best_delta:
            best_delta = delta
            best_cell = cell
        prev_diff = diff
    return best_cell


def heuristic_steps(hgrid: List[List[int]], scale_dt: float) -> List[List[int]]:
    """Per-cell lower bound on remaining travel time, in whole steps
    (floored), from a heuristic cost grid.  -1 marks unreachable cells."""
    return [
        [(-1 if v < 0 else int((v + 1e-9) // scale_dt)) for v in row] for row in hgrid
    ]


def make_planning_successors(graph: AdaptiveGraph, hsteps: List[List[int]]):
    """Mixed successor function over the adaptive graph, equivalent to
    AdaptiveGraph.ad_successors.  `hsteps` additionally prunes states that
    provably cannot reach the goal within the horizon (pass zeros to
    disable)."""
    lat = graph.lattice
    horizon = graph.scenario.time_horizon_steps
    wait_unit = int(round(graph.scenario.dt * lat.cost_model.cost_scale))
    width, height = lat.width, lat.height
    prim_rows: List[List[tuple]] = [[] for _ in range(NUM_HEADINGS)]
    for idx, p in enumerate(lat.primitives):
        prim_rows[p.start_heading].append(
            (idx, p.duration, p.cost, p.dx, p.dy, p.end_heading)
        )
    in_region = graph.in_region
    tdep = graph._tdep
    static_free = lat.static_free
    dynamic_free = lat.dynamic_free
    ld_successors = lat.ld_successors

    def planning_successors(s):
        out = []
        if len(s) == 4:
            x, y, h, t = s
            for idx, dur, cost, dx, dy, eh in prim_rows[h]:
                tx, ty = x + dx, y + dy
                if not (0 <= tx < width and 0 <= ty < height):
                    continue
                if not static_free(idx, x, y):
                    continue
                if in_region(tx, ty):
                    hs = hsteps[tx][ty]
                    if hs < 0:
                        continue
                    tmax = horizon - dur - hs
                    tt = t
                    while tt <= tmax and not dynamic_free(idx, x, y, tt):
                        tt += 1
                    if tt <= tmax:
                        out.append(
                            ((tx, ty, eh, tt + dur), cost + (tt - t) * wait_unit)
                        )
                elif t + dur <= horizon:
                    out.append(((tx, ty), cost))
        else:
            x, y = s
            for nxt, c in ld_successors(s):
                if not in_region(*nxt):
                    out.append((nxt, c))
            td = tdep[x][y]
            if td >= 0:
                for h in range(NUM_HEADINGS):
                    for idx, dur, cost, dx, dy, eh in prim_rows[h]:
                        tx, ty = x + dx, y + dy
                        if not (0 <= tx < width and 0 <= ty < height):
                            continue
                        if not in_region(tx, ty):
                            continue
                        hs = hsteps[tx][ty]
                        if hs < 0:
                            continue
                        if not static_free(idx, x, y):
                            continue
                        tmax = horizon - dur - hs
                        tt = td
                        while tt <= tmax and not dynamic_free(idx, x, y, tt):
                            tt += 1
                        if tt <= tmax:
                            out.append(
                                ((tx, ty, eh, tt + dur), cost + (tt - td) * wait_unit)
                            )
        return out

    return planning_successors


def plan(
    scenario: Scenario,
    start: StateHD,
    goal: StateLD,
    config: Optional[PlannerConfig] = None,
    lattice: Optional[Lattice] = None,
) -> PlanOutcome:
    """Run the full adaptive-dimensionality loop from an HD start state at
    t=0 to a 2D goal cell."""
    cfg = config or PlannerConfig()
    if start[3] != 0:
        raise ValueError("start state must have t = 0")
    t_begin = time.monotonic()
    deadline = t_begin + cfg.timeout_s
    lat = lattice or Lattice(scenario)
    horizon = scenario.time_horizon_steps
    total = SearchStats()
    trace: List[IterationRecord] = []
    start_cell = project(start)
    gx, gy = goal

    heur = dijkstra_heuristic(scenario, goal, lat)  # raises "goal blocked"
    hgrid = heur.as_lists()
    tlb = compute_time_lower_bounds(scenario, start_cell, lat)  # raises "start blocked"
    graph = AdaptiveGraph(
        scenario, lat, start, goal, tlb,
        new_region_radius=cfg.new_region_radius,
        grow_increment=cfg.grow_increment,
    )
    total_cells = scenario.map.width * scenario.map.height

    # Remaining-cost lower bound converted to whole time steps (floored so it
    # stays a lower bound); used to drop states that cannot reach the goal
    # within the horizon.
    scale_dt = lat.cost_model.cost_scale * scenario.dt
    hsteps = heuristic_steps(hgrid, scale_dt)

    def hfun(s) -> float:
        v = hgrid[s[0]][s[1]]
        return math.inf if v < 0 else v

    def goal_test(s) -> bool:
        return s[0] == gx and s[1] == gy

    def hd_goal_test(s) -> bool:
        return s[0] == gx and s[1] == gy

    # Flat primitive rows for the hot loops.
    prim_rows: List[List[tuple]] = [[] for _ in range(NUM_HEADINGS)]
    for idx, p in enumerate(lat.primitives):
        prim_rows[p.start_heading].append(
            (idx, p.duration, p.cost, p.dx, p.dy, p.end_heading)
        )

    static_free = lat.static_free
    dynamic_free = lat.dynamic_free

    planning_successors = make_planning_successors(graph, hsteps)

    cm = lat.cost_model
    straight_c = float(cm.ld_edge_cost(1.0, scenario.dt))
    diag_c = float(cm.ld_edge_cost(math.sqrt(2.0), scenario.dt))

    def tunnel_heuristic(cells: Set[StateLD]):
        """Cost-to-goal restricted to the tunnel, as (cost grid, step grid).

        The free-space heuristic badly underestimates inside a tunnel that
        forces a detour, leaving the tracking search a wide f-plateau to
        sweep.  A 2D Dijkstra over just the tunnel cells is still admissible
        for the tunnel-confined 4D search and tightens both the heuristic
        and the horizon pruning.  Cells the 2D Dijkstra cannot reach within
        the tunnel fall back to the free-space value: primitives can jump
        over 2D gaps in a thin tunnel, so an infinity there would be
        inadmissible.
        """
        mask = np.zeros((scenario.map.width, scenario.map.height), dtype=bool)
        for cx, cy in cells:
            mask[cx, cy] = True
        dist = grid_time_dijkstra(mask, [goal], straight_c, diag_c)
        grid = np.array(hgrid, dtype=np.int64)
        ok = np.isfinite(dist)
        grid[ok] = np.round(dist[ok]).astype(np.int64)
        glists = [list(map(int, col)) for col in grid]
        return glists, heuristic_steps(glists, scale_dt)

    def make_tunnel_successors(cells: Set[StateLD], hsteps_t: List[List[int]]):
        def tunnel_successors(s):
            x, y, h, t = s
            out = []
            for idx, dur, cost, dx, dy, eh in prim_rows[h]:
                t2 = t + dur
                if t2 > horizon:
                    continue
                tx, ty = x + dx, y + dy
                if (tx, ty) not in cells:
                    continue
                hs = hsteps_t[tx][ty]
                if hs < 0 or t2 + hs > horizon:
                    continue
                if static_free(idx, x, y) and dynamic_free(idx, x, y, t):
                    out.append(((tx, ty, eh, t2), cost))
            return out

        return tunnel_successors

    def finish(status: str, path=None, cost: int = 0) -> PlanOutcome:
        total.elapsed = time.monotonic() - t_begin
        return PlanOutcome(
            status=status,
            path=path,
            cost=cost,
            iterations=len(trace),
            trace=trace,
            stats=total,
            start=start,
            goal=goal,
            region_trace=graph.region_trace(),
        )

    prev_pkey = None
    prev_tracking: Optional[SearchResult] = None
    # Best certified lower bound on the true 4D optimum seen so far.  Every
    # planning graph is a relaxation of the 4D graph, so each iteration's
    # search bound applies, and the acceptance test below may use
    # epsilon * lb -- often far more permissive than the per-path
    # epsilon_track * planning.cost test while carrying the same guarantee.
    lb_best = 0.0

    for it in range(cfg.max_iterations):
        planning = weighted_astar(
            planning_successors, start, goal_test, hfun, cfg.epsilon_plan,
            deadline=deadline,
        )
        total.merge(planning.stats)
        if planning.exhausted:
            trace.append(IterationRecord(planning, None, None, graph.covered_count()))
            return finish(EXHAUSTED)
        if not planning.found:
            trace.append(IterationRecord(planning, None, None, graph.covered_count()))
            return finish(NO_PATH)

        ppath = planning.path
        pg = planning.path_g

        pkey = (planning.cost, tuple(ppath))
        if planning.lower_bound > lb_best:
            lb_best = planning.lower_bound
        threshold = max(cfg.epsilon_track * planning.cost, cfg.epsilon * lb_best)
        if pkey == prev_pkey and prev_tracking is not None:
            # The region action did not change the planning path, so the
            # tunnel and the tracking search would repeat verbatim; reuse
            # the previous result and spend the iteration on further growth.
            tracking = prev_tracking
        else:
            tunnel = build_tunnel(ppath, cfg.tunnel_width, lat)
            th_grid, th_steps = tunnel_heuristic(tunnel.cells)

            def hfun_t(s) -> float:
                v = th_grid[s[0]][s[1]]
                return math.inf if v < 0 else v

            tunnel_successors = make_tunnel_successors(tunnel.cells, th_steps)
            budget = cfg.tracking_budget << (it // 3)
            # Greedy fast pass: the explicit threshold check below is what
            # carries the suboptimality guarantee, so a heavy weight here
            # only risks an extra pass, never a worse answer.
            fast_w = max(cfg.epsilon, 2.0)
            tracking = weighted_astar(
                tunnel_successors, start, hd_goal_test, hfun_t, fast_w,
                deadline=deadline, max_expansions=budget,
            )
            total.merge(tracking.stats)
            if tracking.found and tracking.cost > threshold and fast_w > cfg.epsilon_track:
                # Just missed the bound: retry at the tracking weight before
                # concluding there is a genuine cost discrepancy.
                precise = weighted_astar(
                    tunnel_successors, start, hd_goal_test, hfun_t, cfg.epsilon_track,
                    deadline=deadline, max_expansions=budget,
                )
                total.merge(precise.stats)
                if precise.found:
                    tracking = precise
            prev_pkey, prev_tracking = pkey, tracking
        if tracking.exhausted and time.monotonic() >= deadline:
            trace.append(IterationRecord(planning, tracking, None, graph.covered_count()))
            return finish(EXHAUSTED)

        if tracking.found and tracking.cost <= threshold:
            trace.append(IterationRecord(planning, tracking, None, graph.covered_count()))
            return finish(FOUND, path=tracking.path, cost=tracking.cost)

        if not tracking.found:
            cell = find_most_progress(tracking, start_cell)
            reason = "most_progress"
        else:
            cell = find_discrepancy(tracking.path, tracking.path_g, ppath, pg)
            reason = "discrepancy"

        if graph.in_region(*cell):
            op = "grow"
            newly = graph.grow_region(cell, reason)
        else:
            op = "add"
            newly = graph.add_region(cell, reason)
        # The termination argument needs coverage to strictly grow; keep
        # growing when an action lands entirely inside existing coverage.
        while newly == 0 and graph.covered_count() < total_cells:
            newly = graph.grow_region(cell, reason)
        if newly == 0:
            # Full coverage and tracking still failed: the graph cannot be
            # refined any further.  The planning graph stays a relaxation
            # (it charges but does not forbid in-region waiting), so run one
            # exact search of the real space-time graph -- tracking with the
            # tunnel widened to every free cell and no expansion budget --
            # to settle found-versus-no-path instead of giving up.
            occ = lat._occ
            free = {
                (x, y)
                for x in range(scenario.map.width)
                for y in range(scenario.map.height)
                if not occ[x][y]
            }
            fh_grid, fh_steps = tunnel_heuristic(free)

            def hfun_f(s) -> float:
                v = fh_grid[s[0]][s[1]]
                return math.inf if v < 0 else v

            exact = weighted_astar(
                make_tunnel_successors(free, fh_steps), start, hd_goal_test,
                hfun_f, cfg.epsilon_track, deadline=deadline,
            )
            total.merge(exact.stats)
            trace.append(IterationRecord(planning, exact, None, graph.covered_count()))
            if exact.found:
                return finish(FOUND, path=exact.path, cost=exact.cost)
            if exact.exhausted:
                return finish(EXHAUSTED)
            return finish(NO_PATH)

        trace.append(
            IterationRecord(
                planning, tracking,
                {"op": op, "reason": reason, "cell": cell, "newly_covered": newly},
                graph.covered_count(),
            )
        )

    return finish(EXHAUSTED)


def validate_outcome(
    scenario: Scenario, outcome: PlanOutcome, lattice: Optional[Lattice] = None
) -> bool:
    """Independently re-simulate a found path: endpoints, strictly advancing
    time matching primitive durations, and a fresh collision check of every
    swept sample through the world predicates."""
    if outcome.status != FOUND or not outcome.path:
        return False
    lat = lattice or Lattice(scenario)
    path = outcome.path
    if path[0] != outcome.start or path[0][3] != 0:
        return False
    if (path[-1][0], path[-1][1]) != outcome.goal:
        return False
    cost = 0
    for a, b in zip(path, path[1:]):
        if b[3] <= a[3]:
            return False
        candidates = [
            p
            for p in lat.by_heading[a[2]]
            if p.end_heading == b[2]
            and p.dx == b[0] - a[0]
            and p.dy == b[1] - a[1]
            and a[3] + p.duration == b[3]
        ]
        ok = False
        for p in candidates:
            if not transition_collision(scenario, lat.swept(p, a[0], a[1], a[3])):
                ok = True
                cost += p.cost
                break
        if not ok:
            return False
    return cost == outcome.cost


def outcome_trace_dict(outcome: PlanOutcome) -> dict:
    """JSON-friendly per-iteration trace for tooling and rendering."""
    return {
        "status": outcome.status,
        "cost": outcome.cost,
        "iterations": outcome.iterations,
        "start": list(outcome.start),
        "goal": list(outcome.goal),
        "regions": outcome.region_trace,
        "stats": {
            "hd_expansions": outcome.stats.hd_expansions,
            "ld_expansions": outcome.stats.ld_expansions,
            "elapsed_s": outcome.stats.elapsed,
            "peak_open_size": outcome.stats.peak_open_size,
        },
        "iteration_trace": [
            {
                "planning_found": rec.planning.found,
                "planning_cost": rec.planning.cost,
                "planning_hd_expansions": rec.planning.stats.hd_expansions,
                "planning_ld_expansions": rec.planning.stats.ld_expansions,
                "tracking_found": rec.tracking.found if rec.tracking else None,
                "tracking_cost": rec.tracking.cost if rec.tracking else None,
                "tracking_hd_expansions": rec.tracking.stats.hd_expansions if rec.tracking else None,
                "action": (
                    {**rec.action, "cell": list(rec.action["cell"])}
                    if rec.action
                    else None
                ),
                "covered_cells": rec.covered_cells,
            }
            for rec in outcome.trace
        ],
    }
