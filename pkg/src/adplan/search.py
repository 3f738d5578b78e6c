"""
Reusable search kernels: full-grid 2D Dijkstra sweeps (heuristic and arrival
time lower bounds) and a generic weighted A* over any successor function.

All searches are deterministic: ties on f are broken toward larger g, then by
lexicographic state order.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from heapq import heappush, heappop
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .lattice import Lattice, LD_MOVES, StateLD

UNREACHABLE = -1

# Deadline polling interval, in expansions.
_DEADLINE_CHECK_EVERY = 4096


@dataclass
class SearchStats:
    hd_expansions: int = 0
    ld_expansions: int = 0
    elapsed: float = 0.0
    peak_open_size: int = 0

    def merge(self, other: "SearchStats") -> None:
        self.hd_expansions += other.hd_expansions
        self.ld_expansions += other.ld_expansions
        self.elapsed += other.elapsed
        self.peak_open_size = max(self.peak_open_size, other.peak_open_size)


@dataclass
class SearchResult:
    path: Optional[List] = None
    cost: int = 0
    stats: SearchStats = field(default_factory=SearchStats)
    frontier_best: Optional[Tuple] = None
    exhausted: bool = False  # resource limit hit; distinct from proven no-path
    path_g: Optional[List[int]] = None  # cumulative cost at each path state
    # Certified lower bound on the true optimal cost: the ARA*-style minimum
    # of g+h over the open list and inconsistently-improved closed states,
    # capped by the found cost.  Valid for any epsilon >= 1.
    lower_bound: float = math.inf

    @property
    def found(self) -> bool:
        return self.path is not None


@dataclass
class HeuristicMap:
    """Optimal 2D cost-to-goal per cell over the inflated static grid."""

    cost_to_goal: np.ndarray  # int64, UNREACHABLE where sealed off
    goal: StateLD

    def value(self, x: int, y: int) -> int:
        v = int(self.cost_to_goal[x, y])
        return v

    def as_lists(self) -> List[List[int]]:
        return self.cost_to_goal.tolist()


def grid_time_dijkstra(
    free: np.ndarray, sources: Sequence[StateLD], straight_cost: float, diagonal_cost: float
) -> np.ndarray:
    """Multi-source Dijkstra over the 8-connected free-cell grid.

    Returns float64 distances, inf where unreachable (or blocked).
    """
    w, h = free.shape
    n = w * h
    idx = np.arange(n).reshape(w, h)
    rows, cols, data = [], [], []
    for dx, dy, dist in LD_MOVES:
        cost = straight_cost if dist == 1.0 else diagonal_cost
        sx = slice(max(dx, 0), w + min(dx, 0))
        sy = slice(max(dy, 0), h + min(dy, 0))
        tx = slice(max(-dx, 0), w + min(-dx, 0))
        ty = slice(max(-dy, 0), h + min(-dy, 0))
        ok = free[tx, ty] & free[sx, sy]
        rows.append(idx[tx, ty][ok])
        cols.append(idx[sx, sy][ok])
        data.append(np.full(ok.sum(), cost))
    if rows:
        graph = sparse.csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n),
        )
    else:
        graph = sparse.csr_matrix((n, n))
    source_idx = [x * h + y for x, y in sources]
    dist = csgraph.dijkstra(graph, indices=source_idx, min_only=len(source_idx) > 1)
    if dist.ndim == 2:
        dist = dist[0]
    dist = dist.reshape(w, h)
    dist[~free] = np.inf
    return dist


def dijkstra_heuristic(scenario, goal: StateLD, lattice: Optional[Lattice] = None) -> HeuristicMap:
    """2D Dijkstra cost-to-goal over the inflated static grid, in cost units.

    Dynamic obstacles are ignored.  Raises if the goal cell is blocked after
    inflation.
    """
    lat = lattice or Lattice(scenario)
    free = ~scenario.inflated
    gx, gy = goal
    if not (0 <= gx < scenario.map.width and 0 <= gy < scenario.map.height) or not free[gx, gy]:
        raise ValueError("goal blocked")
    cm = lat.cost_model
    dist = grid_time_dijkstra(
        free,
        [goal],
        float(cm.ld_edge_cost(1.0, scenario.dt)),
        float(cm.ld_edge_cost(math.sqrt(2.0), scenario.dt)),
    )
    out = np.full(free.shape, UNREACHABLE, dtype=np.int64)
    reachable = np.isfinite(dist)
    out[reachable] = np.round(dist[reachable]).astype(np.int64)
    return HeuristicMap(out, goal)


def weighted_astar(
    successors: Callable,
    start,
    goal_test: Callable,
    h: Callable,
    epsilon: float,
    timeout_s: Optional[float] = None,
    max_expansions: Optional[int] = None,
    deadline: Optional[float] = None,
) -> SearchResult:
    """Weighted A* with f = g + epsilon*h, no re-expansion of closed states.

    States must be tuples of ints; 4-tuples count as high-dimensional
    expansions, 2-tuples as low-dimensional ones.  Returns a path whose cost
    is within epsilon of optimal when h is consistent.  A timeout or
    expansion cap produces `exhausted=True` with no path, which is distinct
    from a proven no-path result.
    """
    if epsilon < 1.0:
        raise ValueError("epsilon must be >= 1")
    t0 = time.monotonic()
    if deadline is None and timeout_s is not None:
        deadline = t0 + timeout_s
    stats = SearchStats()
    result = SearchResult(stats=stats)

    h0 = h(start)
    if h0 == math.inf:
        stats.elapsed = time.monotonic() - t0
        return result
    g: Dict = {start: 0}
    parent: Dict = {start: None}
    closed = set()
    heap = [(epsilon * h0, 0, start)]
    best_h = None  # (h, -g, state)
    incons_min = math.inf  # min g+h over improved-but-closed states
    pops = 0

    while heap:
        f, ng, s = heappop(heap)
        if s in closed:
            continue
        gs = -ng
        closed.add(s)
        pops += 1
        ls = len(s) if isinstance(s, tuple) else 2
        if ls == 4:
            stats.hd_expansions += 1
        elif ls == 2:
            stats.ld_expansions += 1

        hs = h(s)
        key = (hs, ng, s)
        if best_h is None or key < best_h:
            best_h = key

        if goal_test(s):
            path = []
            cur = s
            while cur is not None:
                path.append(cur)
                cur = parent[cur]
            path.reverse()
            result.path = path
            result.cost = gs
            result.path_g = [g[st] for st in path]
            break

        if pops % _DEADLINE_CHECK_EVERY == 0 and deadline is not None:
            if time.monotonic() > deadline:
                result.exhausted = True
                break
        if max_expansions is not None and pops >= max_expansions:
            result.exhausted = True
            break

        for nxt, c in successors(s):
            ngv = gs + c
            if nxt in closed:
                # Closed states are not re-expanded, but an improvement found
                # here makes them "inconsistent" in the ARA* sense; folding
                # them into the lower bound keeps it valid despite that.
                if ngv < g[nxt]:
                    hn = h(nxt)
                    if ngv + hn < incons_min:
                        incons_min = ngv + hn
                continue
            old = g.get(nxt)
            if old is None or ngv < old:
                g[nxt] = ngv
                parent[nxt] = s
                hn = h(nxt)
                if hn == math.inf:
                    continue
                heappush(heap, (ngv + epsilon * hn, -ngv, nxt))
        if len(heap) > stats.peak_open_size:
            stats.peak_open_size = len(heap)

    lb = float(result.cost) if result.path is not None else math.inf
    if incons_min < lb:
        lb = incons_min
    for fv, ngv, _ in heap:
        # f = g + epsilon*h with g = -ngv, so g + h = -ngv + (fv + ngv)/epsilon.
        v = -ngv + (fv + ngv) / epsilon
        if v < lb:
            lb = v
    result.lower_bound = lb
    result.frontier_best = best_h[2] if best_h is not None else None
    stats.elapsed = time.monotonic() - t0
    return result
