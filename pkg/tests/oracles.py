"""Independent reference implementations used only by the tests.

These deliberately avoid the package's search kernels: plain heapq Dijkstra
and breadth-style exhaustive 4D sweeps, so planner results can be checked
against something written separately.
"""
from __future__ import annotations

import heapq
import math
import random
from typing import Callable, Dict, Iterable, List, Optional, Tuple


def dijkstra_all(successors: Callable, start) -> Dict:
    """Exhaustive Dijkstra: optimal cost to every reachable state."""
    dist = {start: 0}
    heap = [(0, start)]
    done = set()
    while heap:
        g, s = heapq.heappop(heap)
        if s in done:
            continue
        done.add(s)
        for s2, c in successors(s):
            g2 = g + c
            if s2 not in dist or g2 < dist[s2]:
                dist[s2] = g2
                heapq.heappush(heap, (g2, s2))
    return dist


def dijkstra_to_goal(successors: Callable, start, goal_test: Callable) -> Optional[int]:
    """Optimal cost from start to the first goal state, None if unreachable."""
    heap = [(0, start)]
    done = set()
    while heap:
        g, s = heapq.heappop(heap)
        if s in done:
            continue
        done.add(s)
        if goal_test(s):
            return g
        for s2, c in successors(s):
            if s2 not in done:
                heapq.heappush(heap, (g + c, s2))
    return None


def hd_optimal_cost(lattice, start, goal_cell) -> Optional[int]:
    """Exhaustive 4D optimal cost to any state over the goal cell."""
    return dijkstra_to_goal(
        lattice.hd_successors,
        start,
        lambda s: (s[0], s[1]) == tuple(goal_cell),
    )


def hd_reachability(lattice, start) -> Dict[Tuple[int, int], int]:
    """Exhaustive 4D sweep: earliest arrival time step per (x, y) cell.

    Every transition advances time, so expanding states in time order visits
    each reachable 4D state exactly once.
    """
    earliest: Dict[Tuple[int, int], int] = {(start[0], start[1]): start[3]}
    seen = {start}
    heap = [(start[3], start)]
    while heap:
        t, s = heapq.heappop(heap)
        for s2, _ in lattice.hd_successors(s):
            if s2 not in seen:
                seen.add(s2)
                cell = (s2[0], s2[1])
                if s2[3] < earliest.get(cell, 1 << 60):
                    earliest[cell] = s2[3]
                heapq.heappush(heap, (s2[3], s2))
    return earliest


def hd_goal_reachable(lattice, start, goal_cell) -> bool:
    """Exhaustive 4D reachability of the goal cell within the horizon."""
    goal = tuple(goal_cell)
    if (start[0], start[1]) == goal:
        return True
    seen = {start}
    stack = [start]
    while stack:
        s = stack.pop()
        for s2, _ in lattice.hd_successors(s):
            if s2 in seen:
                continue
            if (s2[0], s2[1]) == goal:
                return True
            seen.add(s2)
            stack.append(s2)
    return False


def random_digraph(rng: random.Random, n_nodes: int = 30, n_edges: int = 90):
    """Random weighted digraph as an adjacency dict, for kernel equivalence."""
    adj: Dict[int, List[Tuple[int, int]]] = {v: [] for v in range(n_nodes)}
    for _ in range(n_edges):
        a = rng.randrange(n_nodes)
        b = rng.randrange(n_nodes)
        if a != b:
            adj[a].append((b, rng.randint(1, 20)))
    return adj
