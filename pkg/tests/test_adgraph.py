import math
import random

import numpy as np
import pytest

from adplan.adgraph import (
    UNREACHABLE,
    AdaptiveGraph,
    HDRegion,
    compute_time_lower_bounds,
    project,
)
from adplan.lattice import Lattice, NUM_HEADINGS
from adplan.world import GridMap
from conftest import empty_scenario, make_grid, make_scenario, parked
from oracles import hd_reachability


def make_graph(sc, start=(1, 1, 0, 0), goal=None, **kw):
    lat = Lattice(sc)
    goal = goal or (sc.map.width - 2, sc.map.height - 2)
    return AdaptiveGraph(sc, lat, start, goal, **kw)


# ---------------------------------------------------------------- projection


def test_project_examples():
    assert project((5, 7, 3, 120)) == (5, 7)
    assert project((0, 0, 0, 0)) == (0, 0)


def test_inverse_project_members_project_back():
    g = make_graph(empty_scenario(12, horizon=60))
    pre = g.inverse_project((5, 7))
    for s in pre:
        assert project(s) == (5, 7)


def test_inverse_project_cardinality():
    sc = empty_scenario(12, horizon=100)
    g = make_graph(sc)
    g.tlb.t_dep[5, 7] = 40
    g._tdep = g.tlb.t_dep.tolist()
    pre = g.inverse_project((5, 7))
    assert len(pre) == 16 * 61
    assert (5, 7, 3, 100) in pre  # inclusive upper bound
    assert (5, 7, 3, 40) in pre
    assert (5, 7, 3, 39) not in pre  # below t_dep is pruned
    assert (5, 8, 3, 50) not in pre


def test_inverse_project_unreachable_cell_empty():
    rows = [
        ".....",
        ".###.",
        ".#.#.",
        ".###.",
        ".....",
    ]
    sc = make_scenario(make_grid(rows), half_width=0.3)
    g = make_graph(sc, start=(0, 0, 0, 0), goal=(4, 4))
    pre = g.inverse_project((2, 2))
    assert pre.empty and len(list(pre)) == 0


# ---------------------------------------------------------------- t_dep


def test_tlb_start_is_zero():
    sc = empty_scenario(10)
    tlb = compute_time_lower_bounds(sc, (3, 3))
    assert tlb.value(3, 3) == 0


def test_tlb_straight_line():
    sc = empty_scenario(10)
    tlb = compute_time_lower_bounds(sc, (2, 2))
    assert tlb.value(7, 2) == 50  # 5 cells at 1 cell/s over 0.1 s steps


def test_tlb_walled_off_unreachable():
    rows = [
        ".....",
        ".###.",
        ".#.#.",
        ".###.",
        ".....",
    ]
    sc = make_scenario(make_grid(rows), half_width=0.3)
    tlb = compute_time_lower_bounds(sc, (0, 0))
    assert tlb.value(2, 2) == UNREACHABLE


def test_tlb_blocked_start_raises():
    rows = ["...", ".#.", "..."]
    sc = make_scenario(make_grid(rows), half_width=0.3)
    with pytest.raises(ValueError, match="start blocked"):
        compute_time_lower_bounds(sc, (1, 1))


def test_tlb_lower_bounds_exhaustive_reachability():
    rows = ["." * 9 for _ in range(9)]
    rows[4] = "..#####.."
    sc = make_scenario(make_grid(rows), horizon=150)
    lat = Lattice(sc)
    start = (1, 1, 0, 0)
    tlb = compute_time_lower_bounds(sc, (1, 1), lat)
    for cell, t in hd_reachability(lat, start).items():
        assert tlb.value(*cell) != UNREACHABLE
        assert t >= tlb.value(*cell)


# ---------------------------------------------------------------- regions


def test_add_region_membership():
    g = make_graph(empty_scenario(60), start=(1, 1, 0, 0), new_region_radius=20.0)
    g.add_region((30, 30))
    assert g.in_region(45, 30)  # distance 15 < 20
    assert not g.in_region(51, 30)  # distance 21 > 20


def test_grow_region_extends_radius():
    g = make_graph(empty_scenario(70), start=(1, 1, 0, 0), new_region_radius=20.0, grow_increment=10.0)
    g.add_region((30, 30))
    g.grow_region((30, 30))
    assert g.in_region(55, 30)  # radius now 30, distance 25


def test_grow_without_containing_region_falls_back_to_add():
    g = make_graph(empty_scenario(80), start=(1, 1, 0, 0), new_region_radius=20.0)
    n_before = len(g.regions)
    g.grow_region((60, 60))
    assert len(g.regions) == n_before + 1
    assert g.in_region(60, 60)


def test_region_trace_schema():
    g = make_graph(empty_scenario(60), start=(1, 1, 0, 0))
    g.add_region((30, 30), reason="most_progress")
    g.grow_region((30, 30), reason="discrepancy")
    trace = g.region_trace()
    assert [e["reason"] for e in trace] == ["start", "most_progress", "discrepancy"]
    for e in trace:
        assert set(e) == {"center", "radius", "reason"}


def test_covered_set_only_grows():
    g = make_graph(empty_scenario(60), start=(5, 5, 0, 0))
    counts = [g.covered_count()]
    for center in [(20, 20), (40, 40), (20, 20)]:
        if g.in_region(*center):
            g.grow_region(center)
        else:
            g.add_region(center)
        counts.append(g.covered_count())
    assert all(b > a for a, b in zip(counts, counts[1:]))


def test_start_cell_always_in_region():
    g = make_graph(empty_scenario(30), start=(7, 9, 3, 0))
    assert g.in_region(7, 9)


# ---------------------------------------------------------------- successors


def test_ld_successors_far_from_regions():
    g = make_graph(empty_scenario(60), start=(1, 1, 0, 0))
    succ = g.ad_successors((50, 50))
    assert len(succ) == 8
    assert all(len(s) == 2 for s, _ in succ)


def test_hd_exit_is_projected_with_same_cost():
    g = make_graph(empty_scenario(60), start=(1, 1, 0, 0), new_region_radius=2.0)
    # Start region has radius 2; a state on its rim exits with its move.
    s = (3, 1, 0, 0)
    assert g.in_region(3, 1)
    succ = dict(g.ad_successors(s))
    lat = g.lattice
    straight = [p for p in lat.by_heading[0] if p.end_heading == 0][0]
    assert succ[(4, 1)] == straight.cost  # landed outside -> LD cell, HD cost


def test_boundary_cell_preimage_successors_match_brute_force():
    ob = parked(6.5, 4.5, 0.8)
    sc = make_scenario(GridMap.empty(10, 10), obstacles=[ob], horizon=80)
    g = make_graph(sc, start=(1, 1, 0, 0), new_region_radius=3.0)
    g.add_region((7, 5))
    cell = (4, 4)  # outside both regions, adjacent to the second
    assert not g.in_region(*cell)
    got = {s for s, _ in g.ad_successors(cell) if len(s) == 4}

    # Per (heading, primitive): only the earliest collision-free departure
    # at or after the cell's arrival lower bound yields an entry state.
    lat = g.lattice
    want = set()
    for h in range(NUM_HEADINGS):
        seen = set()
        for t in range(g.tlb.value(*cell), sc.time_horizon_steps + 1):
            for s2, _ in lat.hd_successors((cell[0], cell[1], h, t)):
                key = (s2[0], s2[1], s2[2])
                if g.in_region(s2[0], s2[1]) and key not in seen:
                    seen.add(key)
                    want.add(s2)
    assert got == want
    assert want  # the region boundary really is reachable from here


def test_region_entry_costs_charge_waiting():
    # An entry at time t costs the primitive plus one step-unit per step of
    # implied waiting past the cell's arrival lower bound.
    sc = empty_scenario(10, horizon=120)
    g = make_graph(sc, start=(1, 1, 0, 0), new_region_radius=2.0)
    g.add_region((7, 5))
    cell = (4, 5)
    td = g.tlb.value(*cell)
    lat = g.lattice
    unit = int(round(sc.dt * lat.cost_model.cost_scale))
    by_state = {}
    for s2, c in g.ad_successors(cell):
        if len(s2) == 4:
            by_state[s2] = c
    assert by_state
    prims = {
        (p.start_heading, p.end_heading, p.dx, p.dy): p for p in lat.primitives
    }
    for (tx, ty, eh, t2), c in by_state.items():
        # Recover the (unique, in open space) primitive and departure time.
        matches = [
            p
            for (sh, ph, dx, dy), p in prims.items()
            if ph == eh and tx - dx == cell[0] and ty - dy == cell[1]
            and t2 - p.duration >= td
        ]
        assert any(
            c == p.cost + (t2 - p.duration - td) * unit for p in matches
        ), (tx, ty, eh, t2, c)


def test_degenerates_to_full_hd_when_region_covers_map():
    sc = empty_scenario(10, horizon=100)
    g = make_graph(sc, start=(5, 5, 0, 0), new_region_radius=100.0)
    s = (5, 5, 2, 10)
    assert sorted(g.ad_successors(s)) == sorted(g.lattice.hd_successors(s))
