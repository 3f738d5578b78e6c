"""Tests for the benchmark harness, CSV I/O, aggregation, and SVG output."""
import pytest

from adplan.adplanner import FOUND, PlanOutcome
from adplan.bench import (
    CSV_HEADER,
    ResultRow,
    SuiteSpec,
    aggregate,
    format_aggregate,
    read_csv,
    render_svg,
    rows_to_csv,
    run_suite,
    write_csv,
)
from adplan.envgen import GenSpec
from adplan.search import SearchStats

from conftest import empty_scenario, make_scenario, parked


def _row(planner, eps, env, status="found", time_s=1.0, hd=10, ld=5, cost=100, it=1):
    return ResultRow(planner, eps, env, status, time_s, hd, ld, cost, it)


# ---------------------------------------------------------------------------
# Suite execution


def test_run_suite_single_cell_grid():
    suite = SuiteSpec(
        n_environments=1,
        gen=GenSpec(kind="indoor", size=40, seed=4, n_obstacles=1),
        epsilons=(2.0,),
        planners=("baseline",),
        timeout=60.0,
    )
    rows, agg = run_suite(suite)
    assert len(rows) == 1
    r = rows[0]
    assert r.planner == "baseline"
    assert r.epsilon == 2.0
    assert r.env == "indoor-40-4"
    assert r.status == FOUND
    assert len(agg) == 1
    assert agg[0]["planners"]["baseline"]["successes"] == 1


def test_run_suite_grid_shape_and_order():
    suite = SuiteSpec(
        n_environments=2,
        gen=GenSpec(kind="maze", size=40, seed=10, n_obstacles=1),
        epsilons=(1.5, 2.0),
        planners=("ad", "baseline"),
        timeout=60.0,
    )
    rows, _ = run_suite(suite)
    assert len(rows) == 2 * 2 * 2
    keys = [(r.planner, r.epsilon, r.env) for r in rows]
    assert keys == sorted(keys)


def test_suitespec_validation_and_roundtrip():
    with pytest.raises(ValueError):
        SuiteSpec(n_environments=0, gen=GenSpec(kind="maze", size=40, seed=0, n_obstacles=0))
    with pytest.raises(ValueError):
        SuiteSpec(
            n_environments=1,
            gen=GenSpec(kind="maze", size=40, seed=0, n_obstacles=0),
            planners=("rrt",),
        )
    doc = {
        "n_environments": 3,
        "gen": {"kind": "maze", "size": 40, "seed": 0, "n_obstacles": 2},
        "epsilons": [1.1, 2.0],
        "planners": ["ad"],
        "timeout": 30.0,
    }
    suite = SuiteSpec.from_dict(doc)
    assert suite.epsilons == (1.1, 2.0)
    assert suite.planners == ("ad",)
    assert suite.gen.size == 40


# ---------------------------------------------------------------------------
# Aggregation


def test_aggregate_mean_and_sample_std():
    rows = [
        _row("ad", 1.5, f"e{i}", time_s=t, hd=h, cost=c)
        for i, (t, h, c) in enumerate([(10, 100, 1000), (20, 200, 2000), (30, 300, 3000)])
    ]
    rows += [_row("baseline", 1.5, f"e{i}") for i in range(3)]
    agg = aggregate(rows)
    st = agg[0]["planners"]["ad"]
    assert st["mean_time_s"] == pytest.approx(20.0)
    assert st["std_time_s"] == pytest.approx(10.0)  # sample (n-1) std
    assert st["mean_hd_expansions"] == pytest.approx(200.0)
    assert st["mean_cost"] == pytest.approx(2000.0)
    assert agg[0]["shared_successes"] == 3


def test_aggregate_shared_success_filter():
    # baseline times out on e1; means must use only e0 for both planners.
    rows = [
        _row("ad", 1.1, "e0", time_s=5.0),
        _row("ad", 1.1, "e1", time_s=50.0),
        _row("baseline", 1.1, "e0", time_s=7.0),
        _row("baseline", 1.1, "e1", status="resource_exhausted", time_s=300.0),
    ]
    agg = aggregate(rows)
    entry = agg[0]
    assert entry["shared_successes"] == 1
    assert entry["planners"]["ad"]["successes"] == 2  # counts are unfiltered
    assert entry["planners"]["baseline"]["successes"] == 1
    assert entry["planners"]["ad"]["mean_time_s"] == pytest.approx(5.0)
    assert entry["planners"]["baseline"]["mean_time_s"] == pytest.approx(7.0)


def test_aggregate_no_shared_successes_note():
    rows = [
        _row("ad", 2.0, "e0", status="no_path_within_horizon"),
        _row("baseline", 2.0, "e0", status="resource_exhausted"),
    ]
    agg = aggregate(rows)
    assert agg[0]["note"] == "no shared successes"
    assert "mean_time_s" not in agg[0]["planners"]["ad"]
    text = format_aggregate(agg)
    assert "no shared successes" in text


def test_aggregate_single_sample_std_is_zero():
    rows = [_row("ad", 1.5, "e0"), _row("baseline", 1.5, "e0")]
    agg = aggregate(rows)
    assert agg[0]["planners"]["ad"]["std_time_s"] == 0.0


# ---------------------------------------------------------------------------
# CSV


def test_csv_header_and_roundtrip(tmp_path):
    rows = [
        _row("ad", 1.1, "maze-40-0", time_s=0.1234),
        _row("baseline", 2.0, "maze-40-1", status="no_path_within_horizon", cost=0),
    ]
    text = rows_to_csv(rows)
    assert text.splitlines()[0] == CSV_HEADER
    path = tmp_path / "out.csv"
    write_csv(rows, path)
    back = read_csv(path)
    assert [(r.planner, r.epsilon, r.env, r.status, r.cost) for r in back] == [
        (r.planner, r.epsilon, r.env, r.status, r.cost) for r in rows
    ]


def test_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("planner,epsilon\nad,1.5\n")
    with pytest.raises(ValueError):
        read_csv(path)


def test_csv_epsilon_formatting():
    text = rows_to_csv([_row("ad", 1.1, "e"), _row("ad", 2.0, "e")])
    lines = text.splitlines()
    assert lines[1].split(",")[1] == "1.1"
    assert lines[2].split(",")[1] == "2"


# ---------------------------------------------------------------------------
# SVG


def test_svg_grid_only():
    rows = ["....", ".#..", ".#..", "...."]
    sc = make_scenario(rows)
    text = render_svg(sc)
    assert text.startswith("<svg")
    assert text.rstrip().endswith("</svg>")
    assert text.count('class="wall"') == 1  # vertical run merged into one rect
    assert 'class="path"' not in text


def test_svg_regions_and_obstacles():
    sc = empty_scenario(10, obstacles=[parked(5.5, 5.5, 1.0)])
    trace = [
        {"center": [2, 2], "radius": 2.0, "reason": "start"},
        {"center": [6, 6], "radius": 3.0, "reason": "discrepancy"},
    ]
    text = render_svg(sc, region_trace=trace)
    assert text.count('class="region"') == 2
    assert text.count('class="obstacle-start"') == 1
    assert text.count('class="obstacle"') == 0  # parked: no trajectory line


def test_svg_path_polyline_and_determinism(tmp_path):
    sc = empty_scenario(10)
    outcome = PlanOutcome(
        status=FOUND,
        path=[(1, 1, 0, 0), (2, 1, 0, 10), (3, 2, 1, 25)],
        cost=2500,
        iterations=1,
        trace=[],
        stats=SearchStats(),
        start=(1, 1, 0, 0),
        goal=(3, 2),
    )
    a = render_svg(sc, outcome=outcome)
    b = render_svg(sc, outcome=outcome, out_path=tmp_path / "o.svg")
    assert a == b == (tmp_path / "o.svg").read_text()
    assert a.count('class="path"') == 1
    poly = [ln for ln in a.splitlines() if 'class="path"' in ln][0]
    assert len(poly.split('points="')[1].split('"')[0].split()) == 3
    assert 'url(#pathtime)' in poly


def test_svg_unwritable_path_raises():
    sc = empty_scenario(5)
    with pytest.raises(OSError):
        render_svg(sc, out_path="/nonexistent-dir/x.svg")
