"""
Benchmark harness: run (planner, epsilon, environment) grids, collect
per-run statistics into CSV rows, aggregate them with a shared-success
filter, and render scenarios/paths/regions as SVG.
"""
from __future__ import annotations

import csv
import io
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import adplanner, baseline
from .adplanner import FOUND, PlanOutcome, PlannerConfig
from .baseline import BaselineConfig
from .envgen import GenSpec, generate_scenario
from .lattice import Lattice, StateHD, StateLD
from .world import Scenario

CSV_HEADER = "planner,epsilon,env,status,time_s,hd_expansions,ld_expansions,cost,iterations"
CSV_FIELDS = CSV_HEADER.split(",")

DEFAULT_EPSILONS = (1.1, 1.5, 2.0)


@dataclass(frozen=True)
class SuiteSpec:
    n_environments: int
    gen: GenSpec
    epsilons: Tuple[float, ...] = DEFAULT_EPSILONS
    planners: Tuple[str, ...] = ("ad", "baseline")
    timeout: float = 300.0

    def __post_init__(self) -> None:
        if self.n_environments <= 0:
            raise ValueError("n_environments must be positive")
        bad = set(self.planners) - {"ad", "baseline"}
        if bad:
            raise ValueError(f"unknown planners: {sorted(bad)}")
        if not self.planners:
            raise ValueError("need at least one planner")

    @classmethod
    def from_dict(cls, doc: dict) -> "SuiteSpec":
        doc = dict(doc)
        gen = GenSpec.from_dict(doc.pop("gen"))
        if "epsilons" in doc:
            doc["epsilons"] = tuple(doc["epsilons"])
        if "planners" in doc:
            doc["planners"] = tuple(doc["planners"])
        return cls(gen=gen, **doc)

    @classmethod
    def load(cls, path: Path | str) -> "SuiteSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class ResultRow:
    planner: str
    epsilon: float
    env: str
    status: str
    time_s: float
    hd_expansions: int
    ld_expansions: int
    cost: int
    iterations: int

    def as_list(self) -> List[str]:
        return [
            self.planner,
            f"{self.epsilon:g}",
            self.env,
            self.status,
            f"{self.time_s:.4f}",
            str(self.hd_expansions),
            str(self.ld_expansions),
            str(self.cost),
            str(self.iterations),
        ]


def run_query(
    scenario: Scenario,
    start: StateHD,
    goal: StateLD,
    planner: str,
    epsilon: float,
    timeout: float,
    lattice: Optional[Lattice] = None,
    epsilon_plan: Optional[float] = None,
    epsilon_track: Optional[float] = None,
) -> PlanOutcome:
    """Run one planner on one query; never raises on timeouts or no-path."""
    if planner == "ad":
        if epsilon_plan is not None or epsilon_track is not None:
            cfg = PlannerConfig(
                epsilon_plan=epsilon_plan or math.sqrt(epsilon),
                epsilon_track=epsilon_track or math.sqrt(epsilon),
                timeout_s=timeout,
            )
        else:
            cfg = PlannerConfig.from_epsilon(epsilon, timeout_s=timeout)
        return adplanner.plan(scenario, start, goal, cfg, lattice)
    if planner == "baseline":
        return baseline.plan_full(
            scenario, start, goal, BaselineConfig(epsilon=epsilon, timeout_s=timeout), lattice
        )
    raise ValueError(f"unknown planner {planner!r}")


def outcome_row(planner: str, epsilon: float, env: str, outcome: PlanOutcome) -> ResultRow:
    return ResultRow(
        planner=planner,
        epsilon=epsilon,
        env=env,
        status=outcome.status,
        time_s=outcome.stats.elapsed,
        hd_expansions=outcome.stats.hd_expansions,
        ld_expansions=outcome.stats.ld_expansions,
        cost=outcome.cost if outcome.status == FOUND else 0,
        iterations=outcome.iterations,
    )


def _run_env(args) -> List[ResultRow]:
    suite, env_index = args
    spec = suite.gen
    env_spec = GenSpec(
        kind=spec.kind,
        size=spec.size,
        seed=spec.seed + env_index,
        n_obstacles=spec.n_obstacles,
        large_fraction=spec.large_fraction,
        obstacle_speed=spec.obstacle_speed,
        dt=spec.dt,
        cell_size=spec.cell_size,
        horizon_factor=spec.horizon_factor,
        min_traj_fraction=spec.min_traj_fraction,
    )
    env_id = f"{env_spec.kind}-{env_spec.size}-{env_spec.seed}"
    scenario, start, goal = generate_scenario(env_spec)
    lattice = Lattice(scenario)
    rows = []
    for planner in suite.planners:
        for eps in suite.epsilons:
            outcome = run_query(scenario, start, goal, planner, eps, suite.timeout, lattice)
            rows.append(outcome_row(planner, eps, env_id, outcome))
    return rows


def run_suite(suite: SuiteSpec, workers: int = 1) -> Tuple[List[ResultRow], List[dict]]:
    """Execute the full (planner, epsilon, environment) grid.

    Individual run failures become status rows; the suite itself never aborts.
    Rows come back sorted by (planner, epsilon, env) regardless of worker
    scheduling.
    """
    tasks = [(suite, i) for i in range(suite.n_environments)]
    rows: List[ResultRow] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for batch in pool.map(_run_env, tasks):
                rows.extend(batch)
    else:
        for task in tasks:
            rows.extend(_run_env(task))
    rows.sort(key=lambda r: (r.planner, r.epsilon, r.env))
    return rows, aggregate(rows)


# ----------------------------------------------------------------------
# Aggregation
# ----------------------------------------------------------------------


def _mean_std(values: Sequence[float]) -> Tuple[float, float]:
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, std


def aggregate(rows: Sequence[ResultRow]) -> List[dict]:
    """Per-epsilon summary with the shared-success filter.

    Success counts include every run; means and sample standard deviations
    use only environments solved by *all* planners at that epsilon.
    """
    planners = sorted({r.planner for r in rows})
    epsilons = sorted({r.epsilon for r in rows})
    out = []
    for eps in epsilons:
        sub = [r for r in rows if r.epsilon == eps]
        solved: Dict[str, Dict[str, ResultRow]] = {p: {} for p in planners}
        for r in sub:
            if r.status == FOUND:
                solved[r.planner][r.env] = r
        shared = set.intersection(*(set(solved[p]) for p in planners)) if planners else set()
        entry: dict = {
            "epsilon": eps,
            "shared_successes": len(shared),
            "planners": {},
        }
        if not shared:
            entry["note"] = "no shared successes"
        for p in planners:
            stats: dict = {"successes": len(solved[p]), "runs": len([r for r in sub if r.planner == p])}
            if shared:
                picked = [solved[p][e] for e in sorted(shared)]
                for key, vals in (
                    ("time_s", [r.time_s for r in picked]),
                    ("hd_expansions", [float(r.hd_expansions) for r in picked]),
                    ("ld_expansions", [float(r.ld_expansions) for r in picked]),
                    ("cost", [float(r.cost) for r in picked]),
                ):
                    mean, std = _mean_std(vals)
                    stats[f"mean_{key}"] = mean
                    stats[f"std_{key}"] = std
            entry["planners"][p] = stats
        out.append(entry)
    return out


def format_aggregate(agg: Sequence[dict]) -> str:
    lines = []
    for entry in agg:
        lines.append(f"epsilon {entry['epsilon']:g}  (shared successes: {entry['shared_successes']})")
        if "note" in entry:
            lines.append(f"  {entry['note']}")
        for p, st in entry["planners"].items():
            line = f"  {p:<8} success {st['successes']}/{st['runs']}"
            if "mean_time_s" in st:
                line += (
                    f"  time {st['mean_time_s']:.2f}s (sd {st['std_time_s']:.2f})"
                    f"  hd {st['mean_hd_expansions']:.0f} (sd {st['std_hd_expansions']:.0f})"
                    f"  ld {st['mean_ld_expansions']:.0f}"
                    f"  cost {st['mean_cost']:.0f} (sd {st['std_cost']:.0f})"
                )
            lines.append(line)
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# CSV I/O
# ----------------------------------------------------------------------


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in rows:
        writer.writerow(r.as_list())
    return buf.getvalue()


def write_csv(rows: Sequence[ResultRow], path: Path | str) -> None:
    Path(path).write_text(rows_to_csv(rows))


def read_csv(path: Path | str) -> List[ResultRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_FIELDS:
            raise ValueError(f"unexpected CSV header {header}")
        rows = []
        for rec in reader:
            rows.append(
                ResultRow(
                    planner=rec[0],
                    epsilon=float(rec[1]),
                    env=rec[2],
                    status=rec[3],
                    time_s=float(rec[4]),
                    hd_expansions=int(rec[5]),
                    ld_expansions=int(rec[6]),
                    cost=int(rec[7]),
                    iterations=int(rec[8]),
                )
            )
    return rows


# ----------------------------------------------------------------------
# SVG rendering
# ----------------------------------------------------------------------


def render_svg(
    scenario: Scenario,
    outcome: Optional[PlanOutcome] = None,
    region_trace: Optional[Sequence[dict]] = None,
    out_path: Optional[Path | str] = None,
) -> str:
    """Draw the static grid, gray obstacle trajectory polylines, the found
    path as a single time-gradient polyline, and one circle per HD region.

    Returns the SVG text; writes it to `out_path` when given.  Output is a
    pure function of the inputs.
    """
    grid = scenario.map
    scale = max(2, 900 // max(grid.width, grid.height))
    W, H = grid.width * scale, grid.height * scale

    def sx(x: float) -> float:
        return x / grid.cell_size * scale

    def sy(y: float) -> float:
        return H - y / grid.cell_size * scale

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        '<defs><linearGradient id="pathtime" x1="0" y1="0" x2="1" y2="1">'
        '<stop offset="0" stop-color="#2060ff"/><stop offset="1" stop-color="#ff4020"/>'
        "</linearGradient></defs>",
        f'<rect width="{W}" height="{H}" fill="#f4f4f4"/>',
    ]
    # Occupied cells, run-length merged per column.
    occ = grid.occupancy
    for x in range(grid.width):
        y = 0
        while y < grid.height:
            if occ[x, y]:
                y0 = y
                while y < grid.height and occ[x, y]:
                    y += 1
                parts.append(
                    f'<rect class="wall" x="{x * scale}" y="{H - y * scale}" '
                    f'width="{scale}" height="{(y - y0) * scale}" fill="#303030"/>'
                )
            else:
                y += 1
    # Obstacle trajectories.
    for o in scenario.obstacles:
        if len(o.waypoints) > 1:
            pts = " ".join(f"{sx(px):.1f},{sy(py):.1f}" for px, py in o.waypoints)
            parts.append(
                f'<polyline class="obstacle" points="{pts}" fill="none" '
                f'stroke="#909090" stroke-width="{0.4 * scale:.1f}"/>'
            )
        ox, oy = o.waypoints[0]
        parts.append(
            f'<circle class="obstacle-start" cx="{sx(ox):.1f}" cy="{sy(oy):.1f}" '
            f'r="{o.radius / grid.cell_size * scale:.1f}" fill="#b0b0b0" fill-opacity="0.6"/>'
        )
    # HD regions, one circle per trace entry.
    for reg in region_trace or []:
        cx, cy = reg["center"]
        parts.append(
            f'<circle class="region" cx="{(cx + 0.5) * scale:.1f}" '
            f'cy="{H - (cy + 0.5) * scale:.1f}" r="{reg["radius"] * scale:.1f}" '
            f'fill="none" stroke="#ffffff" stroke-width="2" '
            f'stroke-opacity="0.9" stroke-dasharray="6,3"/>'
        )
    # Robot path: one polyline, time-gradient stroke.
    if outcome is not None and outcome.path:
        pts = " ".join(
            f"{(s[0] + 0.5) * scale:.1f},{H - (s[1] + 0.5) * scale:.1f}"
            for s in outcome.path
        )
        parts.append(
            f'<polyline class="path" points="{pts}" fill="none" '
            f'stroke="url(#pathtime)" stroke-width="{0.6 * scale:.1f}" '
            'stroke-linejoin="round" stroke-linecap="round"/>'
        )
        parts.append(
            f'<circle class="start" cx="{(outcome.start[0] + 0.5) * scale:.1f}" '
            f'cy="{H - (outcome.start[1] + 0.5) * scale:.1f}" r="{0.6 * scale:.1f}" fill="#2060ff"/>'
        )
        parts.append(
            f'<circle class="goal" cx="{(outcome.goal[0] + 0.5) * scale:.1f}" '
            f'cy="{H - (outcome.goal[1] + 0.5) * scale:.1f}" r="{0.6 * scale:.1f}" fill="#ff4020"/>'
        )
    parts.append("</svg>")
    text = "\n".join(parts) + "\n"
    if out_path is not None:
        Path(out_path).write_text(text)
    return text
