"""
Command-line front end.

    adplan plan  --scenario F --start x,y,h --goal x,y [--planner ad|baseline]
                 [--epsilon E | --epsilon-plan P --epsilon-track T]
                 [--timeout S] [--trace out.json] [--svg out.svg]
    adplan gen   --kind maze|indoor --size N --seed S --obstacles K --out DIR
    adplan bench --suite spec.json --out results.csv [--workers W]

Exit codes: 0 path found, 2 no path within the horizon, 3 resource budget
exhausted, 1 usage or I/O error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import adplanner, bench, envgen, world
from .adplanner import EXHAUSTED, FOUND, NO_PATH
from .lattice import NUM_HEADINGS

EXIT_FOUND = 0
EXIT_USAGE = 1
EXIT_NO_PATH = 2
EXIT_EXHAUSTED = 3

_STATUS_EXIT = {FOUND: EXIT_FOUND, NO_PATH: EXIT_NO_PATH, EXHAUSTED: EXIT_EXHAUSTED}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the interface reserves 2 for
    no-path, so usage errors must exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _int_tuple(text: str, n: int, what: str):
    parts = text.split(",")
    if len(parts) != n:
        raise ValueError(f"{what} must be {n} comma-separated integers")
    return tuple(int(p) for p in parts)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adplan", description="Adaptive-dimensionality path planning")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan one query on a scenario file")
    p.add_argument("--scenario", required=True)
    p.add_argument("--start", required=True, metavar="x,y,h")
    p.add_argument("--goal", required=True, metavar="x,y")
    p.add_argument("--planner", choices=("ad", "baseline"), default="ad")
    p.add_argument("--epsilon", type=float, default=1.5)
    p.add_argument("--epsilon-plan", type=float, default=None)
    p.add_argument("--epsilon-track", type=float, default=None)
    p.add_argument("--timeout", type=float, default=300.0)
    p.add_argument("--trace", default=None, help="write the plan trace as JSON")
    p.add_argument("--svg", default=None, help="render the scenario and result as SVG")

    g = sub.add_parser("gen", help="generate a benchmark environment")
    g.add_argument("--kind", choices=("maze", "indoor"), required=True)
    g.add_argument("--size", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--obstacles", type=int, required=True)
    g.add_argument("--out", required=True, help="output directory")

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("--suite", required=True, help="suite spec JSON")
    b.add_argument("--out", required=True, help="results CSV path")
    b.add_argument("--workers", type=int, default=1)

    return parser


def _cmd_plan(args) -> int:
    scenario = world.load_scenario(args.scenario)
    sx, sy, sh = _int_tuple(args.start, 3, "--start")
    gx, gy = _int_tuple(args.goal, 2, "--goal")
    if not 0 <= sh < NUM_HEADINGS:
        raise ValueError(f"start heading must be in 0..{NUM_HEADINGS - 1}")
    start = (sx, sy, sh % NUM_HEADINGS, 0)
    outcome = bench.run_query(
        scenario,
        start,
        (gx, gy),
        args.planner,
        args.epsilon,
        args.timeout,
        epsilon_plan=args.epsilon_plan,
        epsilon_track=args.epsilon_track,
    )
    if args.trace:
        doc = adplanner.outcome_trace_dict(outcome)
        Path(args.trace).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if args.svg:
        bench.render_svg(scenario, outcome, outcome.region_trace, args.svg)
    print(f"status: {outcome.status}")
    if outcome.status == FOUND:
        print(f"cost: {outcome.cost}")
        print(f"path states: {len(outcome.path)}")
        print(f"arrival time: {outcome.path[-1][3] * scenario.dt:g} s")
    print(f"iterations: {outcome.iterations}")
    print(f"hd expansions: {outcome.stats.hd_expansions}")
    print(f"ld expansions: {outcome.stats.ld_expansions}")
    print(f"wall time: {outcome.stats.elapsed:.3f} s")
    return _STATUS_EXIT[outcome.status]


def _cmd_gen(args) -> int:
    spec = envgen.GenSpec(
        kind=args.kind, size=args.size, seed=args.seed, n_obstacles=args.obstacles
    )
    scenario, start, goal = envgen.generate_scenario(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    world.save_scenario(scenario, out / "scenario.json", "map.txt")
    query = {"start": list(start), "goal": list(goal)}
    (out / "query.json").write_text(json.dumps(query, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out / 'map.txt'}, {out / 'scenario.json'}, {out / 'query.json'}")
    return 0


def _cmd_bench(args) -> int:
    suite = bench.SuiteSpec.load(args.suite)
    rows, agg = bench.run_suite(suite, workers=args.workers)
    bench.write_csv(rows, args.out)
    sys.stdout.write(bench.format_aggregate(agg))
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "plan":
            return _cmd_plan(args)
        if args.command == "gen":
            return _cmd_gen(args)
        return _cmd_bench(args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError, envgen.GenerationError) as exc:
        print(f"adplan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
