"""Generate one indoor scenario, plan it with both planners, and render SVGs.

Run from the repository root after installing the package:

    python3 demos/quickstart.py [outdir]
"""
from __future__ import annotations

import sys
from pathlib import Path

from adplan.adplanner import FOUND, PlannerConfig, plan
from adplan.baseline import BaselineConfig, plan_full
from adplan.bench import render_svg
from adplan.envgen import GenSpec, generate_scenario
from adplan.lattice import Lattice


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo-out")
    out.mkdir(parents=True, exist_ok=True)

    spec = GenSpec(kind="indoor", size=120, seed=3, n_obstacles=6)
    scenario, start, goal = generate_scenario(spec)
    lattice = Lattice(scenario)
    print(f"indoor {scenario.map.width}x{scenario.map.height}, "
          f"{len(scenario.obstacles)} movers, start {start} goal {goal}")

    cfg = PlannerConfig.from_epsilon(1.1, timeout_s=60.0)
    ad = plan(scenario, start, goal, cfg, lattice)
    bl = plan_full(scenario, start, goal, BaselineConfig(epsilon=1.1, timeout_s=60.0), lattice)

    for name, outcome, regions in (("adaptive", ad, ad.region_trace), ("baseline", bl, None)):
        line = f"{name:9s} {outcome.status:24s} hd={outcome.stats.hd_expansions:<8d}"
        if outcome.status == FOUND:
            line += (f" cost={outcome.cost}"
                     f" arrival={outcome.path[-1][3] * scenario.dt:g}s")
        print(line)
        svg = out / f"{name}.svg"
        render_svg(scenario, outcome, regions, svg)
        print(f"          wrote {svg}")

    if ad.status == FOUND and bl.status == FOUND:
        ratio = bl.stats.hd_expansions / max(ad.stats.hd_expansions, 1)
        print(f"baseline expanded {ratio:.1f}x as many 4D states")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
