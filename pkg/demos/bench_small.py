"""Run a small benchmark grid and print the aggregate table.

Ten 80x80 maze environments, both planners, three suboptimality factors;
finishes in a couple of minutes on one core:

    python3 demos/bench_small.py [results.csv]
"""
from __future__ import annotations

import sys
from pathlib import Path

from adplan.bench import SuiteSpec, format_aggregate, run_suite, write_csv
from adplan.envgen import GenSpec


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("bench-small.csv")
    suite = SuiteSpec(
        n_environments=10,
        gen=GenSpec(kind="maze", size=80, seed=42, n_obstacles=4, horizon_factor=5.0),
        epsilons=(1.1, 1.5, 2.0),
        planners=("ad", "baseline"),
        timeout=60.0,
    )
    rows, agg = run_suite(suite, workers=1)
    sys.stdout.write(format_aggregate(agg))
    write_csv(rows, out)
    print(f"wrote {len(rows)} rows to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
