#!/usr/bin/env python3
"""Timing spread across seeds: run a scenario N times and summarise per-phase
durations (min/mean/max), the shape behind the orchestration timing bars.

Usage: python scripts/seed_sensitivity.py [--scenario NAME] [--runs N]
"""

import argparse
import statistics
import sys
from collections import defaultdict

from qsnet.scenario import load_script, run, timing_rows


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario", default="scenario1")
    parser.add_argument("--runs", type=int, default=25)
    args = parser.parse_args()

    script = load_script(args.scenario)
    durations = defaultdict(list)
    for seed in range(args.runs):
        result = run(script, seed=seed)
        if result.step_errors:
            print(f"seed {seed} failed: {result.step_errors}", file=sys.stderr)
            return 1
        for row in timing_rows(result.events):
            durations[row["phase"]].append(row["duration_s"])

    print(f"{args.scenario}: {args.runs} runs")
    print(f"{'phase':<12} {'n':>5} {'min':>8} {'mean':>8} {'max':>8}")
    for phase in sorted(durations):
        values = durations[phase]
        print(f"{phase:<12} {len(values):>5} {min(values):>8.2f} "
              f"{statistics.mean(values):>8.2f} {max(values):>8.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
