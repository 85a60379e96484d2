#!/usr/bin/env python3
"""Run the three shipped scenarios and drop all artifacts under ./artifacts/.

Usage: python scripts/run_all_scenarios.py [--seed N] [--out DIR]
"""

import argparse
import sys
from pathlib import Path

from qsnet.scenario import load_script, run, write_artifacts


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="artifacts")
    args = parser.parse_args()

    all_ok = True
    for name in ("scenario1", "scenario2", "scenario3"):
        result = run(load_script(name), seed=args.seed)
        out_dir = Path(args.out) / f"{name}-seed{args.seed}"
        write_artifacts(result, out_dir)
        status = "ok" if result.ok else "FAILED"
        print(f"{name}: {len(result.events)} events -> {out_dir} [{status}]")
        for check in result.checks:
            print(f"  {check.line()}")
        all_ok &= result.ok
    return 0 if all_ok else 2


if __name__ == "__main__":
    sys.exit(main())
