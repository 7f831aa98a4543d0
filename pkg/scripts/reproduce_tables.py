#!/usr/bin/env python3
"""Run every published-table reproduction and write the cell-by-cell reports.

Usage: python scripts/reproduce_tables.py [--out-dir out] [--jobs N]
                                          [--runs N] [--seed S]
"""

import argparse
import os
import sys
from pathlib import Path

from peclab import worlds
from peclab.harness import reproduce

TABLES = ("table2", "table3", "table4", "table5")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="out")
    ap.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--runs", type=int, default=None)
    ap.add_argument("--seed", type=int, default=worlds.DEFAULT_SEED)
    args = ap.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    any_fail = False
    for table in TABLES:
        report = reproduce(
            table,
            runs=args.runs if table != "table2" else None,
            seed=args.seed,
            jobs=args.jobs,
        )
        path = out_dir / f"{table}_report.csv"
        report.to_csv(path)
        status = "all cells pass" if report.all_pass else "SOME CELLS FAIL"
        print(
            f"{table}: {report.n_pass}/{len(report.cells)} cells within tolerance "
            f"({report.runtime_ms / 1000:.1f} s) -> {path} [{status}]"
        )
        for cell in report.cells:
            if not cell.passed:
                print(
                    f"    miss: {cell.scenario} {cell.method} {cell.estimand}: "
                    f"{cell.mean:+.4f} vs published {cell.paper_value:+.4f} "
                    f"(tol {cell.tolerance})"
                )
        any_fail = any_fail or not report.all_pass
    return 3 if any_fail else 0


if __name__ == "__main__":
    sys.exit(main())
