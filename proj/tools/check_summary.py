#!/usr/bin/env python3
"""Recompute summary.json statistics from the per-run CSVs of a run directory."""

import argparse
import csv
import json
import math
import statistics
import sys
from pathlib import Path

TOL = 1e-9


def sample_std(xs):
    return statistics.stdev(xs) if len(xs) > 1 else 0.0


def close(a, b):
    return math.isclose(a, b, rel_tol=TOL, abs_tol=TOL)


def check(run_dir: Path) -> list[str]:
    summary = json.loads((run_dir / "summary.json").read_text())
    problems = []

    with open(run_dir / "greedy.csv", newline="") as f:
        greedy = list(csv.DictReader(f))
    if len(greedy) != summary["replicates"]:
        problems.append(f"greedy.csv has {len(greedy)} rows, expected {summary['replicates']}")

    ok_runs = [g for g in greedy if g["status"] == "ok"]
    if summary["failed_runs"] != len(greedy) - len(ok_runs):
        problems.append("failed_runs disagrees with greedy.csv")

    lo, hi = summary["window"]["start"], summary["window"]["end"]
    windows = []
    for g in ok_runs:
        with open(run_dir / f"run_{g['replicate']}.csv", newline="") as f:
            rows = list(csv.DictReader(f))
        if len(rows) != summary["episodes"]:
            problems.append(f"run_{g['replicate']}.csv has {len(rows)} rows, expected {summary['episodes']}")
        if [int(r["episode"]) for r in rows] != list(range(len(rows))):
            problems.append(f"run_{g['replicate']}.csv episodes are not 0..N-1")
        window = [float(r["extrinsic_return"]) for r in rows[lo:hi]]
        windows.append(sum(window) / len(window) if window else 0.0)

    for run, window in zip((r for r in summary["runs"] if r["status"] == "ok"), windows):
        if not close(run["window_return"], window):
            problems.append(f"replicate {run['replicate']}: window_return {run['window_return']} != {window}")

    columns = {
        "greedy_return": [float(g["greedy_return"]) for g in ok_runs],
        "greedy_length": [float(g["greedy_length"]) for g in ok_runs],
        "window_return": windows,
    }
    for key, values in columns.items():
        stats = summary[key]
        if stats["count"] != len(values):
            problems.append(f"{key}.count {stats['count']} != {len(values)}")
            continue
        if values and not close(stats["mean"], statistics.fmean(values)):
            problems.append(f"{key}.mean {stats['mean']} != {statistics.fmean(values)}")
        if values and not close(stats["std"], sample_std(values)):
            problems.append(f"{key}.std {stats['std']} != {sample_std(values)}")
    return problems


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("run_dir", type=Path)
    args = parser.parse_args()
    problems = check(args.run_dir)
    for p in problems:
        print(p, file=sys.stderr)
    print(f"{args.run_dir}: {'ok' if not problems else f'{len(problems)} problems'}")
    return 1 if problems else 0


if __name__ == "__main__":
    sys.exit(main())
