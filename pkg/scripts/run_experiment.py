#!/usr/bin/env python3
"""Regenerate the full experiment: sweep CSV, aggregate tables, figures.

Writes everything under results/ (or --out DIR). Output is deterministic;
rerunning produces byte-identical CSVs and SVGs.
"""

import argparse
import sys
from pathlib import Path

from opmdeploy.cli import main as cli


def run(out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "sweep.csv"
    steps = [
        ["sweep", "--out", str(csv_path)],
        ["tables", "--csv", str(csv_path), "--out", str(out / "tables")],
        ["plot", "--csv", str(csv_path), "--out", str(out / "figures")],
    ]
    for argv in steps:
        rc = cli(argv)
        if rc != 0:
            print(f"step {argv[0]} failed with exit code {rc}", file=sys.stderr)
            return rc
    print(f"\nall outputs under {out}/")
    return 0


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("results"))
    args = parser.parse_args()
    sys.exit(run(args.out))
