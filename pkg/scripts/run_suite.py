#!/usr/bin/env python3
"""Run the full property suite from the command line.

Equivalent to `polyball-lab suite` but with flag-style arguments instead of
a config file; handy for quick seed sweeps.
"""

import argparse
import json
import sys
from pathlib import Path

from polyball_lab import suites


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=20260810)
    ap.add_argument("--words", type=int, default=500)
    ap.add_argument("--polynomials", type=int, default=500)
    ap.add_argument("--tuples", type=int, default=100)
    ap.add_argument("--specs", type=int, default=100)
    ap.add_argument("--subspaces", type=int, default=50)
    ap.add_argument("--out", type=Path, default=Path("out/suite.json"))
    args = ap.parse_args()

    sizes = {
        "words": args.words,
        "polynomials": args.polynomials,
        "tuples": args.tuples,
        "specs": args.specs,
        "subspaces": args.subspaces,
    }
    records = suites.run_all(args.seed, sizes)
    width = max(len(r.name) for r in records)
    for r in records:
        res = f"{r.residual:.3e}" if r.residual is not None else "-"
        print(f"{r.name.ljust(width)}  {r.status:<7}  {res}")

    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(
        {"seed": args.seed, "sizes": sizes,
         "records": [r.to_json() for r in records]},
        indent=2, sort_keys=True))
    print(f"wrote {args.out}")
    return 2 if any(r.passed is False for r in records) else 0


if __name__ == "__main__":
    sys.exit(main())
