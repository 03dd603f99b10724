#!/usr/bin/env python3
"""Sampled margins of the von Neumann bound.

Draws random nilpotent members and polynomials, records |f(T)| against the
truncated model norm, and summarizes the margin distribution.  Margins are
never negative; how close they come to zero shows how sharp the bound is on
random inputs.
"""

import argparse
import json
from pathlib import Path

import numpy as np

from polyball_lab.berezin import joint_nilpotency_degree, vn_check
from polyball_lab.sampling import cfg_a, random_nilpotent_member, random_polynomial, rng_for


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=20260810)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--out", type=Path, default=Path("out/vn_margins.json"))
    args = ap.parse_args()

    lam = cfg_a()
    rng = rng_for(args.seed, 4)
    margins = []
    for _ in range(args.samples):
        T = random_nilpotent_member(lam, rng, degree=2, dim_cap=6)
        d = joint_nilpotency_degree(T)
        f = random_polynomial(lam, rng, max_word_degree=1,
                              n_terms=int(rng.integers(1, 4)))
        if f.is_zero:
            continue
        lhs, rhs, ok = vn_check(T, f, D_prime=d + 3)
        assert ok, "a von Neumann violation is a release blocker"
        margins.append(rhs - lhs)

    margins = np.array(margins)
    summary = {
        "samples": len(margins),
        "min_margin": float(margins.min()),
        "median_margin": float(np.median(margins)),
        "max_margin": float(margins.max()),
    }
    print(json.dumps(summary, indent=2))
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(
        {"summary": summary, "margins": margins.tolist()}, indent=2))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
