#!/usr/bin/env python3
"""Monotone convergence of truncated norms.

Compressions only shrink operator norms, so the truncated values are
certified lower bounds that increase with the degree.  For the free Jacobi
element S + adj(S) the exact truncated value is 2*cos(pi/(D+2)), converging
to 2; the script tabulates the measured values against the closed form and
writes a spectra CSV for the largest degree.
"""

import argparse
import csv
import json
import math
from pathlib import Path

import numpy as np

from polyball_lab.fockmodel import TruncatedModel
from polyball_lab.phases import validate_lambda
from polyball_lab.rewrite import StarPolynomial
from polyball_lab.words import MultiWord


def jacobi_polynomial(lam):
    p = StarPolynomial.zero(1)
    e, g = MultiWord.empty(1), MultiWord.from_text("1")
    p.add_term(g, e, lam.identity(), 1.0)
    p.add_term(e, g, lam.identity(), 1.0)
    return p


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-degree", type=int, default=16)
    ap.add_argument("--out", type=Path, default=Path("out/norm_convergence"))
    args = ap.parse_args()

    lam = validate_lambda(1, (1,), [])
    p = jacobi_polynomial(lam)
    rows = []
    eigs = None
    for D in range(1, args.max_degree + 1):
        model = TruncatedModel(lam, D)
        mat = model.build_matrix(p).mat
        eigs = np.linalg.eigvalsh(mat)
        value = float(np.abs(eigs).max())
        exact = 2 * math.cos(math.pi / (D + 2))
        rows.append({"D": D, "norm": value, "closed_form": exact,
                     "gap_to_limit": 2 - value})
        print(f"D={D:2d}  |S+S*| = {value:.12f}  closed form {exact:.12f}")

    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "norms.json").write_text(json.dumps(rows, indent=2))
    with open(args.out / "spectra.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "eigenvalue"])
        for idx, value in enumerate(eigs):
            writer.writerow([idx, repr(float(value))])
    print(f"wrote {args.out}/norms.json and spectra.csv")


if __name__ == "__main__":
    main()
