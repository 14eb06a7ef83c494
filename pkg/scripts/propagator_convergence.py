#!/usr/bin/env python3
"""Error of exp(-isH)phi for a scalar operator as the quadrature size n grows.

Prints one row per (delta, n) and the empirical order log2(err(n)/err(2n)).
"""

import argparse
import csv
import math
import sys

import numpy as np

from nonlocal_schrodinger import DiagonalOperator, SpectralEnvelope, build_contour, propagate_hom, quadrature_params


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--s", type=float, default=1.0)
    ap.add_argument("--b-s", type=float, default=0.5)
    ap.add_argument("--d-s", type=float, default=0.3)
    ap.add_argument("--deltas", type=float, nargs="+", default=[2.5, 4.0, 6.0])
    ap.add_argument("--ns", type=int, nargs="+", default=[20, 40, 80, 160, 320])
    ap.add_argument("--csv", help="optional output file")
    args = ap.parse_args(argv)

    env = SpectralEnvelope(args.b_s, args.d_s)
    op = DiagonalOperator([args.lam], envelope=env)
    contour = build_contour(env)
    exact = np.exp(-1j * args.lam * args.s)
    rows = []
    for delta in args.deltas:
        prev = None
        for n in args.ns:
            rule = quadrature_params(n, delta)
            err = abs(propagate_hom(op, contour, rule, args.s, np.ones(1), cache=None)[0] - exact)
            order = math.log2(prev / err) if prev else float("nan")
            rows.append((delta, n, rule.h, err, order))
            print(f"delta={delta:4.1f}  n={n:5d}  h={rule.h:.4f}  err={err:.3e}  order={order:5.2f}")
            prev = err
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["delta", "n", "h", "error", "order"])
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
