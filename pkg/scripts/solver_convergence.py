#!/usr/bin/env python3
"""Nonlocal solve with a commuting potential V(t) = a cos(t) against an ODE oracle.

Scalar H = lambda, condition Psi(0) + alpha Psi(T) = 1. The oracle
integrates psi' = (-i lambda + V) psi at tolerance 1e-12 and fixes the
start value from the condition.
"""

import argparse
import math
import sys
import time

import numpy as np
from scipy.integrate import solve_ivp

from nonlocal_schrodinger import (
    DiagonalOperator, NonlocalCondition, NonlocalProblem, PotentialDescriptor, SolverConfig,
    SpectralEnvelope, solve,
)


def oracle(lam, amp, alpha, T, times):
    sol = solve_ivp(lambda t, y: (-1j * lam + amp * math.cos(t)) * y, (0, T), [1 + 0j],
                    method="DOP853", rtol=1e-12, atol=1e-12, dense_output=True)
    start = 1 / (1 + alpha * sol.sol(T)[0])
    return np.array([start * sol.sol(t)[0] for t in times])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--amp", type=float, default=0.2)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--delta", type=float, default=6.0)
    ap.add_argument("--steps", default="4:80,8:160,16:320", help="comma separated N:n pairs")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    env = SpectralEnvelope(min(0.5, args.lam - 0.5), 0.3)
    prob = NonlocalProblem(DiagonalOperator([args.lam], envelope=env),
                           NonlocalCondition(((args.alpha, args.T),), args.T),
                           PotentialDescriptor(lambda t: args.amp * math.cos(t)), np.ones(1), args.T)
    print(f"{'N':>4} {'n':>5} {'iters':>5} {'solves':>8} {'max err':>10} {'sec':>6}")
    for step in args.steps.split(","):
        N, n = (int(v) for v in step.split(":"))
        t0 = time.perf_counter()
        sol, rep = solve(prob, SolverConfig(N=N, n=n, delta=args.delta, err_tol=1e-13,
                                            max_it=80, workers=args.workers))
        err = np.abs(sol.values[:, 0] - oracle(args.lam, args.amp, args.alpha, args.T, sol.times)).max()
        print(f"{N:4d} {n:5d} {rep.iterations:5d} {rep.resolvent_solve_count:8d} {err:10.3e} "
              f"{time.perf_counter() - t0:6.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
