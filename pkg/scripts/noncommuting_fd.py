#!/usr/bin/env python3
"""Non-commuting example: finite-difference Hamiltonian with V(t, x) = a cos(f t) u(x).

No closed form exists, so the script reports self-convergence: each run
is compared with the finest (N, n) run on the shared final time T.
The source V P_N excites high spatial modes, and the quadrature error
grows with powers of the largest eigenvalue, so fine grids (large nx)
need larger n or a smaller delta.
"""

import argparse
import math
import sys
import time

import numpy as np

from nonlocal_schrodinger import (
    DivergenceError, NonlocalCondition, NonlocalProblem, PotentialDescriptor, SolverConfig, SpectralEnvelope, fd_build,
    solve,
)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L", type=float, default=10.0)
    ap.add_argument("--nx", type=int, default=24)
    ap.add_argument("--amp", type=float, default=0.15)
    ap.add_argument("--freq", type=float, default=2.0)
    ap.add_argument("--alpha", type=complex, default=0.3 + 0.1j)
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--delta", type=float, default=4.0)
    ap.add_argument("--steps", default="4:80,8:160,12:320")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    op = fd_build(args.L, args.nx, envelope=SpectralEnvelope(0.05, 0.3))
    x = op.grid_x
    u = np.exp(-((x - args.L / 2) ** 2) / 4)
    V = PotentialDescriptor(lambda t: -1j * args.amp * math.cos(args.freq * t) * u)
    lam, vec = np.linalg.eigh(op.dense().real)
    psi0 = (vec[:, 0] + 0.3 * vec[:, 1]).astype(complex)
    prob = NonlocalProblem(op, NonlocalCondition(((args.alpha, args.T),), args.T), V, psi0, args.T)

    finals = []
    for step in args.steps.split(","):
        N, n = (int(v) for v in step.split(":"))
        t0 = time.perf_counter()
        try:
            sol, rep = solve(prob, SolverConfig(N=N, n=n, delta=args.delta, err_tol=1e-12, max_it=60,
                                                workers=args.workers))
        except DivergenceError as exc:
            print(f"N={N} n={n}: {exc}")
            return 3
        finals.append((N, n, sol.values[0], sol.values[-1], rep, time.perf_counter() - t0))
    ref0, refT = finals[-1][2], finals[-1][3]
    print(f"{'N':>4} {'n':>5} {'iters':>5} {'|dPsi(0)|':>10} {'|dPsi(T)|':>10} {'sec':>6}")
    for N, n, p0, pT, rep, sec in finals:
        print(f"{N:4d} {n:5d} {rep.iterations:5d} {np.abs(p0 - ref0).max():10.2e} "
              f"{np.abs(pT - refT).max():10.2e} {sec:6.2f}")
    p0, pT = finals[-1][2], finals[-1][3]
    print(f"condition residual |Psi(0) + alpha Psi(T) - Psi0| = {np.abs(p0 + args.alpha * pT - psi0).max():.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
