"""Acceptance criteria 1-10.

Each test prints one PASS/FAIL line. Run ``pytest tests/test_acceptance.py -v``
or ``python3 tests/test_acceptance.py`` for a plain summary.
"""

import functools
import math
import random
import re
import sys

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from nonlocal_schrodinger.cli import main as cli_main
from nonlocal_schrodinger.contour import PI6, SpectralEnvelope, build_contour
from nonlocal_schrodinger.grid import build_grid, s_to_time
from nonlocal_schrodinger.nonlocal_cond import (
    Box, NonlocalCondition, PotentialDescriptor, b_function, default_zero_box, find_zeros,
    winding_number,
)
from nonlocal_schrodinger.operators import DiagonalOperator, fd_build
from nonlocal_schrodinger.propagator import SolveCounter, _SampleCache, propagate_hom
from nonlocal_schrodinger.solver import NonlocalProblem, SolverConfig, apply_S_inverse, assemble, solve
from nonlocal_schrodinger.special import lambert_argument, lambert_w, step_h

ENV = SpectralEnvelope(0.5, 0.3)
# frozen from the first oracle run (9.67e-4, 8.02e-5, 5.69e-6) with ~12% headroom
C1_THRESHOLDS = {40: 1.1e-3, 80: 9.0e-5, 160: 6.5e-6}
C2_TERMS = ((0.3 + 0.2j, 0.37), (-0.25 + 0.1j, 0.81))
C4_STEPS = ((4, 80), (8, 160), (16, 320))
LN2 = math.log(2)

_printer = {"fn": print}


@pytest.fixture(autouse=True)
def _uncaptured(capsys):
    def emit(line):
        with capsys.disabled():
            print(line)
    _printer["fn"] = emit
    yield
    _printer["fn"] = print


def verdict(num, ok, detail):
    _printer["fn"](f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")
    assert ok, f"criterion {num}: {detail}"


def scalar_op(lam=1.0, env=ENV):
    return DiagonalOperator([lam], envelope=env)


# ----------------------------------------------------------------- outputs

@functools.lru_cache(maxsize=None)
def c1_errors(workers):
    from nonlocal_schrodinger.special import quadrature_params
    op = scalar_op()
    c = build_contour(ENV)
    out = {}
    for n in (40, 80, 160):
        val = propagate_hom(op, c, quadrature_params(n, 4.0, PI6), 1.0, np.ones(1), workers, cache=None)
        out[n] = val[0]
    return out


@functools.lru_cache(maxsize=None)
def c2_outputs(workers, strict):
    op = scalar_op()
    cond = NonlocalCondition(C2_TERMS, 1.0)
    prob = NonlocalProblem(op, cond, PotentialDescriptor.zero(), np.ones(1), 1.0)
    ctx = assemble(prob, SolverConfig(N=6, n=320, delta=6, workers=workers, strict_alg1=strict))
    Y = (np.arange(1, 8) * (0.3 - 0.7j) + np.cos(np.arange(7)))[:, None]
    return apply_S_inverse(ctx, Y), ctx.times, ctx.a, Y, ctx.separation


@functools.lru_cache(maxsize=None)
def c3_solution(workers):
    prob = NonlocalProblem(scalar_op(), NonlocalCondition(((0.5, 1.0),), 1.0),
                           PotentialDescriptor.zero(), np.ones(1), 1.0)
    return solve(prob, SolverConfig(N=4, n=160, delta=6, workers=workers))


def c4_potential():
    return PotentialDescriptor(lambda t: 0.2 * math.cos(t), lipschitz_K=0.2, bound_MV=0.2)


@functools.lru_cache(maxsize=None)
def c4_solutions(workers):
    prob = NonlocalProblem(scalar_op(), NonlocalCondition(((0.5, 1.0),), 1.0), c4_potential(),
                           np.ones(1), 1.0)
    return [solve(prob, SolverConfig(N=N, n=n, delta=6, err_tol=1e-13, max_it=60, workers=workers))
            for N, n in C4_STEPS]


def ode_oracle(times):
    """psi' = (-i + 0.2 cos t) psi with the nonlocal start psi(0) + 0.5 psi(1) = 1."""
    def rhs(t, y):
        return (-1j + 0.2 * math.cos(t)) * y
    grid = np.unique(np.concatenate([times, [1.0]]))
    sol = solve_ivp(rhs, (0.0, 1.0), [1.0 + 0j], method="DOP853", rtol=1e-12, atol=1e-12,
                    t_eval=grid, dense_output=True)
    G = sol.sol
    start = 1.0 / (1.0 + 0.5 * G(1.0)[0])
    return np.array([start * G(t)[0] for t in times])


# ----------------------------------------------------------------- criteria

def test_criterion_01_propagator_convergence():
    errs = {n: abs(v - np.exp(-1j)) for n, v in c1_errors(1).items()}
    orders = [math.log2(errs[n] / errs[2 * n]) for n in (40, 80)]
    ok = (errs[40] > errs[80] > errs[160] and min(orders) >= 2.5
          and all(errs[n] <= C1_THRESHOLDS[n] for n in errs))
    verdict(1, ok, "errors " + ", ".join(f"n={n}: {e:.3e}" for n, e in errs.items())
            + f"; orders {orders[0]:.2f}, {orders[1]:.2f} (need >= 2.5)")


def test_criterion_02_dense_oracle():
    got, times, a, Y, sep = c2_outputs(1, False)
    S = np.zeros((7, 7), dtype=complex)
    S[0] = a
    S[0, 0] += 1
    for p in range(1, 7):
        S[p, p] = 1
        S[p, p - 1] = -np.exp(-1j * (times[p] - times[p - 1]))
    ref = np.linalg.solve(S, Y[:, 0])
    err = float(np.abs(got[:, 0] - ref).max())
    strict = float(np.abs(c2_outputs(1, True)[0][:, 0] - ref).max())
    verdict(2, sep.ok and err <= 1e-6,
            f"max |S^-1 Y - dense| = {err:.2e} (<= 1e-6); strict_alg1 discrepancy {strict:.2e} (recorded)")


def test_criterion_03_closed_form(tmp_path):
    sol, rep = c3_solution(1)
    exact = 1 / (1 + 0.5 * np.exp(-1j))
    err = abs(sol.values[0, 0] - exact)
    published = abs(sol.values[0, 0] - (0.70946 + 0.23501j))
    cfg = tmp_path / "c3.cfg"
    cfg.write_text("operator.type = diagonal\noperator.eigenvalues = 1\noperator.b_s = 0.5\n"
                   "operator.d_s = 0.3\nnonlocal.T = 1\nnonlocal.term = 0.5+0i @ 1.0\npsi0.constant = 1\n"
                   "solver.N = 4\nsolver.n = 160\nsolver.delta = 6\n")
    code = cli_main(["solve", "--config", str(cfg), "--out", str(tmp_path / "out")])
    ok = err <= 1e-5 and published <= 1e-5 and rep.iterations == 1 and code == 0
    verdict(3, ok, f"|Phi(0) - 1/(1+0.5e^-i)| = {err:.2e}, vs 0.70946+0.23501i {published:.2e}; "
                   f"iterations {rep.iterations}; exit {code}")


def test_criterion_04_commuting_potential():
    errs = []
    for sol, rep in c4_solutions(1):
        assert rep.converged
        errs.append(float(np.abs(sol.values[:, 0] - ode_oracle(sol.times)).max()))
    ok = errs[0] > errs[1] > errs[2]
    verdict(4, ok, "max-node errors " + ", ".join(f"(N,n)={s}: {e:.2e}" for s, e in zip(C4_STEPS, errs)))


def test_criterion_05_zero_finding():
    cond = NonlocalCondition(((2.0, 1.0),), 1.0)
    b = b_function(cond)
    box = default_zero_box(cond, build_contour(ENV))
    zeros = find_zeros(b, box)
    expect = [(2 * k + 1) * math.pi - 1j * LN2 for k in range(-5, 10)
              if box.contains((2 * k + 1) * math.pi - 1j * LN2)]
    match = len(zeros) == len(expect) and all(abs(z - e) < 1e-10 for z, e in zip(zeros, expect))
    resid = max(abs(b(z)) for z in zeros)
    total = winding_number(b, box, b.scale)
    local = [winding_number(b, Box(z.real - 0.5, z.real + 0.5, z.imag - 0.5, z.imag + 0.5), b.scale)
             for z in zeros]
    ok = match and len(zeros) >= 2 and resid <= 1e-9 and total == len(zeros) and all(w == 1 for w in local)
    verdict(5, ok, f"{len(zeros)} zeros (2k+1)pi - i ln2 in default box, max residual {resid:.1e}, "
                   f"box winding {total}, per-zero windings {local}")


def test_criterion_06_separation_gate(tmp_path, capsys):
    cfg = tmp_path / "c6.cfg"
    cfg.write_text("operator.type = diagonal\noperator.eigenvalues = 0\noperator.b_s = -1\n"
                   "operator.d_s = 0.5\nnonlocal.T = 1\nnonlocal.term = -1 @ 1\npsi0.constant = 1\n")
    code = cli_main(["solve", "--config", str(cfg), "--out", str(tmp_path / "out")])
    err = capsys.readouterr().err
    named = re.search(r"zero ([-+0-9.e]+[-+][0-9.e]+[ij])", err)
    zero = complex(named.group(1).replace("i", "j")) if named else None
    ok = code == 2 and zero is not None and abs(zero) < 1e-12
    verdict(6, ok, f"exit {code}, named zero {zero}")


def test_criterion_07_solve_counts():
    sol, rep = c4_solutions(1)[0]
    N, n = C4_STEPS[0]
    expected = (2 * n + 1) * (N + 1) * rep.iterations + (2 * n + 1)
    op = scalar_op()
    from nonlocal_schrodinger.special import quadrature_params
    rule = quadrature_params(n, 6)
    cache = _SampleCache()
    with SolveCounter(op) as cnt:
        propagate_hom(op, build_contour(ENV), rule, 0.4, np.ones(1), cache=cache)
        propagate_hom(op, build_contour(ENV), rule, 1.0, np.ones(1), cache=cache)
    ok = rep.of_solve_count == expected and cnt.count == 2 * n + 1
    verdict(7, ok, f"O_F solves {rep.of_solve_count} == (2n+1)(N+1)it + (2n+1) = {expected}; "
                   f"apply_C solves {rep.inhom_solve_count} reported separately; "
                   f"two-time propagation {cnt.count} == 2n+1 = {2 * n + 1}")


def test_criterion_08_parallel_determinism():
    same = []
    a1, a4 = c1_errors(1), c1_errors(4)
    same.append(all(np.complex128(a1[n]).tobytes() == np.complex128(a4[n]).tobytes() for n in a1))
    same.append(c2_outputs(1, False)[0].tobytes() == c2_outputs(4, False)[0].tobytes())
    same.append(c3_solution(1)[0].values.tobytes() == c3_solution(4)[0].values.tobytes())
    same.append(all(s1.values.tobytes() == s4.values.tobytes() and r1.errors == r4.errors
                    for (s1, r1), (s4, r4) in zip(c4_solutions(1), c4_solutions(4))))
    verdict(8, all(same), f"bitwise identical for workers 1 vs 4 on criteria 1-4: {same}")


def test_criterion_09_step_rule():
    rnd = random.Random(9)
    worst_h, worst_w = 0.0, 0.0
    for _ in range(100):
        n = rnd.randint(1, 5000)
        delta = rnd.uniform(1.05, 9.0)
        d = rnd.uniform(1e-3, PI6)
        h = step_h(n, delta, d)
        w = 2 * math.pi * d / (delta - 1) / h
        arg = lambert_argument(n, delta, d)
        worst_h = max(worst_h, abs(w * math.exp(w) - arg) / arg)
        x = 10 ** rnd.uniform(-12, 12)
        wx = lambert_w(x)
        worst_w = max(worst_w, abs(wx * math.exp(wx) - x) / x)
    ok = worst_h <= 1e-12 and worst_w <= 1e-12
    verdict(9, ok, f"max relative residual of h inversion {worst_h:.1e}, lambert_w round trip {worst_w:.1e}")


def test_criterion_10_fd_backend():
    env = SpectralEnvelope(0.05, 0.3)
    op = fd_build(10.0, 64, envelope=env)
    lam, vec = np.linalg.eigh(op.dense().real)
    l1, v = lam[0], vec[:, 0].astype(complex)
    cfg = SolverConfig(N=4, n=160, delta=6)
    empty = NonlocalCondition((), 1.0)
    sol, _ = solve(NonlocalProblem(op, empty, PotentialDescriptor.zero(), v, 1.0), cfg)
    fd_err = float(np.abs(sol.values - np.exp(-1j * l1 * sol.times)[:, None] * v[None, :]).max())
    ref, _ = solve(NonlocalProblem(DiagonalOperator([l1], envelope=env), empty, PotentialDescriptor.zero(),
                                   np.ones(1), 1.0), cfg)
    sc_err = float(np.abs(ref.values[:, 0] - np.exp(-1j * l1 * ref.times)).max())
    verdict(10, fd_err <= 10 * sc_err,
            f"FD nx=64 error {fd_err:.2e} vs scalar error {sc_err:.2e} at matched (N, n, delta)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
