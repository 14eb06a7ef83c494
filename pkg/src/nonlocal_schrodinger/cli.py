"""Batch front end: ``nonlocal-schrodinger {solve,zeros,contour,propagate,converge}``.

Exit status: 0 success, 2 separation failure, 3 non-convergence or
divergence, 4 configuration error, 1 any other solver failure.
"""

import argparse
import csv
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .contour import PI6, build_contour, adjust_for_zeros, gamma0, inside_gamma0, distance_to_gamma0
from .errors import ConfigError, DivergenceError, SeparationError, SolverError
from .grid import build_grid, s_to_time
from .nonlocal_cond import (
    Box, a_coeffs, b_function, bN_function, check_separation, default_zero_box, find_zeros,
)
from .oracles import exact_nonlocal_solution, exact_propagator
from .parallel import WORKERS_ENV
from .propagator import SolveCounter, correction_center, propagate_hom
from .solver import solve
from .special import quadrature_params

EXIT_OK, EXIT_FAIL, EXIT_SEPARATION, EXIT_NONCONVERGED, EXIT_CONFIG = 0, 1, 2, 3, 4
log = logging.getLogger("nonlocal_schrodinger.cli")


def fmt(x):
    """Round-trippable text for ints, floats and complex numbers."""
    if x is None:
        return "none"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (complex, np.complexfloating)):
        x = complex(x)
        sign = "-" if np.signbit(x.imag) else "+"
        return f"{x.real!r}{sign}{abs(x.imag)!r}i"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (list, tuple)):
        return ", ".join(fmt(v) for v in x)
    return str(x)


def write_kv(path, items):
    with open(path, "w", encoding="utf-8") as fh:
        for k, v in items:
            fh.write(f"{k} = {fmt(v)}\n")


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])


def resolve_workers(cfg, flag):
    if flag is not None:
        return flag
    raw = os.environ.get(WORKERS_ENV)
    if raw is not None:
        try:
            value = int(raw)
        except ValueError:
            value = 0
        if value < 1:
            raise ConfigError(f"{WORKERS_ENV}={raw!r} violates workers >= 1")
        return value
    return cfg.get("solver.workers", 1)


def _contour_rows(name, contour, nu, values):
    return [(name, float(v), float(z.real), float(z.imag)) for v, z in zip(nu, values)]


def _zero_search(cond, settings, base):
    if not cond.terms:
        return [], [], None
    box = (Box(*settings.zero_box_override) if settings.zero_box_override is not None
           else default_zero_box(cond, base))
    grid = build_grid(settings.N)
    times = s_to_time(grid.nodes, cond.T)
    a = a_coeffs(grid, cond)
    b, bN = b_function(cond), bN_function(times, a)
    return find_zeros(b, box), find_zeros(bN, box), (b, bN, box)


def cmd_solve(cfg, out, workers):
    problem = cfgmod.build_problem(cfg)
    settings = cfgmod.build_solver_config(cfg, workers)
    try:
        sol, rep = solve(problem, settings)
    except DivergenceError as exc:
        if exc.report is not None:
            _write_report(out / "report.txt", settings, exc.report, diverged=True)
        raise
    rows = []
    for p, t in enumerate(sol.times):
        for j, v in enumerate(sol.values[p]):
            rows.append((float(t), p, j, float(v.real), float(v.imag)))
    write_csv(out / "trajectory.csv", ["t", "node_index", "component_index", "re", "im"], rows)
    _write_report(out / "report.txt", settings, rep)
    print(f"iterations = {rep.iterations}, converged = {fmt(rep.converged)}, "
          f"resolvent solves = {rep.resolvent_solve_count}")
    if not rep.converged:
        print(f"error: no convergence within max_it = {settings.max_it} "
              f"(last err {rep.errors[-1]:.3e} > err_tol {settings.err_tol:.3e})", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def _write_report(path, settings, rep, diverged=False):
    c = rep.contour
    sep = rep.separation
    items = [
        ("converged", rep.converged),
        ("diverged", diverged),
        ("iterations", rep.iterations),
        ("errors", list(rep.errors)),
        ("contraction_estimates", list(rep.contraction_estimates)),
        ("resolvent_solve_count", rep.resolvent_solve_count),
        ("of_solve_count", rep.of_solve_count),
        ("inhom_solve_count", rep.inhom_solve_count),
        ("expected_of_solve_count", (2 * settings.n + 1) * (settings.N + 1) * rep.iterations
         + 2 * settings.n + 1),
        ("h_used", rep.h_used),
        ("h_note", "one step size h serves the homogeneous and inhomogeneous quadratures"),
        ("N", settings.N),
        ("n", settings.n),
        ("delta", settings.delta),
        ("err_tol", settings.err_tol),
        ("max_it", settings.max_it),
        ("strict_alg1", settings.strict_alg1),
        ("separation_ok", sep.ok if sep is not None else True),
        ("separation_min_distance", sep.min_distance if sep is not None else float("inf")),
        ("zero_count", len(sep.zeros) if sep is not None else 0),
        ("d_c", rep.d_c),
        ("z_c", rep.z_c),
    ]
    if c is not None:
        items += [("c_I", c.c_I), ("a_I", c.a_I), ("d_I", c.d_I), ("sigma", c.sigma), ("eta", c.eta),
                  ("z0", correction_center(c))]
    write_kv(path, items)


def cmd_zeros(cfg, out, workers):
    op, cond = cfgmod.build_operator(cfg), cfgmod.build_condition(cfg)
    settings = cfgmod.build_solver_config(cfg, workers)
    base = build_contour(op.envelope, PI6, settings.ds_floor)
    zb, zbN, funcs = _zero_search(cond, settings, base)
    rows = []
    if funcs is not None:
        b, bN, box = funcs
        for name, zs, f in (("b", zb, b), ("b_N", zbN, bN)):
            if not zs:
                continue
            inside = inside_gamma0(base, zs)
            dist = distance_to_gamma0(base, zs)
            for z, ins, d in zip(zs, inside, dist):
                rows.append((name, z.real, z.imag, float(abs(f(z))), bool(ins), float(d)))
    write_csv(out / "zeros.csv", ["function", "re", "im", "abs_residual", "inside_gamma0",
                                  "distance_gamma0"], rows)
    sep = check_separation(zb + zbN, base)
    print(f"{len(zb)} zeros of b, {len(zbN)} zeros of b_N; {sep}")
    if not sep.ok:
        print(f"error: characteristic zero {fmt(sep.offending)} is not separated from the spectrum",
              file=sys.stderr)
        return EXIT_SEPARATION
    return EXIT_OK


def cmd_contour(cfg, out, workers):
    op, cond = cfgmod.build_operator(cfg), cfgmod.build_condition(cfg)
    settings = cfgmod.build_solver_config(cfg, workers)
    base = build_contour(op.envelope, PI6, settings.ds_floor)
    zb, zbN, _ = _zero_search(cond, settings, base)
    sep = check_separation(zb + zbN, base)
    if not sep.ok:
        print(f"error: characteristic zero {fmt(sep.offending)} is not separated from the spectrum",
              file=sys.stderr)
        return EXIT_SEPARATION
    contour, d_c, z_c = adjust_for_zeros(base, zb + zbN)
    rule = quadrature_params(settings.n, settings.delta, PI6)
    nu = np.arange(-settings.n, settings.n + 1) * rule.h
    rows = _contour_rows("gamma_I", contour, nu, contour.z(nu))
    rows += _contour_rows("gamma_0", base, nu, gamma0(base, nu))
    rows += _contour_rows("gamma_base", base, nu, base.z(nu))
    write_csv(out / "contour.csv", ["curve", "nu", "re", "im"], rows)
    write_kv(out / "contour_params.txt", [
        ("c_I", contour.c_I), ("a_I", contour.a_I), ("d_I", contour.d_I), ("d_c", d_c),
        ("z_c", z_c), ("sigma", contour.sigma), ("eta", contour.eta), ("b_s", contour.b_s),
        ("d_s", contour.d_s), ("z0", correction_center(contour)), ("h", rule.h), ("n", rule.n),
        ("delta", rule.delta),
    ])
    print(f"c_I = {contour.c_I:.6g}, a_I = {contour.a_I:.6g}, d_I = {contour.d_I:.6g}, d_c = {d_c:.6g}")
    return EXIT_OK


def _propagate_rows(op, contour, rule, s_list, psi0, workers, oracle):
    rows, worst = [], 0.0
    for s in s_list:
        approx = propagate_hom(op, contour, rule, s, psi0, workers)
        exact = exact_propagator(op, s, psi0) if oracle else None
        for j, v in enumerate(approx):
            row = [float(s), j, float(v.real), float(v.imag)]
            if oracle:
                err = float(abs(v - exact[j]))
                worst = max(worst, err)
                row += [float(exact[j].real), float(exact[j].imag), err]
            rows.append(row)
    return rows, worst


def cmd_propagate(cfg, out, workers):
    op = cfgmod.build_operator(cfg)
    psi0 = cfgmod.build_psi0(cfg, op)
    settings = cfgmod.build_solver_config(cfg, workers)
    contour = build_contour(op.envelope, PI6, settings.ds_floor)
    rule = quadrature_params(settings.n, settings.delta, PI6)
    oracle = cfg.get("propagate.oracle", False)
    s_list = cfg.get("propagate.s", [1.0])
    with SolveCounter(op) as c:
        rows, worst = _propagate_rows(op, contour, rule, s_list, psi0, settings.workers, oracle)
    header = ["s", "component_index", "re", "im"]
    if oracle:
        header += ["oracle_re", "oracle_im", "abs_error"]
    write_csv(out / "propagate.csv", header, rows)
    write_kv(out / "propagate_report.txt", [
        ("n", rule.n), ("delta", rule.delta), ("h_used", rule.h), ("resolvent_solve_count", c.count),
        ("max_abs_error", worst if oracle else None)])
    print(f"resolvent solves = {c.count}" + (f", max error = {worst:.3e}" if oracle else ""))
    return EXIT_OK


def _sweep(cfg, settings):
    Ns, ns = cfg.get("converge.N"), cfg.get("converge.n")
    if Ns is None and ns is None:
        raise ConfigError("converge needs converge.N and/or converge.n")
    if Ns is not None and ns is not None:
        if len(Ns) != len(ns):
            raise ConfigError("converge.N and converge.n must have the same length",
                              cfg.line_of("converge.n"))
        return list(zip(Ns, ns))
    if Ns is None:
        return [(settings.N, n) for n in ns]
    return [(N, settings.n) for N in Ns]


def cmd_converge(cfg, out, workers):
    settings = cfgmod.build_solver_config(cfg, workers)
    mode = cfg.get("converge.mode", "propagate")
    rows = []
    for N, n in _sweep(cfg, settings):
        run = replace(settings, N=N, n=n)
        if mode == "propagate":
            op = cfgmod.build_operator(cfg)
            psi0 = cfgmod.build_psi0(cfg, op)
            contour = build_contour(op.envelope, PI6, run.ds_floor)
            rule = quadrature_params(n, run.delta, PI6)
            with SolveCounter(op) as c:
                _, err = _propagate_rows(op, contour, rule, cfg.get("propagate.s", [1.0]), psi0,
                                         run.workers, True)
            rows.append((N, n, run.delta, rule.h, err, c.count, 0))
        else:
            problem = cfgmod.build_problem(cfg)
            sol, rep = solve(problem, run)
            exact = exact_nonlocal_solution(problem.op, problem.cond, problem.potential,
                                            problem.psi0, sol.times)
            err = float(np.abs(sol.values - exact).max())
            rows.append((N, n, run.delta, rep.h_used, err, rep.resolvent_solve_count, rep.iterations))
        print(f"N = {N:3d}  n = {n:4d}  max error = {rows[-1][4]:.3e}")
    write_csv(out / "converge.csv",
              ["N", "n", "delta", "h", "max_error", "resolvent_solves", "iterations"], rows)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "zeros": cmd_zeros,
    "contour": cmd_contour,
    "propagate": cmd_propagate,
    "converge": cmd_converge,
}


def build_parser():
    p = argparse.ArgumentParser(prog="nonlocal-schrodinger",
                                description="Nonlocal-in-time Schroedinger solver.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, type=Path, help="run configuration file")
    p.add_argument("--out", type=Path, default=None, help="output directory (overrides output.dir)")
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker threads (overrides {WORKERS_ENV} and solver.workers)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.workers is not None and args.workers < 1:
            raise ConfigError(f"--workers {args.workers} violates workers >= 1")
        cfg = cfgmod.load_config(args.config)
        workers = resolve_workers(cfg, args.workers)
        out = args.out if args.out is not None else cfg.resolve(cfg.get("output.dir", "out"))
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SeparationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEPARATION
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        # construction-time validation of operators, conditions and settings
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
