"""Collocation system S Phi = C Phi + F and its fixed-point solution.

The unknowns are the states at the Chebyshev-Gauss-Lobatto times
t_p = (s_p + 1) T / 2. All operator functions are evaluated on the
physical time axis, so exp(-i t H) uses the operator as given.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .contour import PI6, DS_FLOOR, build_contour, adjust_for_zeros
from .errors import DivergenceError, SeparationError
from .grid import build_grid, lagrange_matrix, s_to_time, time_to_s
from .nonlocal_cond import (
    Box, PotentialDescriptor, a_coeffs, b_function, bN_function, check_separation,
    column_weight, default_zero_box, find_zeros,
)
from .propagator import (
    SolveCounter, gauss_panels, of_apply, propagate_inhom, quadrature_nodes, sample_resolvents,
)
from .special import quadrature_params

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NonlocalProblem:
    op: object
    cond: object
    potential: PotentialDescriptor
    psi0: np.ndarray
    T: float

    def __post_init__(self):
        psi0 = np.asarray(self.psi0, dtype=complex).ravel()
        if psi0.size != self.op.dim:
            raise ValueError(f"psi0 has {psi0.size} components, operator dimension is {self.op.dim}")
        if abs(self.T - self.cond.T) > 1e-14 * max(1.0, self.T):
            raise ValueError(f"problem horizon {self.T} differs from the condition horizon {self.cond.T}")
        object.__setattr__(self, "psi0", psi0)


@dataclass(frozen=True)
class SolverConfig:
    N: int = 8
    n: int = 80
    delta: float = 4.0
    err_tol: float = 1e-10
    max_it: int = 50
    panels: int = 4
    workers: int = 1
    strict_alg1: bool = False
    zero_box_override: tuple = None
    ds_floor: float = DS_FLOOR

    def __post_init__(self):
        checks = [
            (self.N >= 1, "N >= 1"), (self.n >= 1, "n >= 1"), (self.delta >= 2, "delta >= 2"),
            (self.err_tol > 0, "err_tol > 0"), (self.max_it >= 1, "max_it >= 1"),
            (self.panels >= 1, "panels >= 1"), (self.workers >= 1, "workers >= 1"),
            (self.ds_floor > 0, "ds_floor > 0"),
        ]
        for ok, rule in checks:
            if not ok:
                raise ValueError(f"solver setting violates {rule}")


@dataclass(frozen=True)
class TrajectorySolution:
    grid: object
    values: np.ndarray
    times: np.ndarray


@dataclass
class IterationReport:
    iterations: int = 0
    errors: list = field(default_factory=list)
    contraction_estimates: list = field(default_factory=list)
    resolvent_solve_count: int = 0
    of_solve_count: int = 0
    inhom_solve_count: int = 0
    separation: object = None
    h_used: float = math.nan
    converged: bool = False
    d_c: float = PI6
    z_c: complex = None
    contour: object = None


@dataclass
class SolveContext:
    problem: NonlocalProblem
    config: SolverConfig
    grid: object
    times: np.ndarray
    a: np.ndarray
    base_contour: object
    contour: object
    d_c: float
    z_c: complex
    rule: object
    zeros_b: list
    zeros_bN: list
    separation: object
    nodes: np.ndarray = field(repr=False, default=None)
    bN_nodes: np.ndarray = field(repr=False, default=None)
    _weights: dict = field(repr=False, default_factory=dict)
    _f_samples: object = field(repr=False, default=None)
    of_solves: int = 0
    inhom_solves: int = 0

    @property
    def op(self):
        return self.problem.op

    def weight(self, k):
        """Column-k weight of S^{-1} with rows memoized per collocation time."""
        rows = self._weights.setdefault(k, {})
        times, a, bN = self.times, self.a, self.bN_nodes

        def w(t, zeta, p):
            row = rows.get(t)
            if row is None:
                row = column_weight(t, zeta, k, times, a, bN=bN)
                rows[t] = row
            return row
        return w


def max_norm(v):
    """Largest sup-norm over the blocks of a block vector."""
    v = np.asarray(v)
    if v.size == 0:
        raise ValueError("max_norm of an empty block vector")
    if v.ndim == 1:
        v = v[:, None]
    return float(np.abs(v).max())


def _zero_box(problem, config, contour):
    if config.zero_box_override is not None:
        return Box(*config.zero_box_override)
    return default_zero_box(problem.cond, contour)


def assemble(problem, config):
    grid = build_grid(config.N)
    times = s_to_time(grid.nodes, problem.T)
    a = a_coeffs(grid, problem.cond)
    base = build_contour(problem.op.envelope, PI6, config.ds_floor)
    zeros_b, zeros_bN = [], []
    if problem.cond.terms:
        box = _zero_box(problem, config, base)
        zeros_b = find_zeros(b_function(problem.cond), box)
        zeros_bN = find_zeros(bN_function(times, a), box)
    separation = check_separation(zeros_b + zeros_bN, base)
    if not separation.ok:
        raise SeparationError(
            f"nonlocal characteristic zero {separation.offending:.10g} is not separated "
            f"from the spectral envelope", zero=separation.offending)
    contour, d_c, z_c = adjust_for_zeros(base, zeros_b + zeros_bN)
    rule = quadrature_params(config.n, config.delta, PI6)
    nodes, _ = quadrature_nodes(contour, rule)
    bN_nodes = bN_function(times, a)(nodes)
    log.debug("assembled: N=%d n=%d h=%.6g d_c=%.6g zeros=%d", config.N, config.n, rule.h, d_c,
              len(zeros_b) + len(zeros_bN))
    return SolveContext(problem, config, grid, times, a, base, contour, d_c, z_c, rule,
                        zeros_b, zeros_bN, separation, nodes, bN_nodes)


def _samples(ctx, phi):
    with SolveCounter(ctx.op) as c:
        out = sample_resolvents(ctx.op, ctx.contour, ctx.rule, phi, ctx.config.workers)
    ctx.of_solves += c.count
    return out


def compute_F_term(ctx):
    """S^{-1} F: the nonlocal initial datum B_N^{-1} Psi_0 propagated to every node."""
    if ctx._f_samples is None:
        ctx._f_samples = _samples(ctx, ctx.problem.psi0)
    return of_apply(ctx._f_samples, ctx.weight(0), ctx.times, 0)


def apply_S_inverse(ctx, Y):
    Y = np.asarray(Y, dtype=complex)
    out = np.zeros_like(Y)
    for k in range(ctx.grid.N + 1):
        samples = _samples(ctx, Y[k])
        out += of_apply(samples, ctx.weight(k), ctx.times, k, zero_below_p=ctx.config.strict_alg1)
    return out


def source_samples(ctx, Phi, t_from, t_to):
    """V(t) P_N(t; Phi) at the Gauss points of [t_from, t_to]."""
    tq, _ = gauss_panels(t_from, t_to, ctx.config.panels)
    T = ctx.problem.T
    L = lagrange_matrix(ctx.grid, time_to_s(np.clip(tq, 0.0, T), T))
    interp = L @ Phi
    dim = ctx.op.dim
    V = np.array([ctx.problem.potential.profile(t, dim) for t in tq])
    return V * interp


def apply_C(ctx, Phi):
    """Row p: int_{t_{p-1}}^{t_p} exp(-i(t_p - t)H) V(t) P_N(t; Phi) dt; row 0 is zero."""
    Phi = np.asarray(Phi, dtype=complex)
    out = np.zeros_like(Phi)
    if ctx.problem.potential.is_zero:
        return out
    with SolveCounter(ctx.op) as c:
        for p in range(1, ctx.grid.N + 1):
            t0, t1 = ctx.times[p - 1], ctx.times[p]
            out[p] = propagate_inhom(ctx.op, ctx.contour, ctx.rule, t0, t1,
                                     source_samples(ctx, Phi, t0, t1),
                                     ctx.config.panels, ctx.config.workers)
    ctx.inhom_solves += c.count
    return out


def _report(ctx, report):
    report.of_solve_count = ctx.of_solves
    report.inhom_solve_count = ctx.inhom_solves
    report.resolvent_solve_count = ctx.of_solves + ctx.inhom_solves
    report.contraction_estimates = [
        e1 / e0 if e0 > 0 else math.inf for e0, e1 in zip(report.errors, report.errors[1:])]
    return report


def solve(problem, config, ctx=None):
    """Fixed-point iteration Phi <- S^{-1} C Phi + S^{-1} F from Phi = 0.

    Returns (TrajectorySolution, IterationReport). Hitting ``max_it``
    leaves ``converged`` False; three consecutive error growths by more
    than a factor 2 raise :class:`DivergenceError`.
    """
    if ctx is None:
        ctx = assemble(problem, config)
    report = IterationReport(separation=ctx.separation, h_used=ctx.rule.h, d_c=ctx.d_c,
                             z_c=ctx.z_c, contour=ctx.contour)
    SF = compute_F_term(ctx)
    Phi = np.zeros((ctx.grid.N + 1, problem.op.dim), dtype=complex)
    growth = 0
    it = 0
    while True:
        Y = apply_C(ctx, Phi)
        new = apply_S_inverse(ctx, Y) + SF
        err = max_norm(new - Phi)
        Phi = new
        it += 1
        report.errors.append(err)
        report.iterations = it
        log.info("iteration %d: err = %.3e", it, err)
        if problem.potential.is_zero or err <= config.err_tol:
            # with V = 0 the map is constant, so the first iterate is the fixed point
            report.converged = True
            break
        if len(report.errors) > 1 and err > 2.0 * report.errors[-2]:
            growth += 1
            if growth >= 3:
                _report(ctx, report)
                raise DivergenceError(
                    f"iteration error grew by more than 2x three times in a row "
                    f"(last err {err:.3e}); the contraction condition is likely violated",
                    report=report)
        else:
            growth = 0
        if it > config.max_it:
            break
    _report(ctx, report)
    return TrajectorySolution(ctx.grid, Phi, ctx.times.copy()), report
