"""Contour-quadrature evaluation of operator functions of H.

Every operator function is approximated as

    (h / 2 pi i) * sum_{m=-n}^{n} z'(mh) w(s, z(mh)) Phi_m,

where Phi_m is the corrected resolvent (z(mh) - H)^{-1} g minus the
first floor(delta) terms of its expansion about z0. The 2n+1 solves
are independent and run through :func:`parallel_map`; all reductions
run in ascending m so results do not depend on the worker count.
"""

import math
import weakref
from dataclasses import dataclass, field

import numpy as np

from .errors import SpectralProximityError
from .parallel import parallel_map

GAUSS_POINTS = 8
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GAUSS_POINTS)


def correction_center(contour):
    """z0 = min(0, b_s - a_I*sqrt(pi/2 - d^2) - 1) for the contour's envelope."""
    return min(0.0, contour.b_s - contour.a_I * math.sqrt(math.pi / 2 - contour.d ** 2) - 1.0)


def quadrature_nodes(contour, rule):
    m = np.arange(-rule.n, rule.n + 1)
    nu = m * rule.h
    return contour.z(nu), contour.dz(nu)


@dataclass(frozen=True)
class ResolventSampleSet:
    rule: object
    contour: object
    nodes: np.ndarray = field(repr=False)
    dnodes: np.ndarray = field(repr=False)
    samples: np.ndarray = field(repr=False)
    source_tag: object = None

    def __len__(self):
        return self.samples.shape[0]


def _check_delta(op, rule):
    if rule.floor_delta - 1 > op.smoothness_order:
        raise ValueError(
            f"delta={rule.delta} needs H^{rule.floor_delta - 1}, "
            f"operator allows powers up to {op.smoothness_order}")


def _power_terms(op, phi, zc, k):
    """[(H - z0)^{r-1} phi for r = 1..k]."""
    terms = [np.asarray(phi, dtype=complex)]
    for _ in range(k - 1):
        prev = terms[-1]
        terms.append(op.apply(prev) - zc * prev)
    return terms


def corrected_solve(op, zeta, rhs, zc, k, powers=None):
    """(zeta - H)^{-1} rhs - sum_{r=1}^{k} (H - z0)^{r-1} rhs / (zeta - z0)^r."""
    out = op.resolvent_solve(zeta, rhs)
    if powers is None:
        powers = _power_terms(op, rhs, zc, k)
    inv = 1.0 / (zeta - zc)
    fac = inv
    for term in powers:
        out = out - fac * term
        fac = fac * inv
    return out


def _node_map(fn, count, n, workers):
    def run(i):
        try:
            return fn(i)
        except SpectralProximityError as exc:
            raise SpectralProximityError(exc.zeta, node=i - n) from exc
    return parallel_map(run, range(count), workers)


def sample_resolvents(op, contour, rule, phi, workers=None, source_tag=None):
    phi = np.asarray(phi, dtype=complex)
    if phi.shape != (op.dim,):
        raise ValueError(f"state vector must have shape ({op.dim},), got {phi.shape}")
    _check_delta(op, rule)
    zn, dzn = quadrature_nodes(contour, rule)
    zc = correction_center(contour)
    k = rule.floor_delta
    powers = _power_terms(op, phi, zc, k)
    rows = _node_map(lambda i: corrected_solve(op, zn[i], phi, zc, k, powers),
                     zn.size, rule.n, workers)
    samples = np.array(rows, dtype=complex).reshape(zn.size, op.dim)
    samples.setflags(write=False)
    return ResolventSampleSet(rule, contour, zn, dzn, samples, source_tag)


def of_apply(samples, w, times, p, zero_below_p=False):
    """Evaluate S_l = (h/2 pi i) sum_m z'_m w(t_l, z_m, p) Phi_m at every collocation time t_l.

    ``w(t, zeta_array, p)`` must be vectorized over ``zeta_array``.
    With ``zero_below_p`` the rows l < p are set to zero.
    """
    times = np.asarray(getattr(times, "nodes", times), dtype=float)
    h = samples.rule.h
    out = np.zeros((times.size, samples.samples.shape[1]), dtype=complex)
    scale = h / (2j * math.pi)
    for l, t in enumerate(times):
        if zero_below_p and l < p:
            continue
        coef = scale * samples.dnodes * np.asarray(w(t, samples.nodes, p), dtype=complex)
        acc = np.zeros(samples.samples.shape[1], dtype=complex)
        for m in range(coef.size):
            acc = acc + coef[m] * samples.samples[m]
        out[l] = acc
    return out


def exp_weight(s, zeta, p=None):
    return np.exp(-1j * zeta * s)


class _SampleCache:
    """Sample sets keyed by (operator, contour, rule, right-hand side)."""

    def __init__(self):
        self._by_op = weakref.WeakKeyDictionary()

    def get(self, op, contour, rule, phi, workers):
        table = self._by_op.setdefault(op, {})
        key = (contour, rule, phi.tobytes())
        hit = table.get(key)
        if hit is None:
            hit = sample_resolvents(op, contour, rule, phi, workers, source_tag=key)
            table[key] = hit
        return hit

    def clear(self):
        self._by_op = weakref.WeakKeyDictionary()


SAMPLE_CACHE = _SampleCache()


def propagate_hom(op, contour, rule, s, phi, workers=None, cache=SAMPLE_CACHE):
    """Approximate exp(-i s H) phi for s >= 0."""
    if s < 0:
        raise ValueError(f"propagation time must be nonnegative, got {s}")
    phi = np.asarray(phi, dtype=complex)
    if cache is None:
        samples = sample_resolvents(op, contour, rule, phi, workers)
    else:
        samples = cache.get(op, contour, rule, phi, workers)
    return of_apply(samples, exp_weight, [s], None)[0]


def gauss_panels(a, b, panels):
    """Composite 8-point Gauss-Legendre nodes and weights on [a, b]."""
    if panels < 1:
        raise ValueError(f"panel count must be >= 1, got {panels}")
    edges = np.linspace(a, b, int(panels) + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    t = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return t, w


def propagate_inhom(op, contour, rule, s_from, s_to, source, panels=4, workers=None):
    """Approximate the Duhamel integral int_{s_from}^{s_to} exp(-i(s_to - t)H) v(t) dt.

    ``source`` maps a time to a state vector, or is an array of source
    values already sampled at the Gauss points returned by
    :func:`gauss_panels`. Each quadrature node gets its own right-hand
    side sum_q w_q exp(-i z_m (s_to - t_q)) v(t_q), so a call costs
    2n+1 solves.
    """
    if not s_from < s_to:
        raise ValueError(f"need s_from < s_to, got [{s_from}, {s_to}]")
    _check_delta(op, rule)
    tq, wq = gauss_panels(s_from, s_to, panels)
    if callable(source):
        vq = np.array([source(t) for t in tq], dtype=complex).reshape(tq.size, op.dim)
    else:
        vq = np.asarray(source, dtype=complex).reshape(tq.size, op.dim)
    zn, dzn = quadrature_nodes(contour, rule)
    zc = correction_center(contour)
    k = rule.floor_delta
    lag = s_to - tq

    def node(i):
        kern = wq * np.exp(-1j * zn[i] * lag)
        rhs = kern @ vq
        return corrected_solve(op, zn[i], rhs, zc, k)

    rows = _node_map(node, zn.size, rule.n, workers)
    scale = rule.h / (2j * math.pi)
    acc = np.zeros(op.dim, dtype=complex)
    for i, row in enumerate(rows):
        acc = acc + (scale * dzn[i]) * row
    return acc


class SolveCounter:
    """Context manager recording the resolvent solves an operator performs inside a block."""

    def __init__(self, op):
        self.op = op
        self.count = 0

    def __enter__(self):
        self._start = self.op.solve_count
        return self

    def __exit__(self, *exc):
        self.count = self.op.solve_count - self._start
        return False


__all__ = [
    "ResolventSampleSet", "SAMPLE_CACHE", "SolveCounter",
    "correction_center", "corrected_solve", "exp_weight", "gauss_panels", "of_apply",
    "propagate_hom", "propagate_inhom", "quadrature_nodes", "sample_resolvents",
]
