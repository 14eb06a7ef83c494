"""Nonlocal-condition calculus.

Scalar characteristic functions b(z) = 1 + sum_k alpha_k exp(-i t_k z) and
its collocation analogue b_N, their zeros, the safety-curve separation
check and the weight functions that realize S^{-1} inside the contour
quadrature.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .contour import distance_to_gamma0, inside_gamma0
from .errors import NearZeroCharacteristic, RootFindError
from .grid import lagrange_matrix, s_to_time, time_to_s
from .propagator import gauss_panels

NEAR_ZERO = 1e-12


@dataclass(frozen=True)
class NonlocalCondition:
    """Psi(0) + sum_k alpha_k Psi(t_k) = Psi_0 on the horizon [0, T]."""

    terms: tuple
    T: float
    s_terms: tuple = field(init=False)

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError(f"horizon T must be positive, got {self.T}")
        terms = tuple((complex(a), float(t)) for a, t in self.terms)
        for _, t in terms:
            if not 0 < t <= self.T:
                raise ValueError(f"condition time {t} outside (0, {self.T}]")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "s_terms", tuple((a, 2.0 * t / self.T - 1.0) for a, t in terms))

    @property
    def alphas(self):
        return np.array([a for a, _ in self.terms], dtype=complex)

    @property
    def times(self):
        return np.array([t for _, t in self.terms], dtype=float)


@dataclass(frozen=True)
class PotentialDescriptor:
    """Time-dependent multiplicative potential V(t) acting pointwise on state vectors.

    ``evaluator(t)`` returns the complex profile of V(t), a scalar or an
    array of length dim. V enters the mild form Psi' = -iH Psi + V Psi,
    so a real Schroedinger potential v corresponds to V = -i v.
    """

    evaluator: object
    lipschitz_K: float = None
    bound_MV: float = None
    is_zero: bool = False

    def profile(self, t, dim):
        if self.is_zero:
            return np.zeros(dim, dtype=complex)
        out = np.asarray(self.evaluator(t), dtype=complex)
        return np.broadcast_to(out, (dim,)).copy()

    def apply(self, t, phi):
        phi = np.asarray(phi, dtype=complex)
        return self.profile(t, phi.size) * phi

    @classmethod
    def zero(cls):
        return cls(lambda t: 0.0, 0.0, 0.0, is_zero=True)

    @classmethod
    def from_real_potential(cls, v, **kw):
        return cls(lambda t: -1j * np.asarray(v(t)), **kw)


class ExpSum:
    """f(z) = c0 + sum_j c_j exp(-i tau_j z), with analytic derivative."""

    def __init__(self, const, coeffs, rates):
        self.const = complex(const)
        self.coeffs = np.asarray(coeffs, dtype=complex).ravel()
        self.rates = np.asarray(rates, dtype=float).ravel()

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        if self.coeffs.size == 0:
            return np.full(zeta.shape, self.const) if zeta.ndim else self.const
        e = np.exp(-1j * np.multiply.outer(zeta, self.rates))
        out = self.const + e @ self.coeffs
        return out if zeta.ndim else complex(out)

    def derivative(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        if self.coeffs.size == 0:
            return np.zeros(zeta.shape, dtype=complex) if zeta.ndim else 0j
        e = np.exp(-1j * np.multiply.outer(zeta, self.rates))
        out = e @ (-1j * self.rates * self.coeffs)
        return out if zeta.ndim else complex(out)

    @property
    def scale(self):
        return abs(self.const) + float(np.abs(self.coeffs).sum())


def _nodes(grid_or_nodes):
    return np.asarray(getattr(grid_or_nodes, "nodes", grid_or_nodes), dtype=float)


def a_coeffs(grid, cond):
    """a_l = sum_k alpha_k L_l(s_k)."""
    if not cond.terms:
        return np.zeros(grid.N + 1, dtype=complex)
    s = np.array([sk for _, sk in cond.s_terms])
    L = lagrange_matrix(grid, s)
    return cond.alphas @ L


def b_function(cond):
    return ExpSum(1.0, cond.alphas, cond.times)


def b_of_z(cond, zeta):
    return b_function(cond)(zeta)


def bN_function(nodes, a):
    x = _nodes(nodes)
    a = np.asarray(a, dtype=complex)
    return ExpSum(1.0, a, x - x[0])


def bN_of_z(nodes, a, zeta):
    """b_N(z) = 1 + sum_l a_l exp(-i z (x_l - x_0)) on the node set ``nodes``."""
    return bN_function(nodes, a)(zeta)


def _bracket_terms(x, a, zeta):
    """a_p exp(-i z (x_p - x_0)) for every p, shape zeta.shape + (N+1,)."""
    return a * np.exp(-1j * np.multiply.outer(zeta, x - x[0]))


def _check_bN(bN, a):
    tol = NEAR_ZERO * (1.0 + float(np.abs(a).sum()))
    small = np.abs(bN) < tol
    if np.any(small):
        where = np.flatnonzero(np.atleast_1d(small))[0]
        raise NearZeroCharacteristic(
            f"b_N is numerically zero (|b_N| < {tol:.1e}) at quadrature point index {where}")


def f_weight(s, zeta, l, nodes, a, bN=None):
    """exp(-i z s)/b_N(z) times the two-branch bracket for column l.

    s >= x_l: 1 + sum_{p<l} a_p exp(-i z (x_p - x_0));
    s <  x_l: -sum_{p>=l} a_p exp(-i z (x_p - x_0)).
    """
    return _weight(s, zeta, l, nodes, a, bN, shift=False)


def column_weight(s, zeta, l, nodes, a, bN=None):
    """Weight of column l of S^{-1}: f(s, z, l) * exp(i z x_l), evaluated without overflow."""
    return _weight(s, zeta, l, nodes, a, bN, shift=True)


def _weight(s, zeta, l, nodes, a, bN, shift):
    x = _nodes(nodes)
    a = np.asarray(a, dtype=complex)
    if not 0 <= l < x.size:
        raise IndexError(f"column {l} outside 0..{x.size - 1}")
    zeta = np.asarray(zeta, dtype=complex)
    terms = _bracket_terms(x, a, zeta)
    if bN is None:
        bN = 1.0 + terms.sum(axis=-1)
    elif callable(bN):
        bN = bN(zeta)
    _check_bN(bN, a)
    if s >= x[l]:
        bracket = 1.0 + terms[..., :l].sum(axis=-1)
    else:
        bracket = -terms[..., l:].sum(axis=-1)
    lag = s - x[l] if shift else s
    out = np.exp(-1j * zeta * lag) * bracket / bN
    return out if zeta.ndim else complex(out)


def g_weight(s, zeta, j, grid, a, potential, panels=4, T=2.0, dim=1):
    """Profile of g(s, z, j) = sum_{l>=1} f(s, z, l) int_{t_{l-1}}^{t_l} e^{izt} V(t) L_j(t) dt.

    Works on the physical time axis t = (s_grid + 1) T / 2; ``s`` is a
    time on that axis. Returns an array of length ``dim`` (pointwise
    multiplier on Phi_j).
    """
    times = s_to_time(grid.nodes, T)
    zeta = complex(zeta)
    out = np.zeros(dim, dtype=complex)
    if potential.is_zero:
        return out
    for l in range(1, grid.N + 1):
        tq, wq = gauss_panels(times[l - 1], times[l], panels)
        Lj = lagrange_matrix(grid, time_to_s(np.clip(tq, 0.0, T), T))[:, j]
        V = np.array([potential.profile(t, dim) for t in tq])
        integral = (wq * np.exp(1j * zeta * tq) * Lj) @ V
        out = out + f_weight(s, zeta, l, times, a) * integral
    return out


# ---------------------------------------------------------------- zero search

@dataclass(frozen=True)
class Box:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError(f"degenerate box {self}")

    @property
    def diameter(self):
        return math.hypot(self.xmax - self.xmin, self.ymax - self.ymin)

    def contains(self, zc, margin=0.0):
        return (self.xmin - margin <= zc.real <= self.xmax + margin
                and self.ymin - margin <= zc.imag <= self.ymax + margin)

    def split(self, fx=0.5137, fy=0.4921):
        # off-centre splits avoid cutting through symmetric zero lattices
        xm = self.xmin + fx * (self.xmax - self.xmin)
        ym = self.ymin + fy * (self.ymax - self.ymin)
        return [Box(self.xmin, xm, self.ymin, ym), Box(xm, self.xmax, self.ymin, ym),
                Box(self.xmin, xm, ym, self.ymax), Box(xm, self.xmax, ym, self.ymax)]

    def perturbed(self, eps):
        return Box(self.xmin - eps, self.xmax + 0.7 * eps, self.ymin - 0.9 * eps, self.ymax + 0.6 * eps)


class _BoundaryZero(Exception):
    pass


def _boundary(box, u):
    """Counter-clockwise boundary point for parameter u in [0, 4)."""
    side = np.clip(np.floor(u), 0, 3).astype(int)
    f = u - side
    x0, x1, y0, y1 = box.xmin, box.xmax, box.ymin, box.ymax
    xs = np.select([side == 0, side == 1, side == 2, side == 3],
                   [x0 + f * (x1 - x0), np.full_like(f, x1), x1 - f * (x1 - x0), np.full_like(f, x0)])
    ys = np.select([side == 0, side == 1, side == 2, side == 3],
                   [np.full_like(f, y0), y0 + f * (y1 - y0), np.full_like(f, y1), y1 - f * (y1 - y0)])
    return xs + 1j * ys


def winding_number(func, box, scale=1.0, max_points=1 << 17):
    """Argument-principle count of zeros inside ``box`` by tracking arg(func) along the boundary."""
    u = np.linspace(0.0, 4.0, 257)
    while True:
        vals = np.asarray(func(_boundary(box, u)), dtype=complex)
        if np.any(np.abs(vals) < 1e-10 * scale):
            raise _BoundaryZero
        dphi = np.angle(vals[1:] / vals[:-1])
        bad = np.abs(dphi) > math.pi / 4
        if not bad.any():
            total = dphi.sum() / (2 * math.pi)
            w = int(round(total))
            if abs(total - w) < 1e-3:
                return w
            bad = np.ones_like(bad)
        if u.size > max_points:
            raise RootFindError(f"winding number did not settle on {box}")
        mids = 0.5 * (u[:-1] + u[1:])[bad]
        u = np.sort(np.concatenate([u, mids]))


def _newton(func, dfunc, z, tol, max_it=60):
    for _ in range(max_it):
        f = complex(func(z))
        df = complex(dfunc(z))
        if df == 0:
            return z, abs(f)
        step = f / df
        z = z - step
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    return z, abs(complex(func(z)))


def _fd_derivative(func):
    def d(z):
        h = 1e-7 * max(1.0, abs(z))
        return (complex(func(z + h)) - complex(func(z - h))) / (2 * h)
    return d


def _snap(zr, rel=1e-14):
    """Drop round-off in a component that is zero to working precision."""
    tol = rel * max(1.0, abs(zr))
    return complex(0.0 if abs(zr.real) < tol else zr.real, 0.0 if abs(zr.imag) < tol else zr.imag)


def find_zeros(func, box, dfunc=None, min_cell=1e-3, max_depth=60):
    """All zeros of an analytic ``func`` inside ``box``, sorted by (Re, Im).

    Recursive quadrisection guided by boundary winding numbers, then
    Newton polish. A zero of multiplicity w is listed w times.
    """
    if not isinstance(box, Box):
        box = Box(*box)
    if dfunc is None:
        dfunc = getattr(func, "derivative", None) or _fd_derivative(func)
    scale = getattr(func, "scale", 1.0)

    def wind(cell):
        eps = 1e-6 * max(1.0, cell.diameter)
        for _ in range(6):
            try:
                return winding_number(func, cell, scale), cell
            except _BoundaryZero:
                cell = cell.perturbed(eps)
                eps *= 3.0
        raise RootFindError(f"zero on the boundary of {cell} persists after perturbation")

    total, box = wind(box)
    found = []
    stack = [(box, total, 0)] if total else []
    while stack:
        cell, w, depth = stack.pop()
        centre = complex(0.5 * (cell.xmin + cell.xmax), 0.5 * (cell.ymin + cell.ymax))
        if w == 1 or cell.diameter < min_cell:
            zr, res = _newton(func, dfunc, centre, 1e-14)
            if cell.contains(zr, margin=1e-9 * max(1.0, abs(zr))) and res <= 1e-9 * (1 + abs(zr)):
                found.extend([_snap(zr)] * w)
                continue
            if cell.diameter < min_cell:
                raise RootFindError(f"Newton polish failed in cell {cell} (residual {res:.2e})")
        if depth >= max_depth:
            raise RootFindError(f"subdivision limit reached near {centre}")
        children = []
        for child in cell.split():
            cw, child = wind(child)
            children.append((child, cw))
        if sum(cw for _, cw in children) != w:
            raise RootFindError(f"winding counts of sub-cells do not add up in {cell}")
        stack.extend((c, cw, depth + 1) for c, cw in children if cw)
    return sorted(found, key=lambda zr: (zr.real, zr.imag))


def default_zero_box(cond, contour):
    """Search box covering two periods of the slowest exponential to the right of the contour."""
    if not cond.terms:
        return None
    t_min = float(cond.times.min())
    Y = math.log(1.0 + float(np.abs(cond.alphas).sum())) / t_min + 1.0
    return Box(contour.c_I - 1.0, contour.c_I + 4.0 * math.pi / t_min + 1.0, -Y, Y)


@dataclass(frozen=True)
class SeparationReport:
    ok: bool
    min_distance: float
    offending: complex = None
    zeros: tuple = ()

    def __str__(self):
        if self.ok:
            return f"separated (min distance {self.min_distance:.6g})"
        return f"zero {self.offending:.10g} lies inside the safety curve"


def check_separation(zeros, contour):
    zeros = [complex(zr) for zr in zeros]
    if not zeros:
        return SeparationReport(True, math.inf, None, ())
    inside = inside_gamma0(contour, zeros)
    dist = distance_to_gamma0(contour, zeros)
    if inside.any():
        idx = np.flatnonzero(inside)
        worst = idx[int(np.argmin(np.abs(np.asarray(zeros)[idx])))]
        return SeparationReport(False, 0.0, zeros[worst], tuple(zeros))
    return SeparationReport(True, float(dist.min()), None, tuple(zeros))
