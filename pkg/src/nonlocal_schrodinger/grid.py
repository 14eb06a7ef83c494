"""Chebyshev-Gauss-Lobatto time grid and barycentric Lagrange interpolation."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ChebyshevGrid:
    """CGL nodes s_p = -cos(p*pi/N) on [-1, 1]."""

    N: int
    nodes: np.ndarray = field(repr=False)
    steps: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def tau_max(self):
        return float(self.steps.max())

    def __len__(self):
        return self.N + 1


def build_grid(N):
    if int(N) != N or N < 1:
        raise ValueError(f"grid degree must satisfy N >= 1, got {N}")
    N = int(N)
    p = np.arange(N + 1)
    nodes = -np.cos(p * np.pi / N)
    # exact symmetry and endpoints
    nodes = 0.5 * (nodes - nodes[::-1])
    nodes[0], nodes[-1] = -1.0, 1.0
    if N % 2 == 0:
        nodes[N // 2] = 0.0
    weights = np.where(p % 2 == 0, 1.0, -1.0)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    for arr in (nodes, weights):
        arr.setflags(write=False)
    steps = np.diff(nodes)
    steps.setflags(write=False)
    return ChebyshevGrid(N, nodes, steps, weights)


def lagrange_matrix(grid, s):
    """Values L_l(s_i) for every probe s_i, shape (len(s), N+1).

    Uses the second barycentric form; probes that hit a node get the
    corresponding unit row.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    diff = s[:, None] - grid.nodes[None, :]
    # subnormal offsets would overflow w/diff; they are node hits at working precision
    exact = np.abs(diff) < np.finfo(float).tiny
    hit = exact.any(axis=1)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        terms = grid.weights[None, :] / diff
        out = terms / terms.sum(axis=1, keepdims=True)
    out[hit] = exact[hit].astype(float)
    return out


def lagrange(grid, l, s):
    if not 0 <= l <= grid.N:
        raise IndexError(f"node index {l} outside 0..{grid.N}")
    return float(lagrange_matrix(grid, [s])[0, l])


def interpolate(grid, values, s):
    """Evaluate P_N(s) = sum_p values[p] L_p(s).

    ``values`` has shape (N+1,) or (N+1, dim); ``s`` may be a scalar or array.
    """
    values = np.asarray(values)
    if values.shape[0] != grid.N + 1:
        raise ValueError(f"expected {grid.N + 1} nodal values, got {values.shape[0]}")
    L = lagrange_matrix(grid, s)
    out = np.tensordot(L, values, axes=(1, 0))
    return out[0] if np.ndim(s) == 0 else out


def lebesgue_constant(grid, resolution=None):
    """Max over a uniform probe mesh of sum_l |L_l(s)|."""
    if resolution is None:
        resolution = 200 * (grid.N + 1)
    if resolution < 10 * (grid.N + 1):
        raise ValueError(f"resolution must be >= 10*(N+1) = {10 * (grid.N + 1)}")
    s = np.linspace(-1.0, 1.0, int(resolution))
    return float(np.abs(lagrange_matrix(grid, s)).sum(axis=1).max())


def time_to_s(t, T):
    if T <= 0:
        raise ValueError(f"horizon T must be positive, got {T}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > T):
        raise ValueError(f"time {t} outside [0, {T}]")
    out = 2.0 * t / T - 1.0
    return float(out) if out.ndim == 0 else out


def s_to_time(s, T):
    if T <= 0:
        raise ValueError(f"horizon T must be positive, got {T}")
    s = np.asarray(s, dtype=float)
    if np.any(s < -1) or np.any(s > 1):
        raise ValueError(f"s = {s} outside [-1, 1]")
    out = (s + 1.0) * T / 2.0
    return float(out) if out.ndim == 0 else out
