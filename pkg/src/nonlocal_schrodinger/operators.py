"""Half-strip operators: resolvent solves, powers and declared spectral envelopes.

Two finite-dimensional backends are provided: a diagonal operator with a
prescribed spectrum, and the 1-D finite-difference Hamiltonian
-d^2/dx^2 + U(x) with Dirichlet boundaries.
"""

import threading

import numpy as np

from .contour import SpectralEnvelope
from .errors import SingularSolveError, SpectralProximityError

PROXIMITY_MARGIN = 1e-6
MAX_SMOOTHNESS = 8


class HalfStripOperator:
    """Base class; subclasses implement ``_solve`` and ``_apply``.

    ``solve_count`` is an instrumentation counter of resolvent solves.
    It is the only mutable state and is guarded by a lock, so solves at
    distinct points may run concurrently.
    """

    dim: int
    envelope: SpectralEnvelope
    smoothness_order: int

    def __init__(self, envelope, smoothness_order=MAX_SMOOTHNESS):
        if smoothness_order < 0:
            raise ValueError("smoothness_order must be nonnegative")
        self.envelope = envelope
        self.smoothness_order = int(smoothness_order)
        self._count = 0
        self._lock = threading.Lock()

    @property
    def solve_count(self):
        return self._count

    def reset_count(self):
        with self._lock:
            self._count = 0

    def _check_vector(self, v):
        v = np.asarray(v, dtype=complex)
        if v.shape != (self.dim,):
            raise ValueError(f"state vector must have shape ({self.dim},), got {v.shape}")
        return v

    def resolvent_solve(self, zeta, rhs):
        """Return (zeta*I - H)^{-1} rhs."""
        zeta = complex(zeta)
        rhs = self._check_vector(rhs)
        if self.envelope.distance_outside(zeta) < PROXIMITY_MARGIN:
            raise SpectralProximityError(zeta)
        with self._lock:
            self._count += 1
        return self._solve(zeta, rhs)

    def apply(self, phi):
        return self._apply(self._check_vector(phi))

    def apply_power(self, r, phi):
        if r < 0:
            raise ValueError("power must be nonnegative")
        if r > self.smoothness_order:
            raise ValueError(f"power {r} exceeds smoothness order {self.smoothness_order}")
        out = self._check_vector(phi).copy()
        for _ in range(r):
            out = self._apply(out)
        return out

    def dense(self):
        return np.column_stack([self._apply(e) for e in np.eye(self.dim, dtype=complex)])


class DiagonalOperator(HalfStripOperator):
    def __init__(self, eigenvalues, envelope=None, smoothness_order=MAX_SMOOTHNESS):
        lam = np.atleast_1d(np.asarray(eigenvalues, dtype=complex))
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("eigenvalues must be a nonempty 1-D array")
        if envelope is None:
            envelope = SpectralEnvelope(float(lam.real.min()), float(np.abs(lam.imag).max()))
        bad = (lam.real < envelope.b_s - 1e-12) | (np.abs(lam.imag) > envelope.d_s + 1e-12)
        if bad.any():
            raise ValueError(f"eigenvalue {lam[bad][0]} outside the declared envelope {envelope}")
        super().__init__(envelope, smoothness_order)
        self.eigenvalues = lam
        self.eigenvalues.setflags(write=False)
        self.dim = lam.size

    def _solve(self, zeta, rhs):
        return rhs / (zeta - self.eigenvalues)

    def _apply(self, phi):
        return self.eigenvalues * phi

    def __repr__(self):
        return f"DiagonalOperator(dim={self.dim}, envelope={self.envelope})"


def thomas_solve(lower, diag, upper, rhs):
    """Tridiagonal solve without pivoting; ``lower[i]`` couples row i+1 to column i."""
    n = diag.size
    c = np.empty(n, dtype=complex)
    d = np.empty(n, dtype=complex)
    piv = diag[0]
    if piv == 0:
        raise SingularSolveError("zero pivot in tridiagonal solve at row 0")
    c[0] = upper[0] / piv if n > 1 else 0.0
    d[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - lower[i - 1] * c[i - 1]
        if piv == 0:
            raise SingularSolveError(f"zero pivot in tridiagonal solve at row {i}")
        c[i] = upper[i] / piv if i < n - 1 else 0.0
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / piv
    x = np.empty(n, dtype=complex)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def dense_solve(matrix, rhs):
    """Gaussian elimination with partial pivoting (independent oracle for the Thomas path)."""
    A = np.array(matrix, dtype=complex)
    b = np.array(rhs, dtype=complex)
    n = b.size
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        if A[p, k] == 0:
            raise SingularSolveError(f"singular matrix at column {k}")
        if p != k:
            A[[k, p]] = A[[p, k]]
            b[[k, p]] = b[[p, k]]
        f = A[k + 1:, k] / A[k, k]
        A[k + 1:, k:] -= np.outer(f, A[k, k:])
        b[k + 1:] -= f * b[k]
    x = np.empty(n, dtype=complex)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - A[k, k + 1:] @ x[k + 1:]) / A[k, k]
    return x


class TridiagonalOperator(HalfStripOperator):
    def __init__(self, diag, off, envelope=None, smoothness_order=MAX_SMOOTHNESS):
        diag = np.asarray(diag, dtype=complex)
        off = np.asarray(off, dtype=complex)
        if off.size != max(diag.size - 1, 0):
            raise ValueError("off-diagonal must have length dim-1")
        if envelope is None:
            radius = np.zeros(diag.size)
            radius[:-1] += np.abs(off)
            radius[1:] += np.abs(off)
            envelope = SpectralEnvelope(float((diag.real - radius).min()),
                                        float(np.abs(diag.imag).max()))
        super().__init__(envelope, smoothness_order)
        self.diag = diag
        self.off = off
        for arr in (self.diag, self.off):
            arr.setflags(write=False)
        self.dim = diag.size

    def _solve(self, zeta, rhs):
        return thomas_solve(-self.off, zeta - self.diag, -self.off, rhs)

    def _apply(self, phi):
        out = self.diag * phi
        out[:-1] += self.off * phi[1:]
        out[1:] += self.off * phi[:-1]
        return out

    def dense(self):
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def __repr__(self):
        return f"TridiagonalOperator(dim={self.dim}, envelope={self.envelope})"


def fd_build(L, nx, U=None, envelope=None, smoothness_order=MAX_SMOOTHNESS):
    """Second-order FD Hamiltonian on (0, L) with nx interior points and Dirichlet ends."""
    if L <= 0:
        raise ValueError(f"interval length must be positive, got {L}")
    if int(nx) != nx or nx < 1:
        raise ValueError(f"nx must be a positive integer, got {nx}")
    nx = int(nx)
    U = np.zeros(nx) if U is None else np.asarray(U, dtype=float)
    if U.shape != (nx,):
        raise ValueError(f"potential samples must have shape ({nx},)")
    dx = L / (nx + 1)
    diag = 2.0 / dx ** 2 + U
    off = np.full(nx - 1, -1.0 / dx ** 2)
    op = TridiagonalOperator(diag, off, envelope=envelope, smoothness_order=smoothness_order)
    op.dx = dx
    op.grid_x = dx * np.arange(1, nx + 1)
    return op


def resolvent_solve(op, zeta, rhs):
    return op.resolvent_solve(zeta, rhs)


def apply(op, phi):
    return op.apply(phi)


def apply_power(op, r, phi):
    return op.apply_power(r, phi)
