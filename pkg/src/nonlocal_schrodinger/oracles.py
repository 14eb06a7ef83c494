"""Reference solutions for operators with a known eigen-decomposition.

Used by the convergence driver; the test-suite keeps its own oracles.
"""

import numpy as np
from scipy.integrate import quad
from scipy.linalg import eigh

from .operators import DiagonalOperator, TridiagonalOperator


def eigensystem(op):
    """(eigenvalues, eigenvectors as columns) of a diagonal or Hermitian tridiagonal operator."""
    if isinstance(op, DiagonalOperator):
        return op.eigenvalues.copy(), np.eye(op.dim, dtype=complex)
    if isinstance(op, TridiagonalOperator):
        if np.any(op.diag.imag != 0) or np.any(op.off.imag != 0):
            raise ValueError("eigen-expansion oracle needs a real symmetric tridiagonal operator")
        lam, vec = eigh(op.dense().real)
        return lam.astype(complex), vec.astype(complex)
    raise TypeError(f"no eigen-decomposition available for {type(op).__name__}")


def exact_propagator(op, s, phi):
    lam, vec = eigensystem(op)
    coeff = np.linalg.solve(vec, np.asarray(phi, dtype=complex))
    return vec @ (np.exp(-1j * lam * s) * coeff)


def _phase_integral(potential, j, dim, t):
    if potential.is_zero or t == 0:
        return 0j
    re = quad(lambda x: potential.profile(x, dim)[j].real, 0.0, t, epsabs=1e-14, epsrel=1e-13)[0]
    im = quad(lambda x: potential.profile(x, dim)[j].imag, 0.0, t, epsabs=1e-14, epsrel=1e-13)[0]
    return complex(re, im)


def exact_nonlocal_solution(op, cond, potential, psi0, times):
    """Exact trajectory when V commutes with H.

    Diagonal operators accept any pointwise potential; tridiagonal ones
    only V = 0.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    times = np.asarray(times, dtype=float)
    if isinstance(op, DiagonalOperator):
        out = np.empty((times.size, op.dim), dtype=complex)
        for j, lam in enumerate(op.eigenvalues):
            def G(t):
                return -1j * lam * t + _phase_integral(potential, j, op.dim, t)
            denom = 1.0 + sum(a * np.exp(G(tk)) for a, tk in cond.terms)
            start = psi0[j] / denom
            out[:, j] = [start * np.exp(G(t)) for t in times]
        return out
    if not potential.is_zero:
        raise ValueError("the eigen-expansion oracle covers V = 0 only for non-diagonal operators")
    lam, vec = eigensystem(op)
    coeff = np.linalg.solve(vec, psi0)
    denom = 1.0 + sum(a * np.exp(-1j * lam * tk) for a, tk in cond.terms)
    start = coeff / denom
    return np.array([vec @ (np.exp(-1j * lam * t) * start) for t in times])
