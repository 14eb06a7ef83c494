import math
import threading

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonlocal_schrodinger.contour import SpectralEnvelope
from nonlocal_schrodinger.errors import SpectralProximityError
from nonlocal_schrodinger.operators import (
    DiagonalOperator, TridiagonalOperator, apply, apply_power, dense_solve, fd_build,
    resolvent_solve, thomas_solve,
)

cplx = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


def test_diagonal_example():
    op = DiagonalOperator([1, 2])
    out = resolvent_solve(op, 1j, np.ones(2))
    np.testing.assert_allclose(out, [-0.5 - 0.5j, -0.4 - 0.2j], atol=1e-15)
    np.testing.assert_array_equal(resolvent_solve(op, 1j, np.zeros(2)), 0)


def test_power_examples():
    op = DiagonalOperator([2.0])
    assert apply_power(op, 3, np.ones(1))[0] == 8
    phi = np.array([1.0 + 2j])
    np.testing.assert_array_equal(apply_power(op, 0, phi), phi)
    small = DiagonalOperator([2.0], smoothness_order=2)
    with pytest.raises(ValueError):
        small.apply_power(3, np.ones(1))


def test_fd_examples():
    op = fd_build(1.0, 1)
    assert op.dense()[0, 0] == pytest.approx(8.0)
    op = fd_build(1.0, 3)
    lam = np.sort(np.linalg.eigvalsh(op.dense().real))
    k = np.arange(1, 4)
    np.testing.assert_allclose(lam, 2 * (1 - np.cos(k * np.pi / 4)) / 0.25 ** 2, rtol=1e-13)
    shifted = fd_build(1.0, 3, U=np.full(3, 0.7))
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(shifted.dense().real)), lam + 0.7, rtol=1e-13)
    zeta = 10j
    rhs = np.array([1.0, -2.0, 0.5j])
    x = op.resolvent_solve(zeta, rhs)
    assert np.linalg.norm((zeta * np.eye(3) - op.dense()) @ x - rhs) <= 1e-10
    with pytest.raises(ValueError):
        fd_build(0.0, 3)
    with pytest.raises(ValueError):
        fd_build(1.0, 3, U=np.zeros(2))


def test_gershgorin_envelope():
    op = fd_build(2.0, 10, U=np.linspace(0, 1, 10))
    lam = np.linalg.eigvalsh(op.dense().real)
    assert lam.min() >= op.envelope.b_s - 1e-12


@given(cplx, st.lists(cplx, min_size=3, max_size=3))
def test_resolvent_identity_tridiagonal(shift, phi):
    op = fd_build(1.0, 3)
    zeta = complex(-1.0 - abs(shift.real), shift.imag)
    phi = np.array(phi)
    x = resolvent_solve(op, zeta, phi)
    np.testing.assert_allclose(apply(op, x), zeta * x - phi, atol=1e-9 * (1 + np.abs(phi).max()))


@given(st.integers(1, 40), st.data())
def test_thomas_matches_dense(n, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2 ** 32 - 1)))
    diag = rng.normal(size=n) + 1j * rng.normal(size=n) + 6.0
    lo = rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1)
    up = rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1)
    rhs = rng.normal(size=n) + 1j * rng.normal(size=n)
    A = np.diag(diag) + np.diag(lo, -1) + np.diag(up, 1)
    np.testing.assert_allclose(thomas_solve(lo, diag, up, rhs), dense_solve(A, rhs), atol=1e-10)
    np.testing.assert_allclose(dense_solve(A, rhs), np.linalg.solve(A, rhs), atol=1e-10)


def test_proximity_rejected():
    op = DiagonalOperator([1.0, 2.0])
    with pytest.raises(SpectralProximityError):
        op.resolvent_solve(1.5 + 0j, np.ones(2))
    with pytest.raises(SpectralProximityError):
        op.resolvent_solve(2.0 + 1e-9j, np.ones(2))
    op.resolvent_solve(0.5 + 0j, np.ones(2))


def test_envelope_consistency():
    with pytest.raises(ValueError):
        DiagonalOperator([1.0], envelope=SpectralEnvelope(2.0, 0.1))
    op = DiagonalOperator([1 + 0.2j, 3 - 0.1j])
    assert op.envelope.b_s == 1.0 and op.envelope.d_s == pytest.approx(0.2)
    with pytest.raises(ValueError):
        DiagonalOperator([])


def test_shape_checked():
    op = DiagonalOperator([1.0, 2.0])
    with pytest.raises(ValueError):
        op.resolvent_solve(-1.0, np.ones(3))


def test_solve_counter_thread_safe():
    op = DiagonalOperator([1.0])
    def work():
        for _ in range(500):
            op.resolvent_solve(-1.0, np.ones(1))
    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert op.solve_count == 2000
    op.reset_count()
    assert op.solve_count == 0


def test_tridiagonal_apply_matches_dense(rng):
    diag = rng.normal(size=6) + 4
    off = rng.normal(size=5)
    op = TridiagonalOperator(diag, off)
    phi = rng.normal(size=6) + 1j * rng.normal(size=6)
    np.testing.assert_allclose(op.apply(phi), op.dense() @ phi, atol=1e-13)
