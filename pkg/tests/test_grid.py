import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonlocal_schrodinger.grid import (
    build_grid, interpolate, lagrange, lagrange_matrix, lebesgue_constant, s_to_time, time_to_s,
)


def test_nodes_small_grids():
    assert build_grid(2).nodes.tolist() == [-1.0, 0.0, 1.0]
    g = build_grid(4)
    np.testing.assert_allclose(g.nodes, [-1, -0.7071068, 0, 0.7071068, 1], atol=5e-8)
    assert g.tau_max == pytest.approx(0.7071068, abs=1e-7)
    assert g.tau_max < math.pi / 4


@given(st.integers(1, 64))
def test_nodes_symmetric_sorted(N):
    g = build_grid(N)
    assert len(g) == N + 1
    assert np.all(np.diff(g.nodes) > 0)
    np.testing.assert_array_equal(g.nodes, -g.nodes[::-1])
    np.testing.assert_allclose(g.nodes, -np.cos(np.arange(N + 1) * np.pi / N), atol=1e-15)
    assert g.tau_max <= math.pi / N


def test_bad_degree():
    with pytest.raises(ValueError):
        build_grid(0)
    with pytest.raises(ValueError):
        build_grid(2.5)


@given(st.integers(1, 30))
def test_cardinal_property(N):
    g = build_grid(N)
    np.testing.assert_array_equal(lagrange_matrix(g, g.nodes), np.eye(N + 1))


@given(st.integers(1, 30), st.floats(-1, 1))
def test_partition_of_unity(N, s):
    g = build_grid(N)
    assert lagrange_matrix(g, [s]).sum() == pytest.approx(1.0, abs=1e-12)


@given(st.floats(-1, 1))
def test_linear_basis(s):
    g = build_grid(1)
    assert lagrange(g, 0, s) == pytest.approx((1 - s) / 2, abs=1e-14)


def test_lagrange_index_checked():
    with pytest.raises(IndexError):
        lagrange(build_grid(3), 4, 0.0)


def test_interpolation_examples():
    g = build_grid(2)
    assert interpolate(g, g.nodes ** 2, 0.5) == pytest.approx(0.25, abs=1e-15)
    g = build_grid(7)
    assert interpolate(g, np.full(8, 3.5 - 1j), 0.123) == pytest.approx(3.5 - 1j, abs=1e-13)
    vals = np.arange(8.0)
    assert interpolate(g, vals, g.nodes[3]) == 3.0


@given(st.integers(1, 12), st.lists(st.floats(-3, 3), min_size=1, max_size=13), st.floats(-1, 1))
def test_polynomial_reproduction(N, coeffs, s):
    coeffs = coeffs[:N + 1]
    g = build_grid(N)
    p = np.polynomial.Polynomial(coeffs)
    assert interpolate(g, p(g.nodes), s) == pytest.approx(p(s), abs=1e-10)


def test_interpolate_vector_values():
    g = build_grid(5)
    vals = np.stack([np.sin(g.nodes), np.cos(g.nodes)], axis=1)
    out = interpolate(g, vals, np.array([0.1, 0.2]))
    assert out.shape == (2, 2)
    with pytest.raises(ValueError):
        interpolate(g, vals[:-1], 0.0)


def test_lebesgue_values():
    assert lebesgue_constant(build_grid(1)) == pytest.approx(1.0, abs=1e-12)
    assert lebesgue_constant(build_grid(2), resolution=20001) == pytest.approx(1.25, abs=1e-6)
    l16, l32 = lebesgue_constant(build_grid(16)), lebesgue_constant(build_grid(32))
    assert l16 < l32 + 1
    # logarithmic growth bound for CGL nodes
    assert l32 <= 2 / math.pi * math.log(33) + 1
    with pytest.raises(ValueError):
        lebesgue_constant(build_grid(4), resolution=20)


def test_time_maps():
    assert s_to_time(-1, 3.0) == 0.0
    assert s_to_time(1, 3.0) == 3.0
    assert time_to_s(1.5, 3.0) == 0.0
    assert s_to_time(time_to_s(0.3, 2.0), 2.0) == pytest.approx(0.3, abs=1e-15)
    with pytest.raises(ValueError):
        time_to_s(2.5, 2.0)
    with pytest.raises(ValueError):
        s_to_time(1.5, 2.0)
    with pytest.raises(ValueError):
        s_to_time(0.0, 0.0)
