import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from psfeec.api.bernstein import (
    bernstein_values,
    de_casteljau,
    derivative_matrices,
    dimension,
    domain_points,
    elevation_matrix,
    index_map,
    interpolation_matrix,
    multi_indices,
    multiply_linear_matrix,
)

GRADS = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])


def _bary(points):
    points = np.atleast_2d(points)
    return np.column_stack([1.0 - points[:, 0] - points[:, 1], points[:, 0], points[:, 1]])


def test_multi_indices_order():
    assert multi_indices(2).tolist() == [
        [2, 0, 0],
        [1, 1, 0],
        [1, 0, 1],
        [0, 2, 0],
        [0, 1, 1],
        [0, 0, 2],
    ]
    for n in range(6):
        assert len(multi_indices(n)) == dimension(n)
        assert (multi_indices(n).sum(axis=1) == n).all()
        assert all(index_map(n)[tuple(a)] == k for k, a in enumerate(multi_indices(n).tolist()))


def test_partition_of_unity():
    bary = _bary(np.array([[0.1, 0.2], [0.5, 0.5], [0.0, 0.0]]))
    for n in range(7):
        assert np.allclose(bernstein_values(n, bary).sum(axis=1), 1.0)
    centroid = np.full((1, 3), 1.0 / 3.0)
    assert np.allclose(bernstein_values(2, centroid)[0] * 9.0, [1.0, 2.0, 2.0, 1.0, 2.0, 1.0])
    assert bernstein_values(4, centroid)[0][index_map(4)[(2, 1, 1)]] == pytest.approx(12.0 / 81.0)


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(
    n=st.integers(min_value=0, max_value=6),
    x=st.floats(min_value=0.0, max_value=0.5),
    y=st.floats(min_value=0.0, max_value=0.5),
)
def test_de_casteljau_matches_direct_sum(n, x, y):
    coeffs = np.random.default_rng(n).normal(size=dimension(n))
    bary = _bary(np.array([[x, y]]))
    expected = bernstein_values(n, bary) @ coeffs
    assert np.allclose(de_casteljau(coeffs, n, bary), expected)


def test_derivative_matrices():
    # p = x^2 on the reference triangle, interpolated from domain points
    n = 2
    values = domain_points(n)[:, 1] ** 2
    coeffs = interpolation_matrix(n) @ values
    derivative = derivative_matrices(n, GRADS)
    point = _bary(np.array([[0.3, 0.2]]))
    assert de_casteljau(derivative[0] @ coeffs, n - 1, point)[0] == pytest.approx(0.6)
    assert de_casteljau(derivative[1] @ coeffs, n - 1, point)[0] == pytest.approx(0.0)
    assert np.allclose(derivative_matrices(0, GRADS), 0.0)


def test_elevation_and_multiplication():
    rng = np.random.default_rng(1)
    coeffs = rng.normal(size=dimension(3))
    bary = _bary(rng.uniform(0, 0.5, size=(5, 2)))
    elevated = elevation_matrix(3, 2) @ coeffs
    assert np.allclose(de_casteljau(elevated, 5, bary), de_casteljau(coeffs, 3, bary))
    linear = np.array([2.0, -1.0, 0.5])
    product = multiply_linear_matrix(3, linear) @ coeffs
    assert np.allclose(
        de_casteljau(product, 4, bary), (bary @ linear) * de_casteljau(coeffs, 3, bary)
    )


def test_interpolation_matrix_reproduces_values():
    for n in range(5):
        values = np.random.default_rng(n).normal(size=dimension(n))
        coeffs = interpolation_matrix(n) @ values
        assert np.allclose(bernstein_values(n, domain_points(n)) @ coeffs, values)
