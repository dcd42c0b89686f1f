"""Bernstein–Bézier kernels on a single triangle.

Multi-indices of degree ``n`` are ordered lexicographically with the first
entry decreasing: ``(n,0,0), (n-1,1,0), (n-1,0,1), (n-2,2,0), ...``. All
functions here work with barycentric coordinates and know nothing about
the split.
"""
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np
from scipy.special import comb

__all__ = [
    "multi_indices",
    "index_map",
    "dimension",
    "bernstein_values",
    "de_casteljau",
    "derivative_matrices",
    "multiply_linear_matrix",
    "elevation_matrix",
    "domain_points",
    "interpolation_matrix",
]


def dimension(n: int) -> int:
    """Number of Bernstein polynomials of degree n.

    Examples:
        >>> dimension(2)
        6
        >>> dimension(-1)
        0
    """
    if n < 0:
        return 0
    return (n + 1) * (n + 2) // 2


@lru_cache(maxsize=None)
def multi_indices(n: int) -> np.ndarray:
    """Multi-indices of degree n in lexicographic order.

    Examples:
        >>> multi_indices(1).tolist()
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
        >>> len(multi_indices(3))
        10
    """
    rows = [
        (a0, a1, n - a0 - a1) for a0 in range(n, -1, -1) for a1 in range(n - a0, -1, -1)
    ]
    result = np.array(rows, dtype=int).reshape(-1, 3)
    result.setflags(write=False)
    return result


@lru_cache(maxsize=None)
def index_map(n: int) -> Dict[Tuple[int, int, int], int]:
    """Position of every multi-index of degree n.

    Examples:
        >>> index_map(2)[(0, 0, 2)]
        5
    """
    return {tuple(int(a) for a in alpha): k for k, alpha in enumerate(multi_indices(n))}


@lru_cache(maxsize=None)
def _multinomials(n: int) -> np.ndarray:
    alphas = multi_indices(n)
    return np.array(
        [comb(n, int(a), exact=True) * comb(n - int(a), int(b), exact=True) for a, b, _ in alphas],
        dtype=float,
    )


def bernstein_values(n: int, bary: np.ndarray) -> np.ndarray:
    """Evaluate all Bernstein polynomials of degree n.

    Args:
        n: Degree.
        bary: Barycentric coordinates of shape (p, 3).

    Returns:
        Matrix of shape (p, dimension(n)).

    Examples:
        >>> values = bernstein_values(2, np.array([[0.2, 0.3, 0.5]]))
        >>> round(float(values.sum()), 14)
        1.0
    """
    bary = np.atleast_2d(np.asarray(bary, dtype=float))
    alphas = multi_indices(n)
    powers = np.prod(bary[:, None, :] ** alphas[None, :, :], axis=2)
    return powers * _multinomials(n)[None, :]


@lru_cache(maxsize=None)
def _reduction_indices(n: int) -> np.ndarray:
    """For every beta of degree n-1 the positions of beta + e_k in degree n."""
    upper = index_map(n)
    rows = []
    for beta in multi_indices(n - 1):
        rows.append(
            [upper[tuple(int(b) for b in beta + np.eye(3, dtype=int)[k])] for k in range(3)]
        )
    return np.array(rows, dtype=int).reshape(-1, 3)


def de_casteljau(coeffs: np.ndarray, n: int, bary: np.ndarray) -> np.ndarray:
    """Evaluate a polynomial in BB form with the de Casteljau algorithm.

    Args:
        coeffs: Coefficients of shape (dimension(n), ...).
        n: Degree.
        bary: Barycentric coordinates of shape (p, 3).

    Returns:
        Values of shape (p, ...).

    Examples:
        >>> coeffs = np.array([1.0, 0.0, 0.0])
        >>> de_casteljau(coeffs, 1, np.array([[0.25, 0.5, 0.25]])).tolist()
        [0.25]
    """
    bary = np.atleast_2d(np.asarray(bary, dtype=float))
    coeffs = np.asarray(coeffs, dtype=float)
    current = np.broadcast_to(coeffs, (bary.shape[0],) + coeffs.shape).copy()
    extra = (1,) * (coeffs.ndim - 1)
    for level in range(n, 0, -1):
        idx = _reduction_indices(level)
        current = (
            bary[:, 0].reshape((-1, 1) + extra) * current[:, idx[:, 0]]
            + bary[:, 1].reshape((-1, 1) + extra) * current[:, idx[:, 1]]
            + bary[:, 2].reshape((-1, 1) + extra) * current[:, idx[:, 2]]
        )
    return current[:, 0]


def derivative_matrices(n: int, grads: np.ndarray) -> np.ndarray:
    """Matrices of the partial derivatives in BB form.

    Args:
        n: Degree of the differentiated polynomial.
        grads: Gradients of the three barycentric coordinates, shape (3, 2).

    Returns:
        Array of shape (2, dimension(n-1), dimension(n)); entry ``[d]`` maps
        degree n coefficients to the coefficients of the ``x_d`` derivative.
        For ``n == 0`` the derivative is the zero polynomial of degree 0.

    Examples:
        >>> grads = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        >>> derivative_matrices(1, grads)[0].tolist()
        [[-1.0, 1.0, 0.0]]
    """
    if n == 0:
        return np.zeros((2, 1, 1))
    idx = _reduction_indices(n)
    result = np.zeros((2, dimension(n - 1), dimension(n)))
    rows = np.arange(dimension(n - 1))
    for k in range(3):
        for d in range(2):
            np.add.at(result[d], (rows, idx[:, k]), n * grads[k, d])
    return result


@lru_cache(maxsize=None)
def _multiply_linear_matrix(n: int, m: Tuple[float, float, float]) -> np.ndarray:
    upper = index_map(n + 1)
    result = np.zeros((dimension(n + 1), dimension(n)))
    for col, alpha in enumerate(multi_indices(n)):
        for k in range(3):
            gamma = tuple(int(a) + (1 if j == k else 0) for j, a in enumerate(alpha))
            result[upper[gamma], col] += m[k] * gamma[k] / (n + 1)
    result.setflags(write=False)
    return result


def multiply_linear_matrix(n: int, m: np.ndarray) -> np.ndarray:
    """Matrix of the product with a linear polynomial.

    Args:
        n: Degree of the multiplied polynomial.
        m: BB coefficients (vertex values) of the linear factor.

    Returns:
        Matrix of shape (dimension(n+1), dimension(n)).

    Examples:
        >>> matrix = multiply_linear_matrix(0, np.array([1.0, 0.0, 0.0]))
        >>> matrix[:, 0].tolist()
        [1.0, 0.0, 0.0]
    """
    return _multiply_linear_matrix(n, tuple(float(x) for x in m))


def elevation_matrix(n: int, times: int = 1) -> np.ndarray:
    """Matrix of the degree elevation from n to n + times.

    Examples:
        >>> elevation_matrix(0).tolist()
        [[1.0], [1.0], [1.0]]
        >>> elevation_matrix(1, 0).shape
        (3, 3)
    """
    result = np.eye(dimension(n))
    for k in range(times):
        result = multiply_linear_matrix(n + k, np.ones(3)) @ result
    return result


@lru_cache(maxsize=None)
def domain_points(n: int) -> np.ndarray:
    """Barycentric coordinates of the domain points of degree n.

    Examples:
        >>> domain_points(1).tolist()
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    """
    if n == 0:
        result = np.full((1, 3), 1.0 / 3.0)
    else:
        result = multi_indices(n) / float(n)
    result.setflags(write=False)
    return result


@lru_cache(maxsize=None)
def interpolation_matrix(n: int) -> np.ndarray:
    """Map from values at the domain points to BB coefficients.

    Examples:
        >>> bool(np.allclose(interpolation_matrix(1), np.eye(3)))
        True
    """
    result = np.linalg.inv(bernstein_values(n, domain_points(n)))
    result.setflags(write=False)
    return result
