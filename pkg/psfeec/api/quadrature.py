"""Quadrature rules on the reference interval and the reference triangle.

Triangle rules are collapsed Gauss–Jacobi product rules: Gauss–Legendre
in the collapsed direction and Gauss–Jacobi with weight ``(1 - x)`` in the
other, which absorbs the Jacobian of the Duffy map.
"""
import logging
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from psfeec.api.config import Config
from psfeec.exceptions import QuadratureError

__all__ = ["interval_rule", "triangle_rule", "map_triangle_rule"]

logger = logging.getLogger(__name__)


def _check_degree(degree: int, max_degree: Optional[int]) -> int:
    if max_degree is None:
        max_degree = Config.current().quadrature.max_degree
    if degree > max_degree:
        raise QuadratureError(
            "requested exactness degree %s exceeds the largest available rule (%s)"
            % (degree, max_degree)
        )
    return max(int(degree), 0)


def interval_rule(
    degree: int, max_degree: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss–Legendre rule on [0, 1].

    Args:
        degree: Polynomial degree integrated exactly.
        max_degree: Largest admissible degree, taken from the config by default.

    Returns:
        Points and weights; the weights sum to one.

    Raises:
        QuadratureError: When the degree exceeds the largest available rule.

    Examples:
        >>> points, weights = interval_rule(3)
        >>> len(points)
        2
        >>> round(float(weights @ points**3), 12)
        0.25
    """
    degree = _check_degree(degree, max_degree)
    return _interval_rule(degree // 2 + 1)


@lru_cache(maxsize=None)
def _interval_rule(count: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(count)
    points = (nodes + 1.0) / 2.0
    weights = weights / 2.0
    points.setflags(write=False)
    weights.setflags(write=False)
    return points, weights


def triangle_rule(
    degree: int, max_degree: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Collapsed product rule on the reference triangle (0,0), (1,0), (0,1).

    Args:
        degree: Total polynomial degree integrated exactly.
        max_degree: Largest admissible degree, taken from the config by default.

    Returns:
        Points of shape (n, 2) and weights summing to 1/2.

    Raises:
        QuadratureError: When the degree exceeds the largest available rule.

    Examples:
        >>> points, weights = triangle_rule(2)
        >>> round(float(weights.sum()), 14)
        0.5
        >>> round(float(weights @ (points[:, 0] * points[:, 1])), 14)
        0.04166666666667
    """
    degree = _check_degree(degree, max_degree)
    return _triangle_rule(degree // 2 + 1)


@lru_cache(maxsize=None)
def _triangle_rule(count: int) -> Tuple[np.ndarray, np.ndarray]:
    u, wu = _interval_rule(count)
    nodes, wv = roots_jacobi(count, 1.0, 0.0)
    v = (nodes + 1.0) / 2.0
    wv = wv / 4.0
    xi = np.outer(1.0 - v, u)
    eta = np.outer(v, np.ones_like(u))
    points = np.column_stack([xi.ravel(), eta.ravel()])
    weights = np.outer(wv, wu).ravel()
    points.setflags(write=False)
    weights.setflags(write=False)
    logger.debug("built %s point triangle rule", len(weights))
    return points, weights


def map_triangle_rule(
    vertices: np.ndarray, degree: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Map the reference rule onto a triangle.

    Args:
        vertices: Triangle corners of shape (3, 2).
        degree: Total polynomial degree integrated exactly.

    Returns:
        Physical points, barycentric coordinates and weights scaled by the
        triangle area.

    Examples:
        >>> tri = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]])
        >>> points, bary, weights = map_triangle_rule(tri, 1)
        >>> round(float(weights.sum()), 14)
        2.0
    """
    ref, weights = triangle_rule(degree)
    bary = np.column_stack([1.0 - ref[:, 0] - ref[:, 1], ref[:, 0], ref[:, 1]])
    points = bary @ np.asarray(vertices, dtype=float)
    e1 = vertices[1] - vertices[0]
    e2 = vertices[2] - vertices[0]
    jacobian = abs(e1[0] * e2[1] - e1[1] * e2[0])
    return points, bary, weights * jacobian
