import numpy as np
import pytest

from psfeec.api.config import Config
from psfeec.api.quadrature import interval_rule, map_triangle_rule, triangle_rule
from psfeec.exceptions import QuadratureError


def test_interval_rule_exactness():
    for degree in range(12):
        points, weights = interval_rule(degree)
        assert weights.sum() == pytest.approx(1.0)
        assert weights @ points ** degree == pytest.approx(1.0 / (degree + 1))


def test_triangle_rule_exactness():
    # integral of x^i y^j over the reference triangle is i! j! / (i + j + 2)!
    from math import factorial

    for degree in range(0, 21, 4):
        points, weights = triangle_rule(degree)
        for i in range(degree + 1):
            j = degree - i
            exact = factorial(i) * factorial(j) / factorial(i + j + 2)
            assert weights @ (points[:, 0] ** i * points[:, 1] ** j) == pytest.approx(exact, rel=1e-12)


def test_map_triangle_rule():
    vertices = np.array([[1.0, 1.0], [3.0, 1.0], [1.0, 2.0]])
    points, bary, weights = map_triangle_rule(vertices, 2)
    assert weights.sum() == pytest.approx(1.0)
    assert np.allclose(bary.sum(axis=1), 1.0)
    assert np.allclose(bary @ vertices, points)
    assert weights @ points[:, 0] == pytest.approx(5.0 / 3.0)


def test_degree_limit(config: Config):
    with pytest.raises(QuadratureError):
        triangle_rule(21)
    with pytest.raises(QuadratureError):
        interval_rule(30)
    config.quadrature.max_degree = 30
    points, _ = interval_rule(30)
    assert len(points) == 16
    assert len(interval_rule(4, max_degree=4)[0]) == 3
