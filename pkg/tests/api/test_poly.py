import numpy as np
import pytest

from psfeec.api.fields import PolynomialScalar, VectorField
from psfeec.api.poly import (
    CoefficientProbe,
    PiecewisePolynomial,
    divergence,
    edge_trace,
    factor_out_mu,
    gradient,
    integrate,
    interpolate,
    jump,
    mu_field,
    mu_power,
    rot_scalar,
)
from psfeec.enums import Region, Trace
from psfeec.exceptions import ResidualError

QUADRATIC = PolynomialScalar([[1.0, 2.0, -1.0], [0.5, 3.0, 0.0], [-2.0, 0.0, 0.0]])


def test_interpolate_reproduces_polynomials(split):
    q = interpolate(split, 2, QUADRATIC)
    for cell, points in split.sample_points(3):
        assert np.allclose(q.evaluate(points, cell), QUADRATIC.evaluate(points))
        assert np.allclose(q.gradient(points, cell), QUADRATIC.gradient(points))
    elevated = q.elevate(2)
    assert elevated.degree == 4
    assert np.allclose(elevated.evaluate(split.z0), q.evaluate(split.z0))


def test_differential_operators(split):
    q = interpolate(split, 3, QUADRATIC)
    points = np.array([[0.2, 0.3], [0.1, 0.1]])
    assert np.allclose(gradient(q).evaluate(points), QUADRATIC.gradient(points))
    assert np.allclose(rot_scalar(q).evaluate(points), QUADRATIC.rot().evaluate(points))
    assert np.allclose(divergence(rot_scalar(q)).coeffs, 0.0)
    v = interpolate(split, 2, VectorField(QUADRATIC, QUADRATIC.partial(0)))
    assert np.allclose(divergence(v).evaluate(points), VectorField(QUADRATIC, QUADRATIC.partial(0)).div().evaluate(points))
    with pytest.raises(ValueError):
        divergence(q)
    with pytest.raises(ValueError):
        rot_scalar(v)


def test_mu_field(split):
    mu = mu_field(split)
    assert mu.evaluate(split.z0)[0] == pytest.approx(1.0)
    assert np.allclose(mu.evaluate(split.points[1:]), 0.0)
    assert jump(mu, 1) == pytest.approx(0.0)
    q = interpolate(split, 2, QUADRATIC)
    product = mu_power(q, 2)
    assert product.degree == 4
    point = np.array([[0.3, 0.25]])
    value = mu.evaluate(point)[0] ** 2 * q.evaluate(point)[0]
    assert product.evaluate(point)[0] == pytest.approx(value)
    recovered = factor_out_mu(factor_out_mu(product))
    assert np.allclose(recovered.coeffs, q.coeffs)
    with pytest.raises(ResidualError):
        factor_out_mu(q)


def test_integrate(split):
    one = PiecewisePolynomial(split, 0, np.ones(6))
    assert integrate(one) == pytest.approx(0.5)
    assert integrate(one, Region.subtriangle, 0) == pytest.approx(split.areas[0])
    assert integrate(one, Region.edge_half, 0) == pytest.approx(split.half_length(0))
    x = interpolate(split, 1, PolynomialScalar([[0.0], [1.0]]))
    assert integrate(x, other=x) == pytest.approx(1.0 / 12.0)
    assert integrate(mu_field(split)) == pytest.approx(1.0 / 6.0)


def test_edge_trace(split):
    q = interpolate(split, 2, QUADRATIC)
    trace = edge_trace(q, 2)
    assert trace.continuity_defect() == pytest.approx(0.0, abs=1e-12)
    assert trace.length == pytest.approx(1.0)
    # edge 2 runs from (0, 0) to (1, 0)
    t = np.array([0.1, 0.7])
    assert np.allclose(trace(t), QUADRATIC.evaluate(np.column_stack([t, 0 * t])))
    normal = edge_trace(q, 2, Trace.normal_derivative)
    assert np.allclose(normal(t), -QUADRATIC.partial(1).evaluate(np.column_stack([t, 0 * t])))


def test_coefficient_probe(split):
    q = interpolate(split, 2, VectorField(QUADRATIC, QUADRATIC.scale(2.0)))
    probe = CoefficientProbe(split, 2, 2)
    points = np.array([[0.2, 0.2], [0.3, 0.1]])
    cell = int(split.locate(points[:1])[0])
    values = probe.values(cell, points) @ q.vector
    assert np.allclose(values, q.evaluate(points, cell))
    gradients = probe.gradients(cell, points) @ q.vector
    assert np.allclose(gradients, q.gradient(points, cell))


def test_serialisation(split):
    q = interpolate(split, 2, QUADRATIC)
    again = PiecewisePolynomial.from_dict(split, q.to_dict())
    assert np.allclose(again.coeffs, q.coeffs)
    assert q.to_dict()["rank"] == "scalar"
    with pytest.raises(ValueError):
        PiecewisePolynomial(split, 2, np.zeros(5))
