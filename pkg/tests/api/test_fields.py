import numpy as np
import pytest

from psfeec.api.fields import (
    PolynomialScalar,
    SumScalar,
    WaveScalar,
    random_scalar,
    random_vector,
)

POINTS = np.array([[0.1, 0.2], [0.5, -0.3], [1.0, 1.0]])


def test_polynomial_scalar():
    # q = 1 + 2xy - y^2
    q = PolynomialScalar([[1.0, 0.0, -1.0], [0.0, 2.0, 0.0]])
    assert q.degree == 2
    x, y = POINTS[:, 0], POINTS[:, 1]
    assert np.allclose(q.evaluate(POINTS), 1 + 2 * x * y - y**2)
    assert np.allclose(q.gradient(POINTS), np.column_stack([2 * y, 2 * x - 2 * y]))
    assert np.allclose(q.laplacian().evaluate(POINTS), -2.0)
    assert np.allclose(q.rot().evaluate(POINTS), np.column_stack([2 * x - 2 * y, -2 * y]))
    assert PolynomialScalar.monomial(0, 0, 3.0).partial(0).evaluate(POINTS).tolist() == [0.0] * 3


def test_wave_and_sum():
    w = WaveScalar(1.5, [2.0, -1.0], 0.3)
    phase = POINTS @ np.array([2.0, -1.0]) + 0.3
    assert np.allclose(w.evaluate(POINTS), 1.5 * np.sin(phase))
    assert np.allclose(w.partial(1).evaluate(POINTS), -1.5 * np.cos(phase))
    total = w + PolynomialScalar([[1.0]])
    assert isinstance(total, SumScalar)
    assert np.allclose(total.evaluate(POINTS), 1.5 * np.sin(phase) + 1.0)
    assert np.allclose((total - w).evaluate(POINTS), 1.0)


def test_vector_field_identities(rng):
    psi = random_scalar(rng)
    v = psi.rot()
    assert np.allclose(v.div().evaluate(POINTS), 0.0, atol=1e-12)
    u = random_vector(rng)
    jacobian = u.gradient(POINTS)
    assert jacobian.shape == (3, 2, 2)
    assert np.allclose(u.div().evaluate(POINTS), jacobian[:, 0, 0] + jacobian[:, 1, 1])
    assert np.allclose((u - u).evaluate(POINTS), 0.0)
    assert np.allclose(u.scale(2.0).evaluate(POINTS), 2 * u.evaluate(POINTS))


def test_random_fields_are_seeded():
    first = random_scalar(np.random.default_rng(7)).evaluate(POINTS)
    second = random_scalar(np.random.default_rng(7)).evaluate(POINTS)
    assert first.tolist() == second.tolist()
    assert random_vector(np.random.default_rng(7)).ncomp == 2
    with pytest.raises(NotImplementedError):
        from psfeec.api.fields import ScalarField

        ScalarField().evaluate(POINTS)
