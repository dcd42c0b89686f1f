import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from psfeec.api.fields import PolynomialScalar
from psfeec.api.poly import divergence, edge_trace, interpolate, rot_scalar
from psfeec.api.spaces import build_space, check_membership, dimension_formula, nesting_residual
from psfeec.enums import Family, Trace
from psfeec.exceptions import InadmissibleDegreeError


def test_dimension_formula_values():
    assert dimension_formula(Family.S0, False, 2) == 9
    assert dimension_formula(Family.S1, False, 2) == 27
    assert dimension_formula(Family.S0, True, 4) == 6
    assert dimension_formula(Family.L0, False, 0) == 1
    assert dimension_formula(Family.V2, True, 0) == 5
    assert dimension_formula(Family.calV2, True, 0) == 2
    assert dimension_formula(Family.S0, False, 0) is None
    assert dimension_formula(Family.L1, False, -1) is None


@pytest.mark.parametrize(
    "family, ring, degrees",
    [
        (Family.L0, False, range(0, 4)),
        (Family.L0, True, range(1, 4)),
        (Family.V1, False, range(0, 3)),
        (Family.V1, True, range(1, 3)),
        (Family.V2, True, range(0, 3)),
        (Family.calV2, False, range(0, 3)),
        (Family.calV2, True, range(0, 3)),
        (Family.S0, False, range(2, 5)),
        (Family.S0, True, range(2, 6)),
        (Family.S1, False, range(1, 4)),
        (Family.S1, True, range(1, 4)),
        (Family.L2, True, range(1, 4)),
    ],
)
def test_dimensions_match_closed_forms(split, family, ring, degrees):
    for r in degrees:
        assert build_space(split, family, ring, r).dim == dimension_formula(family, ring, r)


def test_build_space_cache_and_errors(split):
    first = build_space(split, Family.S0, False, 2)
    assert build_space(split, Family.S0, False, 2) is first
    assert first.tag == "S0"
    assert build_space(split, Family.S0, True, 3).tag == "ring-S0"
    assert np.allclose(first.basis.T @ first.basis, np.eye(first.dim))
    with pytest.raises(InadmissibleDegreeError):
        build_space(split, Family.L0, False, -1)


def test_membership(split):
    quadratic = PolynomialScalar([[1.0, 2.0, 0.5], [-1.0, 3.0, 0.0], [2.0, 0.0, 0.0]])
    q = interpolate(split, 2, quadratic)
    s0 = build_space(split, Family.S0, False, 2)
    assert s0.contains(q)
    coords, residual = s0.coordinates(q)
    assert residual < 1e-12
    assert np.allclose(s0.field(coords).coeffs, q.coeffs)
    assert not build_space(split, Family.S0, True, 2).contains(q)
    with pytest.raises(ValueError):
        check_membership(q, build_space(split, Family.L1, False, 2))
    with pytest.raises(ValueError):
        check_membership(q, build_space(split, Family.L0, False, 1))


def test_nesting(split):
    assert nesting_residual(build_space(split, Family.S0, False, 3), build_space(split, Family.L0, False, 3)) < 1e-10
    assert nesting_residual(build_space(split, Family.S1, False, 2), build_space(split, Family.L1, False, 2)) < 1e-10
    assert nesting_residual(build_space(split, Family.L2, False, 1), build_space(split, Family.calV2, False, 1)) < 1e-10


@settings(max_examples=10, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(seed=st.integers(min_value=0, max_value=2**16))
def test_ring_members_vanish_on_the_boundary(split, seed):
    rng = np.random.default_rng(seed)
    z = build_space(split, Family.S0, True, 4).random_member(rng)
    for i in range(3):
        assert edge_trace(z, i).max_abs() < 1e-9 * max(z.coefficient_norm(), 1.0)
        assert edge_trace(z, i, Trace.normal_derivative).max_abs() < 1e-8 * max(z.coefficient_norm(), 1.0)
    v = rot_scalar(z)
    assert build_space(split, Family.S1, True, 3).contains(v)
    assert np.allclose(divergence(v).coeffs, 0.0, atol=1e-9)
