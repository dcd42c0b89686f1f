import numpy as np
import pytest

from psfeec.api.dofs import (
    build_dofs,
    c1_spline_basis,
    edge_c1_dofs,
    edge_unisolvence,
    local_project,
    min_degree,
    nedelec_interpolant,
    psi_polynomial,
    unisolvence_report,
)
from psfeec.api.fields import PolynomialScalar, VectorField, random_scalar, random_vector
from psfeec.api.mesh import random_triangle, powell_sabin_refine
from psfeec.api.poly import interpolate, integrate
from psfeec.api.spaces import build_space
from psfeec.enums import Chain, EdgeVariant, Family
from psfeec.exceptions import ClientError, InadmissibleDegreeError, UnisolvenceError

CUBIC = PolynomialScalar([[0.5, -1.0, 0.0, 1.0], [2.0, 1.0, -3.0, 0.0], [0.0, 1.5, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0]])


def test_counts(split):
    assert len(build_dofs(split, Family.S0, 2)) == 9
    assert len(build_dofs(split, Family.L1, 1)) == 14
    assert len(build_dofs(split, Family.V2, 0)) == 6
    assert len(build_dofs(split, Family.S1, 2)) == 27
    assert len(build_dofs(split, Family.L2, 1)) == 7
    assert len(build_dofs(split, Family.S1, 1)) == 9
    assert len(build_dofs(split, Family.L2, 0)) == 1
    assert build_dofs(split, Family.S0, 3) is build_dofs(split, Family.S0, 3)


def test_degree_errors(split):
    assert min_degree(Family.L2) == 0
    with pytest.raises(ClientError):
        min_degree(Family.V1)
    with pytest.raises(InadmissibleDegreeError):
        build_dofs(split, Family.S0, 1)
    with pytest.raises(UnisolvenceError):
        unisolvence_report(build_space(split, Family.S0, False, 3), build_dofs(split, Family.S0, 2))


@pytest.mark.parametrize(
    "family, degrees",
    [
        (Family.S0, range(2, 6)),
        (Family.L1, range(1, 5)),
        (Family.V2, range(0, 4)),
        (Family.S1, range(1, 5)),
        (Family.L2, range(0, 4)),
    ],
)
def test_unisolvence_reference(split, family, degrees):
    for r in degrees:
        dofs = build_dofs(split, family, r)
        report = unisolvence_report(dofs.space, dofs)
        assert report.passed
        assert report.size == report.dim == dofs.space.dim


def test_unisolvence_random_triangles(rng):
    for _ in range(3):
        split = powell_sabin_refine(random_triangle(rng))[0]
        for family, r in ((Family.S0, 3), (Family.L1, 2), (Family.S1, 2), (Family.V2, 1)):
            dofs = build_dofs(split, family, r)
            assert unisolvence_report(dofs.space, dofs).passed


def test_dual_basis(split):
    dofs = build_dofs(split, Family.L1, 2)
    dual = dofs.dual_basis()
    assert np.allclose(dofs.rows() @ dual, np.eye(len(dofs)), atol=1e-9)


def test_projection_reproduces_members(split):
    q = interpolate(split, 3, CUBIC)
    assert np.allclose(build_dofs(split, Family.S0, 3).project(CUBIC).coeffs, q.coeffs, atol=1e-9)
    v = VectorField(CUBIC.partial(1), CUBIC.partial(0).scale(-1.0))
    w = interpolate(split, 2, v)
    for family in (Family.L1, Family.S1):
        assert np.allclose(build_dofs(split, family, 2).project(v).coeffs, w.coeffs, atol=1e-9)


def test_projection_preserves_means(split, rng):
    f = random_scalar(rng)
    for chain in (Chain.Pi2, Chain.varpi2):
        p = local_project(chain, f, split, 3)
        reference = interpolate(split, 8, f)
        assert integrate(p) == pytest.approx(integrate(reference), abs=1e-4)


def test_rotated_interior_moments(split, rng):
    f = random_vector(rng)
    plain = build_dofs(split, Family.L1, 2).project(f)
    rotated = build_dofs(split, Family.L1, 2, np.random.default_rng(7)).project(f)
    assert np.allclose(plain.coeffs, rotated.coeffs, atol=1e-9)
    assert build_dofs(split, Family.L1, 2, np.random.default_rng(7)) is not build_dofs(split, Family.L1, 2)


def test_local_projection_is_idempotent(split, rng):
    f = random_scalar(rng)
    once = local_project(Chain.Pi0, f, split, 3)
    twice = local_project(Chain.Pi0, once, split, 3)
    assert (twice - once).coefficient_norm() < 1e-9 * max(once.coefficient_norm(), 1.0)


def test_psi_polynomial():
    for r in range(1, 9):
        psi = psi_polynomial(r)
        assert psi(0.0) == pytest.approx(1.0)
        assert abs(psi(1.0)) <= 1e-13
        assert psi.deriv()(0.0) != pytest.approx(0.0)
        nodes, weights = np.polynomial.legendre.leggauss(r + 2)
        t = 0.5 * (nodes + 1.0)
        for k in range(r - 1):
            assert 0.5 * weights @ (psi(t) * t ** k) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InadmissibleDegreeError):
        psi_polynomial(0)


@pytest.mark.parametrize("variant", [EdgeVariant.edge1, EdgeVariant.edge2])
def test_edge_unisolvence(variant):
    for r in range(1, 9):
        assert len(c1_spline_basis(r)) == 2 * r
        assert len(edge_c1_dofs(r, variant)) == 2 * r
        assert edge_unisolvence(r, variant).passed
        assert edge_unisolvence(r, variant, split=0.3).passed


def test_nedelec_interpolant(split):
    w = nedelec_interpolant(split, lambda i, points: points @ split.normals[i])
    points = np.array([[0.2, 0.3], [0.6, 0.1]])
    assert np.allclose(w.evaluate(points), points)
