import numpy as np
import pytest

from psfeec.api.assembly import (
    assemble_global,
    conformity_defect,
    global_dimension_formula,
    global_operator,
    global_project,
    theta_z,
    verify_global_exactness,
)
from psfeec.api.fields import PolynomialScalar, random_scalar
from psfeec.api.mesh import pentagon, perturbed_square, powell_sabin_refine
from psfeec.api.poly import rot_scalar
from psfeec.enums import Chain, Family, GlobalSequence, Operator
from psfeec.exceptions import ClientError, InadmissibleDegreeError


def test_unit_square_dimensions(square):
    dims = [assemble_global(square, f, r).dim for f, r in ((Family.S0, 2), (Family.L1, 1), (Family.calV2, 0))]
    assert dims == [12, 22, 11]
    assert assemble_global(square, Family.V2, 0).dim == 12
    assert assemble_global(square, Family.S0, 2) is assemble_global(square, Family.S0, 2)


@pytest.mark.parametrize("mesh", [pentagon(), perturbed_square()])
def test_dimensions_match_closed_forms(mesh):
    sc = powell_sabin_refine(mesh)
    for family, r in ((Family.S0, 3), (Family.L1, 2), (Family.calV2, 1), (Family.S1, 2), (Family.L2, 1)):
        assert assemble_global(sc, family, r).dim == global_dimension_formula(family, sc, r)


def test_assembly_errors(square):
    with pytest.raises(ClientError):
        assemble_global(square, Family.V1, 1)
    with pytest.raises(InadmissibleDegreeError):
        assemble_global(square, Family.S0, 1)
    with pytest.raises(ValueError):
        assemble_global(square, Family.S0, 2).field(np.zeros(3))
    assert global_dimension_formula(Family.S1, square, 1) is None


def test_boundary_flags(square):
    space = assemble_global(square, Family.S0, 2)
    # only vertex DOFs at r = 2
    assert space.boundary.all()
    assert space.dirichlet.all()
    assert (space.dirichlet <= space.boundary).all()


def test_global_exactness(square):
    slv = verify_global_exactness(square, 2, GlobalSequence.SLV)
    assert slv.exact and slv.dims_match
    assert slv.dims == (12, 22, 11)
    assert slv.containment < 1e-9
    ssl = verify_global_exactness(square, 3, GlobalSequence.SSL)
    assert ssl.exact and ssl.dims_match
    assert ssl.dims == (32, 42, 11)


def test_global_exactness_pentagon():
    sc = powell_sabin_refine(pentagon())
    assert verify_global_exactness(sc, 2, GlobalSequence.SLV).exact
    assert verify_global_exactness(sc, 3, GlobalSequence.SSL).exact


@pytest.mark.parametrize(
    "family, r", [(Family.S0, 3), (Family.L1, 2), (Family.calV2, 1), (Family.S1, 2), (Family.L2, 1)]
)
def test_conformity(family, r):
    sc = powell_sabin_refine(perturbed_square())
    assert conformity_defect(assemble_global(sc, family, r), np.random.default_rng(3)) < 1e-9


def test_theta_z(square, rng):
    u = assemble_global(square, Family.calV2, 1).random_member(rng)
    assert abs(theta_z(u, square, 1)) < 1e-9 * np.abs(u.coeffs).max()
    broken = assemble_global(square, Family.V2, 1).random_member(rng)
    assert abs(theta_z(broken, square, 1)) > 1e-6
    with pytest.raises(ClientError):
        theta_z(u, square, 0)


def test_global_projection(square, rng):
    quadratic = PolynomialScalar([[1.0, 0.5, -1.0], [2.0, 0.0, 0.0], [0.3, 0.0, 0.0]])
    projected = global_project(Chain.Pi0, quadratic, square, 2)
    for macro in range(len(square)):
        centroid = square[macro].vertices.mean(axis=0)[None, :]
        assert np.allclose(projected.evaluate(centroid, macro), quadratic.evaluate(centroid))
    f = random_scalar(rng)
    z = global_project(Chain.Pi0, f, square, 3)
    v = global_project(Chain.Pi1, f.rot(), square, 3)
    for macro in range(len(square)):
        difference = rot_scalar(z.restrict(macro)) - v.restrict(macro)
        assert difference.sup_norm() < 1e-8 * max(v.restrict(macro).sup_norm(), 1.0)


def test_global_operator(square):
    source = assemble_global(square, Family.S0, 2)
    target = assemble_global(square, Family.L1, 1)
    matrix, residual = global_operator(Operator.rot, source, target)
    assert matrix.shape == (22, 12)
    assert residual < 1e-9
