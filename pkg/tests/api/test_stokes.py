import numpy as np
import pytest

from psfeec.api.fields import PolynomialScalar, VectorField
from psfeec.api.mesh import powell_sabin_refine, refine_uniform, unit_square
from psfeec.api.poly import divergence
from psfeec.api.stokes import (
    StokesProblem,
    boundary_flux,
    convergence_study,
    error_norms,
    infsup_estimate,
    infsup_sequence,
    manufactured_solution,
    pair_spaces,
    pressure_robustness,
    solve_stokes,
)
from psfeec.enums import GlobalSequence, PressureSpace
from psfeec.exceptions import ClientError, InadmissibleDegreeError

RADIAL = VectorField(PolynomialScalar([[0.0], [1.0]]), PolynomialScalar([[0.0, 1.0]]))


@pytest.fixture
def fine():
    return powell_sabin_refine(refine_uniform(unit_square(), 1))


def test_pair_spaces(square):
    velocity, pressure, active = pair_spaces(square, GlobalSequence.SLV, 2)
    assert (velocity.dim, pressure.dim) == (22, 11)
    assert active.sum() == (~pressure.boundary).sum()
    _, broken, active = pair_spaces(square, GlobalSequence.SLV, 2, PressureSpace.broken)
    assert broken.dim == 12 and active.all()
    velocity, pressure, _ = pair_spaces(square, GlobalSequence.SSL, 3)
    assert (velocity.dim, pressure.dim) == (42, 11)
    with pytest.raises(InadmissibleDegreeError):
        pair_spaces(square, GlobalSequence.SLV, 1)
    with pytest.raises(InadmissibleDegreeError):
        pair_spaces(square, GlobalSequence.SSL, 2)


def test_boundary_flux(square):
    flux, scale = boundary_flux(square, RADIAL)
    assert flux == pytest.approx(2.0)
    assert scale == pytest.approx(2.0)
    u, _, _ = manufactured_solution()
    assert boundary_flux(square, u)[0] == pytest.approx(0.0, abs=1e-14)


def test_solve_rejects_net_flux(square):
    with pytest.raises(ClientError):
        solve_stokes(StokesProblem(square, RADIAL, RADIAL))


def test_manufactured_solution():
    u, p, f = manufactured_solution(viscosity=2.0)
    points = np.array([[0.0, 0.3], [1.0, 0.7], [0.4, 0.0], [0.2, 1.0]])
    assert np.allclose(u.evaluate(points), 0.0)
    interior = np.array([[0.3, 0.6], [0.7, 0.2]])
    assert np.allclose(u.div().evaluate(interior), 0.0)
    expected = -2.0 * u.laplacian().evaluate(interior) + p.grad().evaluate(interior)
    assert np.allclose(f.evaluate(interior), expected)


@pytest.mark.parametrize("pair, r", [(GlobalSequence.SLV, 2), (GlobalSequence.SSL, 3)])
def test_discrete_velocity_is_divergence_free(fine, pair, r):
    u, p, f = manufactured_solution()
    solution = solve_stokes(StokesProblem(fine, f, u, pair, r))
    for t in range(len(fine)):
        v = solution.velocity.restrict(t)
        assert divergence(v).sup_norm() < 1e-9 * max(v.sup_norm(), 1.0)
    _, _, div, h1 = error_norms(solution, u, p)
    assert div < 1e-9 * max(h1, 1.0)


def test_pressure_robustness(fine):
    potential = PolynomialScalar([[0.0, 0.0, 5.0], [3.0, 0.0, 0.0]])
    change = pressure_robustness(fine, GlobalSequence.SLV, 2, potential)
    assert change < 1e-8


def test_infsup(fine):
    beta = infsup_estimate(fine, GlobalSequence.SLV, 2)
    assert beta > 1e-3
    broken = infsup_estimate(fine, GlobalSequence.SLV, 2, PressureSpace.broken)
    assert broken < 1e-4 * beta


def test_infsup_sequence():
    with pytest.raises(ClientError):
        infsup_sequence([unit_square()], GlobalSequence.SLV, 2)
    result = infsup_sequence([unit_square(), refine_uniform(unit_square(), 1)], GlobalSequence.SLV, 2)
    assert len(result.values) == 2
    assert result.stable
    assert result.ratio >= 1.0


def test_convergence_study():
    rows = convergence_study(unit_square(), GlobalSequence.SLV, 3, levels=2, with_infsup=False)
    assert [row.level for row in rows] == [0, 1, 2]
    assert rows[0].rate is None
    assert rows[2].velocity_error < rows[1].velocity_error < rows[0].velocity_error
    assert rows[2].h == pytest.approx(rows[1].h / 2)
    assert rows[2].rate > 1.0
    assert all(np.isnan(row.infsup) for row in rows)


@pytest.mark.parametrize(
    "pair, r, order, slack",
    [(GlobalSequence.SLV, 2, 2.0, 0.25), (GlobalSequence.SSL, 3, 3.0, 0.75)],
)
def test_lowest_degree_orders(config, pair, r, order, slack):
    rows = convergence_study(unit_square(), pair, r, levels=2)
    errors = [row.velocity_error for row in rows]
    assert errors == sorted(errors, reverse=True)
    assert abs(rows[-1].rate - order) <= slack
    for row in rows:
        assert row.div_max <= config.tolerance.residual * max(row.h1_norm, 1.0)
        assert 0.2 < row.infsup < 1.0
    values = [row.infsup for row in rows]
    assert max(values) / min(values) <= 5.0


@pytest.mark.parametrize("pair, r", [(GlobalSequence.SLV, 2), (GlobalSequence.SSL, 3)])
def test_infsup_bounded_across_refinements(pair, r):
    meshes = [unit_square(), refine_uniform(unit_square(), 1), refine_uniform(unit_square(), 2)]
    result = infsup_sequence(meshes, pair, r)
    assert result.stable
    assert result.ratio <= 5.0
    assert min(result.values) > 0.2
