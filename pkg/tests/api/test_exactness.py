import numpy as np
import pytest

from psfeec.api.exactness import (
    commuting_residuals,
    div_preimage_algebraic,
    div_preimage_constructive,
    div_preimage_free,
    idempotency_defect,
    operator_matrix,
    rank_nullity_check,
    rot_preimage,
    verify_sequence,
)
from psfeec.api.fields import random_scalar, random_vector
from psfeec.api.mesh import powell_sabin_refine, random_triangle
from psfeec.api.poly import divergence, rot_scalar
from psfeec.api.spaces import build_space
from psfeec.enums import Chain, Diagram, Family, LocalSequence, Operator
from psfeec.exceptions import ClientError, ImageContainmentError


@pytest.mark.parametrize(
    "sequence, degrees",
    [
        (LocalSequence.lvv, range(2, 5)),
        (LocalSequence.slv, range(2, 5)),
        (LocalSequence.ssl, range(2, 6)),
        (LocalSequence.ring_lvv, range(2, 5)),
        (LocalSequence.ring_slv, range(2, 5)),
        (LocalSequence.ring_ssl, range(3, 6)),
    ],
)
def test_sequences_are_exact(split, sequence, degrees):
    for r in degrees:
        check = verify_sequence(split, sequence, r)
        assert check.exact, check
        assert check.composition < 1e-9


def test_lowest_smooth_sequence(split):
    check = verify_sequence(split, LocalSequence.ssl, 2)
    assert check.exact
    assert check.dims == (9, 9, 1)


def test_ring_slv_into_v2_misses_three(split):
    for r in range(2, 5):
        check = verify_sequence(split, LocalSequence.ring_slv_v2, r)
        assert check.rot_exact and check.middle_exact
        assert check.deficit == 3
        assert not check.exact


def test_rank_nullity(split):
    for r in range(2, 6):
        assert rank_nullity_check(split, r, 0).holds
    for r in range(1, 5):
        assert rank_nullity_check(split, r, 1).holds
    with pytest.raises(ClientError):
        rank_nullity_check(split, 3, 2)


def test_operator_matrix_containment(split):
    rot = operator_matrix(Operator.rot, build_space(split, Family.S0, False, 3), build_space(split, Family.S1, False, 2))
    assert rot.nullity == 1
    assert rot.matrix.shape == (rot.target.dim, rot.source.dim)
    with pytest.raises(ImageContainmentError) as error:
        operator_matrix(Operator.div, build_space(split, Family.V1, False, 1), build_space(split, Family.L2, False, 0))
    assert error.value.residual > 0


@pytest.mark.parametrize("r", [0, 1, 2])
def test_constructive_preimage(split, rng, r):
    p = build_space(split, Family.calV2, True, r).random_member(rng)
    result = div_preimage_constructive(p)
    v = result.field
    assert v.degree == r + 1
    assert result.residual < 1e-8
    assert result.boundary_trace < 1e-8
    assert len(result.steps) == r + 1
    assert build_space(split, Family.L1, True, r + 1).contains(v)
    algebraic = div_preimage_algebraic(p, build_space(split, Family.L1, True, r + 1))
    assert (divergence(algebraic.field) - divergence(v)).sup_norm() < 1e-8 * max(p.sup_norm(), 1.0)


def test_constructive_preimage_random_triangle(rng):
    split = powell_sabin_refine(random_triangle(rng))[0]
    p = build_space(split, Family.calV2, True, 2).random_member(rng)
    assert div_preimage_constructive(p).residual < 1e-8


def test_preimage_rejects_non_members(split, rng):
    p = build_space(split, Family.V2, False, 1).random_member(rng)
    with pytest.raises(ClientError):
        div_preimage_constructive(p)
    with pytest.raises(ClientError):
        div_preimage_algebraic(p, build_space(split, Family.L1, True, 2))


def test_preimage_without_boundary_conditions(split, rng):
    p = build_space(split, Family.V2, False, 1).random_member(rng)
    result = div_preimage_free(p)
    assert result.residual < 1e-8
    assert build_space(split, Family.L1, False, 2).contains(result.field)


def test_rot_preimage(split, rng):
    z = build_space(split, Family.S0, True, 4).random_member(rng)
    result = rot_preimage(rot_scalar(z))
    assert result.member
    assert (result.field - z).coefficient_norm() < 1e-8 * z.coefficient_norm()
    free = build_space(split, Family.S0, False, 3).random_member(rng)
    assert rot_preimage(rot_scalar(free), ring=False).member


MIDDLE_CHAIN = {Diagram.lagrange: Chain.Pi1, Diagram.smooth: Chain.varpi1}


@pytest.mark.parametrize("r", [2, 3, 4])
@pytest.mark.parametrize("diagram", [Diagram.lagrange, Diagram.smooth])
def test_commuting_residuals(config, split, diagram, r):
    batch = np.random.default_rng(100 + r)
    for _ in range(50):
        vector = random_vector(batch)
        residual = commuting_residuals(split, diagram, r, random_scalar(batch), vector)
        assert residual.rot < config.tolerance.commute
        assert residual.div < config.tolerance.commute
        assert idempotency_defect(MIDDLE_CHAIN[diagram], vector, split, r) < config.tolerance.idempotent


def test_idempotency(split, rng):
    for chain in Chain:
        f = random_vector(rng) if chain.family.ncomp == 2 else random_scalar(rng)
        assert idempotency_defect(chain, f, split, 3) < 1e-9
