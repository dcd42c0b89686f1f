import numpy as np
import pytest

from psfeec.api.config import Config
from psfeec.api.linalg import decide_rank, least_squares, nullspace, range_basis
from psfeec.exceptions import RankAmbiguityError


def test_decide_rank():
    decision = decide_rank(np.array([3.0, 1.0, 1e-14]))
    assert decision.rank == 2
    assert decision.gap == pytest.approx(1.0 / 3.0 / (1e-14 / 3.0))
    assert decide_rank(np.zeros(3)).rank == 0
    with pytest.raises(RankAmbiguityError):
        decide_rank(np.array([1.0, 1e-9]))


def test_decide_rank_tolerance(config: Config):
    config.tolerance.ambiguity = (1e-13, 1e-12)
    assert decide_rank(np.array([1.0, 1e-9])).rank == 1
    assert decide_rank(np.array([1.0, 1e-9]), tol=1e-10).rank == 2


def test_nullspace():
    matrix = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1000.0]])
    basis, decision = nullspace(matrix)
    assert decision.rank == 2
    assert basis.shape == (3, 1)
    assert np.allclose(matrix @ basis, 0.0)
    assert np.allclose(basis.T @ basis, np.eye(1))
    empty, decision = nullspace(np.zeros((0, 4)))
    assert empty.shape == (4, 4)
    assert decision.rank == 0


def test_range_basis_and_least_squares(rng):
    matrix = rng.normal(size=(6, 2)) @ rng.normal(size=(2, 4))
    basis, decision = range_basis(matrix)
    assert decision.rank == 2
    assert np.allclose(basis @ (basis.T @ matrix), matrix)
    rhs = matrix @ rng.normal(size=4)
    x, residual = least_squares(matrix, rhs)
    assert residual < 1e-12
    assert np.allclose(matrix @ x, rhs)
    _, residual = least_squares(matrix, rng.normal(size=6))
    assert residual > 1e-3
