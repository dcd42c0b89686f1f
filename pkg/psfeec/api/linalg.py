"""Rank decisions shared by the space, operator and DOF builders.

Every rank decision uses a relative singular value cutoff and refuses to
decide when a singular value lands in the ambiguity band.
"""
import logging
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy import linalg

from psfeec.api.config import Config
from psfeec.exceptions import RankAmbiguityError

__all__ = ["RankDecision", "decide_rank", "nullspace", "range_basis", "least_squares"]

logger = logging.getLogger(__name__)


class RankDecision(NamedTuple):
    """Outcome of a rank decision.

    Attributes:
        rank: Numerical rank.
        singular_values: All singular values, decreasing.
        gap: Ratio of the last kept to the first dropped singular value.
    """

    rank: int
    singular_values: np.ndarray
    gap: float


def decide_rank(
    singular_values: np.ndarray, what: str = "matrix", tol: Optional[float] = None
) -> RankDecision:
    """Count singular values above the relative cutoff.

    Args:
        singular_values: Decreasing singular values.
        what: Description used in the log and in errors.
        tol: Relative cutoff, the rank tolerance of the active config by default.

    Returns:
        The decision.

    Raises:
        RankAmbiguityError: When a relative singular value lies inside the
            configured ambiguity band.

    Examples:
        >>> decide_rank(np.array([2.0, 1.0, 1e-16])).rank
        2
        >>> decide_rank(np.array([])).rank
        0
    """
    config = Config.current().tolerance
    tol = config.rank if tol is None else tol
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or s[0] == 0.0:
        return RankDecision(0, s, float("inf"))
    relative = s / s[0]
    low, high = config.ambiguity
    suspicious = relative[(relative > low) & (relative < high)]
    if suspicious.size:
        raise RankAmbiguityError(
            "%s: relative singular value %.3e inside the ambiguity band (%.0e, %.0e)"
            % (what, suspicious[0], low, high)
        )
    rank = int(np.count_nonzero(relative > tol))
    kept = relative[rank - 1] if rank > 0 else 1.0
    dropped = relative[rank] if rank < relative.size else 0.0
    gap = float(kept / dropped) if dropped > 0 else float("inf")
    logger.debug("%s: rank %s of %s, singular value gap %.3e", what, rank, s.size, gap)
    return RankDecision(rank, s, gap)


def nullspace(
    matrix: np.ndarray, ncols: Optional[int] = None, what: str = "constraints"
) -> Tuple[np.ndarray, RankDecision]:
    """Orthonormal nullspace basis.

    Rows are normalised before the decomposition so that constraints of
    different physical scale are weighed equally.

    Args:
        matrix: Constraint matrix; may have zero rows.
        ncols: Number of columns when the matrix has no rows.
        what: Description used in the log and in errors.

    Returns:
        Basis with orthonormal columns and the rank decision.

    Examples:
        >>> basis, decision = nullspace(np.array([[1.0, -1.0]]))
        >>> (basis.shape, decision.rank)
        ((2, 1), 1)
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size == 0:
        n = matrix.shape[1] if matrix.ndim == 2 and matrix.shape[1] else (ncols or 0)
        return np.eye(n), RankDecision(0, np.zeros(0), float("inf"))
    norms = np.linalg.norm(matrix, axis=1)
    matrix = matrix[norms > 0] / norms[norms > 0, None]
    if matrix.shape[0] == 0:
        return np.eye(matrix.shape[1]), RankDecision(0, np.zeros(0), float("inf"))
    _, s, vh = linalg.svd(matrix, full_matrices=True)
    decision = decide_rank(s, what)
    return vh[decision.rank :].T.copy(), decision


def range_basis(matrix: np.ndarray, what: str = "range") -> Tuple[np.ndarray, RankDecision]:
    """Orthonormal basis of the column space."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size == 0:
        return np.zeros((matrix.shape[0], 0)), RankDecision(0, np.zeros(0), float("inf"))
    u, s, _ = linalg.svd(matrix, full_matrices=False)
    decision = decide_rank(s, what)
    return u[:, : decision.rank].copy(), decision


def least_squares(matrix: np.ndarray, rhs: np.ndarray) -> Tuple[np.ndarray, float]:
    """Minimal norm least squares solution and its relative residual.

    Examples:
        >>> x, residual = least_squares(np.eye(2), np.array([1.0, 2.0]))
        >>> (x.tolist(), residual)
        ([1.0, 2.0], 0.0)
    """
    matrix = np.asarray(matrix, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if matrix.size == 0:
        shape = (matrix.shape[1],) + rhs.shape[1:]
        return np.zeros(shape), float(np.linalg.norm(rhs) > 0)
    solution, *_ = linalg.lstsq(matrix, rhs, cond=Config.current().tolerance.rank)
    scale = max(float(np.linalg.norm(rhs)), 1e-300)
    residual = float(np.linalg.norm(matrix @ solution - rhs)) / scale
    if not np.linalg.norm(rhs):
        residual = 0.0
    return solution, residual
