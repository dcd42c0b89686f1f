"""Local exactness: operator matrices, sequence audits and preimages.

The divergence preimage is available twice. The constructive backend
peels off one power of the bubble ``mu`` per step::

    mu**s q = div(mu**(s+1) w) + mu**(s+1) Q

until a piecewise constant remains, which is matched by a constant
vector field. The algebraic backend solves with the operator matrix and
serves as its oracle.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from psfeec.api.bernstein import domain_points, elevation_matrix, index_map, multi_indices
from psfeec.api.config import Config
from psfeec.api.dofs import local_project, nedelec_interpolant
from psfeec.api.fields import PolynomialScalar, VectorField
from psfeec.api.linalg import RankDecision, decide_rank, least_squares
from psfeec.api.mesh import MacroSplit
from psfeec.api.poly import (
    NCELLS,
    PiecewisePolynomial,
    div_matrix,
    divergence,
    factor_out_mu,
    integrate,
    interpolate,
    jump,
    mu_power,
    rot_matrix,
    rot_scalar,
)
from psfeec.api.spaces import FESpace, build_space, check_membership
from psfeec.enums import Chain, Diagram, Family, LocalSequence, Operator
from psfeec.exceptions import ClientError, ImageContainmentError, ResidualError

__all__ = [
    "OperatorMatrix",
    "operator_matrix",
    "sequence_spaces",
    "SequenceCheck",
    "verify_sequence",
    "RankNullity",
    "rank_nullity_check",
    "PreimageStep",
    "Preimage",
    "div_preimage_constructive",
    "div_preimage_algebraic",
    "div_preimage_free",
    "RotPreimage",
    "rot_preimage",
    "CommuteResidual",
    "commuting_residuals",
    "idempotency_defect",
]

logger = logging.getLogger(__name__)


class OperatorMatrix:
    """Matrix of rot or div between two local spaces.

    Args:
        operator: The differential operator.
        source: Source space.
        target: Target space.
        matrix: Coordinates of the images of the source basis, shape
            (target.dim, source.dim).
        decision: Rank decision of the matrix.
        residual: Largest relative residual of the coordinate fit.
    """

    def __init__(
        self,
        operator: Operator,
        source: FESpace,
        target: FESpace,
        matrix: np.ndarray,
        decision: RankDecision,
        residual: float,
    ) -> None:
        self.operator = operator
        self.source = source
        self.target = target
        self.matrix = matrix
        self.decision = decision
        self.residual = residual

    def __repr__(self) -> str:
        return "OperatorMatrix(%s: %r -> %r, rank=%s)" % (
            self.operator.value,
            self.source,
            self.target,
            self.rank,
        )

    @property
    def rank(self) -> int:
        """int: Numerical rank."""
        return self.decision.rank

    @property
    def nullity(self) -> int:
        """int: Dimension of the kernel."""
        return self.source.dim - self.rank

    @property
    def deficit(self) -> int:
        """int: Codimension of the image in the target."""
        return self.target.dim - self.rank


def _image_coefficients(operator: Operator, source: FESpace, degree: int) -> np.ndarray:
    split = source.split
    if operator == Operator.rot:
        if source.ncomp != 1:
            raise ValueError("rot acts on scalar spaces, got %r" % source)
        matrix, ncomp = rot_matrix(split, source.degree), 2
    else:
        if source.ncomp != 2:
            raise ValueError("div acts on vector spaces, got %r" % source)
        matrix, ncomp = div_matrix(split, source.degree), 1
    image = matrix @ source.basis
    lower = max(source.degree - 1, 0)
    if degree < lower:
        raise ValueError("target degree %s is below the image degree %s" % (degree, lower))
    if degree > lower:
        elevation = elevation_matrix(lower, degree - lower)
        blocks = image.reshape(NCELLS * ncomp, -1, image.shape[1])
        image = np.einsum("ij,bjk->bik", elevation, blocks).reshape(-1, image.shape[1])
    return image


def operator_matrix(operator: Operator, source: FESpace, target: FESpace) -> OperatorMatrix:
    """Represent rot or div in the bases of two local spaces.

    Args:
        operator: ``rot`` or ``div``.
        source: Source space.
        target: Target space of degree at least ``source.degree - 1``.

    Returns:
        The operator matrix with its rank decision.

    Raises:
        ImageContainmentError: When the image of a basis column is not in
            the target.

    Examples:
        >>> from psfeec.api.mesh import powell_sabin_refine, reference_triangle
        >>> split = powell_sabin_refine(reference_triangle())[0]
        >>> src = build_space(split, Family.L1, True, 1)
        >>> dst = build_space(split, Family.calV2, True, 0)
        >>> operator_matrix(Operator.div, src, dst).rank
        2
    """
    image = _image_coefficients(operator, source, target.degree)
    coords = target.basis.T @ image
    misfit = np.linalg.norm(image - target.basis @ coords, axis=0)
    scale = max(float(np.max(np.linalg.norm(image, axis=0), initial=0.0)), 1e-300)
    relative = misfit / scale
    residual = float(np.max(relative, initial=0.0))
    if residual > Config.current().tolerance.membership:
        column = int(np.argmax(relative))
        raise ImageContainmentError(
            "%s of %r is not contained in %r" % (operator.value, source, target),
            column=column,
            residual=float(relative[column]),
        )
    what = "%s: %s r=%s -> %s r=%s" % (
        operator.value,
        source.tag,
        source.degree,
        target.tag,
        target.degree,
    )
    if coords.size:
        singular_values = np.linalg.svd(coords, compute_uv=False)
    else:
        singular_values = np.zeros(0)
    decision = decide_rank(singular_values, what)
    return OperatorMatrix(operator, source, target, coords, decision, residual)


_SEQUENCES = {
    LocalSequence.lvv: ((Family.L0, Family.V1, Family.V2), False),
    LocalSequence.slv: ((Family.S0, Family.L1, Family.V2), False),
    LocalSequence.ssl: ((Family.S0, Family.S1, Family.L2), False),
    LocalSequence.ring_lvv: ((Family.L0, Family.V1, Family.V2), True),
    LocalSequence.ring_slv: ((Family.S0, Family.L1, Family.calV2), True),
    LocalSequence.ring_ssl: ((Family.S0, Family.S1, Family.L2), True),
    LocalSequence.ring_slv_v2: ((Family.S0, Family.L1, Family.V2), True),
}


def sequence_spaces(
    split: MacroSplit, sequence: LocalSequence, r: int
) -> Tuple[FESpace, FESpace, FESpace]:
    """The three spaces of a local sequence at degrees r, r - 1, r - 2."""
    families, ring = _SEQUENCES[sequence]
    return tuple(  # type: ignore
        build_space(split, family, ring, r - k) for k, family in enumerate(families)
    )


class SequenceCheck(NamedTuple):
    """Ranks and verdicts of one local sequence."""

    sequence: str
    r: int
    dims: Tuple[int, int, int]
    rot_rank: int
    div_rank: int
    rot_kernel: int
    expected_rot_kernel: int
    composition: float
    deficit: int
    rot_exact: bool
    middle_exact: bool
    surjective: bool

    @property
    def exact(self) -> bool:
        """bool: Whether every link is exact."""
        return self.rot_exact and self.middle_exact and self.surjective


def verify_sequence(split: MacroSplit, sequence: LocalSequence, r: int) -> SequenceCheck:
    """Audit a local sequence with computed ranks.

    Args:
        split: Macro-triangle.
        sequence: Which sequence.
        r: Degree of the first space, at least 2.

    Returns:
        The ranks and per-link verdicts; failures are not raised.

    Examples:
        >>> from psfeec.api.mesh import powell_sabin_refine, reference_triangle
        >>> split = powell_sabin_refine(reference_triangle())[0]
        >>> verify_sequence(split, LocalSequence.ssl, 3).exact
        True
        >>> verify_sequence(split, LocalSequence.ring_slv_v2, 3).deficit
        3
    """
    first, middle, last = sequence_spaces(split, sequence, r)
    rot = operator_matrix(Operator.rot, first, middle)
    div = operator_matrix(Operator.div, middle, last)
    expected = 0 if first.ring else 1
    composed = div.matrix @ rot.matrix
    scale = max(float(np.abs(div.matrix).max(initial=0.0) * np.abs(rot.matrix).max(initial=0.0)), 1e-300)
    composition = float(np.abs(composed).max(initial=0.0)) / scale
    check = SequenceCheck(
        sequence=sequence.value,
        r=r,
        dims=(first.dim, middle.dim, last.dim),
        rot_rank=rot.rank,
        div_rank=div.rank,
        rot_kernel=rot.nullity,
        expected_rot_kernel=expected,
        composition=composition,
        deficit=div.deficit,
        rot_exact=rot.nullity == expected,
        middle_exact=div.nullity == rot.rank and composition <= Config.current().tolerance.residual,
        surjective=div.deficit == 0,
    )
    if not check.exact:
        logger.warning("%s r=%s is not exact: %s", sequence.value, r, check)
    return check


class RankNullity(NamedTuple):
    """Both sides of the dimension identity for a smooth space."""

    r: int
    k: int
    lhs: int
    rhs: int

    @property
    def holds(self) -> bool:
        """bool: Whether both sides agree."""
        return self.lhs == self.rhs


def rank_nullity_check(split: MacroSplit, r: int, k: int) -> RankNullity:
    """Compare ``dim S^k_r`` with ``dim L^{k+1}_{r-1} + dim L^k_r - dim V^{k+1}_{r-1}``.

    Examples:
        >>> from psfeec.api.mesh import powell_sabin_refine, reference_triangle
        >>> split = powell_sabin_refine(reference_triangle())[0]
        >>> rank_nullity_check(split, 3, 0).holds
        True
    """
    if k not in (0, 1):
        raise ClientError("k must be 0 or 1, got %s" % k)
    smooth = (Family.S0, Family.S1)[k]
    lower = (Family.L1, Family.L2)[k]
    same = (Family.L0, Family.L1)[k]
    broken = (Family.V1, Family.V2)[k]
    lhs = build_space(split, smooth, False, r).dim
    rhs = (
        build_space(split, lower, False, r - 1).dim
        + build_space(split, same, False, r).dim
        - build_space(split, broken, False, r - 1).dim
    )
    return RankNullity(r, k, lhs, rhs)


# --- divergence preimages --------------------------------------------------


@dataclass
class PreimageStep:
    """One peeling step of the constructive preimage.

    Attributes:
        step: Step number j.
        power: Power s of the bubble in front of the input.
        degree: Degree of the input.
        residual: Relative residual of the step identity.
        parts: Intermediate objects keyed by name.
    """

    step: int
    power: int
    degree: int
    residual: float
    parts: Dict[str, Any] = field(default_factory=dict)


class Preimage(NamedTuple):
    """Divergence preimage and its audit trail."""

    field: PiecewisePolynomial
    residual: float
    boundary_trace: float
    steps: List[PreimageStep]


def _edge_linear(q: PiecewisePolynomial, i: int) -> Tuple[float, float]:
    split = q.split
    start, end = split.edge_endpoints(i)
    first = float(q.evaluate(start, 2 * i)[0])
    last = float(q.evaluate(end, 2 * i + 1)[0])
    return first, last


def _linear_on_edge(split: MacroSplit, i: int, values: Tuple[float, float], points: np.ndarray) -> np.ndarray:
    start, _ = split.edge_endpoints(i)
    t = (np.atleast_2d(points) - start[None, :]) @ split.tangents[i] / split.edge_lengths[i]
    return values[0] + (values[1] - values[0]) * t


def _hat(split: MacroSplit, i: int) -> PiecewisePolynomial:
    """Piecewise linear hat function of the split point m_i."""
    coeffs = np.zeros((NCELLS, 1, 3))
    positions = index_map(1)
    coeffs[2 * i, 0, positions[(0, 0, 1)]] = 1.0
    coeffs[2 * i + 1, 0, positions[(0, 1, 0)]] = 1.0
    return PiecewisePolynomial(split, 1, coeffs)


def _jump_correction(theta: PiecewisePolynomial) -> Tuple[PiecewisePolynomial, PiecewisePolynomial, np.ndarray]:
    """Tangential field psi with zero normal bubble derivative and ``[div psi](m_i) = [theta](m_i)``."""
    split = theta.split
    weights = np.zeros(3)
    coeffs = np.zeros((NCELLS, 2, 3))
    for i in range(3):
        d1, d2 = split.half_length(2 * i), split.half_length(2 * i + 1)
        weights[i] = jump(theta, i) / (1.0 / d1 + 1.0 / d2)
        hat = _hat(split, i).coeffs[:, 0, :]
        coeffs += weights[i] * hat[:, None, :] * split.tangents[i][None, :, None]
    psi = PiecewisePolynomial(split, 1, coeffs)
    return psi, theta - divergence(psi), weights


def _bubble_gradient_dot(split: MacroSplit, w: PiecewisePolynomial) -> PiecewisePolynomial:
    coeffs = np.einsum("cd,cdn->cn", split.bary_grads[:, 0, :], w.coeffs)[:, None, :]
    return PiecewisePolynomial(split, w.degree, coeffs)


def _peel(q: PiecewisePolynomial, s: int) -> Tuple[PiecewisePolynomial, PiecewisePolynomial, Dict[str, Any]]:
    """Split ``mu**s q`` into ``div(mu**(s+1) w) + mu**(s+1) g`` with continuous w."""
    split = q.split
    n = q.degree
    endpoints = np.array([_edge_linear(q, i) for i in range(3)])

    def normal_data(i: int, points: np.ndarray) -> np.ndarray:
        values = _linear_on_edge(split, i, tuple(endpoints[i]), points)
        return -values / ((s + 1) * np.linalg.norm(split.grad_mu[i]))

    w1 = nedelec_interpolant(split, normal_data)
    boundary = multi_indices(n)[:, 0] == 0
    a = np.zeros((NCELLS, 1, len(boundary)))
    w2 = np.zeros((NCELLS, 2, len(boundary)))
    for i in range(3):
        ell = split.grad_mu[i] / float(split.grad_mu[i] @ split.grad_mu[i])
        for c in (2 * i, 2 * i + 1):
            points = domain_points(n)[boundary] @ split.cell_vertices[c]
            a[c, 0, boundary] = q.coeffs[c, 0, boundary] - _linear_on_edge(split, i, tuple(endpoints[i]), points)
            w2[c] = np.outer(ell, a[c, 0]) / (s + 1)
    w2_field = PiecewisePolynomial(split, n, w2)
    w = w1 + w2_field
    h = _bubble_gradient_dot(split, w) * float(s + 1) - q
    scale = max(q.coefficient_norm(), w.coefficient_norm(), 1e-300)
    trace = float(np.max(np.abs(h.coeffs[:, :, multi_indices(h.degree)[:, 0] == 0]), initial=0.0))
    if trace > Config.current().tolerance.residual * scale:
        raise ResidualError(
            "bubble gradient of w does not match the edge data (relative %.3e)" % (trace / scale),
            residuals=(trace / scale,),
        )
    v = factor_out_mu(h, tol=float("inf"))
    g = -(divergence(w) + v)
    parts = {
        "q": q,
        "b": endpoints,
        "a": PiecewisePolynomial(split, n, a),
        "w1": w1,
        "w2": w2_field,
        "w": w,
        "h": h,
        "g": g,
    }
    return w, g, parts


def _relative(difference: PiecewisePolynomial, reference: PiecewisePolynomial) -> float:
    scale = reference.coefficient_norm()
    if scale == 0.0:
        return difference.coefficient_norm()
    return difference.coefficient_norm() / scale


def _constant_vector(split: MacroSplit, value: np.ndarray) -> PiecewisePolynomial:
    coeffs = np.zeros((NCELLS, 2, 1))
    coeffs[:, :, 0] = value
    return PiecewisePolynomial(split, 0, coeffs)


def div_preimage_constructive(p: PiecewisePolynomial) -> Preimage:
    """Constructive divergence preimage with zero boundary trace.

    Args:
        p: Member of ring-calV2 of degree r.

    Returns:
        v in ring-L1 of degree r + 1 with ``div v = p`` and the step trace.

    Raises:
        ClientError: When p is not a member of ring-calV2.
        ResidualError: When a step or the final check fails.

    Examples:
        >>> from psfeec.api.mesh import powell_sabin_refine, reference_triangle
        >>> split = powell_sabin_refine(reference_triangle())[0]
        >>> zero = PiecewisePolynomial.zeros(split, 1)
        >>> div_preimage_constructive(zero).field.coefficient_norm()
        0.0
    """
    split = p.split
    r = p.degree
    tolerance = Config.current().tolerance
    space = build_space(split, Family.calV2, True, r)
    membership = check_membership(p, space)
    if not membership.member:
        raise ClientError("input is not in ring-calV2 r=%s (residual %.3e)" % (r, membership.residual))
    steps: List[PreimageStep] = []
    total = PiecewisePolynomial.zeros(split, r + 1, 2)
    q = p
    for j in range(r):
        w, g, parts = _peel(q, j)
        psi, gamma, weights = _jump_correction(g)
        parts.update({"psi": psi, "gamma": gamma, "jump_weights": weights})
        w = w + psi
        lhs = mu_power(q, j)
        rhs = divergence(mu_power(w, j + 1)) + mu_power(gamma, j + 1)
        residual = _relative(lhs - rhs, lhs)
        steps.append(PreimageStep(j, j, q.degree, residual, parts))
        logger.debug("preimage step %s: degree %s, residual %.3e", j, q.degree, residual)
        if residual > tolerance.residual:
            raise ResidualError(
                "preimage step %s failed (residual %.3e)" % (j, residual),
                residuals=[step.residual for step in steps],
            )
        total = total + mu_power(w, j + 1)
        q = gamma
    values = np.array([q.coeffs[2 * i, 0, 0] for i in range(3)])
    matrix = (r + 1) * split.grad_mu
    w0, base_residual = least_squares(matrix, values)
    steps.append(PreimageStep(r, r, 0, base_residual, {"q": q, "w0": w0}))
    if base_residual > tolerance.preimage:
        raise ResidualError(
            "constant base case failed (residual %.3e)" % base_residual,
            residuals=[step.residual for step in steps],
        )
    total = total + mu_power(_constant_vector(split, w0), r + 1)
    return _finish(p, total, steps)


def _finish(p: PiecewisePolynomial, v: PiecewisePolynomial, steps: List[PreimageStep]) -> Preimage:
    split = p.split
    difference = divergence(v) - p
    scale = max(p.sup_norm(), 1e-300)
    residual = difference.sup_norm() / scale if p.sup_norm() else difference.sup_norm()
    boundary = multi_indices(v.degree)[:, 0] == 0
    trace = float(np.max(np.abs(v.coeffs[:, :, boundary]), initial=0.0))
    trace /= max(v.coefficient_norm(), 1.0)
    logger.debug("divergence preimage on macro %s: residual %.3e, trace %.3e", split.index, residual, trace)
    if residual > Config.current().tolerance.preimage:
        raise ResidualError(
            "divergence preimage misses its target (residual %.3e)" % residual,
            residuals=[step.residual for step in steps] + [residual],
        )
    return Preimage(v, residual, trace, steps)


def div_preimage_algebraic(
    p: PiecewisePolynomial, source: FESpace, target: Optional[FESpace] = None
) -> Preimage:
    """Minimal norm preimage through the operator matrix.

    Args:
        p: Field in the target space.
        source: Space to search the preimage in.
        target: Space holding p, ring-calV2 of the degree of p for ring
            sources and V2 otherwise by default.

    Returns:
        The preimage; the step trace is empty.

    Raises:
        ClientError: When p is not a member of the target.
        ResidualError: When p is outside the range of div.
    """
    if target is None:
        family = Family.calV2 if source.ring else Family.V2
        target = build_space(p.split, family, source.ring, p.degree)
    membership = check_membership(p, target)
    if not membership.member:
        raise ClientError("input is not in %r (residual %.3e)" % (target, membership.residual))
    operator = operator_matrix(Operator.div, source, target)
    coords, residual = least_squares(operator.matrix, membership.coordinates)
    if residual > Config.current().tolerance.residual:
        raise ResidualError(
            "input is outside the range of div (residual %.3e)" % residual, residuals=(residual,)
        )
    v = source.field(coords)
    boundary = multi_indices(v.degree)[:, 0] == 0
    trace = float(np.max(np.abs(v.coeffs[:, :, boundary]), initial=0.0)) / max(v.coefficient_norm(), 1.0)
    return Preimage(v, residual, trace, [])


def div_preimage_free(p: PiecewisePolynomial) -> Preimage:
    """Constructive divergence preimage without boundary conditions.

    The jumps at the split points are matched by tangential hat fields and
    the mean by a multiple of ``(x - z0) / 2``; the remainder lies in
    ring-calV2 and goes through :func:`div_preimage_constructive`.

    Args:
        p: Member of V2 of degree r.

    Returns:
        v in L1 of degree r + 1 with ``div v = p``.
    """
    split = p.split
    membership = check_membership(p, build_space(split, Family.V2, False, p.degree))
    if not membership.member:
        raise ClientError("input is not in V2 r=%s (residual %.3e)" % (p.degree, membership.residual))
    psi, theta, weights = _jump_correction(p)
    mean = float(integrate(theta)) / split.area
    x0, y0 = split.z0
    radial = interpolate(
        split,
        1,
        VectorField(
            PolynomialScalar([[-0.5 * x0], [0.5]]), PolynomialScalar([[-0.5 * y0, 0.5]])
        ),
    )
    remainder = theta - _constant(split, mean)
    inner = div_preimage_constructive(remainder)
    v = psi + radial * mean + inner.field
    steps = [PreimageStep(-1, 0, p.degree, 0.0, {"psi": psi, "jump_weights": weights, "mean": mean})]
    return _finish(p, v, steps + inner.steps)


def _constant(split: MacroSplit, value: float) -> PiecewisePolynomial:
    coeffs = np.full((NCELLS, 1, 1), value)
    return PiecewisePolynomial(split, 0, coeffs)


class RotPreimage(NamedTuple):
    """Rot preimage of a divergence-free field."""

    field: PiecewisePolynomial
    residual: float
    membership: float
    member: bool


def rot_preimage(v: PiecewisePolynomial, ring: bool = True) -> RotPreimage:
    """Scalar z of degree r + 1 with ``rot z = v`` for divergence-free v.

    The preimage is sought among continuous piecewise polynomials and then
    tested for membership in the C1 space.

    Args:
        v: Divergence-free vector field of degree r.
        ring: Whether z must vanish with its gradient on the boundary.

    Returns:
        The preimage with its fit residual and membership verdict.

    Raises:
        ResidualError: When v is not in the range of rot.
    """
    split = v.split
    r = v.degree
    continuous = build_space(split, Family.L0, ring, r + 1)
    matrix = rot_matrix(split, r + 1) @ continuous.basis
    coords, residual = least_squares(matrix, v.vector)
    if residual > Config.current().tolerance.preimage:
        raise ResidualError(
            "field is not the rot of a continuous scalar (residual %.3e)" % residual,
            residuals=(residual,),
        )
    z = continuous.field(coords)
    membership = check_membership(z, build_space(split, Family.S0, ring, r + 1))
    return RotPreimage(z, residual, membership.residual, membership.member)


# --- commuting diagrams ----------------------------------------------------


class CommuteResidual(NamedTuple):
    """Defects of the two squares of a commuting diagram."""

    rot: float
    div: float


_DIAGRAM_CHAINS = {
    Diagram.lagrange: (Chain.Pi0, Chain.Pi1, Chain.Pi2),
    Diagram.smooth: (Chain.Pi0, Chain.varpi1, Chain.varpi2),
}


def _sup_relative(difference: PiecewisePolynomial, reference: PiecewisePolynomial) -> float:
    return difference.sup_norm() / max(reference.sup_norm(), 1.0)


def commuting_residuals(
    split: MacroSplit, diagram: Diagram, r: int, scalar: Any, vector: Any
) -> CommuteResidual:
    """Defects of ``rot P0 = P1 rot`` and ``div P1 = P2 div``.

    Args:
        split: Macro-triangle.
        diagram: Which chain of projections.
        r: Degree of the scalar projection, at least 2.
        scalar: Closed-form scalar input with ``rot()``.
        vector: Closed-form vector input with ``div()``.

    Returns:
        Sup-norm defects relative to the size of the projections.
    """
    first, middle, last = _DIAGRAM_CHAINS[diagram]
    projected = local_project(first, scalar, split, r)
    rot_of_projection = rot_scalar(projected)
    projection_of_rot = local_project(middle, scalar.rot(), split, r)
    vector_projection = local_project(middle, vector, split, r)
    div_of_projection = divergence(vector_projection)
    projection_of_div = local_project(last, vector.div(), split, r)
    return CommuteResidual(
        _sup_relative(rot_of_projection - projection_of_rot, projection_of_rot),
        _sup_relative(div_of_projection - projection_of_div, projection_of_div),
    )


def idempotency_defect(chain: Chain, f: Any, split: MacroSplit, r: int) -> float:
    """How far applying a projection twice is from applying it once."""
    once = local_project(chain, f, split, r)
    twice = local_project(chain, once, split, r)
    return (twice - once).coefficient_norm() / max(once.coefficient_norm(), 1e-300)
