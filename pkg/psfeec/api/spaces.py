"""Local finite element spaces on one Powell–Sabin split.

Every space is the nullspace of explicit linear constraints on the BB
coefficients of the unconstrained piecewise polynomial space. Interface
conditions are imposed by sampling at ``r + 1`` Chebyshev points along
each interior edge, which forces equality of the polynomial traces.
"""
import logging
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from psfeec.api.bernstein import dimension
from psfeec.api.config import Config
from psfeec.api.linalg import RankDecision, nullspace
from psfeec.api.mesh import MacroSplit
from psfeec.api.poly import NCELLS, CoefficientProbe, PiecewisePolynomial
from psfeec.enums import Family
from psfeec.exceptions import InadmissibleDegreeError
from psfeec.utils import chebyshev_points

__all__ = [
    "FESpace",
    "Membership",
    "build_space",
    "dimension_formula",
    "check_membership",
    "nesting_residual",
]

logger = logging.getLogger(__name__)

_VALUE_CONTINUOUS = {
    Family.V0,
    Family.L0,
    Family.L1,
    Family.L2,
    Family.S0,
    Family.S1,
    Family.S2,
}


class FESpace:
    """A local space given by an orthonormal coefficient basis.

    Args:
        split: Macro-triangle.
        family: Space family.
        ring: Whether boundary conditions are imposed.
        degree: Polynomial degree.
        basis: Coefficient matrix whose columns span the space.
        constraints: Description of the imposed constraints.
        decision: Rank decision of the constraint matrix.
    """

    def __init__(
        self,
        split: MacroSplit,
        family: Family,
        ring: bool,
        degree: int,
        basis: np.ndarray,
        constraints: List[str],
        decision: Optional[RankDecision] = None,
    ) -> None:
        self._split = split
        self._family = family
        self._ring = ring
        self._degree = degree
        self._basis = basis
        self._basis.setflags(write=False)
        self._constraints = list(constraints)
        self._decision = decision

    def __repr__(self) -> str:
        return "FESpace(%s, r=%s, dim=%s)" % (self.tag, self._degree, self.dim)

    @property
    def split(self) -> MacroSplit:
        """MacroSplit: Macro-triangle."""
        return self._split

    @property
    def family(self) -> Family:
        """Family: Space family."""
        return self._family

    @property
    def ring(self) -> bool:
        """bool: Whether boundary conditions are imposed."""
        return self._ring

    @property
    def degree(self) -> int:
        """int: Polynomial degree."""
        return self._degree

    @property
    def ncomp(self) -> int:
        """int: Number of components of members."""
        return self._family.ncomp

    @property
    def basis(self) -> np.ndarray:
        """np.ndarray: Orthonormal coefficient basis (ncoef, dim)."""
        return self._basis

    @property
    def dim(self) -> int:
        """int: Dimension."""
        return self._basis.shape[1]

    @property
    def constraints(self) -> List[str]:
        """List[str]: Imposed constraints, for audit."""
        return self._constraints

    @property
    def decision(self) -> Optional[RankDecision]:
        """Optional[RankDecision]: Rank decision of the constraint matrix."""
        return self._decision

    @property
    def tag(self) -> str:
        """str: Family tag with a ``ring-`` prefix for boundary conditions."""
        return "%s%s" % ("ring-" if self._ring else "", self._family.value)

    def field(self, coords: np.ndarray) -> PiecewisePolynomial:
        """Member with the given coordinates."""
        return PiecewisePolynomial(self._split, self._degree, self._basis @ coords, self.ncomp)

    def coordinates(self, f: PiecewisePolynomial) -> Tuple[np.ndarray, float]:
        """Least squares coordinates of a field and the relative residual."""
        membership = check_membership(f, self)
        return membership.coordinates, membership.residual

    def contains(self, f: PiecewisePolynomial) -> bool:
        """Whether a field is a member to membership tolerance."""
        return check_membership(f, self).member

    def random_member(self, rng: np.random.Generator) -> PiecewisePolynomial:
        """Member with standard normal coordinates."""
        return self.field(rng.standard_normal(self.dim))


class Membership(NamedTuple):
    """Outcome of a membership test."""

    member: bool
    coordinates: np.ndarray
    residual: float


def dimension_formula(family: Family, ring: bool, r: int) -> Optional[int]:
    """Closed-form dimension of a local space, when one is known.

    Args:
        family: Space family.
        ring: Whether boundary conditions are imposed.
        r: Polynomial degree.

    Returns:
        The dimension, or None when no formula covers the degree.

    Examples:
        >>> dimension_formula(Family.V1, False, 1)
        24
        >>> dimension_formula(Family.S1, True, 3)
        12
        >>> dimension_formula(Family.S2, True, 2)
        6
        >>> dimension_formula(Family.S0, True, 1) is None
        True
    """
    if r < 0:
        return None
    lagrange = 3 * r * r + 3 * r + 1
    if not ring:
        plain = {
            Family.L0: lagrange,
            Family.L1: 2 * lagrange,
            Family.L2: lagrange,
            Family.V0: lagrange,
            Family.V1: 6 * r * r + 12 * r + 6,
            Family.V2: 3 * r * r + 9 * r + 6,
            Family.S2: lagrange,
            Family.calV2: 3 * (r + 1) * (r + 2) - 3,
        }
        if family in plain:
            return plain[family]
        if r < 1:
            return None
        return 3 * r * r - 3 * r + 3 if family == Family.S0 else 6 * r * r + 3
    if family in (Family.L0, Family.V0):
        return 3 * r * r - 3 * r + 1 if r >= 1 else None
    if family == Family.L1:
        return 2 * (3 * r * r - 3 * r + 1) if r >= 1 else None
    if family == Family.V1:
        return 6 * r * (r + 1) if r >= 1 else None
    if family == Family.V2:
        return 3 * r * r + 9 * r + 5
    if family == Family.calV2:
        return 3 * (r + 1) * (r + 2) - 4
    if family in (Family.L2, Family.S2):
        return 3 * r * (r - 1)
    if family == Family.S0:
        return 3 * (r - 2) * (r - 3) if r >= 2 else None
    return 6 * (r - 1) * (r - 2) if r >= 1 else None


def _edge_points(start: np.ndarray, end: np.ndarray, count: int) -> np.ndarray:
    t = chebyshev_points(count)
    return start[None, :] + t[:, None] * (end - start)[None, :]


def _divergence_rows(gradients: np.ndarray) -> np.ndarray:
    return gradients[:, 0, 0, :] + gradients[:, 1, 1, :]


def _mean_row(split: MacroSplit, degree: int) -> np.ndarray:
    size = dimension(degree)
    row = np.zeros(NCELLS * size)
    for c in range(NCELLS):
        row[c * size : (c + 1) * size] = split.areas[c] / size
    return row


def _interface_rows(
    split: MacroSplit, family: Family, probe: CoefficientProbe, count: int
) -> Tuple[List[np.ndarray], List[str]]:
    rows, described = [], []
    for a, b, start, end in split.interior_edges():
        points = _edge_points(start, end, count)
        values = probe.values(a, points) - probe.values(b, points)
        if family in _VALUE_CONTINUOUS:
            rows.append(values.reshape(-1, probe.ncoef))
        if family == Family.V1:
            d = end - start
            normal = np.array([d[1], -d[0]]) / np.linalg.norm(d)
            rows.append(np.einsum("pcn,c->pn", values, normal))
        if family == Family.S0:
            gradients = probe.gradients(a, points) - probe.gradients(b, points)
            rows.append(gradients.reshape(-1, probe.ncoef))
        if family == Family.S1:
            gradients = probe.gradients(a, points) - probe.gradients(b, points)
            rows.append(_divergence_rows(gradients))
    if family in _VALUE_CONTINUOUS:
        described.append("value continuity across interior edges")
    if family == Family.V1:
        described.append("normal continuity across interior edges")
    if family == Family.S0:
        described.append("gradient continuity across interior edges")
    if family == Family.S1:
        described.append("divergence continuity across interior edges")
    if family == Family.calV2:
        for i in range(3):
            point = split.split_points[i]
            rows.append(
                (probe.values(2 * i, point) - probe.values(2 * i + 1, point)).reshape(1, -1)
            )
        described.append("continuity at the split points")
    return rows, described


def _boundary_rows(
    split: MacroSplit, family: Family, probe: CoefficientProbe, count: int
) -> Tuple[List[np.ndarray], List[str]]:
    rows, described = [], []
    if family in (Family.V2, Family.calV2):
        return rows, described
    for h in range(6):
        i = h // 2
        points = _edge_points(*split.half_endpoints(h), count)
        values = probe.values(h, points)
        if family == Family.V1:
            rows.append(np.einsum("pcn,c->pn", values, split.normals[i]))
            continue
        rows.append(values.reshape(-1, probe.ncoef))
        if family == Family.S0:
            rows.append(probe.gradients(h, points).reshape(-1, probe.ncoef))
        if family == Family.S1:
            rows.append(_divergence_rows(probe.gradients(h, points)))
    described.append(
        {
            Family.V1: "zero normal component on the boundary",
            Family.S0: "zero value and gradient on the boundary",
            Family.S1: "zero value and divergence on the boundary",
        }.get(family, "zero value on the boundary")
    )
    return rows, described


def build_space(split: MacroSplit, family: Family, ring: bool, r: int) -> FESpace:
    """Build a local space as the nullspace of its constraints.

    Results are memoised on the split.

    Args:
        split: Macro-triangle, e.g. ``sc[index]`` of a refinement.
        family: Space family.
        ring: Whether to impose the boundary conditions.
        r: Polynomial degree.

    Returns:
        The space with an orthonormal basis.

    Raises:
        InadmissibleDegreeError: When r is negative.
        RankAmbiguityError: When the rank decision is ambiguous.

    Examples:
        >>> from psfeec.api.mesh import powell_sabin_refine, reference_triangle
        >>> split = powell_sabin_refine(reference_triangle())[0]
        >>> build_space(split, Family.S0, False, 2).dim
        9
        >>> build_space(split, Family.calV2, True, 0).dim
        2
    """
    if r < 0:
        raise InadmissibleDegreeError("degree must be non-negative, got %s" % r)
    key = ("space", family, ring, r)
    if key in split.cache:
        return split.cache[key]
    probe = CoefficientProbe(split, r, family.ncomp)
    count = r + 1
    rows, described = _interface_rows(split, family, probe, count)
    if ring:
        more, text = _boundary_rows(split, family, probe, count)
        rows.extend(more)
        described.extend(text)
        if family in (Family.V2, Family.calV2, Family.L2, Family.S2):
            rows.append(_mean_row(split, r)[None, :])
            described.append("zero mean")
    matrix = np.vstack(rows) if rows else np.zeros((0, probe.ncoef))
    tag = "%s%s r=%s" % ("ring-" if ring else "", family.value, r)
    basis, decision = nullspace(matrix, probe.ncoef, what=tag)
    space = FESpace(split, family, ring, r, basis, described, decision)
    expected = dimension_formula(family, ring, r)
    if expected is not None and expected != space.dim:
        logger.warning("%s: computed dimension %s, closed form %s", tag, space.dim, expected)
    split.cache[key] = space
    return space


def check_membership(f: PiecewisePolynomial, sp: FESpace) -> Membership:
    """Least squares membership test.

    Fields of lower degree are elevated first.

    Args:
        f: The field.
        sp: The space.

    Returns:
        Coordinates and relative residual; member iff the residual is within
        the membership tolerance.

    Raises:
        ValueError: When the field lives elsewhere, has the wrong rank or
            a higher degree.
    """
    if f.split is not sp.split or f.ncomp != sp.ncomp or f.degree > sp.degree:
        raise ValueError("%r does not match %r" % (f, sp))
    vector = f.elevate(sp.degree - f.degree).vector
    coords = sp.basis.T @ vector
    norm = float(np.linalg.norm(vector))
    residual = float(np.linalg.norm(vector - sp.basis @ coords)) / norm if norm else 0.0
    return Membership(residual <= Config.current().tolerance.membership, coords, residual)


def nesting_residual(inner: FESpace, outer: FESpace) -> float:
    """Largest membership residual of the columns of one space in another."""
    worst = 0.0
    for k in range(inner.dim):
        worst = max(worst, check_membership(inner.field(np.eye(inner.dim)[k]), outer).residual)
    return worst
