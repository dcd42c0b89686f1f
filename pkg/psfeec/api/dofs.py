"""Degrees of freedom, dual bases and the local projections.

A :class:`LinearFunctional` is a finite list of weighted point samples of
values and gradients, so it applies equally to closed-form fields and to
piecewise polynomials, and it turns into a coefficient row through a
:class:`~psfeec.api.poly.CoefficientProbe`. Integral functionals carry
their quadrature weights in the samples.

Functionals anchored on shared geometry (vertices, split points, half
edges, whole edges) record a parity: after flipping the edge direction the
functional changes by ``(-1) ** parity``. The global assembly uses it to
identify functionals across neighbouring macro-triangles.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Legendre

from psfeec.api.config import Config
from psfeec.api.fields import PolynomialScalar, VectorField
from psfeec.api.linalg import nullspace
from psfeec.api.mesh import MacroSplit
from psfeec.api.poly import NCELLS, CoefficientProbe, PiecewisePolynomial, interpolate
from psfeec.api.quadrature import interval_rule, map_triangle_rule
from psfeec.api.spaces import FESpace, build_space
from psfeec.enums import Chain, DofKind, EdgeVariant, Family, Pairing
from psfeec.exceptions import Bug, ClientError, InadmissibleDegreeError, UnisolvenceError

__all__ = [
    "Sample",
    "LinearFunctional",
    "DofSet",
    "UnisolvenceReport",
    "EdgeFunctional",
    "psi_polynomial",
    "c1_spline_basis",
    "edge_c1_dofs",
    "edge_unisolvence",
    "build_dofs",
    "unisolvence_report",
    "local_project",
    "nedelec_hdiv_dofs",
    "linear_vector_basis",
    "nedelec_interpolant",
    "min_degree",
]

logger = logging.getLogger(__name__)

_MIN_DEGREE = {Family.S0: 2, Family.L1: 1, Family.V2: 0, Family.S1: 1, Family.L2: 0}


def min_degree(family: Family) -> int:
    """Smallest degree with a DOF set for the family.

    Raises:
        ClientError: When the family has no DOF set.

    Examples:
        >>> min_degree(Family.S0)
        2
    """
    if family not in _MIN_DEGREE:
        raise ClientError("no degrees of freedom are defined for %s" % family.value)
    return _MIN_DEGREE[family]


@dataclass
class Sample:
    """Weighted samples in one subtriangle.

    Attributes:
        cell: Subtriangle the samples are taken in.
        points: Points of shape (p, 2).
        value: Weights of the component values, shape (p, ncomp).
        grad: Weights of the component gradients, shape (p, ncomp, 2).
    """

    cell: int
    points: np.ndarray
    value: Optional[np.ndarray] = None
    grad: Optional[np.ndarray] = None


@dataclass
class LinearFunctional:
    """A degree of freedom.

    Attributes:
        kind: Functional kind.
        anchor: ``("vertex", j)``, ``("split", i)``, ``("half", h)``,
            ``("edge", i)`` or ``("interior",)`` in local numbering.
        index: Distinguishes functionals sharing an anchor.
        samples: The weighted samples.
        parity: Sign exponent under reversal of the anchor edge.
        is_trace: Whether the functional belongs to the edge trace.
        position: Coordinates of the anchor.
        label: Human readable description.
    """

    kind: DofKind
    anchor: Tuple[Any, ...]
    index: Tuple[Any, ...]
    samples: List[Sample] = field(default_factory=list)
    parity: int = 0
    is_trace: bool = False
    position: Optional[np.ndarray] = None
    label: str = ""

    def __call__(self, f: Any) -> float:
        """Apply the functional to a field with ``evaluate`` and ``gradient``."""
        total = 0.0
        for sample in self.samples:
            p = len(sample.points)
            if sample.value is not None:
                values = np.asarray(f.evaluate(sample.points, sample.cell)).reshape(p, -1)
                total += float(np.einsum("pc,pc->", sample.value, values))
            if sample.grad is not None:
                grads = np.asarray(f.gradient(sample.points, sample.cell)).reshape(p, -1, 2)
                total += float(np.einsum("pcd,pcd->", sample.grad, grads))
        return total

    def row(self, probe: CoefficientProbe) -> np.ndarray:
        """Coefficient row of the functional."""
        result = np.zeros(probe.ncoef)
        for sample in self.samples:
            if sample.value is not None:
                result += np.einsum("pc,pcn->n", sample.value, probe.values(sample.cell, sample.points))
            if sample.grad is not None:
                result += np.einsum(
                    "pcd,pcdn->n", sample.grad, probe.gradients(sample.cell, sample.points)
                )
        return result


class UnisolvenceReport(NamedTuple):
    """Outcome of a unisolvence check."""

    size: int
    dim: int
    min_singular: float
    max_singular: float
    condition: float
    passed: bool


class DofSet:
    """Ordered degrees of freedom of a local space.

    Args:
        split: Macro-triangle.
        family: Target family.
        degree: Target degree.
        functionals: The functionals.
        test_spaces: Interior test spaces keyed by pairing name.
    """

    def __init__(
        self,
        split: MacroSplit,
        family: Family,
        degree: int,
        functionals: List[LinearFunctional],
        test_spaces: Optional[Dict[str, FESpace]] = None,
    ) -> None:
        self.split = split
        self.family = family
        self.degree = degree
        self.functionals = functionals
        self.test_spaces = test_spaces or {}
        self._rows: Optional[np.ndarray] = None
        self._dual: Dict[int, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.functionals)

    def __iter__(self):
        return iter(self.functionals)

    def __getitem__(self, index: int) -> LinearFunctional:
        return self.functionals[index]

    @property
    def space(self) -> FESpace:
        """FESpace: The plain target space."""
        return build_space(self.split, self.family, False, self.degree)

    def rows(self) -> np.ndarray:
        """Functionals as rows acting on flat coefficients."""
        if self._rows is None:
            probe = CoefficientProbe(self.split, self.degree, self.family.ncomp)
            self._rows = np.array([f.row(probe) for f in self.functionals]).reshape(
                len(self.functionals), probe.ncoef
            )
        return self._rows

    def matrix(self, space: Optional[FESpace] = None) -> np.ndarray:
        """Matrix ``M[j, k] = functional_j(basis_k)``."""
        space = space or self.space
        return self.rows() @ space.basis

    def values(self, f: Any) -> np.ndarray:
        """DOF values of a field."""
        return np.array([functional(f) for functional in self.functionals])

    def dual_basis(self, space: Optional[FESpace] = None) -> np.ndarray:
        """Coefficients of the basis dual to the functionals.

        Raises:
            UnisolvenceError: When the DOF matrix is singular.
        """
        space = space or self.space
        key = id(space)
        if key not in self._dual:
            report = unisolvence_report(space, self)
            if not report.passed:
                raise UnisolvenceError(
                    "%s r=%s: DOF matrix is singular (min/max singular value %.3e)"
                    % (self.family.value, self.degree, report.min_singular / max(report.max_singular, 1e-300))
                )
            self._dual[key] = space.basis @ np.linalg.inv(self.matrix(space))
        return self._dual[key]

    def project(self, f: Any) -> PiecewisePolynomial:
        """Member of the target space sharing every DOF value with f."""
        coeffs = self.dual_basis() @ self.values(f)
        return PiecewisePolynomial(self.split, self.degree, coeffs, self.family.ncomp)


def psi_polynomial(r: int) -> Legendre:
    """The degree r polynomial with psi(0) = 1, psi(1) = 0, orthogonal to P_{r-2}.

    Args:
        r: Degree, at least 1.

    Returns:
        Shifted Legendre series on [0, 1].

    Raises:
        InadmissibleDegreeError: When r < 1.
        Bug: When psi'(0) vanishes.

    Examples:
        >>> float(psi_polynomial(2)(0.0))
        1.0
        >>> round(float(psi_polynomial(2)(0.5)), 12)
        -0.25
        >>> abs(float(psi_polynomial(8)(1.0))) < 1e-13
        True
    """
    if r < 1:
        raise InadmissibleDegreeError("psi needs r >= 1, got %s" % r)
    coef = np.zeros(r + 1)
    coef[r] = 0.5 * (-1) ** r
    coef[r - 1] = -0.5 * (-1) ** r
    psi = Legendre(coef, domain=[0, 1])
    if abs(psi.deriv()(0.0)) < 1e-12:
        raise Bug("psi'(0) vanishes for r=%s" % r)
    return psi


class EdgeFunctional(NamedTuple):
    """Functional on two-piece functions of one edge."""

    label: str
    apply: Callable[[Tuple[Legendre, Legendre]], float]


def c1_spline_basis(r: int, split: float = 0.5) -> List[Tuple[Legendre, Legendre]]:
    """Basis of the C^1 splines of degree r on [0, split] and [split, 1].

    Raises:
        InadmissibleDegreeError: When r < 1.

    Examples:
        >>> len(c1_spline_basis(3))
        6
    """
    if r < 1:
        raise InadmissibleDegreeError("C1 edge splines need r >= 1, got %s" % r)
    n = r + 1
    domains = ([0.0, split], [split, 1.0])
    rows = []
    for order in range(2):
        row = np.zeros(2 * n)
        for k in range(n):
            e = np.zeros(n)
            e[k] = 1.0
            left = Legendre(e, domain=domains[0]).deriv(order)
            right = Legendre(e, domain=domains[1]).deriv(order)
            row[k] = left(split)
            row[n + k] = -right(split)
        rows.append(row)
    basis, _ = nullspace(np.array(rows), 2 * n, what="C1 splines r=%s" % r)
    return [
        (Legendre(col[:n], domain=domains[0]), Legendre(col[n:], domain=domains[1]))
        for col in basis.T
    ]


def _half_moment(side: int, k: int, split: float) -> Callable[[Tuple[Legendre, Legendre]], float]:
    start, end = (0.0, split) if side == 0 else (split, 1.0)
    t, weights = interval_rule(Config.current().quadrature.moment_degree)
    x = start + t * (end - start)
    test = Legendre.basis(k, domain=[0, 1])(t)

    def apply(pieces: Tuple[Legendre, Legendre]) -> float:
        return float((weights * (end - start) * test) @ pieces[side](x))

    return apply


def edge_c1_dofs(r: int, variant: EdgeVariant, split: float = 0.5) -> List[EdgeFunctional]:
    """Degrees of freedom of the C^1 edge splines.

    The ``edge1`` variant uses endpoint values and derivatives, the value
    and derivative at the split point and half-edge moments up to degree
    r - 4; ``edge2`` uses endpoint values and half-edge moments up to
    degree r - 2.

    Args:
        r: Degree, at least 1.
        variant: Which set.
        split: Position of the split point in (0, 1).

    Returns:
        2r functionals.

    Examples:
        >>> len(edge_c1_dofs(3, EdgeVariant.edge1))
        6
        >>> len(edge_c1_dofs(2, EdgeVariant.edge2))
        4
    """
    if r < 1:
        raise InadmissibleDegreeError("C1 edge splines need r >= 1, got %s" % r)
    result = [
        EdgeFunctional("z(a)", lambda z: float(z[0](0.0))),
        EdgeFunctional("z(b)", lambda z: float(z[1](1.0))),
    ]
    if variant == EdgeVariant.edge1:
        if r >= 2:
            result.append(EdgeFunctional("z'(a)", lambda z: float(z[0].deriv()(0.0))))
            result.append(EdgeFunctional("z'(b)", lambda z: float(z[1].deriv()(1.0))))
        if r >= 3:
            result.append(EdgeFunctional("z(m)", lambda z: float(z[0](split))))
            result.append(EdgeFunctional("z'(m)", lambda z: float(z[0].deriv()(split))))
        top = r - 4
    else:
        top = r - 2
    for side in range(2):
        for k in range(top + 1):
            result.append(EdgeFunctional("moment half %s P%s" % (side, k), _half_moment(side, k, split)))
    return result


def edge_unisolvence(r: int, variant: EdgeVariant, split: float = 0.5) -> UnisolvenceReport:
    """Unisolvence of an edge DOF set on the C^1 splines."""
    basis = c1_spline_basis(r, split)
    dofs = edge_c1_dofs(r, variant, split)
    matrix = np.array([[dof.apply(b) for b in basis] for dof in dofs])
    return _report(matrix)


def _report(matrix: np.ndarray) -> UnisolvenceReport:
    size, dim = matrix.shape
    if size == 0:
        return UnisolvenceReport(0, dim, 0.0, 0.0, 1.0, dim == 0)
    s = np.linalg.svd(matrix, compute_uv=False)
    smin = float(s[-1]) if size == dim else 0.0
    smax = float(s[0])
    passed = size == dim and smin > Config.current().tolerance.rank * smax
    condition = smax / smin if smin > 0 else float("inf")
    return UnisolvenceReport(size, dim, smin, smax, condition, passed)


def unisolvence_report(sp: FESpace, ds: DofSet) -> UnisolvenceReport:
    """Pair a DOF set against a space basis.

    Raises:
        UnisolvenceError: When the number of functionals differs from the
            dimension of the space.
    """
    if len(ds) != sp.dim:
        raise UnisolvenceError(
            "%s functionals for a space of dimension %s (%r)" % (len(ds), sp.dim, sp)
        )
    report = _report(ds.matrix(sp))
    logger.debug(
        "%s r=%s: unisolvence min singular value %.3e, condition %.3e",
        sp.tag,
        sp.degree,
        report.min_singular,
        report.condition,
    )
    return report


# --- functional builders ---------------------------------------------------


def _line(start: np.ndarray, end: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    t, weights = interval_rule(Config.current().quadrature.moment_degree)
    points = start[None, :] + t[:, None] * (end - start)[None, :]
    return t, points, weights * float(np.linalg.norm(end - start))


def _point_value(cell: int, point: np.ndarray, weights: Sequence[float]) -> Sample:
    return Sample(cell, np.atleast_2d(point), value=np.atleast_2d(np.asarray(weights, dtype=float)))


def _point_grad(cell: int, point: np.ndarray, weights: np.ndarray) -> Sample:
    return Sample(cell, np.atleast_2d(point), grad=np.asarray(weights, dtype=float)[None, ...])


def _vertex_functionals(split: MacroSplit, family: Family, r: int) -> List[LinearFunctional]:
    result = []
    for j in range(3):
        cell = split.vertex_cell(j)
        point = split.points[1 + j]
        anchor = ("vertex", j)

        def make(kind, index, sample, trace=True, label=""):
            return LinearFunctional(
                kind, anchor, index, [sample], 0, trace, point, "%s at vertex %s" % (label, j)
            )

        if family == Family.S0 or (family == Family.L2 and r >= 1):
            result.append(make(DofKind.value, ("q",), _point_value(cell, point, [1.0]), label="value"))
        if family == Family.S0:
            for d in range(2):
                result.append(
                    make(DofKind.gradient, ("grad", d), _point_grad(cell, point, [np.eye(2)[d]]), label="d/dx%s" % d)
                )
        if family in (Family.L1, Family.S1):
            for c in range(2):
                result.append(
                    make(DofKind.value, ("v", c), _point_value(cell, point, np.eye(2)[c]), label="component %s" % c)
                )
        if family == Family.S1 and r >= 2:
            result.append(
                make(DofKind.divergence, ("div",), _point_grad(cell, point, np.eye(2)), False, "divergence")
            )
    return result


def _split_functionals(split: MacroSplit, family: Family, r: int) -> List[LinearFunctional]:
    result = []
    for i in range(3):
        point = split.split_points[i]
        lower, upper = 2 * i, 2 * i + 1
        anchor = ("split", i)
        normal, tangent = split.normals[i], split.tangents[i]
        found = []
        if family == Family.S0 and r >= 3:
            found.append((DofKind.value, ("q",), [_point_value(lower, point, [1.0])], 0, True, "value"))
            found.append(
                (DofKind.tangential_derivative, ("dt",), [_point_grad(lower, point, [tangent])], 1, True, "d/dt")
            )
        if family == Family.L1:
            found.append(
                (
                    DofKind.jump_divergence,
                    ("jdiv",),
                    [_point_grad(lower, point, np.eye(2)), _point_grad(upper, point, -np.eye(2))],
                    1,
                    True,
                    "jump of divergence",
                )
            )
        if family in (Family.L1, Family.S1) and r >= 2:
            found.append((DofKind.normal_component, ("vn",), [_point_value(lower, point, normal)], 1, True, "v.n"))
        if family == Family.S1 and r >= 2:
            found.append(
                (DofKind.divergence, ("div",), [_point_grad(lower, point, np.eye(2))], 0, False, "divergence")
            )
        if family == Family.V2:
            found.append(
                (
                    DofKind.jump_value,
                    ("jump",),
                    [_point_value(lower, point, [1.0]), _point_value(upper, point, [-1.0])],
                    1,
                    False,
                    "jump",
                )
            )
        if family == Family.L2 and r >= 1:
            found.append((DofKind.value, ("q",), [_point_value(lower, point, [1.0])], 0, True, "value"))
        for kind, index, samples, parity, trace, label in found:
            result.append(
                LinearFunctional(
                    kind, anchor, index, samples, parity, trace, point, "%s at split point %s" % (label, i)
                )
            )
    return result


def _flux_functionals(split: MacroSplit) -> List[LinearFunctional]:
    result = []
    for i in range(3):
        samples = []
        for h in (2 * i, 2 * i + 1):
            _, points, weights = _line(*split.half_endpoints(h))
            samples.append(Sample(h, points, value=weights[:, None] * split.normals[i][None, :]))
        a, b = split.edge_endpoints(i)
        result.append(
            LinearFunctional(
                DofKind.flux, ("edge", i), ("flux",), samples, 1, True, 0.5 * (a + b), "flux through edge %s" % i
            )
        )
    return result


def _half_functionals(split: MacroSplit, family: Family, r: int) -> List[LinearFunctional]:
    result = []
    for h in range(6):
        i = h // 2
        start, end = split.half_endpoints(h)
        t, points, weights = _line(start, end)
        anchor = ("half", h)
        position = 0.5 * (start + end)

        def add(kind, index, sample, parity, trace, label):
            result.append(
                LinearFunctional(kind, anchor, index, [sample], parity, trace, position, "%s on half %s" % (label, h))
            )

        if family == Family.S0:
            for k in range(r - 2):
                test = weights * Legendre.basis(k, domain=[0, 1])(t)
                grad = test[:, None, None] * split.normals[i][None, None, :]
                add(DofKind.normal_derivative_moment, ("dn", k), Sample(h, points, grad=grad), k + 1, True, "dn P%s" % k)
            for k in range(r - 3):
                test = weights * Legendre.basis(k, domain=[0, 1])(t)
                add(DofKind.edge_moment, ("q", k), Sample(h, points, value=test[:, None]), k, True, "q P%s" % k)
        if family in (Family.L1, Family.S1):
            for k in range(r - 1):
                test = weights * Legendre.basis(k, domain=[0, 1])(t)
                for c in range(2):
                    value = test[:, None] * np.eye(2)[c][None, :]
                    add(DofKind.edge_moment, ("v", c, k), Sample(h, points, value=value), k, True, "v%s P%s" % (c, k))
        if family == Family.S1:
            for k in range(r - 2):
                test = weights * Legendre.basis(k, domain=[0, 1])(t)
                grad = test[:, None, None] * np.eye(2)[None, :, :]
                add(DofKind.divergence_moment, ("div", k), Sample(h, points, grad=grad), k, False, "div P%s" % k)
        if family == Family.L2:
            for k in range(r - 1):
                test = weights * Legendre.basis(k, domain=[0, 1])(t)
                add(DofKind.edge_moment, ("q", k), Sample(h, points, value=test[:, None]), k, True, "q P%s" % k)
    return result


def _cell_rules(split: MacroSplit) -> List[Tuple[np.ndarray, np.ndarray]]:
    degree = Config.current().quadrature.moment_degree
    key = ("cell_rules", degree)
    if key not in split.cache:
        split.cache[key] = [
            map_triangle_rule(split.cell_vertices[c], degree)[0::2] for c in range(NCELLS)
        ]
    return split.cache[key]


def _total_integral(split: MacroSplit) -> LinearFunctional:
    samples = [Sample(c, points, value=weights[:, None]) for c, (points, weights) in enumerate(_cell_rules(split))]
    return LinearFunctional(
        DofKind.total_integral, ("interior",), ("mean",), samples, 0, False, split.z0, "integral"
    )


def _rotate(space: FESpace, rng: Optional[np.random.Generator]) -> np.ndarray:
    if rng is None or space.dim == 0:
        return space.basis
    q, _ = np.linalg.qr(rng.standard_normal((space.dim, space.dim)))
    return space.basis @ q


def _interior_functionals(
    split: MacroSplit, space: FESpace, pairing: Pairing, tag: str, rng: Optional[np.random.Generator]
) -> List[LinearFunctional]:
    basis = _rotate(space, rng)
    probe = CoefficientProbe(split, space.degree, space.ncomp)
    functionals = [
        LinearFunctional(
            DofKind.interior_moment, ("interior",), (tag, k), [], 0, False, split.z0, "%s moment %s" % (tag, k)
        )
        for k in range(space.dim)
    ]
    for c, (points, weights) in enumerate(_cell_rules(split)):
        if pairing == Pairing.rot_rot:
            grads = np.einsum("pcdn,nk->pcdk", probe.gradients(c, points), basis)
            for k, f in enumerate(functionals):
                f.samples.append(Sample(c, points, grad=weights[:, None, None] * grads[..., k]))
        elif pairing == Pairing.div_scalar:
            values = np.einsum("pcn,nk->pck", probe.values(c, points), basis)[:, 0, :]
            for k, f in enumerate(functionals):
                grad = (weights * values[:, k])[:, None, None] * np.eye(2)[None, :, :]
                f.samples.append(Sample(c, points, grad=grad))
        elif tag == "rot":
            grads = np.einsum("pcdn,nk->pdk", probe.gradients(c, points), basis)
            rot = np.stack([grads[:, 1, :], -grads[:, 0, :]], axis=1)
            for k, f in enumerate(functionals):
                f.samples.append(Sample(c, points, value=weights[:, None] * rot[..., k]))
        else:
            values = np.einsum("pcn,nk->pck", probe.values(c, points), basis)
            for k, f in enumerate(functionals):
                f.samples.append(Sample(c, points, value=weights[:, None] * values[..., k]))
    return functionals


def build_dofs(
    split: MacroSplit, family: Family, r: int, rng: Optional[np.random.Generator] = None
) -> DofSet:
    """Degrees of freedom of a local space.

    Interior moments use the orthonormal bases of the test spaces; pass a
    generator to rotate them randomly, which changes the DOF values but not
    the projection.

    Args:
        split: Macro-triangle.
        family: One of S0, L1, V2, S1, L2.
        r: Degree.
        rng: Optional generator rotating the interior test bases.

    Returns:
        The DOF set, memoised on the split when no generator is given.

    Raises:
        InadmissibleDegreeError: Below the smallest degree of the family.

    Examples:
        >>> from psfeec.api.mesh import powell_sabin_refine, reference_triangle
        >>> split = powell_sabin_refine(reference_triangle())[0]
        >>> len(build_dofs(split, Family.S0, 2))
        9
        >>> len(build_dofs(split, Family.L1, 1))
        14
        >>> len(build_dofs(split, Family.V2, 0))
        6
    """
    if r < min_degree(family):
        raise InadmissibleDegreeError(
            "%s needs r >= %s, got %s" % (family.value, min_degree(family), r)
        )
    key = ("dofs", family, r)
    if rng is None and key in split.cache:
        return split.cache[key]
    functionals = _vertex_functionals(split, family, r)
    if family in (Family.L1, Family.S1) and r == 1:
        functionals += _flux_functionals(split)
    functionals += _split_functionals(split, family, r)
    functionals += _half_functionals(split, family, r)
    tests: Dict[str, FESpace] = {}
    if family == Family.S0:
        tests["rot"] = build_space(split, Family.S0, True, r)
        functionals += _interior_functionals(split, tests["rot"], Pairing.rot_rot, "rot", rng)
    if family in (Family.L1, Family.S1):
        tests["rot"] = build_space(split, Family.S0, True, r + 1)
        functionals += _interior_functionals(split, tests["rot"], Pairing.identity, "rot", rng)
        divergence_space = Family.calV2 if family == Family.L1 else Family.L2
        tests["div"] = build_space(split, divergence_space, True, r - 1)
        functionals += _interior_functionals(split, tests["div"], Pairing.div_scalar, "div", rng)
    if family in (Family.V2, Family.L2):
        functionals.append(_total_integral(split))
        test_family = Family.calV2 if family == Family.V2 else Family.L2
        tests["id"] = build_space(split, test_family, True, r)
        functionals += _interior_functionals(split, tests["id"], Pairing.identity, "id", rng)
    dofs = DofSet(split, family, r, functionals, tests)
    if rng is None:
        split.cache[key] = dofs
    return dofs


def local_project(chain: Chain, f: Any, split: MacroSplit, r: int) -> PiecewisePolynomial:
    """Apply one of the local projections.

    Args:
        chain: Projection; its target degree is ``r - chain.shift``.
        f: Field with ``evaluate`` and ``gradient``.
        split: Macro-triangle.
        r: Degree of the chain.

    Returns:
        The projection of f.
    """
    return build_dofs(split, chain.family, r - chain.shift).project(f)


class _EdgeNormalData:
    """Scalar edge data ``g_i`` seen as the normal component ``g_i n_i``."""

    ncomp = 2

    def __init__(self, split: MacroSplit, data: Callable[[int, np.ndarray], np.ndarray]) -> None:
        self.split = split
        self.data = data

    def evaluate(self, points: np.ndarray, cell: Optional[int] = None) -> np.ndarray:
        i = cell // 2
        return self.data(i, points)[:, None] * self.split.normals[i][None, :]


def nedelec_hdiv_dofs(split: MacroSplit) -> List[LinearFunctional]:
    """Moments of ``w . n_i`` against P1 on each macro-edge.

    These determine a linear vector field on the unsplit macro-triangle.
    """
    result = []
    for i in range(3):
        for k in range(2):
            samples = []
            offset = 0.0
            length = split.edge_lengths[i]
            for h in (2 * i, 2 * i + 1):
                t, points, weights = _line(*split.half_endpoints(h))
                s = (offset + t * split.half_length(h)) / length
                test = Legendre.basis(k, domain=[0, 1])(s)
                samples.append(Sample(h, points, value=(weights * test)[:, None] * split.normals[i][None, :]))
                offset += split.half_length(h)
            a, b = split.edge_endpoints(i)
            result.append(
                LinearFunctional(
                    DofKind.edge_moment, ("edge", i), ("wn", k), samples, k + 1, True, 0.5 * (a + b), "w.n P%s on edge %s" % (k, i)
                )
            )
    return result


def linear_vector_basis(split: MacroSplit) -> List[PiecewisePolynomial]:
    """The six vector fields ``lambda_j e_c`` linear on the unsplit macro-triangle."""
    matrix = np.vstack([np.ones(3), split.vertices.T])
    inverse = np.linalg.inv(matrix)
    zero = PolynomialScalar([[0.0]])
    result = []
    for j in range(3):
        lam = PolynomialScalar([[inverse[j, 0], inverse[j, 2]], [inverse[j, 1], 0.0]])
        for c in range(2):
            components = (lam, zero) if c == 0 else (zero, lam)
            result.append(interpolate(split, 1, VectorField(*components)))
    return result


def nedelec_interpolant(
    split: MacroSplit, data: Callable[[int, np.ndarray], np.ndarray]
) -> PiecewisePolynomial:
    """Linear vector field whose normal moments match scalar edge data.

    Args:
        split: Macro-triangle.
        data: ``data(i, points)`` giving the wanted normal component on edge i.

    Returns:
        The linear field.
    """
    dofs = nedelec_hdiv_dofs(split)
    basis = linear_vector_basis(split)
    matrix = np.array([[dof(b) for b in basis] for dof in dofs])
    target = _EdgeNormalData(split, data)
    rhs = np.array([dof(target) for dof in dofs])
    coords = np.linalg.solve(matrix, rhs)
    coeffs = sum(c * b.coeffs for c, b in zip(coords, basis))
    return PiecewisePolynomial(split, 1, coeffs)
