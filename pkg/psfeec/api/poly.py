"""Piecewise polynomials on a Powell–Sabin split.

A :class:`PiecewisePolynomial` stores Bernstein–Bézier coefficients of
degree ``r`` on each of the six subtriangles of one macro-triangle. No
continuity is implied; continuity and smoothness are constraints of the
spaces built in :mod:`psfeec.api.spaces`.

Flat coefficient vectors are ordered cell major, then component, then
BB index, which is the layout used by every coefficient matrix here.
"""
import logging
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from scipy.linalg import block_diag

from psfeec.api.bernstein import (
    bernstein_values,
    de_casteljau,
    derivative_matrices,
    dimension,
    domain_points,
    elevation_matrix,
    interpolation_matrix,
    multi_indices,
    multiply_linear_matrix,
)
from psfeec.api.config import Config
from psfeec.api.mesh import MacroSplit
from psfeec.api.quadrature import interval_rule, map_triangle_rule
from psfeec.enums import Region, Trace
from psfeec.exceptions import ResidualError
from psfeec.utils import chebyshev_points

__all__ = [
    "PiecewisePolynomial",
    "EdgePolynomial",
    "CoefficientProbe",
    "evaluate",
    "bernstein_matrix",
    "rot_scalar",
    "divergence",
    "gradient",
    "mu_field",
    "factor_out_mu",
    "multiply_linear",
    "mu_power",
    "elevate",
    "integrate",
    "edge_trace",
    "interpolate",
    "jump",
    "partial_matrix",
    "rot_matrix",
    "div_matrix",
    "gradient_matrix",
    "mu_power_matrix",
]

logger = logging.getLogger(__name__)

NCELLS = 6


class PiecewisePolynomial:
    """Scalar or vector field, polynomial on every subtriangle.

    Args:
        split: The macro-triangle the field lives on.
        degree: Polynomial degree on each subtriangle.
        coeffs: Coefficients of shape (6, ncomp, N) or a flat vector.
        ncomp: Number of components (1 or 2); inferred from a 3D array.

    Examples:
        >>> from psfeec.api.mesh import powell_sabin_refine, reference_triangle
        >>> split = powell_sabin_refine(reference_triangle())[0]
        >>> mu = mu_field(split)
        >>> float(mu.evaluate(split.z0)[0])
        1.0
    """

    def __init__(
        self,
        split: MacroSplit,
        degree: int,
        coeffs: np.ndarray,
        ncomp: Optional[int] = None,
    ) -> None:
        coeffs = np.asarray(coeffs, dtype=float)
        size = dimension(degree)
        if ncomp is None:
            ncomp = coeffs.shape[1] if coeffs.ndim == 3 else 1
        if coeffs.size != NCELLS * ncomp * size:
            raise ValueError(
                "expected %s coefficients for degree %s with %s components, got %s"
                % (NCELLS * ncomp * size, degree, ncomp, coeffs.size)
            )
        self._split = split
        self._degree = int(degree)
        self._ncomp = int(ncomp)
        self._coeffs = coeffs.reshape(NCELLS, ncomp, size).copy()
        self._coeffs.setflags(write=False)

    @classmethod
    def zeros(cls, split: MacroSplit, degree: int, ncomp: int = 1) -> "PiecewisePolynomial":
        """Zero field of the given degree."""
        return cls(split, degree, np.zeros((NCELLS, ncomp, dimension(degree))))

    @classmethod
    def from_dict(cls, split: MacroSplit, data: Dict[str, Any]) -> "PiecewisePolynomial":
        """Rebuild a field from :meth:`to_dict` output."""
        ncomp = 1 if data["rank"] == "scalar" else 2
        return cls(split, data["degree"], np.array(data["coefficients"]), ncomp)

    def to_dict(self) -> Dict[str, Any]:
        """JSON friendly representation in lexicographic BB order."""
        return {
            "degree": self._degree,
            "rank": "scalar" if self._ncomp == 1 else "vector2",
            "macro": self._split.index,
            "coefficients": self._coeffs.tolist(),
        }

    @property
    def split(self) -> MacroSplit:
        """MacroSplit: Macro-triangle of the field."""
        return self._split

    @property
    def degree(self) -> int:
        """int: Degree on each subtriangle."""
        return self._degree

    @property
    def ncomp(self) -> int:
        """int: Number of components."""
        return self._ncomp

    @property
    def coeffs(self) -> np.ndarray:
        """np.ndarray: Read-only coefficients (6, ncomp, N)."""
        return self._coeffs

    @property
    def vector(self) -> np.ndarray:
        """np.ndarray: Flat coefficient vector."""
        return self._coeffs.ravel()

    def _cells(self, points: np.ndarray, cell: Optional[int]) -> np.ndarray:
        if cell is None:
            return self._split.locate(points)
        return np.full(len(points), cell, dtype=int)

    def evaluate(self, points: np.ndarray, cell: Optional[int] = None) -> np.ndarray:
        """Evaluate the field with de Casteljau.

        Args:
            points: Points of shape (p, 2).
            cell: Subtriangle to use for every point; located otherwise.

        Returns:
            Values of shape (p,) for scalars and (p, 2) for vectors.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        cells = self._cells(points, cell)
        result = np.zeros((len(points), self._ncomp))
        for c in np.unique(cells):
            mask = cells == c
            bary = self._split.barycentric(points[mask], c)
            result[mask] = de_casteljau(self._coeffs[c].T, self._degree, bary)
        return result[:, 0] if self._ncomp == 1 else result

    def gradient(self, points: np.ndarray, cell: Optional[int] = None) -> np.ndarray:
        """Evaluate the gradient of every component.

        Returns:
            Shape (p, 2) for scalars and (p, 2, 2) indexed ``[point, component,
            direction]`` for vectors.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        cells = self._cells(points, cell)
        n = self._degree
        result = np.zeros((len(points), self._ncomp, 2))
        if n > 0:
            for c in np.unique(cells):
                mask = cells == c
                bary = self._split.barycentric(points[mask], c)
                derivative = derivative_matrices(n, self._split.bary_grads[c])
                for d in range(2):
                    coeffs = derivative[d] @ self._coeffs[c].T
                    result[mask, :, d] = de_casteljau(coeffs, n - 1, bary)
        return result[:, 0, :] if self._ncomp == 1 else result

    def elevate(self, times: int = 1) -> "PiecewisePolynomial":
        """Same field written with degree raised by ``times``."""
        return elevate(self, times)

    def component(self, index: int) -> "PiecewisePolynomial":
        """Scalar field of one component."""
        return PiecewisePolynomial(self._split, self._degree, self._coeffs[:, index : index + 1])

    def sup_norm(self, per_side: int = 8) -> float:
        """Max abs value over the uniform sample grid of every subtriangle."""
        best = 0.0
        for cell, points in self._split.sample_points(per_side):
            best = max(best, float(np.max(np.abs(self.evaluate(points, cell)))))
        return best

    def coefficient_norm(self) -> float:
        """Max abs BB coefficient."""
        return float(np.max(np.abs(self._coeffs), initial=0.0))

    def _aligned(self, other: "PiecewisePolynomial") -> Tuple[np.ndarray, np.ndarray, int]:
        if other.split is not self._split or other.ncomp != self._ncomp:
            raise ValueError("fields live on different splits or have different ranks")
        degree = max(self._degree, other.degree)
        return (
            elevate(self, degree - self._degree).coeffs,
            elevate(other, degree - other.degree).coeffs,
            degree,
        )

    def __add__(self, other: "PiecewisePolynomial") -> "PiecewisePolynomial":
        a, b, degree = self._aligned(other)
        return PiecewisePolynomial(self._split, degree, a + b)

    def __sub__(self, other: "PiecewisePolynomial") -> "PiecewisePolynomial":
        a, b, degree = self._aligned(other)
        return PiecewisePolynomial(self._split, degree, a - b)

    def __neg__(self) -> "PiecewisePolynomial":
        return PiecewisePolynomial(self._split, self._degree, -self._coeffs)

    def __mul__(self, factor: float) -> "PiecewisePolynomial":
        return PiecewisePolynomial(self._split, self._degree, self._coeffs * float(factor))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return "PiecewisePolynomial(macro=%s, degree=%s, ncomp=%s)" % (
            self._split.index,
            self._degree,
            self._ncomp,
        )


class EdgePolynomial:
    """Trace of a field on one macro-edge.

    The parameter is arc length from the first endpoint of the edge in
    counter-clockwise order; the two halves meet at the split point.

    Args:
        edge: Local edge index.
        lengths: Lengths of the two halves.
        halves: Polynomials on ``[0, l1]`` and ``[l1, l1 + l2]``.
    """

    def __init__(
        self, edge: int, lengths: Tuple[float, float], halves: Tuple[Polynomial, Polynomial]
    ) -> None:
        self.edge = edge
        self.lengths = (float(lengths[0]), float(lengths[1]))
        self.halves = halves

    @property
    def split_parameter(self) -> float:
        """float: Arc length of the split point."""
        return self.lengths[0]

    @property
    def length(self) -> float:
        """float: Length of the whole edge."""
        return self.lengths[0] + self.lengths[1]

    def __call__(self, t: Union[float, np.ndarray]) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.where(t <= self.split_parameter, self.halves[0](t), self.halves[1](t))

    def continuity_defect(self) -> float:
        """Difference of the two halves at the split point."""
        m = self.split_parameter
        return float(abs(self.halves[0](m) - self.halves[1](m)))

    def max_abs(self, samples: int = 10) -> float:
        """Max abs value over Chebyshev samples of both halves."""
        s = chebyshev_points(samples)
        t = np.concatenate([s * self.lengths[0], self.lengths[0] + s * self.lengths[1]])
        return float(np.max(np.abs(self(t))))

    def derivative(self) -> "EdgePolynomial":
        """Arc-length derivative, half by half."""
        return EdgePolynomial(self.edge, self.lengths, (self.halves[0].deriv(), self.halves[1].deriv()))


class CoefficientProbe:
    """Linear maps from flat coefficient vectors to point values.

    Args:
        split: Macro-triangle.
        degree: Degree of the probed fields.
        ncomp: Number of components of the probed fields.
    """

    def __init__(self, split: MacroSplit, degree: int, ncomp: int = 1) -> None:
        self.split = split
        self.degree = degree
        self.ncomp = ncomp
        self.size = dimension(degree)
        self.ncoef = NCELLS * ncomp * self.size
        self._values: Dict[Tuple[int, bytes], np.ndarray] = {}
        self._gradients: Dict[Tuple[int, bytes], np.ndarray] = {}

    def _offset(self, cell: int, comp: int) -> int:
        return (cell * self.ncomp + comp) * self.size

    def values(self, cell: int, points: np.ndarray) -> np.ndarray:
        """Matrix of shape (p, ncomp, ncoef) of point values in a subtriangle."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        key = (cell, points.tobytes())
        if key not in self._values:
            basis = bernstein_values(self.degree, self.split.barycentric(points, cell))
            result = np.zeros((len(points), self.ncomp, self.ncoef))
            for comp in range(self.ncomp):
                start = self._offset(cell, comp)
                result[:, comp, start : start + self.size] = basis
            self._values[key] = result
        return self._values[key]

    def gradients(self, cell: int, points: np.ndarray) -> np.ndarray:
        """Matrix of shape (p, ncomp, 2, ncoef) of point gradients in a subtriangle."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        key = (cell, points.tobytes())
        if key not in self._gradients:
            result = np.zeros((len(points), self.ncomp, 2, self.ncoef))
            if self.degree > 0:
                lower = bernstein_values(self.degree - 1, self.split.barycentric(points, cell))
                derivative = derivative_matrices(self.degree, self.split.bary_grads[cell])
                for comp in range(self.ncomp):
                    start = self._offset(cell, comp)
                    for d in range(2):
                        result[:, comp, d, start : start + self.size] = lower @ derivative[d]
            self._gradients[key] = result
        return self._gradients[key]


def evaluate(
    f: PiecewisePolynomial, points: np.ndarray, cell: Optional[int] = None
) -> np.ndarray:
    """Evaluate a field at points, see :meth:`PiecewisePolynomial.evaluate`."""
    return f.evaluate(points, cell)


def bernstein_matrix(degree: int, bary: np.ndarray) -> np.ndarray:
    """Bernstein polynomials of a degree at barycentric coordinates."""
    return bernstein_values(degree, bary)


def _lower(degree: int) -> int:
    return max(degree - 1, 0)


def partial_matrix(split: MacroSplit, degree: int, direction: int) -> np.ndarray:
    """Matrix of a partial derivative on scalar flat coefficients.

    The image has degree ``degree - 1``, or degree 0 when ``degree == 0``.
    """
    return _partial_matrix(split, degree, direction)


def _partial_matrix(split: MacroSplit, degree: int, direction: int) -> np.ndarray:
    key = ("partial", degree, direction)
    if key not in split.cache:
        blocks = [
            derivative_matrices(degree, split.bary_grads[c])[direction] for c in range(NCELLS)
        ]
        matrix = block_diag(*blocks)
        matrix.setflags(write=False)
        split.cache[key] = matrix
    return split.cache[key]


def _interleave(blocks: Tuple[Tuple[np.ndarray, ...], ...], size_in: int, size_out: int) -> np.ndarray:
    """Assemble per-component operators into the cell-major flat layout.

    ``blocks[out_comp][in_comp]`` acts on scalar flat vectors.
    """
    nout, nin = len(blocks), len(blocks[0])
    result = np.zeros((NCELLS * nout * size_out, NCELLS * nin * size_in))
    for c in range(NCELLS):
        for i in range(nout):
            rows = slice((c * nout + i) * size_out, (c * nout + i + 1) * size_out)
            for j in range(nin):
                block = blocks[i][j]
                if block is None:
                    continue
                cols = slice((c * nin + j) * size_in, (c * nin + j + 1) * size_in)
                result[rows, cols] = block[
                    c * size_out : (c + 1) * size_out, c * size_in : (c + 1) * size_in
                ]
    return result


def rot_matrix(split: MacroSplit, degree: int) -> np.ndarray:
    """Matrix of ``rot q = (dq/dy, -dq/dx)`` on flat coefficients."""
    key = ("rot", degree)
    if key not in split.cache:
        dx, dy = partial_matrix(split, degree, 0), partial_matrix(split, degree, 1)
        matrix = _interleave(((dy,), (-dx,)), dimension(degree), dimension(_lower(degree)))
        matrix.setflags(write=False)
        split.cache[key] = matrix
    return split.cache[key]


def gradient_matrix(split: MacroSplit, degree: int) -> np.ndarray:
    """Matrix of the gradient on flat scalar coefficients."""
    key = ("grad", degree)
    if key not in split.cache:
        dx, dy = partial_matrix(split, degree, 0), partial_matrix(split, degree, 1)
        matrix = _interleave(((dx,), (dy,)), dimension(degree), dimension(_lower(degree)))
        matrix.setflags(write=False)
        split.cache[key] = matrix
    return split.cache[key]


def div_matrix(split: MacroSplit, degree: int) -> np.ndarray:
    """Matrix of the divergence on flat vector coefficients."""
    key = ("div", degree)
    if key not in split.cache:
        dx, dy = partial_matrix(split, degree, 0), partial_matrix(split, degree, 1)
        matrix = _interleave(((dx, dy),), dimension(degree), dimension(_lower(degree)))
        matrix.setflags(write=False)
        split.cache[key] = matrix
    return split.cache[key]


def rot_scalar(q: PiecewisePolynomial) -> PiecewisePolynomial:
    """Rot of a scalar field, one degree lower.

    Examples:
        >>> from psfeec.api.mesh import powell_sabin_refine, reference_triangle
        >>> split = powell_sabin_refine(reference_triangle())[0]
        >>> v = rot_scalar(mu_field(split))
        >>> (v.degree, v.ncomp)
        (0, 2)
    """
    if q.ncomp != 1:
        raise ValueError("rot_scalar expects a scalar field")
    vector = rot_matrix(q.split, q.degree) @ q.vector
    return PiecewisePolynomial(q.split, _lower(q.degree), vector, 2)


def divergence(v: PiecewisePolynomial) -> PiecewisePolynomial:
    """Divergence of a vector field, one degree lower."""
    if v.ncomp != 2:
        raise ValueError("divergence expects a vector field")
    vector = div_matrix(v.split, v.degree) @ v.vector
    return PiecewisePolynomial(v.split, _lower(v.degree), vector, 1)


def gradient(q: PiecewisePolynomial) -> PiecewisePolynomial:
    """Gradient of a scalar field, one degree lower."""
    if q.ncomp != 1:
        raise ValueError("gradient expects a scalar field")
    vector = gradient_matrix(q.split, q.degree) @ q.vector
    return PiecewisePolynomial(q.split, _lower(q.degree), vector, 2)


def mu_field(split: MacroSplit) -> PiecewisePolynomial:
    """The piecewise linear bubble: 1 at the interior point, 0 on the boundary.

    Examples:
        >>> from psfeec.api.mesh import powell_sabin_refine, reference_triangle
        >>> split = powell_sabin_refine(reference_triangle())[0]
        >>> bool(np.allclose(mu_field(split).evaluate(split.points[1:]), 0.0))
        True
    """
    coeffs = np.zeros((NCELLS, 1, 3))
    coeffs[:, 0, 0] = 1.0
    return PiecewisePolynomial(split, 1, coeffs)


def elevate(f: PiecewisePolynomial, times: int = 1) -> PiecewisePolynomial:
    """Rewrite a field with its degree raised by ``times``."""
    if times == 0:
        return f
    matrix = elevation_matrix(f.degree, times)
    coeffs = np.einsum("ij,cpj->cpi", matrix, f.coeffs)
    return PiecewisePolynomial(f.split, f.degree + times, coeffs)


def multiply_linear(f: PiecewisePolynomial, g: PiecewisePolynomial) -> PiecewisePolynomial:
    """Exact product of a field with a scalar piecewise linear field."""
    if g.ncomp != 1 or g.degree != 1:
        raise ValueError("the second factor must be a scalar piecewise linear field")
    coeffs = np.stack(
        [
            np.einsum("ij,pj->pi", multiply_linear_matrix(f.degree, g.coeffs[c, 0]), f.coeffs[c])
            for c in range(NCELLS)
        ]
    )
    return PiecewisePolynomial(f.split, f.degree + 1, coeffs)


def mu_power(f: PiecewisePolynomial, power: int) -> PiecewisePolynomial:
    """Product of a field with a power of the bubble."""
    mu = mu_field(f.split)
    for _ in range(power):
        f = multiply_linear(f, mu)
    return f


def mu_power_matrix(split: MacroSplit, degree: int, power: int, ncomp: int = 1) -> np.ndarray:
    """Matrix of the product with ``mu**power`` on flat coefficients."""
    key = ("mu_power", degree, power, ncomp)
    if key not in split.cache:
        block = np.eye(dimension(degree))
        for k in range(power):
            block = multiply_linear_matrix(degree + k, np.array([1.0, 0.0, 0.0])) @ block
        matrix = block_diag(*([block] * (NCELLS * ncomp)))
        matrix.setflags(write=False)
        split.cache[key] = matrix
    return split.cache[key]


def factor_out_mu(
    q: PiecewisePolynomial, tol: Optional[float] = None
) -> PiecewisePolynomial:
    """Divide a field vanishing on the macro boundary by the bubble.

    On every subtriangle the bubble is the barycentric coordinate of the
    interior point, so the division is a shift of BB indices.

    Args:
        q: Field of degree r vanishing on the macro boundary.
        tol: Relative tolerance on the boundary trace, the residual
            tolerance of the active config by default.

    Returns:
        The field p of degree r - 1 (degree 0 for r = 0) with ``mu * p = q``.

    Raises:
        ResidualError: When q does not vanish on the macro boundary.

    Examples:
        >>> from psfeec.api.mesh import powell_sabin_refine, reference_triangle
        >>> split = powell_sabin_refine(reference_triangle())[0]
        >>> p = factor_out_mu(mu_field(split))
        >>> (p.degree, float(p.evaluate(split.z0)[0]))
        (0, 1.0)
    """
    tol = Config.current().tolerance.residual if tol is None else tol
    n = q.degree
    alphas = multi_indices(n)
    boundary = alphas[:, 0] == 0
    scale = max(q.coefficient_norm(), 1e-300)
    trace = float(np.max(np.abs(q.coeffs[:, :, boundary]), initial=0.0))
    if trace > tol * scale:
        raise ResidualError(
            "field does not vanish on the macro boundary (relative trace %.3e)" % (trace / scale),
            residuals=(trace / scale,),
        )
    if n == 0:
        return PiecewisePolynomial.zeros(q.split, 0, q.ncomp)
    factors = n / alphas[~boundary, 0]
    coeffs = q.coeffs[:, :, ~boundary] * factors
    return PiecewisePolynomial(q.split, n - 1, coeffs)


def _integrand(
    f: PiecewisePolynomial, other: Any, points: np.ndarray, cell: int
) -> np.ndarray:
    values = np.asarray(f.evaluate(points, cell)).reshape(len(points), -1)
    if other is None:
        return values
    weights = np.asarray(other.evaluate(points, cell)).reshape(len(points), -1)
    if values.shape[1] == weights.shape[1]:
        return np.sum(values * weights, axis=1, keepdims=True)
    return values * weights


def integrate(
    f: PiecewisePolynomial,
    region: Region = Region.macro,
    index: Optional[int] = None,
    other: Any = None,
    degree: Optional[int] = None,
) -> Union[float, np.ndarray]:
    """Integrate a field or a product over a subtriangle, the macro or a half-edge.

    Args:
        f: The field.
        region: Integration region.
        index: Subtriangle or half-edge index.
        other: Optional second factor (field or closed-form evaluator);
            vectors are paired by dot product.
        degree: Quadrature exactness, derived from the factors by default.

    Returns:
        A float for scalar integrands, an array for vector ones.

    Raises:
        QuadratureError: When the exactness exceeds the available rules.

    Examples:
        >>> from psfeec.api.mesh import powell_sabin_refine, reference_triangle
        >>> split = powell_sabin_refine(reference_triangle())[0]
        >>> round(float(integrate(mu_field(split))), 14)
        0.16666666666667
    """
    if degree is None:
        if other is None:
            degree = f.degree
        elif isinstance(other, PiecewisePolynomial):
            degree = f.degree + other.degree
        else:
            degree = Config.current().quadrature.moment_degree
    split = f.split
    total = 0.0
    if region == Region.edge_half:
        start, end = split.half_endpoints(index)
        t, weights = interval_rule(degree)
        points = start[None, :] + t[:, None] * (end - start)[None, :]
        values = _integrand(f, other, points, index)
        total = (weights * split.half_length(index)) @ values
    else:
        cells = range(NCELLS) if region == Region.macro else [index]
        for c in cells:
            if other is None:
                total = total + split.areas[c] * f.coeffs[c].mean(axis=1)
                continue
            points, _, weights = map_triangle_rule(split.cell_vertices[c], degree)
            total = total + weights @ _integrand(f, other, points, c)
    total = np.asarray(total, dtype=float).ravel()
    return float(total[0]) if total.size == 1 else total


def _trace_values(f: PiecewisePolynomial, which: Trace, i: int, points: np.ndarray, cell: int) -> np.ndarray:
    split = f.split
    if which == Trace.value:
        return np.asarray(f.evaluate(points, cell)).reshape(len(points), -1)[:, 0]
    if which == Trace.normal_component:
        return f.evaluate(points, cell) @ split.normals[i]
    if which == Trace.tangential_component:
        return f.evaluate(points, cell) @ split.tangents[i]
    if which == Trace.normal_derivative:
        return f.gradient(points, cell) @ split.normals[i]
    jacobian = f.gradient(points, cell)
    return jacobian[:, 0, 0] + jacobian[:, 1, 1]


def _trace_degree(f: PiecewisePolynomial, which: Trace) -> int:
    if which in (Trace.normal_derivative, Trace.divergence):
        return _lower(f.degree)
    return f.degree


def edge_trace(f: PiecewisePolynomial, i: int, which: Trace = Trace.value) -> EdgePolynomial:
    """Restrict a quantity of a field to macro-edge i.

    Args:
        f: Scalar field for value and normal derivative, vector field for
            the component and divergence traces.
        i: Local edge index.
        which: The restricted quantity.

    Returns:
        The trace as an arc-length :class:`EdgePolynomial`.
    """
    split = f.split
    degree = _trace_degree(f, which)
    halves = []
    lengths = (split.half_length(2 * i), split.half_length(2 * i + 1))
    offset = 0.0
    for side in range(2):
        h = 2 * i + side
        start, end = split.half_endpoints(h)
        s = chebyshev_points(degree + 1)
        points = start[None, :] + s[:, None] * (end - start)[None, :]
        values = _trace_values(f, which, i, points, h)
        t = offset + s * lengths[side]
        domain = [offset, offset + lengths[side]]
        halves.append(Polynomial.fit(t, values, degree, domain=domain))
        offset += lengths[side]
    return EdgePolynomial(i, lengths, (halves[0], halves[1]))


def interpolate(
    split: MacroSplit, degree: int, field: Any, ncomp: Optional[int] = None
) -> PiecewisePolynomial:
    """Interpolate a field at the domain points of every subtriangle.

    Exact for fields that are polynomials of degree at most ``degree`` on
    every subtriangle.

    Args:
        split: Macro-triangle.
        degree: Target degree.
        field: Object with ``evaluate(points, cell)`` (and ``ncomp``).
        ncomp: Number of components, taken from the field by default.

    Returns:
        The interpolant.
    """
    ncomp = ncomp or getattr(field, "ncomp", 1)
    inverse = interpolation_matrix(degree)
    coeffs = np.zeros((NCELLS, ncomp, dimension(degree)))
    for c in range(NCELLS):
        points = domain_points(degree) @ split.cell_vertices[c]
        values = np.asarray(field.evaluate(points, c)).reshape(len(points), ncomp)
        coeffs[c] = (inverse @ values).T
    return PiecewisePolynomial(split, degree, coeffs)


def jump(f: PiecewisePolynomial, i: int) -> Union[float, np.ndarray]:
    """Jump at the split point of edge i: lower subtriangle minus upper one.

    Examples:
        >>> from psfeec.api.mesh import powell_sabin_refine, reference_triangle
        >>> split = powell_sabin_refine(reference_triangle())[0]
        >>> jump(mu_field(split), 0)
        0.0
    """
    point = f.split.split_points[i]
    difference = f.evaluate(point, 2 * i)[0] - f.evaluate(point, 2 * i + 1)[0]
    return float(difference) if f.ncomp == 1 else np.asarray(difference)

