"""Closed-form smooth fields used as projection and Stokes inputs.

Every scalar field knows its partial derivatives in closed form, so
gradients, rot, div and Laplacians of the fields are again fields of
this module. All evaluators accept ``(points, cell=None)`` like
:class:`~psfeec.api.poly.PiecewisePolynomial` so either can be fed to
the degree of freedom functionals.
"""
from typing import List, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

__all__ = [
    "ScalarField",
    "PolynomialScalar",
    "WaveScalar",
    "SumScalar",
    "VectorField",
    "random_scalar",
    "random_vector",
]


class ScalarField:
    """Base class of closed-form scalar fields."""

    ncomp = 1

    def evaluate(self, points: np.ndarray, cell: Optional[int] = None) -> np.ndarray:
        """Values at points of shape (p, 2)."""
        raise NotImplementedError

    def partial(self, direction: int) -> "ScalarField":
        """Partial derivative in x (0) or y (1)."""
        raise NotImplementedError

    def scale(self, factor: float) -> "ScalarField":
        """Field multiplied by a constant."""
        raise NotImplementedError

    def gradient(self, points: np.ndarray, cell: Optional[int] = None) -> np.ndarray:
        """Gradient at points, shape (p, 2)."""
        return np.column_stack([self.partial(d).evaluate(points) for d in range(2)])

    def grad(self) -> "VectorField":
        """Gradient as a vector field."""
        return VectorField(self.partial(0), self.partial(1))

    def rot(self) -> "VectorField":
        """``(d/dy, -d/dx)`` of the field."""
        return VectorField(self.partial(1), self.partial(0).scale(-1.0))

    def laplacian(self) -> "ScalarField":
        """Sum of the second pure partials."""
        return SumScalar([self.partial(0).partial(0), self.partial(1).partial(1)])

    def __add__(self, other: "ScalarField") -> "ScalarField":
        return SumScalar([self, other])

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        return SumScalar([self, other.scale(-1.0)])


class PolynomialScalar(ScalarField):
    """Polynomial ``sum c[i, j] x**i y**j``.

    Args:
        coeffs: 2D coefficient array.

    Examples:
        >>> q = PolynomialScalar([[0.0, 1.0], [1.0, 0.0]])
        >>> q.evaluate(np.array([[2.0, 3.0]])).tolist()
        [5.0]
        >>> q.partial(1).evaluate(np.array([[2.0, 3.0]])).tolist()
        [1.0]
    """

    def __init__(self, coeffs: Sequence[Sequence[float]]) -> None:
        self.coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))

    @classmethod
    def monomial(cls, i: int, j: int, factor: float = 1.0) -> "PolynomialScalar":
        """The monomial ``factor * x**i * y**j``."""
        coeffs = np.zeros((i + 1, j + 1))
        coeffs[i, j] = factor
        return cls(coeffs)

    @property
    def degree(self) -> int:
        """int: Total degree of the nonzero terms."""
        i, j = np.nonzero(self.coeffs)
        return int(np.max(i + j, initial=0))

    def evaluate(self, points: np.ndarray, cell: Optional[int] = None) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return P.polyval2d(points[:, 0], points[:, 1], self.coeffs)

    def partial(self, direction: int) -> "PolynomialScalar":
        if self.coeffs.shape[direction] == 1:
            return PolynomialScalar(np.zeros((1, 1)))
        return PolynomialScalar(P.polyder(self.coeffs, axis=direction))

    def scale(self, factor: float) -> "PolynomialScalar":
        return PolynomialScalar(self.coeffs * factor)


class WaveScalar(ScalarField):
    """Plane wave ``amplitude * sin(k . x + phase)``.

    Examples:
        >>> w = WaveScalar(2.0, [1.0, 0.0], 0.0)
        >>> round(float(w.partial(0).evaluate(np.array([[0.0, 0.0]]))[0]), 12)
        2.0
    """

    def __init__(self, amplitude: float, wavevector: Sequence[float], phase: float) -> None:
        self.amplitude = float(amplitude)
        self.wavevector = np.asarray(wavevector, dtype=float)
        self.phase = float(phase)

    def evaluate(self, points: np.ndarray, cell: Optional[int] = None) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return self.amplitude * np.sin(points @ self.wavevector + self.phase)

    def partial(self, direction: int) -> "WaveScalar":
        return WaveScalar(
            self.amplitude * self.wavevector[direction], self.wavevector, self.phase + np.pi / 2
        )

    def scale(self, factor: float) -> "WaveScalar":
        return WaveScalar(self.amplitude * factor, self.wavevector, self.phase)


class SumScalar(ScalarField):
    """Sum of scalar fields."""

    def __init__(self, terms: List[ScalarField]) -> None:
        self.terms = list(terms)

    def evaluate(self, points: np.ndarray, cell: Optional[int] = None) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        total = np.zeros(len(points))
        for term in self.terms:
            total = total + term.evaluate(points)
        return total

    def partial(self, direction: int) -> "SumScalar":
        return SumScalar([term.partial(direction) for term in self.terms])

    def scale(self, factor: float) -> "SumScalar":
        return SumScalar([term.scale(factor) for term in self.terms])


class VectorField:
    """Vector field with two closed-form scalar components.

    Examples:
        >>> v = VectorField(PolynomialScalar.monomial(1, 0), PolynomialScalar.monomial(0, 1))
        >>> v.div().evaluate(np.array([[0.3, 0.4]])).tolist()
        [2.0]
    """

    ncomp = 2

    def __init__(self, first: ScalarField, second: ScalarField) -> None:
        self.components = (first, second)

    def evaluate(self, points: np.ndarray, cell: Optional[int] = None) -> np.ndarray:
        """Values at points, shape (p, 2)."""
        return np.column_stack([c.evaluate(points) for c in self.components])

    def gradient(self, points: np.ndarray, cell: Optional[int] = None) -> np.ndarray:
        """Jacobian at points, shape (p, 2, 2) indexed ``[point, component, direction]``."""
        return np.stack([c.gradient(points) for c in self.components], axis=1)

    def div(self) -> ScalarField:
        """Divergence."""
        return SumScalar([self.components[0].partial(0), self.components[1].partial(1)])

    def laplacian(self) -> "VectorField":
        """Componentwise Laplacian."""
        return VectorField(self.components[0].laplacian(), self.components[1].laplacian())

    def scale(self, factor: float) -> "VectorField":
        """Field multiplied by a constant."""
        return VectorField(self.components[0].scale(factor), self.components[1].scale(factor))

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(
            self.components[0] + other.components[0], self.components[1] + other.components[1]
        )

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + other.scale(-1.0)


def random_scalar(
    rng: np.random.Generator, degree: int = 3, waves: int = 2
) -> ScalarField:
    """Random smooth scalar: a polynomial plus plane waves.

    Args:
        rng: Seeded random generator.
        degree: Total degree of the polynomial part.
        waves: Number of plane waves.

    Returns:
        The field.
    """
    coeffs = np.zeros((degree + 1, degree + 1))
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            coeffs[i, j] = rng.uniform(-1.0, 1.0)
    terms: List[ScalarField] = [PolynomialScalar(coeffs)]
    for _ in range(waves):
        terms.append(
            WaveScalar(rng.uniform(0.2, 1.0), rng.uniform(-2.0, 2.0, size=2), rng.uniform(0, 2 * np.pi))
        )
    return SumScalar(terms)


def random_vector(rng: np.random.Generator, degree: int = 3, waves: int = 2) -> VectorField:
    """Random smooth vector field with independent components."""
    return VectorField(random_scalar(rng, degree, waves), random_scalar(rng, degree, waves))
