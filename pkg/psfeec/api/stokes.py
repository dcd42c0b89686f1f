"""Stokes problem with the divergence-free pairs of the global sequences.

The velocity lives in the middle space of a global sequence and the
pressure in its last space, so the discrete velocity is divergence-free
pointwise. Element matrices are computed on local BB coefficients and
mapped to global DOFs with the local dual bases.
"""
import logging
import warnings
from dataclasses import dataclass
from typing import Any, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, sparse
from scipy.sparse.linalg import MatrixRankWarning, spsolve

from psfeec.api.assembly import GlobalField, GlobalSpace, assemble_global
from psfeec.api.config import Config
from psfeec.api.fields import PolynomialScalar, ScalarField, VectorField
from psfeec.api.mesh import MacroMesh, MacroSplit, SplitComplex, powell_sabin_refine, refine_uniform
from psfeec.api.poly import CoefficientProbe, divergence
from psfeec.api.quadrature import interval_rule, map_triangle_rule
from psfeec.enums import Family, GlobalSequence, PressureSpace
from psfeec.exceptions import Bug, ClientError, InadmissibleDegreeError
from psfeec.utils import parallel_map

__all__ = [
    "StokesProblem",
    "StokesSolution",
    "pair_spaces",
    "solve_stokes",
    "manufactured_solution",
    "boundary_flux",
    "error_norms",
    "infsup_estimate",
    "InfSupResult",
    "infsup_sequence",
    "pressure_robustness",
    "StokesRow",
    "convergence_study",
]

logger = logging.getLogger(__name__)

_LOWEST = {GlobalSequence.SLV: 2, GlobalSequence.SSL: 3}


@dataclass
class StokesProblem:
    """Velocity–pressure problem on a refinement.

    Attributes:
        sc: The refinement.
        force: Body force.
        boundary: Dirichlet velocity data.
        pair: Sequence providing the velocity and pressure spaces.
        r: Degree of the sequence; the velocity has degree r - 1.
        viscosity: Viscosity.
        pressure: Conforming pressure space or the broken one.
    """

    sc: SplitComplex
    force: VectorField
    boundary: VectorField
    pair: GlobalSequence = GlobalSequence.SLV
    r: int = 2
    viscosity: float = 1.0
    pressure: PressureSpace = PressureSpace.conforming


class StokesSolution(NamedTuple):
    """Discrete velocity and pressure."""

    velocity: GlobalField
    pressure: GlobalField
    multiplier: float


def pair_spaces(
    sc: SplitComplex,
    pair: GlobalSequence,
    r: int,
    pressure: PressureSpace = PressureSpace.conforming,
) -> Tuple[GlobalSpace, GlobalSpace, np.ndarray]:
    """Velocity space, pressure space and the mask of active pressure DOFs.

    Raises:
        InadmissibleDegreeError: Below the lowest degree of the pair.
    """
    if r < _LOWEST[pair]:
        raise InadmissibleDegreeError("the %s pair needs r >= %s, got %s" % (pair.value, _LOWEST[pair], r))
    if pair == GlobalSequence.SLV:
        velocity = assemble_global(sc, Family.L1, r - 1)
        family = Family.calV2 if pressure == PressureSpace.conforming else Family.V2
    else:
        velocity = assemble_global(sc, Family.S1, r - 1)
        family = Family.L2 if pressure == PressureSpace.conforming else Family.V2
    space = assemble_global(sc, family, r - 2)
    active = np.ones(space.dim, dtype=bool)
    if family == Family.calV2:
        active = ~space.boundary
    return velocity, space, active


class _Element(NamedTuple):
    stiffness: np.ndarray
    coupling: np.ndarray
    mass: np.ndarray
    mean: np.ndarray
    load: np.ndarray


def _element(
    split: MacroSplit, vdeg: int, pdeg: int, force: Optional[VectorField], vmap, pmap
) -> _Element:
    degree = Config.current().quadrature.moment_degree
    vprobe = CoefficientProbe(split, vdeg, 2)
    pprobe = CoefficientProbe(split, pdeg, 1)
    K = np.zeros((vprobe.ncoef, vprobe.ncoef))
    B = np.zeros((pprobe.ncoef, vprobe.ncoef))
    M = np.zeros((pprobe.ncoef, pprobe.ncoef))
    mean = np.zeros(pprobe.ncoef)
    F = np.zeros(vprobe.ncoef)
    for c in range(split.cells.shape[0]):
        points, _, weights = map_triangle_rule(split.cell_vertices[c], degree)
        G = vprobe.gradients(c, points)
        P = pprobe.values(c, points)[:, 0, :]
        D = np.einsum("pccn->pn", G)
        K += np.einsum("p,pcdn,pcdm->nm", weights, G, G)
        B -= np.einsum("p,pm,pn->mn", weights, P, D)
        M += np.einsum("p,pm,pk->mk", weights, P, P)
        mean += weights @ P
        if force is not None:
            F += np.einsum("p,pc,pcn->n", weights, force.evaluate(points), vprobe.values(c, points))
    vdual, pdual = vmap.dual, pmap.dual
    return _Element(
        vdual.T @ K @ vdual,
        pdual.T @ B @ vdual,
        pdual.T @ M @ pdual,
        pdual.T @ mean,
        vdual.T @ F,
    )


def _scatter(blocks: Sequence[np.ndarray], rows: Sequence[Any], cols: Sequence[Any], shape: Tuple[int, int]) -> sparse.csr_matrix:
    data, ii, jj = [], [], []
    for block, rmap, cmap in zip(blocks, rows, cols):
        signed = block * rmap.signs[:, None] * cmap.signs[None, :]
        ii.append(np.repeat(rmap.indices, len(cmap.indices)))
        jj.append(np.tile(cmap.indices, len(rmap.indices)))
        data.append(signed.ravel())
    if not data:
        return sparse.csr_matrix(shape)
    return sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(ii), np.concatenate(jj))), shape=shape
    ).tocsr()


def _gather(vectors: Sequence[np.ndarray], maps: Sequence[Any], size: int) -> np.ndarray:
    result = np.zeros(size)
    for vector, local in zip(vectors, maps):
        np.add.at(result, local.indices, vector * local.signs)
    return result


class _System(NamedTuple):
    velocity: GlobalSpace
    pressure: GlobalSpace
    active: np.ndarray
    stiffness: sparse.csr_matrix
    coupling: sparse.csr_matrix
    mass: sparse.csr_matrix
    mean: np.ndarray
    load: np.ndarray


def _assemble(
    sc: SplitComplex,
    pair: GlobalSequence,
    r: int,
    pressure: PressureSpace,
    force: Optional[VectorField] = None,
) -> _System:
    velocity, space, active = pair_spaces(sc, pair, r, pressure)

    def element(t: int) -> _Element:
        return _element(sc[t], r - 1, r - 2, force, velocity.maps[t], space.maps[t])

    elements = parallel_map(element, range(len(sc)))
    vmaps, pmaps = velocity.maps, space.maps
    return _System(
        velocity,
        space,
        active,
        _scatter([e.stiffness for e in elements], vmaps, vmaps, (velocity.dim, velocity.dim)),
        _scatter([e.coupling for e in elements], pmaps, vmaps, (space.dim, velocity.dim)),
        _scatter([e.mass for e in elements], pmaps, pmaps, (space.dim, space.dim)),
        _gather([e.mean for e in elements], pmaps, space.dim),
        _gather([e.load for e in elements], vmaps, velocity.dim),
    )


def boundary_flux(sc: SplitComplex, g: VectorField) -> Tuple[float, float]:
    """Net outward flux of g through the domain boundary and its absolute scale."""
    t, weights = interval_rule(Config.current().quadrature.moment_degree)
    flux, scale = 0.0, 0.0
    for split in sc.splits:
        for i in range(3):
            if not split.boundary[i]:
                continue
            a, b = split.edge_endpoints(i)
            points = a[None, :] + t[:, None] * (b - a)[None, :]
            normal = g.evaluate(points) @ split.normals[i]
            length = split.edge_lengths[i]
            flux += float(weights @ normal) * length
            scale += float(weights @ np.abs(normal)) * length
    return flux, scale


def solve_stokes(problem: StokesProblem) -> StokesSolution:
    """Galerkin solution of the velocity–pressure saddle point problem.

    The pressure is fixed by a zero mean multiplier and Dirichlet data are
    imposed through the DOF values of the boundary trace.

    Raises:
        ClientError: When the boundary data have nonzero net flux.
        InadmissibleDegreeError: Below the lowest degree of the pair.
        Bug: When the system is singular.
    """
    flux, scale = boundary_flux(problem.sc, problem.boundary)
    if abs(flux) > Config.current().tolerance.preimage * max(scale, 1.0):
        raise ClientError("boundary data have net flux %.3e; the problem has no solution" % flux)
    system = _assemble(problem.sc, problem.pair, problem.r, problem.pressure, problem.force)
    velocity, space = system.velocity, system.pressure
    fixed = velocity.dirichlet
    free = ~fixed
    ub = velocity.dof_values(problem.boundary)[fixed]
    A = problem.viscosity * system.stiffness
    B = system.coupling[system.active]
    A_ii = A[free][:, free]
    A_ib = A[free][:, fixed]
    B_i = B[:, free]
    B_b = B[:, fixed]
    mean = system.mean[system.active][:, None]
    matrix = sparse.bmat(
        [
            [A_ii, B_i.T, None],
            [B_i, None, sparse.csr_matrix(mean)],
            [None, sparse.csr_matrix(mean.T), None],
        ],
        format="csc",
    )
    rhs = np.concatenate([system.load[free] - A_ib @ ub, -(B_b @ ub), [0.0]])
    with warnings.catch_warnings():
        warnings.simplefilter("error", MatrixRankWarning)
        try:
            solution = spsolve(matrix, rhs)
        except MatrixRankWarning as error:
            raise Bug("singular Stokes system: %s" % error) from error
    if not np.all(np.isfinite(solution)):
        raise Bug("singular Stokes system: non-finite solution")
    u = np.zeros(velocity.dim)
    u[fixed] = ub
    u[free] = solution[: int(free.sum())]
    p = np.zeros(space.dim)
    p[system.active] = solution[int(free.sum()) : -1]
    logger.info(
        "Stokes %s r=%s: %s velocity and %s pressure unknowns",
        problem.pair.value,
        problem.r,
        int(free.sum()),
        int(system.active.sum()),
    )
    return StokesSolution(velocity.field(u), space.field(p), float(solution[-1]))


def manufactured_solution(viscosity: float = 1.0) -> Tuple[VectorField, ScalarField, VectorField]:
    """Stream function flow on the unit square.

    Returns:
        Velocity ``rot(x^2 y^2 (1-x)^2 (1-y)^2)``, pressure ``x^3 - 1/4``
        and the matching body force.

    Examples:
        >>> u, p, f = manufactured_solution()
        >>> x = np.array([[0.3, 0.6]])
        >>> bool(abs(u.div().evaluate(x)[0]) < 1e-14)
        True
        >>> bool(abs(p.evaluate(x)[0] - (0.027 - 0.25)) < 1e-14)
        True
    """
    a = np.array([0.0, 0.0, 1.0, -2.0, 1.0])
    stream = PolynomialScalar(np.outer(a, a))
    u = stream.rot()
    p = PolynomialScalar.monomial(3, 0) - PolynomialScalar([[0.25]])
    f = u.laplacian().scale(-viscosity) + p.grad()
    return u, p, f


def _quadrature_l2(sc: SplitComplex, difference) -> float:
    degree = Config.current().quadrature.moment_degree
    total = 0.0
    for t, split in enumerate(sc.splits):
        for c in range(split.cells.shape[0]):
            points, _, weights = map_triangle_rule(split.cell_vertices[c], degree)
            values = np.asarray(difference(t, c, points)).reshape(len(points), -1)
            total += float(weights @ np.sum(values**2, axis=1))
    return float(np.sqrt(total))


def error_norms(solution: StokesSolution, u: VectorField, p: ScalarField) -> Tuple[float, float, float, float]:
    """L2 velocity error, L2 pressure error, max abs divergence and the H1 norm of the velocity."""
    sc = solution.velocity.space.sc
    velocity = [solution.velocity.restrict(t) for t in range(len(sc))]
    pressure = [solution.pressure.restrict(t) for t in range(len(sc))]
    eu = _quadrature_l2(sc, lambda t, c, x: velocity[t].evaluate(x, c) - u.evaluate(x))
    ep = _quadrature_l2(sc, lambda t, c, x: pressure[t].evaluate(x, c) - p.evaluate(x))
    div = max(divergence(v).sup_norm() for v in velocity)
    l2 = _quadrature_l2(sc, lambda t, c, x: velocity[t].evaluate(x, c))
    h1 = _quadrature_l2(sc, lambda t, c, x: velocity[t].gradient(x, c))
    return eu, ep, div, float(np.hypot(l2, h1))


def infsup_estimate(
    sc: SplitComplex,
    pair: GlobalSequence,
    r: int,
    pressure: PressureSpace = PressureSpace.conforming,
) -> float:
    """Discrete inf-sup constant of a pair on zero-trace velocities.

    The square of the constant is the second smallest eigenvalue of
    ``B A^-1 B^T p = lambda M p``; the smallest belongs to the constants.
    """
    system = _assemble(sc, pair, r, pressure)
    free = ~system.velocity.dirichlet
    A = system.stiffness[free][:, free].toarray()
    B = system.coupling[system.active][:, free].toarray()
    M = system.mass[system.active][:, system.active].toarray()
    if B.shape[0] < 2:
        return 0.0
    schur = B @ linalg.solve(A, B.T, assume_a="pos")
    eigenvalues = linalg.eigh(0.5 * (schur + schur.T), M, eigvals_only=True)
    beta = float(np.sqrt(max(eigenvalues[1], 0.0)))
    logger.debug("inf-sup %s r=%s on %s macros: %.6e", pair.value, r, len(sc), beta)
    return beta


class InfSupResult(NamedTuple):
    """Inf-sup values over a mesh sequence."""

    values: List[float]
    ratio: float
    stable: bool


def infsup_sequence(
    meshes: Sequence[MacroMesh],
    pair: GlobalSequence,
    r: int,
    pressure: PressureSpace = PressureSpace.conforming,
    floor: float = 1e-3,
) -> InfSupResult:
    """Inf-sup values on every mesh of a sequence.

    Raises:
        ClientError: With fewer than two meshes.
    """
    if len(meshes) < 2:
        raise ClientError("an inf-sup study needs at least two meshes")
    values = [infsup_estimate(powell_sabin_refine(mesh), pair, r, pressure) for mesh in meshes]
    low = min(values)
    ratio = max(values) / low if low > 0 else float("inf")
    return InfSupResult(values, ratio, low > floor)


def pressure_robustness(
    sc: SplitComplex, pair: GlobalSequence, r: int, potential: ScalarField, viscosity: float = 1.0
) -> float:
    """Relative velocity change when a gradient is added to the force."""
    u, _, f = manufactured_solution(viscosity)
    base = solve_stokes(StokesProblem(sc, f, u, pair, r, viscosity))
    shifted = solve_stokes(StokesProblem(sc, f + potential.grad(), u, pair, r, viscosity))
    change = np.abs(shifted.velocity.coeffs - base.velocity.coeffs).max(initial=0.0)
    return float(change / max(np.abs(base.velocity.coeffs).max(initial=0.0), 1e-300))


class StokesRow(NamedTuple):
    """One row of a convergence study."""

    level: int
    h: float
    dofs: int
    velocity_error: float
    pressure_error: float
    div_max: float
    h1_norm: float
    infsup: float
    rate: Optional[float]


def convergence_study(
    mesh: MacroMesh,
    pair: GlobalSequence,
    r: int,
    levels: int,
    viscosity: float = 1.0,
    with_infsup: bool = True,
) -> List[StokesRow]:
    """Manufactured solution errors over uniform refinements.

    Args:
        mesh: Coarsest mesh, usually the unit square.
        pair: Velocity–pressure pair.
        r: Degree of the sequence.
        levels: Number of refinements after the coarsest mesh.
        viscosity: Viscosity.
        with_infsup: Whether to compute the inf-sup value per mesh.

    Returns:
        One row per mesh with the observed velocity order.
    """
    u, p, f = manufactured_solution(viscosity)
    rows: List[StokesRow] = []
    for level in range(levels + 1):
        sc = powell_sabin_refine(refine_uniform(mesh, level) if level else mesh)
        solution = solve_stokes(StokesProblem(sc, f, u, pair, r, viscosity))
        eu, ep, div, h1 = error_norms(solution, u, p)
        h = max(split.diameter for split in sc.splits)
        rate = None
        if rows and eu > 0 and rows[-1].velocity_error > 0:
            rate = float(np.log(rows[-1].velocity_error / eu) / np.log(rows[-1].h / h))
        beta = infsup_estimate(sc, pair, r) if with_infsup else float("nan")
        dofs = solution.velocity.space.dim + solution.pressure.space.dim
        rows.append(StokesRow(level, h, dofs, eu, ep, div, h1, beta, rate))
        logger.info("level %s: h=%.3e velocity error %.3e", level, h, eu)
    return rows
