"""Global spaces on a Powell–Sabin refinement.

A global space is described entirely by its degrees of freedom: local
functionals of neighbouring macro-triangles are identified when they
describe the same quantity on the same piece of shared geometry. Edge
based functionals are keyed on the canonical direction of the macro-edge
(lower vertex id to higher), and a local functional enters with the sign
``edge_sign ** parity``. The restriction of a global field to a
macro-triangle is the local dual basis applied to its signed DOF values.
"""
import logging
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from psfeec.api.config import Config
from psfeec.api.dofs import DofSet, build_dofs, min_degree
from psfeec.api.linalg import decide_rank
from psfeec.api.mesh import MacroSplit, SplitComplex
from psfeec.api.poly import PiecewisePolynomial, div_matrix, rot_matrix
from psfeec.enums import Chain, Family, GlobalSequence, Operator
from psfeec.exceptions import Bug, ClientError, InadmissibleDegreeError
from psfeec.utils import parallel_map

__all__ = [
    "LocalMap",
    "GlobalSpace",
    "GlobalField",
    "assemble_global",
    "global_dimension_formula",
    "theta_z",
    "global_project",
    "global_operator",
    "GlobalSequenceCheck",
    "verify_global_exactness",
    "conformity_defect",
    "GLOBAL_FAMILIES",
]

logger = logging.getLogger(__name__)

#: Local DOF family and whether shared functionals are identified.
GLOBAL_FAMILIES = {
    Family.S0: (Family.S0, True),
    Family.L1: (Family.L1, True),
    Family.calV2: (Family.V2, True),
    Family.S1: (Family.S1, True),
    Family.L2: (Family.L2, True),
    Family.V2: (Family.V2, False),
}

_GLOBAL_MIN_DEGREE = {
    Family.S0: 2,
    Family.L1: 1,
    Family.calV2: 0,
    Family.S1: 2,
    Family.L2: 1,
    Family.V2: 0,
}


class LocalMap(NamedTuple):
    """Local DOFs of one macro-triangle in a global space.

    Attributes:
        dofs: The local DOF set.
        dual: Local dual basis (ncoef, nloc).
        indices: Global index of every local functional.
        signs: Orientation sign of every local functional.
    """

    dofs: DofSet
    dual: np.ndarray
    indices: np.ndarray
    signs: np.ndarray


def _global_key(split: MacroSplit, functional, shared: bool) -> Tuple[Tuple[Any, ...], int]:
    kind = functional.kind.value
    anchor = functional.anchor
    if not shared or anchor[0] == "interior":
        return ("interior", split.index, kind) + tuple(functional.index) + (anchor,), 1
    if anchor[0] == "vertex":
        return ("vertex", split.vertex_ids[anchor[1]], kind) + tuple(functional.index), 1
    if anchor[0] == "half":
        i, side = divmod(anchor[1], 2)
        sign = split.edge_signs[i]
        canonical = side if sign > 0 else 1 - side
        key = ("half", split.edge_ids[i], canonical, kind) + tuple(functional.index)
        return key, sign ** functional.parity
    i = anchor[1]
    sign = split.edge_signs[i]
    return (anchor[0], split.edge_ids[i], kind) + tuple(functional.index), sign ** functional.parity


def _on_boundary(sc: SplitComplex, split: MacroSplit, anchor: Tuple[Any, ...]) -> bool:
    if anchor[0] == "vertex":
        return split.vertex_ids[anchor[1]] in sc.boundary_vertex_set
    if anchor[0] == "half":
        return split.boundary[anchor[1] // 2]
    if anchor[0] in ("split", "edge"):
        return split.boundary[anchor[1]]
    return False


class GlobalSpace:
    """Global finite element space assembled from local DOFs.

    Args:
        sc: The refinement.
        family: Global family (``V2`` is the broken space).
        degree: Polynomial degree.
        keys: Global DOF keys.
        maps: Local maps, one per macro-triangle.
        boundary: Whether each global DOF is anchored on the domain boundary.
        trace: Whether each global DOF belongs to the boundary trace.
    """

    def __init__(
        self,
        sc: SplitComplex,
        family: Family,
        degree: int,
        keys: List[Tuple[Any, ...]],
        maps: List[LocalMap],
        boundary: np.ndarray,
        trace: np.ndarray,
    ) -> None:
        self._sc = sc
        self._family = family
        self._degree = degree
        self._keys = keys
        self._maps = maps
        self._boundary = boundary
        self._trace = trace

    def __repr__(self) -> str:
        return "GlobalSpace(%s, r=%s, dim=%s)" % (self._family.value, self._degree, self.dim)

    def __len__(self) -> int:
        return len(self._keys)

    @property
    def sc(self) -> SplitComplex:
        """SplitComplex: The refinement."""
        return self._sc

    @property
    def family(self) -> Family:
        """Family: Global family."""
        return self._family

    @property
    def degree(self) -> int:
        """int: Polynomial degree."""
        return self._degree

    @property
    def ncomp(self) -> int:
        """int: Number of components of members."""
        return self._family.ncomp

    @property
    def dim(self) -> int:
        """int: Number of global DOFs."""
        return len(self._keys)

    @property
    def keys(self) -> List[Tuple[Any, ...]]:
        """List[Tuple[Any, ...]]: Global DOF keys."""
        return self._keys

    @property
    def maps(self) -> List[LocalMap]:
        """List[LocalMap]: Local maps per macro-triangle."""
        return self._maps

    @property
    def boundary(self) -> np.ndarray:
        """np.ndarray: Boundary anchored DOF flags."""
        return self._boundary

    @property
    def dirichlet(self) -> np.ndarray:
        """np.ndarray: DOFs fixed by a Dirichlet condition on the field."""
        return self._boundary & self._trace

    def local_coefficients(self, t: int, coeffs: np.ndarray) -> np.ndarray:
        """Flat local coefficients on macro t of the global coefficient vector."""
        local = self._maps[t]
        return local.dual @ (local.signs * np.asarray(coeffs)[local.indices])

    def restriction(self, t: int) -> np.ndarray:
        """Dense matrix mapping global coefficients to local ones on macro t."""
        local = self._maps[t]
        result = np.zeros((local.dual.shape[0], self.dim))
        np.add.at(result.T, local.indices, (local.dual * local.signs[None, :]).T)
        return result

    def field(self, coeffs: np.ndarray) -> "GlobalField":
        """Member with the given DOF values."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.dim,):
            raise ValueError("expected %s coefficients, got %s" % (self.dim, coeffs.shape))
        return GlobalField(self, coeffs)

    def dof_values(self, f: Any) -> np.ndarray:
        """Global DOF values of a field single-valued across macro-edges."""
        values = np.full(self.dim, np.nan)
        for local in self._maps:
            todo = np.nonzero(np.isnan(values[local.indices]))[0]
            if not todo.size:
                continue
            restricted = _Restricted(f, local.dofs.split)
            for j in todo:
                values[local.indices[j]] = local.signs[j] * local.dofs[j](restricted)
        return values

    def random_member(self, rng: np.random.Generator) -> "GlobalField":
        """Member with standard normal DOF values."""
        return self.field(rng.standard_normal(self.dim))


class _Restricted:
    """Closed-form field, or a global field seen from one macro-triangle."""

    def __init__(self, f: Any, split: MacroSplit) -> None:
        self.f = f.restrict(split.index) if isinstance(f, GlobalField) else f

    def evaluate(self, points: np.ndarray, cell: Optional[int] = None) -> np.ndarray:
        return self.f.evaluate(points, cell)

    def gradient(self, points: np.ndarray, cell: Optional[int] = None) -> np.ndarray:
        return self.f.gradient(points, cell)


class GlobalField:
    """Member of a global space.

    Args:
        space: The global space.
        coeffs: Global DOF values.
    """

    def __init__(self, space: GlobalSpace, coeffs: np.ndarray) -> None:
        self.space = space
        self.coeffs = coeffs

    def restrict(self, t: int) -> PiecewisePolynomial:
        """Piecewise polynomial on macro t."""
        split = self.space.sc[t]
        local = self.space.local_coefficients(t, self.coeffs)
        return PiecewisePolynomial(split, self.space.degree, local, self.space.ncomp)

    def evaluate(self, points: np.ndarray, macro: int, cell: Optional[int] = None) -> np.ndarray:
        """Values at points of one macro-triangle."""
        return self.restrict(macro).evaluate(points, cell)

    def __add__(self, other: "GlobalField") -> "GlobalField":
        return GlobalField(self.space, self.coeffs + other.coeffs)

    def __sub__(self, other: "GlobalField") -> "GlobalField":
        return GlobalField(self.space, self.coeffs - other.coeffs)


def global_dimension_formula(family: Family, sc: SplitComplex, r: int) -> Optional[int]:
    """Closed-form dimension of a global space from vertex, edge and triangle counts.

    Examples:
        >>> from psfeec.api.mesh import powell_sabin_refine, unit_square
        >>> sc = powell_sabin_refine(unit_square())
        >>> [global_dimension_formula(f, sc, r) for f, r in ((Family.S0, 2), (Family.L1, 1), (Family.calV2, 0))]
        [12, 22, 11]
    """
    V, E, T = sc.mesh.nv, sc.mesh.ne, sc.mesh.nt
    n = r
    if r < _GLOBAL_MIN_DEGREE.get(family, 0):
        return None
    if family == Family.S0:
        return 3 * V + (4 * n - 8) * E + 3 * (n - 2) * (n - 3) * T
    if family == Family.L1:
        return 2 * V + (4 * n - 2) * E + 3 * (n - 1) * (n - 2) * T + (3 * n * (n + 1) - 4) * T
    if family == Family.calV2:
        return E + T + (3 * (n + 1) * (n + 2) - 4) * T
    if family == Family.S1:
        return 3 * V + (6 * n - 6) * E + 6 * (n - 1) * (n - 2) * T
    if family == Family.L2:
        return V + (2 * n - 1) * E + T + 3 * n * (n - 1) * T
    if family == Family.V2:
        return 3 * (n + 1) * (n + 2) * T
    return None


def assemble_global(sc: SplitComplex, family: Family, r: int) -> GlobalSpace:
    """Identify local DOFs across macro-triangles.

    Args:
        sc: The refinement.
        family: One of S0, L1, calV2, S1, L2, or V2 for the broken space.
        r: Degree.

    Returns:
        The global space, memoised on the refinement.

    Raises:
        InadmissibleDegreeError: Below the smallest global degree.
        Bug: When two functionals with the same key sit at different places.

    Examples:
        >>> from psfeec.api.mesh import powell_sabin_refine, unit_square
        >>> sc = powell_sabin_refine(unit_square())
        >>> assemble_global(sc, Family.S0, 2).dim
        12
    """
    if family not in GLOBAL_FAMILIES:
        raise ClientError("no global space for %s" % family.value)
    local_family, shared = GLOBAL_FAMILIES[family]
    lowest = max(_GLOBAL_MIN_DEGREE[family], min_degree(local_family))
    if r < lowest:
        raise InadmissibleDegreeError("global %s needs r >= %s, got %s" % (family.value, lowest, r))
    cache = sc.cache
    if ("global", family, r) in cache:
        return cache[("global", family, r)]

    def local(split: MacroSplit) -> Tuple[DofSet, np.ndarray]:
        dofs = build_dofs(split, local_family, r)
        return dofs, dofs.dual_basis()

    locals_ = parallel_map(local, list(sc.splits))
    tol = max(Config.current().tolerance.geometry * 1e3, 1e-12)
    index: Dict[Tuple[Any, ...], int] = {}
    positions: List[np.ndarray] = []
    boundary: List[bool] = []
    trace: List[bool] = []
    maps = []
    for split, (dofs, dual) in zip(sc.splits, locals_):
        indices = np.zeros(len(dofs), dtype=int)
        signs = np.ones(len(dofs))
        for j, functional in enumerate(dofs):
            key, sign = _global_key(split, functional, shared)
            if key not in index:
                index[key] = len(index)
                positions.append(functional.position)
                boundary.append(_on_boundary(sc, split, functional.anchor))
                trace.append(functional.is_trace)
            elif np.linalg.norm(positions[index[key]] - functional.position) > tol * split.diameter:
                raise Bug("DOF %s is anchored at two different places" % (key,))
            indices[j] = index[key]
            signs[j] = sign
        maps.append(LocalMap(dofs, dual, indices, signs))
    keys = sorted(index, key=index.get)
    space = GlobalSpace(sc, family, r, keys, maps, np.array(boundary, dtype=bool), np.array(trace, dtype=bool))
    expected = global_dimension_formula(family, sc, r)
    logger.debug("global %s r=%s: dim %s, closed form %s", family.value, r, space.dim, expected)
    if expected is not None and expected != space.dim:
        logger.warning("global %s r=%s: dimension %s, closed form %s", family.value, r, space.dim, expected)
    cache[("global", family, r)] = space
    return space


def theta_z(q: Any, sc: SplitComplex, edge: int) -> float:
    """Alternating sum of q around the split point of an interior macro-edge.

    Args:
        q: Global field, or any object with ``evaluate(points, macro, cell)``.
        sc: The refinement.
        edge: Interior macro-edge id.

    Returns:
        ``q1 - q2 + q3 - q4`` over the counter-clockwise fan.

    Raises:
        ClientError: When the edge lies on the boundary.
    """
    if sc.mesh.boundary_edge_flags[edge]:
        raise ClientError("edge %s is on the boundary; its split point has no fan" % edge)
    z = sc.split_points[edge]
    total = 0.0
    for k, (t, c) in enumerate(sc.fans()[edge]):
        total += (-1) ** k * float(np.ravel(q.evaluate(z, t, c))[0])
    return total


_CHAIN_FAMILY = {
    Chain.Pi0: Family.S0,
    Chain.Pi1: Family.L1,
    Chain.Pi2: Family.calV2,
    Chain.varpi1: Family.S1,
    Chain.varpi2: Family.L2,
}


def global_project(chain: Chain, f: Any, sc: SplitComplex, r: int) -> GlobalField:
    """Apply a global projection macro by macro.

    Args:
        chain: Projection; its target degree is ``r - chain.shift``.
        f: Closed-form field.
        sc: The refinement.
        r: Degree of the chain.

    Returns:
        The projection.
    """
    space = assemble_global(sc, _CHAIN_FAMILY[chain], r - chain.shift)
    return space.field(space.dof_values(f))


def global_operator(operator: Operator, source: GlobalSpace, target: GlobalSpace) -> Tuple[np.ndarray, float]:
    """Matrix of rot or div between global spaces and the containment residual."""
    matrix = np.zeros((target.dim, source.dim))
    filled = np.zeros(target.dim, dtype=bool)
    residual = 0.0
    for t in range(len(source.sc)):
        split = source.sc[t]
        if operator == Operator.rot:
            local = rot_matrix(split, source.degree)
        else:
            local = div_matrix(split, source.degree)
        image = local @ source.restriction(t)
        tmap = target.maps[t]
        values = (tmap.dofs.rows() @ image) * tmap.signs[:, None]
        fresh = ~filled[tmap.indices]
        matrix[tmap.indices[fresh]] = values[fresh]
        filled[tmap.indices] = True
        rebuilt = target.restriction(t) @ matrix
        scale = max(float(np.abs(image).max(initial=0.0)), 1e-300)
        residual = max(residual, float(np.abs(rebuilt - image).max(initial=0.0)) / scale)
    return matrix, residual


class GlobalSequenceCheck(NamedTuple):
    """Ranks and verdicts of a global sequence."""

    chain: str
    r: int
    dims: Tuple[int, int, int]
    formulas: Tuple[Optional[int], Optional[int], Optional[int]]
    rot_rank: int
    div_rank: int
    rot_kernel: int
    middle_gap: int
    deficit: int
    containment: float
    euler_characteristic: int

    @property
    def exact(self) -> bool:
        """bool: Whether every link is exact."""
        return self.rot_kernel == 1 and self.middle_gap == 0 and self.deficit == 0

    @property
    def dims_match(self) -> bool:
        """bool: Whether the dimensions agree with the closed forms."""
        return all(f is None or f == d for d, f in zip(self.dims, self.formulas))


_GLOBAL_CHAINS = {
    GlobalSequence.SLV: (Family.S0, Family.L1, Family.calV2),
    GlobalSequence.SSL: (Family.S0, Family.S1, Family.L2),
}


def _rank(matrix: np.ndarray, what: str) -> int:
    if matrix.size == 0:
        return 0
    return decide_rank(np.linalg.svd(matrix, compute_uv=False), what).rank


def verify_global_exactness(sc: SplitComplex, r: int, chain: GlobalSequence) -> GlobalSequenceCheck:
    """Audit a global sequence with computed ranks.

    Args:
        sc: The refinement.
        r: Degree of the first space.
        chain: SLV (r >= 2) or SSL (r >= 3).

    Returns:
        Ranks, gaps and dimension formulas; failures are not raised.
    """
    families = _GLOBAL_CHAINS[chain]
    spaces = [assemble_global(sc, family, r - k) for k, family in enumerate(families)]
    rot, rot_residual = global_operator(Operator.rot, spaces[0], spaces[1])
    div, div_residual = global_operator(Operator.div, spaces[1], spaces[2])
    rot_rank = _rank(rot, "global rot %s r=%s" % (chain.value, r))
    div_rank = _rank(div, "global div %s r=%s" % (chain.value, r))
    check = GlobalSequenceCheck(
        chain=chain.value,
        r=r,
        dims=tuple(space.dim for space in spaces),  # type: ignore
        formulas=tuple(global_dimension_formula(f, sc, r - k) for k, f in enumerate(families)),  # type: ignore
        rot_rank=rot_rank,
        div_rank=div_rank,
        rot_kernel=spaces[0].dim - rot_rank,
        middle_gap=spaces[1].dim - div_rank - rot_rank,
        deficit=spaces[2].dim - div_rank,
        containment=max(rot_residual, div_residual),
        euler_characteristic=sc.mesh.euler_characteristic,
    )
    if not check.exact:
        logger.warning("global %s r=%s is not exact: %s", chain.value, r, check)
    return check


def conformity_defect(space: GlobalSpace, rng: Optional[np.random.Generator] = None, samples: int = 5) -> float:
    """Largest interface defect of a random member.

    Compares the family's continuous quantities from both sides of every
    interior macro-edge; for calV2 the alternating fan sums are used.
    """
    rng = rng or np.random.default_rng(Config.current().run.seed)
    u = space.random_member(rng)
    sc = space.sc
    scale = max(float(np.abs(u.coeffs).max(initial=0.0)), 1e-300)
    worst = 0.0
    if space.family == Family.calV2:
        for e in sc.interior_split_edges:
            worst = max(worst, abs(theta_z(u, sc, e)))
        return worst / scale
    if space.family == Family.V2:
        return 0.0
    s = (np.arange(samples) + 0.5) / samples
    for e in sc.interior_split_edges:
        sides = []
        for t in sc.mesh.edge_triangles[e]:
            split = sc[t]
            i = split.edge_ids.index(e)
            f = u.restrict(t)
            per_half = []
            for h in (2 * i, 2 * i + 1):
                a, b = split.half_endpoints(h)
                points = a[None, :] + s[:, None] * (b - a)[None, :]
                if split.edge_signs[i] < 0:
                    points = points[::-1]
                quantities = [np.asarray(f.evaluate(points, h)).reshape(samples, -1)]
                grads = np.asarray(f.gradient(points, h)).reshape(samples, -1, 2)
                if space.family == Family.S0:
                    quantities.append(grads.reshape(samples, -1))
                if space.family == Family.S1:
                    quantities.append(np.trace(grads, axis1=1, axis2=2)[:, None])
                per_half.append(np.hstack(quantities))
            if split.edge_signs[i] < 0:
                per_half = per_half[::-1]
            sides.append(np.vstack(per_half))
        worst = max(worst, float(np.abs(sides[0] - sides[1]).max()))
    return worst / scale
