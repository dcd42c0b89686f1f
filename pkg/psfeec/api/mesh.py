"""Coarse triangulations and their Powell–Sabin refinements.

Local numbering on a macro-triangle (0-based):

* points ``[z0, v0, v1, v2, m0, m1, m2]`` where ``z0`` is the interior point,
  ``v0, v1, v2`` the counter-clockwise vertices and ``m_i`` the split point
  of edge ``e_i = [v_{i+1}, v_{i+2}]``;
* subtriangle ``2i = (z0, v_{i+1}, m_i)`` and ``2i+1 = (z0, m_i, v_{i+2})``,
  so every subtriangle lists ``z0`` first and ``mu`` is its first barycentric
  coordinate;
* half-edge ``h`` of the macro boundary lies in subtriangle ``h``.
"""
import io
import logging
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Set, TextIO, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree

from psfeec.api.config import Config
from psfeec.enums import BoundaryRule, InteriorRule, MeshFormat
from psfeec.exceptions import (
    Bug,
    MeshFormatError,
    MeshValidityError,
    WellDefinednessError,
)
from psfeec.utils import parallel_map

__all__ = [
    "MacroMesh",
    "MacroSplit",
    "SplitComplex",
    "load_macro_mesh",
    "read_mesh",
    "incenter",
    "powell_sabin_refine",
    "singular_fans",
    "validate_complex",
    "refine_uniform",
    "unit_square",
    "reference_triangle",
    "annulus",
    "pentagon",
    "perturbed_square",
    "random_triangle",
]

logger = logging.getLogger(__name__)


def _cross(a: np.ndarray, b: np.ndarray) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def signed_area(p1: np.ndarray, p2: np.ndarray, p3: np.ndarray) -> float:
    """Signed area of a triangle, positive when counter-clockwise.

    Examples:
        >>> signed_area(np.array([0.0, 0.0]), np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        0.5
    """
    return 0.5 * _cross(p2 - p1, p3 - p1)


class MacroMesh:
    """Coarse triangulation with derived edge table.

    Triangles given clockwise are reoriented by swapping two indices.

    Args:
        vertices: Vertex coordinates of shape (nv, 2).
        triangles: Vertex index triples of shape (nt, 3).

    Raises:
        MeshValidityError: On duplicate vertices, degenerate triangles,
            unused vertices or edges shared by more than two triangles.

    Examples:
        >>> mesh = unit_square()
        >>> (mesh.nv, mesh.ne, mesh.nt, mesh.euler_characteristic)
        (4, 5, 2, 1)
    """

    def __init__(self, vertices: np.ndarray, triangles: np.ndarray) -> None:
        tol = Config.current().tolerance.geometry
        vertices = np.array(vertices, dtype=float).reshape(-1, 2)
        triangles = np.array(triangles, dtype=int).reshape(-1, 3)
        if len(triangles) == 0:
            raise MeshValidityError("mesh has no triangles")
        if triangles.min() < 0 or triangles.max() >= len(vertices):
            raise MeshValidityError("triangle references a vertex that does not exist")
        scale = float(np.ptp(vertices, axis=0).max()) or 1.0
        duplicates = sorted(cKDTree(vertices).query_pairs(tol * scale))
        if duplicates:
            raise MeshValidityError("duplicate vertices %s" % (duplicates[0],))
        for t, tri in enumerate(triangles):
            if len(set(tri.tolist())) != 3:
                raise MeshValidityError("triangle %s repeats a vertex" % t)
            area = signed_area(*vertices[tri])
            if area < 0:
                triangles[t] = tri[[0, 2, 1]]
                area = -area
            if area <= tol * scale * scale:
                raise MeshValidityError("triangle %s is degenerate" % t)
        self._vertices = vertices
        self._triangles = triangles
        self._build_edges()
        self._vertices.setflags(write=False)
        self._triangles.setflags(write=False)

    def _build_edges(self) -> None:
        lookup: Dict[Tuple[int, int], int] = {}
        edges: List[Tuple[int, int]] = []
        edge_triangles: List[List[int]] = []
        triangle_edges = np.zeros((self.nt, 3), dtype=int)
        for t, tri in enumerate(self._triangles):
            for i in range(3):
                a, b = int(tri[(i + 1) % 3]), int(tri[(i + 2) % 3])
                key = (min(a, b), max(a, b))
                if key not in lookup:
                    lookup[key] = len(edges)
                    edges.append(key)
                    edge_triangles.append([])
                e = lookup[key]
                edge_triangles[e].append(t)
                triangle_edges[t, i] = e
        for e, owners in enumerate(edge_triangles):
            if len(owners) > 2:
                raise MeshValidityError(
                    "edge %s is shared by %s triangles" % (edges[e], len(owners))
                )
            if len(owners) == 2 and owners[0] == owners[1]:
                raise MeshValidityError("triangle %s is listed twice" % owners[0])
        used = np.zeros(len(self._vertices), dtype=bool)
        used[self._triangles.ravel()] = True
        if not used.all():
            raise MeshValidityError(
                "vertex %s is not used by any triangle" % int(np.argmin(used))
            )
        self._edges = np.array(edges, dtype=int).reshape(-1, 2)
        self._edge_triangles = [tuple(owners) for owners in edge_triangles]
        self._triangle_edges = triangle_edges
        self._boundary = np.array([len(owners) == 1 for owners in edge_triangles])
        signs = np.ones((self.nt, 3), dtype=int)
        for t, tri in enumerate(self._triangles):
            for i in range(3):
                if tri[(i + 1) % 3] > tri[(i + 2) % 3]:
                    signs[t, i] = -1
        self._edge_signs = signs

    @property
    def vertices(self) -> np.ndarray:
        """np.ndarray: Vertex coordinates (nv, 2)."""
        return self._vertices

    @property
    def triangles(self) -> np.ndarray:
        """np.ndarray: Counter-clockwise vertex triples (nt, 3)."""
        return self._triangles

    @property
    def edges(self) -> np.ndarray:
        """np.ndarray: Vertex pairs (ne, 2), lower index first."""
        return self._edges

    @property
    def edge_triangles(self) -> List[Tuple[int, ...]]:
        """List[Tuple[int, ...]]: Triangles incident to each edge."""
        return self._edge_triangles

    @property
    def triangle_edges(self) -> np.ndarray:
        """np.ndarray: Edge ids per triangle; local edge i is opposite vertex i."""
        return self._triangle_edges

    @property
    def edge_signs(self) -> np.ndarray:
        """np.ndarray: +1 where the counter-clockwise local edge runs from lower to higher vertex."""
        return self._edge_signs

    @property
    def boundary_edge_flags(self) -> np.ndarray:
        """np.ndarray: True for edges on the domain boundary."""
        return self._boundary

    @property
    def nv(self) -> int:
        """int: Number of vertices."""
        return len(self._vertices)

    @property
    def ne(self) -> int:
        """int: Number of edges."""
        return len(self._edges)

    @property
    def nt(self) -> int:
        """int: Number of triangles."""
        return len(self._triangles)

    @property
    def euler_characteristic(self) -> int:
        """int: V - E + T, equal to 1 for simply connected domains."""
        return self.nv - self.ne + self.nt

    @property
    def boundary_vertices(self) -> np.ndarray:
        """np.ndarray: Sorted ids of vertices on the boundary."""
        return np.unique(self._edges[self._boundary].ravel())

    def corner_vertices(self) -> np.ndarray:
        """Boundary vertices where the boundary is not straight."""
        tol = Config.current().tolerance.geometry
        neighbours: Dict[int, List[int]] = {}
        for a, b in self._edges[self._boundary]:
            neighbours.setdefault(int(a), []).append(int(b))
            neighbours.setdefault(int(b), []).append(int(a))
        corners = []
        for v, adjacent in sorted(neighbours.items()):
            if len(adjacent) != 2:
                corners.append(v)
                continue
            d1 = self._vertices[adjacent[0]] - self._vertices[v]
            d2 = self._vertices[adjacent[1]] - self._vertices[v]
            if abs(_cross(d1, d2)) > tol * np.linalg.norm(d1) * np.linalg.norm(d2) * 1e3:
                corners.append(v)
        return np.array(corners, dtype=int)


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _numbered_lines(source: Union[str, TextIO]) -> Iterator[Tuple[int, List[str]]]:
    stream = io.StringIO(source) if isinstance(source, str) else source
    for number, line in enumerate(stream, start=1):
        content = _strip(line)
        if content:
            yield number, content.split()


def _parse_numbers(tokens: List[str], count: int, cast, line: int, what: str) -> list:
    if len(tokens) < count:
        raise MeshFormatError("expected %s values for %s" % (count, what), line)
    try:
        return [cast(token) for token in tokens[:count]]
    except ValueError:
        raise MeshFormatError("malformed %s: %s" % (what, " ".join(tokens)), line)


def _parse_single_block(source: Union[str, TextIO]) -> Tuple[np.ndarray, np.ndarray]:
    lines = _numbered_lines(source)
    try:
        number, tokens = next(lines)
    except StopIteration:
        raise MeshFormatError("empty mesh file", 1)
    nv, nt = _parse_numbers(tokens, 2, int, number, "header")
    vertices, triangles = [], []
    for number, tokens in lines:
        if len(vertices) < nv:
            vertices.append(_parse_numbers(tokens, 2, float, number, "vertex"))
        elif len(triangles) < nt:
            triangles.append(_parse_numbers(tokens, 3, int, number, "triangle"))
        else:
            raise MeshFormatError("unexpected trailing content", number)
    if len(vertices) < nv or len(triangles) < nt:
        raise MeshFormatError(
            "expected %s vertices and %s triangles, found %s and %s"
            % (nv, nt, len(vertices), len(triangles))
        )
    return np.array(vertices, dtype=float), np.array(triangles, dtype=int)


def _parse_node_ele(
    nodes: Union[str, TextIO], elements: Union[str, TextIO]
) -> Tuple[np.ndarray, np.ndarray]:
    lines = _numbered_lines(nodes)
    try:
        number, tokens = next(lines)
    except StopIteration:
        raise MeshFormatError("empty node file", 1)
    nv = _parse_numbers(tokens, 1, int, number, "node header")[0]
    ids: Dict[int, int] = {}
    vertices = []
    for number, tokens in lines:
        if len(vertices) == nv:
            raise MeshFormatError("unexpected trailing content in node file", number)
        node_id = _parse_numbers(tokens, 1, int, number, "node id")[0]
        coords = _parse_numbers(tokens[1:], 2, float, number, "node")
        if node_id in ids:
            raise MeshFormatError("node %s listed twice" % node_id, number)
        ids[node_id] = len(vertices)
        vertices.append(coords)
    if len(vertices) < nv:
        raise MeshFormatError("expected %s nodes, found %s" % (nv, len(vertices)))
    lines = _numbered_lines(elements)
    try:
        number, tokens = next(lines)
    except StopIteration:
        raise MeshFormatError("empty element file", 1)
    nt, corners = _parse_numbers(tokens, 2, int, number, "element header")
    if corners != 3:
        raise MeshFormatError("only 3-node triangles are supported", number)
    triangles = []
    for number, tokens in lines:
        if len(triangles) == nt:
            raise MeshFormatError("unexpected trailing content in element file", number)
        refs = _parse_numbers(tokens[1:], 3, int, number, "element")
        try:
            triangles.append([ids[ref] for ref in refs])
        except KeyError as e:
            raise MeshFormatError("unknown node %s" % e, number)
    if len(triangles) < nt:
        raise MeshFormatError("expected %s elements, found %s" % (nt, len(triangles)))
    return np.array(vertices, dtype=float), np.array(triangles, dtype=int)


def load_macro_mesh(
    source: Union[str, TextIO],
    fmt: MeshFormat = MeshFormat.single_block,
    elements: Optional[Union[str, TextIO]] = None,
) -> MacroMesh:
    """Load a coarse triangulation from text.

    Args:
        source: Mesh text (single-block) or node text (node-ele).
        fmt: Text format.
        elements: Element text, required for the node-ele format.

    Returns:
        The parsed mesh.

    Raises:
        MeshFormatError: When the text does not follow the grammar.
        MeshValidityError: When the parsed mesh is invalid.

    Examples:
        >>> mesh = load_macro_mesh("3 1\\n0 0\\n1 0\\n0 1\\n0 2 1\\n")
        >>> mesh.triangles.tolist()
        [[0, 1, 2]]
    """
    if fmt == MeshFormat.single_block:
        vertices, triangles = _parse_single_block(source)
    else:
        if elements is None:
            raise MeshFormatError("node-ele format needs the element text")
        vertices, triangles = _parse_node_ele(source, elements)
    return MacroMesh(vertices, triangles)


def read_mesh(path: Union[str, Path]) -> MacroMesh:
    """Read a mesh file, choosing the format from the suffix.

    ``.node`` and ``.ele`` files are read as a pair sharing the stem,
    anything else as a single-block file.

    Args:
        path: Mesh file path.

    Returns:
        The parsed mesh.
    """
    path = Path(path)
    if path.suffix in (".node", ".ele"):
        node_file, ele_file = path.with_suffix(".node"), path.with_suffix(".ele")
        with node_file.open("r") as nodes, ele_file.open("r") as elements:
            return load_macro_mesh(nodes, MeshFormat.node_ele, elements)
    with path.open("r") as file:
        return load_macro_mesh(file, MeshFormat.single_block)


def incenter(p1: np.ndarray, p2: np.ndarray, p3: np.ndarray) -> np.ndarray:
    """Incenter of a triangle.

    Args:
        p1: First corner.
        p2: Second corner.
        p3: Third corner.

    Returns:
        The side-length weighted average of the corners.

    Raises:
        MeshValidityError: When the triangle is degenerate.

    Examples:
        >>> [round(float(x), 6) for x in incenter(np.array([0.0, 0.0]), np.array([1.0, 0.0]), np.array([0.0, 1.0]))]
        [0.292893, 0.292893]
    """
    p1, p2, p3 = (np.asarray(p, dtype=float) for p in (p1, p2, p3))
    a = np.linalg.norm(p2 - p3)
    b = np.linalg.norm(p3 - p1)
    c = np.linalg.norm(p1 - p2)
    scale = max(a, b, c)
    if scale == 0 or abs(signed_area(p1, p2, p3)) <= Config.current().tolerance.geometry * scale**2:
        raise MeshValidityError("incenter of a degenerate triangle")
    return (a * p1 + b * p2 + c * p3) / (a + b + c)


class MacroSplit:
    """Powell–Sabin split of one macro-triangle.

    Args:
        index: Macro-triangle id.
        vertices: Counter-clockwise corners (3, 2).
        interior_point: The point z0.
        split_points: Split points (3, 2); entry i lies on edge i.
        vertex_ids: Global vertex ids.
        edge_ids: Global edge ids of the local edges.
        edge_signs: +1 where local edge i runs from lower to higher global vertex.
        boundary: Domain-boundary flag per local edge.
    """

    def __init__(
        self,
        index: int,
        vertices: np.ndarray,
        interior_point: np.ndarray,
        split_points: np.ndarray,
        vertex_ids: Tuple[int, int, int] = (0, 1, 2),
        edge_ids: Tuple[int, int, int] = (0, 1, 2),
        edge_signs: Tuple[int, int, int] = (1, 1, 1),
        boundary: Tuple[bool, bool, bool] = (True, True, True),
    ) -> None:
        self.index = index
        self.vertex_ids = tuple(int(v) for v in vertex_ids)
        self.edge_ids = tuple(int(e) for e in edge_ids)
        self.edge_signs = tuple(int(s) for s in edge_signs)
        self.boundary = tuple(bool(b) for b in boundary)
        points = np.vstack(
            [np.reshape(interior_point, (1, 2)), np.reshape(vertices, (3, 2)), np.reshape(split_points, (3, 2))]
        ).astype(float)
        self.points = points
        cells = []
        for i in range(3):
            cells.append((0, 1 + (i + 1) % 3, 4 + i))
            cells.append((0, 4 + i, 1 + (i + 2) % 3))
        self.cells = np.array(cells, dtype=int)
        self.cell_vertices = points[self.cells]
        self.areas = np.array([signed_area(*corners) for corners in self.cell_vertices])
        self.bary_grads = np.array([_barycentric_gradients(c) for c in self.cell_vertices])
        tangents, normals, lengths = [], [], []
        for i in range(3):
            a, b = self.edge_endpoints(i)
            length = np.linalg.norm(b - a)
            t = (b - a) / length
            tangents.append(t)
            normals.append(np.array([t[1], -t[0]]))
            lengths.append(length)
        self.tangents = np.array(tangents)
        self.normals = np.array(normals)
        self.edge_lengths = np.array(lengths)
        s = points[0][None, :] - points[4:7]
        self.interior_tangents = s / np.linalg.norm(s, axis=1)[:, None]
        self.grad_mu = np.array([self.bary_grads[2 * i, 0] for i in range(3)])
        for arr in (
            self.points,
            self.cells,
            self.cell_vertices,
            self.areas,
            self.bary_grads,
            self.tangents,
            self.normals,
            self.interior_tangents,
            self.grad_mu,
        ):
            arr.setflags(write=False)
        self._cache: Dict[tuple, object] = {}

    def __repr__(self) -> str:
        return "MacroSplit(index=%s, vertices=%s)" % (self.index, self.vertex_ids)

    @property
    def z0(self) -> np.ndarray:
        """np.ndarray: Interior point."""
        return self.points[0]

    @property
    def vertices(self) -> np.ndarray:
        """np.ndarray: Macro corners (3, 2)."""
        return self.points[1:4]

    @property
    def split_points(self) -> np.ndarray:
        """np.ndarray: Split points (3, 2)."""
        return self.points[4:7]

    @property
    def area(self) -> float:
        """float: Area of the macro-triangle."""
        return float(self.areas.sum())

    @property
    def diameter(self) -> float:
        """float: Longest macro edge."""
        return float(self.edge_lengths.max())

    @property
    def cache(self) -> Dict[tuple, object]:
        """Dict[tuple, object]: Per-split memo used by the space and DOF builders."""
        return self._cache

    def edge_endpoints(self, i: int) -> Tuple[np.ndarray, np.ndarray]:
        """Counter-clockwise endpoints of local edge i."""
        return self.points[1 + (i + 1) % 3], self.points[1 + (i + 2) % 3]

    def half_endpoints(self, h: int) -> Tuple[np.ndarray, np.ndarray]:
        """Endpoints of half-edge h, oriented along the edge tangent."""
        i, side = divmod(h, 2)
        a, b = self.edge_endpoints(i)
        m = self.points[4 + i]
        return (a, m) if side == 0 else (m, b)

    def half_length(self, h: int) -> float:
        """Length of half-edge h."""
        a, b = self.half_endpoints(h)
        return float(np.linalg.norm(b - a))

    @staticmethod
    def vertex_cell(j: int) -> int:
        """A subtriangle containing local vertex j."""
        return 2 * ((j - 1) % 3)

    def interior_edges(self) -> List[Tuple[int, int, np.ndarray, np.ndarray]]:
        """Interior edges of the split as (cell, cell, start, end)."""
        result = []
        for j in range(3):
            result.append(
                (2 * ((j - 1) % 3), 2 * ((j - 2) % 3) + 1, self.points[0], self.points[1 + j])
            )
        for i in range(3):
            result.append((2 * i, 2 * i + 1, self.points[0], self.points[4 + i]))
        return result

    def barycentric(self, points: np.ndarray, cell: int) -> np.ndarray:
        """Barycentric coordinates of points with respect to a subtriangle."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        grads = self.bary_grads[cell]
        origin = self.cell_vertices[cell, 0]
        rest = (points - origin) @ grads[1:].T
        return np.column_stack([1.0 - rest.sum(axis=1), rest])

    def locate(self, points: np.ndarray) -> np.ndarray:
        """Subtriangle containing each point (ties go to the lower index)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        best = np.stack([self.barycentric(points, c).min(axis=1) for c in range(6)], axis=1)
        return np.argmax(best >= best.max(axis=1, keepdims=True) - 1e-14, axis=1)

    def sample_points(self, per_side: int = 8) -> List[Tuple[int, np.ndarray]]:
        """Uniform barycentric sample grid on every subtriangle.

        Args:
            per_side: Number of subdivisions of each subtriangle side.

        Returns:
            A list of (cell, points) pairs.
        """
        n = per_side
        bary = np.array(
            [(n - i - j, i, j) for i in range(n + 1) for j in range(n + 1 - i)], dtype=float
        ) / n
        return [(c, bary @ self.cell_vertices[c]) for c in range(6)]


def _barycentric_gradients(corners: np.ndarray) -> np.ndarray:
    matrix = np.vstack([np.ones(3), corners.T])
    inverse = np.linalg.inv(matrix)
    return inverse[:, 1:]


class SplitComplex:
    """Powell–Sabin refinement of a :class:`MacroMesh`.

    Args:
        mesh: The coarse triangulation.
        splits: One :class:`MacroSplit` per macro-triangle.
        split_points: Split point per macro edge (ne, 2).
        interior_rule: Rule used for the interior points.
    """

    def __init__(
        self,
        mesh: MacroMesh,
        splits: List[MacroSplit],
        split_points: np.ndarray,
        interior_rule: InteriorRule = InteriorRule.incenter,
    ) -> None:
        self.mesh = mesh
        self.splits = list(splits)
        self.split_points = np.asarray(split_points, dtype=float)
        self.interior_points = np.array([split.z0 for split in self.splits])
        self.interior_rule = interior_rule
        self._fans: Optional[Dict[int, List[Tuple[int, int]]]] = None
        self._cache: Dict[tuple, object] = {}

    def __len__(self) -> int:
        return len(self.splits)

    def __getitem__(self, index: int) -> MacroSplit:
        return self.splits[index]

    @property
    def cache(self) -> Dict[tuple, object]:
        """Dict[tuple, object]: Memo of the global spaces."""
        return self._cache

    @property
    def boundary_vertex_set(self) -> Set[int]:
        """Set[int]: Ids of the vertices on the domain boundary."""
        return {int(v) for v in self.mesh.boundary_vertices}

    @property
    def n_subtriangles(self) -> int:
        """int: Number of subtriangles."""
        return 6 * len(self.splits)

    @property
    def n_points(self) -> int:
        """int: Number of vertices of the refinement."""
        return self.mesh.nv + self.mesh.ne + self.mesh.nt

    @property
    def interior_split_edges(self) -> List[int]:
        """List[int]: Edges whose split point is an interior vertex."""
        return [e for e in range(self.mesh.ne) if not self.mesh.boundary_edge_flags[e]]

    @property
    def half_edges(self) -> List[Tuple[int, int]]:
        """List[Tuple[int, int]]: Split boundary edges as global point pairs."""
        nv = self.mesh.nv
        result = []
        for e, (a, b) in enumerate(self.mesh.edges):
            result.append((int(a), nv + e))
            result.append((nv + e, int(b)))
        return result

    def fans(self) -> Dict[int, List[Tuple[int, int]]]:
        """Cached :func:`singular_fans`."""
        if self._fans is None:
            self._fans = singular_fans(self)
        return self._fans

    def global_point_index(self, split: MacroSplit, local: int) -> int:
        """Global id of a local split point."""
        nv, ne = self.mesh.nv, self.mesh.ne
        if local == 0:
            return nv + ne + split.index
        if local < 4:
            return split.vertex_ids[local - 1]
        return nv + split.edge_ids[local - 4]

    def to_dict(self) -> dict:
        """Plain representation used for the JSON export."""
        nv, ne = self.mesh.nv, self.mesh.ne
        points = np.vstack([self.mesh.vertices, self.split_points, self.interior_points])
        subtriangles = [
            [self.global_point_index(split, int(k)) for k in cell]
            for split in self.splits
            for cell in split.cells
        ]
        fans = {
            str(nv + e): [[t, c] for t, c in fan] for e, fan in sorted(self.fans().items())
        }
        return {
            "vertices": points.tolist(),
            "subtriangles": subtriangles,
            "split_points": [
                {
                    "point": nv + e,
                    "edge": [int(a), int(b)],
                    "interior": not bool(self.mesh.boundary_edge_flags[e]),
                }
                for e, (a, b) in enumerate(self.mesh.edges)
            ],
            "boundary_half_edges": [list(pair) for pair in self.half_edges],
            "fans": fans,
            "interior_rule": self.interior_rule.value,
            "counts": {
                "V": self.mesh.nv,
                "E": ne,
                "T": self.mesh.nt,
                "subtriangles": self.n_subtriangles,
            },
        }


def _interior_point(corners: np.ndarray, rule: InteriorRule) -> np.ndarray:
    if rule == InteriorRule.incenter:
        return incenter(*corners)
    return corners.mean(axis=0)


def _edge_split_point(mesh: MacroMesh, e: int, interior: np.ndarray, tol: float) -> np.ndarray:
    a, b = (mesh.vertices[k] for k in mesh.edges[e])
    owners = mesh.edge_triangles[e]
    if len(owners) == 1:
        return 0.5 * (a + b)
    z1, z2 = interior[owners[0]], interior[owners[1]]
    matrix = np.column_stack([b - a, z1 - z2])
    det = np.linalg.det(matrix)
    scale = np.linalg.norm(b - a) * np.linalg.norm(z2 - z1)
    if abs(det) <= tol * scale:
        raise WellDefinednessError(
            "segment between interior points is parallel to the edge", tuple(mesh.edges[e])
        )
    t, u = np.linalg.solve(matrix, z1 - a)
    if not (tol < t < 1 - tol and tol < u < 1 - tol):
        raise WellDefinednessError(
            "segment between interior points misses the open edge (t=%.3g, u=%.3g)" % (t, u),
            tuple(int(k) for k in mesh.edges[e]),
        )
    return a + t * (b - a)


def powell_sabin_refine(
    mesh: MacroMesh,
    interior_rule: Optional[InteriorRule] = None,
    boundary_edge_rule: Optional[BoundaryRule] = None,
) -> SplitComplex:
    """Construct the Powell–Sabin refinement of a mesh.

    Args:
        mesh: The coarse triangulation.
        interior_rule: Rule for the interior points, config default otherwise.
        boundary_edge_rule: Rule for split points on boundary edges.

    Returns:
        The validated refinement.

    Raises:
        WellDefinednessError: When the interior points of two neighbours
            are not joined through their shared edge.

    Examples:
        >>> sc = powell_sabin_refine(unit_square())
        >>> (sc.n_subtriangles, sc.mesh.ne, len(sc.interior_split_edges))
        (12, 5, 1)
    """
    config = Config.current()
    interior_rule = interior_rule or config.refine.interior_rule
    boundary_edge_rule = boundary_edge_rule or config.refine.boundary_rule
    if boundary_edge_rule != BoundaryRule.midpoint:
        raise Bug("unsupported boundary rule %s" % boundary_edge_rule)
    tol = config.tolerance.geometry
    corners = mesh.vertices[mesh.triangles]
    interior = np.array([_interior_point(c, interior_rule) for c in corners])
    split_points = np.array(
        [_edge_split_point(mesh, e, interior, tol) for e in range(mesh.ne)]
    ).reshape(-1, 2)

    def build(t: int) -> MacroSplit:
        edges = mesh.triangle_edges[t]
        return MacroSplit(
            index=t,
            vertices=corners[t],
            interior_point=interior[t],
            split_points=split_points[edges],
            vertex_ids=tuple(mesh.triangles[t]),
            edge_ids=tuple(edges),
            edge_signs=tuple(mesh.edge_signs[t]),
            boundary=tuple(mesh.boundary_edge_flags[edges]),
        )

    splits = parallel_map(build, range(mesh.nt))
    sc = SplitComplex(mesh, splits, split_points, interior_rule)
    validate_complex(sc)
    logger.debug(
        "refined mesh with %s triangles into %s subtriangles", mesh.nt, sc.n_subtriangles
    )
    return sc


def _check_collinear(p: np.ndarray, q: np.ndarray, r: np.ndarray, tol: float) -> bool:
    scale = max(np.linalg.norm(q - p), np.linalg.norm(r - p), 1e-300)
    return abs(_cross(q - p, r - p)) <= tol * scale * scale


def singular_fans(sc: SplitComplex) -> Dict[int, List[Tuple[int, int]]]:
    """Subtriangles around every split point, keyed by macro edge.

    Interior split points map to four (macro, subtriangle) pairs in
    counter-clockwise order starting with the two subtriangles of the
    lower-indexed macro-triangle; boundary split points map to their two
    subtriangles.

    Args:
        sc: The refinement.

    Returns:
        Fans keyed by macro edge id.

    Raises:
        Bug: When the incident edges of a split point do not lie on
            exactly two lines.
    """
    tol = max(Config.current().tolerance.geometry * 1e3, 1e-12)
    fans: Dict[int, List[Tuple[int, int]]] = {}
    for e in range(sc.mesh.ne):
        z = sc.split_points[e]
        members = []
        for t in sc.mesh.edge_triangles[e]:
            split = sc.splits[t]
            i = split.edge_ids.index(e)
            a, b = split.edge_endpoints(i)
            m = split.points[4 + i]
            if np.linalg.norm(m - z) > tol * split.diameter:
                raise Bug("split point of edge %s differs between macro-triangles" % e)
            if not _check_collinear(a, m, b, tol):
                raise Bug("split point of edge %s is not on its edge" % e)
            members.append((t, split, i))
        if len(members) == 2:
            z1, z2 = members[0][1].z0, members[1][1].z0
            if not _check_collinear(z1, z, z2, tol):
                raise Bug("split point of edge %s is not a singular vertex" % e)
        cells = []
        for t, split, i in members:
            for c in (2 * i, 2 * i + 1):
                centroid = split.cell_vertices[c].mean(axis=0)
                angle = np.arctan2(centroid[1] - z[1], centroid[0] - z[0])
                cells.append((angle, t, c))
        cells.sort()
        ordered = [(t, c) for _, t, c in cells]
        if len(ordered) == 4:
            low = min(t for t, _ in ordered)
            for shift in range(4):
                rotated = ordered[shift:] + ordered[:shift]
                if rotated[0][0] == low and rotated[1][0] == low:
                    ordered = rotated
                    break
            else:
                raise Bug("fan of edge %s does not alternate by macro-triangle" % e)
        fans[e] = ordered
    return fans


def validate_complex(sc: SplitComplex) -> None:
    """Re-check every structural invariant of a refinement.

    Raises:
        MeshValidityError: When a subtriangle is degenerate.
        Bug: When an orientation or mu-gradient invariant fails.
    """
    tol = Config.current().tolerance.geometry
    mesh = sc.mesh
    if sc.n_subtriangles != 6 * mesh.nt or len(sc.split_points) != mesh.ne:
        raise Bug("refinement counts do not match the mesh")
    for split in sc.splits:
        scale = split.diameter
        if np.any(split.areas <= tol * scale * scale):
            raise MeshValidityError(
                "macro-triangle %s has a degenerate subtriangle" % split.index
            )
        for i in range(3):
            g = split.grad_mu[i]
            for c in (2 * i, 2 * i + 1):
                if np.linalg.norm(split.bary_grads[c, 0] - g) > 1e3 * tol * np.linalg.norm(g):
                    raise Bug("gradient of mu is not constant on fan %s" % i)
            unit = g / np.linalg.norm(g)
            if np.linalg.norm(unit + split.normals[i]) > 1e3 * tol:
                raise Bug("gradient of mu is not anti-parallel to the normal of edge %s" % i)
            if abs(g @ split.tangents[i]) > 1e3 * tol * np.linalg.norm(g):
                raise Bug("gradient of mu is not orthogonal to the tangent of edge %s" % i)
    singular_fans(sc)


def refine_uniform(mesh: MacroMesh, levels: int = 1) -> MacroMesh:
    """Red refinement: split every triangle into four.

    Args:
        mesh: Mesh to refine.
        levels: Number of refinement passes.

    Returns:
        The refined mesh.

    Examples:
        >>> refine_uniform(unit_square(), 2).nt
        32
    """
    for _ in range(levels):
        nv = mesh.nv
        midpoints = 0.5 * (mesh.vertices[mesh.edges[:, 0]] + mesh.vertices[mesh.edges[:, 1]])
        vertices = np.vstack([mesh.vertices, midpoints])
        triangles = []
        for t, (a, b, c) in enumerate(mesh.triangles):
            ma, mb, mc = (nv + e for e in mesh.triangle_edges[t])
            triangles.extend([(a, mc, mb), (mc, b, ma), (mb, ma, c), (ma, mb, mc)])
        mesh = MacroMesh(vertices, np.array(triangles))
    return mesh


def unit_square() -> MacroMesh:
    """Unit square split along its diagonal into two triangles."""
    return MacroMesh(
        np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
        np.array([[0, 1, 2], [0, 2, 3]]),
    )


def reference_triangle() -> MacroMesh:
    """The triangle (0,0), (1,0), (0,1)."""
    return MacroMesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), np.array([[0, 1, 2]]))


def annulus() -> MacroMesh:
    """Square [0,3]^2 with the square hole (1,2)^2, eight triangles."""
    vertices = np.array(
        [
            [0.0, 0.0],
            [3.0, 0.0],
            [3.0, 3.0],
            [0.0, 3.0],
            [1.0, 1.0],
            [2.0, 1.0],
            [2.0, 2.0],
            [1.0, 2.0],
        ]
    )
    triangles = np.array(
        [
            [0, 1, 5],
            [0, 5, 4],
            [1, 2, 6],
            [1, 6, 5],
            [2, 3, 7],
            [2, 7, 6],
            [3, 0, 4],
            [3, 4, 7],
        ]
    )
    return MacroMesh(vertices, triangles)


def pentagon() -> MacroMesh:
    """Regular pentagon as a fan of five triangles around its center."""
    angles = np.pi / 2 + 2 * np.pi * np.arange(5) / 5
    vertices = np.vstack([[0.0, 0.0], np.column_stack([np.cos(angles), np.sin(angles)])])
    triangles = np.array([[0, 1 + k, 1 + (k + 1) % 5] for k in range(5)])
    return MacroMesh(vertices, triangles)


def perturbed_square() -> MacroMesh:
    """3x3 vertex grid on [0,2]^2 with the center moved to (1.1, 0.9)."""
    xs = np.array([0.0, 1.0, 2.0])
    vertices = np.array([[x, y] for y in xs for x in xs])
    vertices[4] = [1.1, 0.9]
    triangles = []
    for j in range(2):
        for i in range(2):
            a = 3 * j + i
            b, c, d = a + 1, a + 4, a + 3
            triangles.extend([(a, b, c), (a, c, d)])
    return MacroMesh(vertices, np.array(triangles))


def random_triangle(rng: np.random.Generator, min_angle: float = 20.0) -> MacroMesh:
    """Random counter-clockwise triangle in the unit square.

    Args:
        rng: Seeded random generator.
        min_angle: Smallest admissible interior angle in degrees.

    Returns:
        A single-triangle mesh.

    Examples:
        >>> mesh = random_triangle(np.random.default_rng(0))
        >>> mesh.nt
        1
    """
    while True:
        corners = rng.uniform(0.0, 1.0, size=(3, 2))
        if signed_area(*corners) < 0:
            corners = corners[[0, 2, 1]]
        angles = []
        for k in range(3):
            a = corners[(k + 1) % 3] - corners[k]
            b = corners[(k + 2) % 3] - corners[k]
            cosine = a @ b / (np.linalg.norm(a) * np.linalg.norm(b))
            angles.append(np.degrees(np.arccos(np.clip(cosine, -1.0, 1.0))))
        if min(angles) >= min_angle:
            return MacroMesh(corners, np.array([[0, 1, 2]]))
