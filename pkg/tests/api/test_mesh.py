from pathlib import Path

import numpy as np
import pytest

from psfeec.api.mesh import (
    MacroMesh,
    annulus,
    incenter,
    load_macro_mesh,
    pentagon,
    perturbed_square,
    powell_sabin_refine,
    random_triangle,
    read_mesh,
    refine_uniform,
    singular_fans,
    unit_square,
    validate_complex,
)
from psfeec.enums import InteriorRule, MeshFormat
from psfeec.exceptions import MeshFormatError, MeshValidityError, WellDefinednessError

DATA = Path(__file__).resolve().parents[1] / "data"


def test_read_mesh_formats():
    single = read_mesh(DATA / "square.msh")
    paired = read_mesh(DATA / "square.ele")
    assert single.nv == paired.nv == 4
    assert np.allclose(single.vertices, paired.vertices)
    assert single.triangles.tolist() == paired.triangles.tolist()
    lshape = read_mesh(DATA / "lshape.msh")
    assert (lshape.nv, lshape.ne, lshape.nt) == (8, 13, 6)
    assert lshape.euler_characteristic == 1


def test_read_mesh_errors():
    with pytest.raises(MeshFormatError) as error:
        read_mesh(DATA / "malformed.msh")
    assert error.value.line == 3
    with pytest.raises(MeshFormatError):
        read_mesh(DATA / "truncated.msh")
    with pytest.raises(MeshValidityError):
        read_mesh(DATA / "degenerate.msh")
    with pytest.raises(MeshFormatError):
        load_macro_mesh("", MeshFormat.single_block)
    with pytest.raises(MeshFormatError):
        load_macro_mesh("3 2 0 0\n1 0 0\n2 1 0\n3 0 1\n", MeshFormat.node_ele)


def test_macro_mesh_validity():
    with pytest.raises(MeshValidityError):
        MacroMesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]]), np.array([[0, 1, 2]]))
    with pytest.raises(MeshValidityError):
        MacroMesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 5.0]]), np.array([[0, 1, 2]]))
    with pytest.raises(MeshValidityError):
        MacroMesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), np.array([[0, 1, 3]]))
    clockwise = MacroMesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), np.array([[0, 2, 1]]))
    assert clockwise.triangles.tolist() == [[0, 1, 2]]


def test_builtin_meshes():
    assert annulus().euler_characteristic == 0
    assert pentagon().nt == 5
    assert perturbed_square().nt == 8
    assert unit_square().boundary_vertices.tolist() == [0, 1, 2, 3]
    assert unit_square().corner_vertices().tolist() == [0, 1, 2, 3]
    mesh = refine_uniform(unit_square(), 1)
    assert (mesh.nv, mesh.ne, mesh.nt) == (9, 16, 8)
    assert mesh.euler_characteristic == 1
    assert len(mesh.corner_vertices()) == 4


def test_random_triangle(rng):
    for _ in range(10):
        mesh = random_triangle(rng, min_angle=25.0)
        corners = mesh.vertices
        for k in range(3):
            a = corners[(k + 1) % 3] - corners[k]
            b = corners[(k + 2) % 3] - corners[k]
            angle = np.degrees(np.arccos(a @ b / np.linalg.norm(a) / np.linalg.norm(b)))
            assert angle >= 25.0 - 1e-9


def test_split_geometry(split):
    assert np.allclose(split.z0, incenter(*split.vertices))
    assert np.allclose(split.points[4:], [[0.5, 0.5], [0.0, 0.5], [0.5, 0.0]])
    assert split.areas.sum() == pytest.approx(0.5)
    assert (split.areas > 0).all()
    for i in range(3):
        a, b = split.edge_endpoints(i)
        assert np.allclose(split.tangents[i] * split.edge_lengths[i], b - a)
        # outward normal points away from the interior point
        assert (a - split.z0) @ split.normals[i] > 0
        unit = split.grad_mu[i] / np.linalg.norm(split.grad_mu[i])
        assert np.allclose(unit, -split.normals[i])
    assert split.vertex_cell(1) == 0
    assert split.vertex_cell(0) == 4
    assert split.half_length(0) + split.half_length(1) == pytest.approx(split.edge_lengths[0])


def test_split_locate(split):
    for cell, points in split.sample_points(4):
        centroid = split.cell_vertices[cell].mean(axis=0)
        assert split.locate(centroid)[0] == cell
        assert np.allclose(split.barycentric(points, cell).sum(axis=1), 1.0)
        assert (split.barycentric(points, cell) >= -1e-12).all()


def test_refine_square(square):
    assert square.n_subtriangles == 12
    assert square.n_points == 11
    assert square.interior_split_edges == [1]
    assert len(square.half_edges) == 10
    assert square.boundary_vertex_set == {0, 1, 2, 3}
    fans = square.fans()
    assert len(fans[1]) == 4
    assert [t for t, _ in fans[1]] == [0, 0, 1, 1]
    assert all(len(fans[e]) == 2 for e in range(5) if e != 1)
    data = square.to_dict()
    assert data["counts"] == {"V": 4, "E": 5, "T": 2, "subtriangles": 12}
    assert len(data["vertices"]) == 11


def test_refine_interior_rule():
    mesh = MacroMesh(
        np.array([[0.0, 0.0], [1.0, 0.0], [-5.0, 0.2], [-5.0, -0.2]]),
        np.array([[0, 1, 2], [0, 3, 1]]),
    )
    sc = powell_sabin_refine(mesh)
    validate_complex(sc)
    with pytest.raises(WellDefinednessError) as error:
        powell_sabin_refine(mesh, InteriorRule.barycenter)
    assert error.value.edge == (0, 1)


def test_refine_meshes():
    for mesh in (annulus(), pentagon(), perturbed_square(), refine_uniform(unit_square(), 2)):
        sc = powell_sabin_refine(mesh)
        assert len(sc) == mesh.nt
        fans = singular_fans(sc)
        assert sum(len(fan) for fan in fans.values()) == sc.n_subtriangles
        for e in sc.interior_split_edges:
            assert len(fans[e]) == 4
