import numpy as np
import pytest

from pfmulti.core.errors import DanglingNodeError, InvertedElementError, MeshError, MeshParseError
from pfmulti.models.mesh import Mesh
from pfmulti.services.mesh import (element_geometry, facet_weights, generate_structured,
                                   generate_tensor, graded_axis, quadrature, read_mesh,
                                   shape_eval, write_mesh)

GMSH_HEADER = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n"


def test_structured_quad_numbering_and_sets(square):
    assert square.n_nodes == 9
    assert square.n_elements == 4
    # x runs fastest
    assert np.allclose(square.coords[1], [0.5, 0.0])
    assert np.allclose(square.coords[3], [0.0, 0.5])
    assert square.node_set("left").tolist() == [0, 3, 6]
    assert square.node_set("right").tolist() == [2, 5, 8]
    assert square.node_set("bottom").tolist() == [0, 1, 2]
    assert square.node_set("top").tolist() == [6, 7, 8]


@pytest.mark.parametrize("kind,n_nodes", [("tri3", 9), ("quad4", 9), ("quad8", 21)])
def test_element_kinds_cover_the_square(kind, n_nodes):
    mesh = generate_structured([[0.0, 1.0], [0.0, 1.0]], [2, 2], kind)
    assert mesh.n_nodes == n_nodes
    assert mesh.volume() == pytest.approx(1.0)


def test_hex_mesh_has_six_faces():
    mesh = generate_structured([[0.0, 2.0], [0.0, 1.0], [0.0, 1.0]], [2, 1, 1], "hex8")
    assert mesh.n_nodes == 12
    assert mesh.volume() == pytest.approx(2.0)
    for name in ("left", "right", "bottom", "top", "back", "front"):
        assert mesh.node_set(name).size > 0
    assert mesh.node_set("front").size == 6


def test_reduced_integration_uses_fewer_points():
    assert quadrature("quad4").n_points == 4
    assert quadrature("quad4", reduced=True).n_points == 1
    assert quadrature("quad8").n_points == 9
    assert quadrature("hex8").n_points == 8


@pytest.mark.parametrize("kind,xi", [("quad4", [0.2, -0.4]), ("quad8", [0.3, 0.1]),
                                     ("tri3", [0.2, 0.3]), ("hex8", [0.1, -0.2, 0.5])])
def test_shape_functions_partition_unity(kind, xi):
    N, dN = shape_eval(kind, xi)
    assert N.sum() == pytest.approx(1.0)
    assert np.allclose(dN.sum(axis=0), 0.0)


def test_gradients_reproduce_linear_field(square):
    geometry = element_geometry(square)
    values = 3.0 * square.coords[:, 0] - 2.0 * square.coords[:, 1]
    grad = np.einsum("epai,ea->epi", geometry.dN_dx, values[square.connectivity])
    assert np.allclose(grad, [3.0, -2.0])


def test_graded_axis():
    assert np.allclose(graded_axis([0.0, 1.0, 3.0], [2, 2]), [0.0, 0.5, 1.0, 2.0, 3.0])
    assert np.allclose(graded_axis([0.0, 1.0], [2], ratios=[2.0]), [0.0, 1.0 / 3.0, 1.0])
    with pytest.raises(MeshError):
        graded_axis([0.0, 1.0], [2, 2])


def test_tensor_mesh_rejects_unsorted_axis():
    with pytest.raises(MeshError):
        generate_tensor([[0.0, 1.0, 0.5], [0.0, 1.0]])


def test_facet_weights_integrate_shape_functions(square):
    weights = facet_weights(square, square.node_set("right"))
    assert weights[[2, 5, 8]] == pytest.approx([0.25, 0.5, 0.25])
    assert weights.sum() == pytest.approx(1.0)


def test_inverted_element_is_refused():
    mesh = Mesh(coords=[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
                connectivity=[[0, 3, 2, 1]], kind="quad4")
    with pytest.raises(InvertedElementError) as excinfo:
        element_geometry(mesh)
    assert excinfo.value.element == 0
    assert excinfo.value.det_j < 0


def test_write_then_read_keeps_mesh_and_sets(square, tmp_path):
    square.add_node_set("corner", [8])
    square.add_element_set("upper", [2, 3])
    path = tmp_path / "square.msh"
    write_mesh(square, path)
    mesh = read_mesh(path)
    assert np.allclose(mesh.coords, square.coords)
    assert np.array_equal(mesh.connectivity, square.connectivity)
    assert mesh.node_set("corner").tolist() == [8]
    assert mesh.element_set("upper").tolist() == [2, 3]
    assert mesh.node_set("left").tolist() == [0, 3, 6]


def test_lower_dimensional_elements_become_node_sets(tmp_path):
    path = tmp_path / "one.msh"
    path.write_text(GMSH_HEADER + "$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 1 1 0\n4 0 1 0\n$EndNodes\n"
                    "$Elements\n3\n1 1 2 7 1 1 2\n2 3 2 1 1 1 2 3 4\n3 15 2 9 1 4\n$EndElements\n")
    mesh = read_mesh(path)
    assert mesh.n_elements == 1
    assert mesh.node_set("physical_7").tolist() == [0, 1]
    assert mesh.node_set("physical_9").tolist() == [3]
    assert mesh.element_set("physical_1").tolist() == [0]


def test_missing_node_record_reports_line(tmp_path):
    path = tmp_path / "short.msh"
    path.write_text(GMSH_HEADER + "$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 1 1 0\n$EndNodes\n")
    with pytest.raises(MeshParseError) as excinfo:
        read_mesh(path)
    assert excinfo.value.line == 9


def test_dangling_node(tmp_path):
    path = tmp_path / "dangling.msh"
    path.write_text(GMSH_HEADER + "$Nodes\n3\n1 0 0 0\n2 1 0 0\n3 1 1 0\n$EndNodes\n"
                    "$Elements\n1\n1 3 0 1 2 3 5\n$EndElements\n")
    with pytest.raises(DanglingNodeError) as excinfo:
        read_mesh(path)
    assert excinfo.value.node == 5


def test_unsupported_version(tmp_path):
    path = tmp_path / "new.msh"
    path.write_text("$MeshFormat\n4.1 0 8\n$EndMeshFormat\n")
    with pytest.raises(MeshParseError):
        read_mesh(path)
