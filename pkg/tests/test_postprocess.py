import numpy as np
import pytest

from pfmulti.services.assembly import element_average
from pfmulti.services.mesh import element_geometry, generate_structured
from pfmulti.services.postprocess import (count_runs, crack_count, joined, level_set_points,
                                          nearest_row, pit_depth, recover_nodal_field,
                                          sample_line, semicircle_deviation)
from pfmulti.services.probes import ProbeRecorder, extreme_probe, nearest_node, nearest_point


def test_count_runs_along_a_path():
    result = count_runs([0.0, 1.0, 1.0, 0.2, 0.96, 0.0], [0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
    assert result.count == 2
    assert result.positions == pytest.approx([1.5, 4.0])
    assert result.mean_spacing == pytest.approx(2.5)


def test_crack_count_on_the_bottom_row():
    mesh = generate_structured([[0.0, 10.0], [0.0, 1.0]], [10, 1])
    phi = np.zeros(mesh.n_nodes)
    phi[[2, 3, 7]] = 1.0
    # shuffled row order is sorted along x before counting
    nodes = mesh.node_set("bottom")[::-1]
    result = crack_count(mesh, phi, nodes)
    assert result.count == 2
    assert result.positions == pytest.approx([2.5, 7.0])
    assert result.to_dict()["spacings"] == pytest.approx([4.5])
    assert crack_count(mesh, phi, []).count == 0


def test_recovery_reproduces_a_linear_field(square):
    x_ip = element_geometry(square).x_ip
    nodal = recover_nodal_field(square, 2.0 * x_ip[..., 0] + x_ip[..., 1])
    assert nodal == pytest.approx(2.0 * square.coords[:, 0] + square.coords[:, 1])


def test_element_average_of_constant(square):
    assert element_average(square, np.full((4, 4), 3.0)) == pytest.approx([3.0] * 4)


def test_level_set_and_pit_measures(square):
    points = level_set_points(square, square.coords[:, 0], level=0.25)
    assert len(points) == 3
    assert points[:, 0] == pytest.approx([0.25] * 3)
    assert pit_depth(points, surface=1.0) == pytest.approx(1.0)
    assert pit_depth(np.zeros((0, 2)), surface=1.0) == 0.0


def test_semicircle_deviation_of_exact_arc():
    angles = np.linspace(-np.pi / 2, 0.0, 7)
    points = 2.0 * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    radius, deviation = semicircle_deviation(points, [0.0, 0.0])
    assert radius == pytest.approx(2.0)
    assert deviation == pytest.approx(0.0, abs=1e-12)


def test_sample_line_and_rows(square):
    values = square.coords[:, 0] + 10.0 * square.coords[:, 1]
    coords, sampled = sample_line(square, values, axis=0, value=0.45)
    assert coords == pytest.approx([0.0, 0.5, 1.0])
    assert sampled == pytest.approx([0.5, 5.5, 10.5])
    assert nearest_row(square, 1, 0.9).tolist() == [6, 7, 8]


def test_connectivity_follows_element_edges(square):
    mask = np.ones(square.n_nodes, dtype=bool)
    assert joined(square, mask, [0], [8])
    diagonal = np.zeros(square.n_nodes, dtype=bool)
    diagonal[[0, 4, 8]] = True
    assert not joined(square, diagonal, [0], [8])


def test_probes_locate_nodes_and_points(square):
    assert nearest_node(square, [0.9, 0.1]) == 2
    e, p = nearest_point(square, [0.0, 0.0])
    assert e == 0
    assert element_geometry(square).x_ip[e, p] == pytest.approx([0.25 * (1.0 - 1.0 / np.sqrt(3.0))] * 2)


def test_recorder_appends_each_probe():
    class Stub:
        t = 0.0
        fields = {}

    recorder = ProbeRecorder()
    recorder.add("time_twice", lambda problem: 2.0 * problem.t)
    with pytest.raises(ValueError):
        recorder.add("time_twice", lambda problem: 0.0)
    stub = Stub()
    for t in (0.0, 0.5, 1.0):
        stub.t = t
        recorder(stub)
    series = recorder.series["time_twice"]
    assert series.values == [0.0, 1.0, 2.0]
    assert series.peak() == (1.0, 2.0)
    with pytest.raises(ValueError):
        recorder(stub)
    assert callable(extreme_probe("T"))
