import json

import numpy as np
import pandas as pd
import pytest

from pfmulti.core.errors import OutputError
from pfmulti.models.series import ProbeSeries
from pfmulti.services.io import (read_vtk_point_data, write_csv, write_json, write_vtk,
                                 write_vtk_series)


def series(name, times, values):
    s = ProbeSeries(name=name)
    for t, v in zip(times, values):
        s.append(t, v)
    return s


def test_csv_has_one_row_per_increment(tmp_path):
    path = write_csv([series("load", [0.0, 1.0], [0.0, 2.5]),
                      series("crack", [0.0, 1.0], [0.0, 1.0])], tmp_path / "probes.csv")
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["t", "load", "crack"]
    assert frame["load"].tolist() == [0.0, 2.5]
    assert not list(tmp_path.glob(".*.tmp"))


def test_csv_refuses_nan_and_mismatched_axes(tmp_path):
    with pytest.raises(OutputError) as excinfo:
        write_csv([series("load", [0.0, 1.0, 2.0], [0.0, float("nan"), 1.0])], tmp_path / "a.csv")
    assert excinfo.value.increment == 1
    with pytest.raises(OutputError):
        write_csv([series("a", [0.0, 1.0], [0.0, 0.0]), series("b", [0.0, 2.0], [0.0, 0.0])],
                  tmp_path / "b.csv")
    assert not (tmp_path / "a.csv").exists()


def test_vtk_point_data_round_trip(square, tmp_path):
    T = np.arange(square.n_nodes, dtype=float)
    u = np.stack([T, -T], axis=1)
    path = write_vtk(square, {"T": T, "u": u}, tmp_path / "out.vtk", time=0.5,
                     cell_data={"H": np.ones(square.n_elements)})
    text = path.read_text()
    assert "pfmulti t=0.5" in text
    assert "CELLS 4 20" in text
    data = read_vtk_point_data(path)
    assert data["T"] == pytest.approx(T)
    assert data["u"][:, :2] == pytest.approx(u)
    assert data["u"][:, 2] == pytest.approx(np.zeros(square.n_nodes))


def test_vtk_rejects_wrong_array_length(square, tmp_path):
    with pytest.raises(OutputError):
        write_vtk(square, {"T": np.zeros(3)}, tmp_path / "bad.vtk")


def test_series_index_and_json(tmp_path):
    write_vtk_series(tmp_path / "run.vtk.series", [("run_00000.vtk", 0.0), ("run_00010.vtk", 1.0)])
    index = json.loads((tmp_path / "run.vtk.series").read_text())
    assert index["files"][1] == {"name": "run_00010.vtk", "time": 1.0}
    write_json(tmp_path / "m.json", {"b": 1, "a": [1.5]})
    assert json.loads((tmp_path / "m.json").read_text()) == {"a": [1.5], "b": 1}


def test_output_into_missing_directory_is_created(tmp_path):
    path = write_json(tmp_path / "deep" / "nested" / "m.json", {})
    assert path.exists()
