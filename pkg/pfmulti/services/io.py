"""
Result files: legacy ASCII VTK snapshots with a ``.vtk.series`` index, probe
CSV tables and JSON documents. Every file is written to a temporary sibling
and renamed into place.
"""

import json
import logging
import os
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from pfmulti.core.errors import OutputError
from pfmulti.models.mesh import Mesh
from pfmulti.models.series import ProbeSeries

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _atomic_write(path: PathLike, write) -> Path:
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        write(tmp)
        os.replace(tmp, path)
    except OSError as e:
        tmp.unlink(missing_ok=True)
        raise OutputError(f"cannot write {path}: {e.strerror or e}")
    return path


def atomic_write_text(path: PathLike, text: str) -> Path:
    return _atomic_write(path, lambda tmp: tmp.write_text(text, encoding="utf-8", newline="\n"))


def write_json(path: PathLike, payload) -> Path:
    return atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _format(values: np.ndarray) -> str:
    return "\n".join(" ".join(f"{v:.17g}" for v in row) for row in np.atleast_2d(values))


def write_vtk(mesh: Mesh, fields: Mapping[str, np.ndarray], path: PathLike,
              time: Optional[float] = None,
              cell_data: Optional[Mapping[str, np.ndarray]] = None) -> Path:
    """
    Legacy VTK 3.0 ASCII unstructured grid. Nodal arrays with one value per
    node are written as SCALARS, (n_nodes, dim) arrays as VECTORS padded to
    three components; ``cell_data`` holds one value per element.
    """
    lines = ["# vtk DataFile Version 3.0",
             "pfmulti" if time is None else f"pfmulti t={time:.17g}",
             "ASCII", "DATASET UNSTRUCTURED_GRID"]
    points = np.zeros((mesh.n_nodes, 3))
    points[:, :mesh.dim] = mesh.coords
    lines += [f"POINTS {mesh.n_nodes} double", _format(points)]

    n_en = mesh.kind.n_nodes
    lines.append(f"CELLS {mesh.n_elements} {mesh.n_elements * (n_en + 1)}")
    lines += [f"{n_en} " + " ".join(str(int(n)) for n in row) for row in mesh.connectivity]
    lines.append(f"CELL_TYPES {mesh.n_elements}")
    lines += [str(mesh.kind.vtk_type)] * mesh.n_elements

    if fields:
        lines.append(f"POINT_DATA {mesh.n_nodes}")
        for name, values in fields.items():
            lines += _data_block(name, np.asarray(values, dtype=float), mesh.n_nodes)
    if cell_data:
        lines.append(f"CELL_DATA {mesh.n_elements}")
        for name, values in cell_data.items():
            lines += _data_block(name, np.asarray(values, dtype=float), mesh.n_elements)

    path = atomic_write_text(path, "\n".join(line for line in lines if line != "") + "\n")
    logger.debug("wrote %s", path)
    return path


def _data_block(name: str, values: np.ndarray, n: int) -> List[str]:
    if values.shape[0] != n:
        raise OutputError(f"array '{name}' has {values.shape[0]} entries, expected {n}")
    if values.ndim == 1:
        return [f"SCALARS {name} double 1", "LOOKUP_TABLE default", _format(values[:, None])]
    vectors = np.zeros((n, 3))
    vectors[:, :values.shape[1]] = values
    return [f"VECTORS {name} double", _format(vectors)]


def read_vtk_point_data(path: PathLike) -> Dict[str, np.ndarray]:
    """POINT_DATA arrays of a file written by write_vtk"""
    tokens = Path(path).read_text(encoding="utf-8").split()
    data: Dict[str, np.ndarray] = {}
    try:
        i = tokens.index("POINT_DATA")
    except ValueError:
        return data
    n = int(tokens[i + 1])
    i += 2
    while i < len(tokens) and tokens[i] in ("SCALARS", "VECTORS"):
        kind, name = tokens[i], tokens[i + 1]
        if kind == "SCALARS":
            i += 6  # SCALARS name type ncomp LOOKUP_TABLE default
            data[name] = np.array(tokens[i:i + n], dtype=float)
            i += n
        else:
            i += 3
            data[name] = np.array(tokens[i:i + 3 * n], dtype=float).reshape(n, 3)
            i += 3 * n
    return data


def write_vtk_series(path: PathLike, entries: Sequence[Tuple[str, float]]) -> Path:
    """ParaView time-series index for a list of (file name, time)"""
    return write_json(path, {"file-series-version": "1.0",
                             "files": [{"name": name, "time": time} for name, time in entries]})


def write_csv(series: Iterable[ProbeSeries], path: PathLike) -> Path:
    """
    One row per recorded increment: column ``t`` then one column per probe.
    Every series must share the same time axis; NaN values are refused.
    """
    series = list(series)
    columns = ["t"] + [s.name for s in series]
    if not series:
        frame = pd.DataFrame(columns=columns)
    else:
        times = np.asarray(series[0].times, dtype=float)
        for s in series[1:]:
            if len(s) != len(times) or not np.array_equal(np.asarray(s.times), times):
                raise OutputError(f"probe '{s.name}' does not share the time axis of '{series[0].name}'")
        frame = pd.DataFrame({"t": times, **{s.name: np.asarray(s.values, dtype=float) for s in series}},
                             columns=columns)
        bad = frame.isna().any(axis=1).to_numpy()
        if bad.any():
            row = int(np.argmax(bad))
            raise OutputError(f"NaN in probe series written to {path}", increment=row)
    return _atomic_write(path, lambda tmp: frame.to_csv(tmp, index=False, float_format="%.17g",
                                                        lineterminator="\n"))
