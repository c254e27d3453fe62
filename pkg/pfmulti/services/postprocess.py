"""
Post-processing of solved fields: nodal recovery of integration point
quantities, crack counting along a node row and corrosion front extraction.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from pfmulti.core.errors import MeshError
from pfmulti.models.mesh import ElementKind, Mesh
from pfmulti.services.mesh import element_geometry

logger = logging.getLogger(__name__)

_CORNER_EDGES = {
    ElementKind.TRI3: ((0, 1), (1, 2), (2, 0)),
    ElementKind.QUAD4: ((0, 1), (1, 2), (2, 3), (3, 0)),
    ElementKind.QUAD8: ((0, 1), (1, 2), (2, 3), (3, 0)),
    ElementKind.HEX8: ((0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4),
                       (0, 4), (1, 5), (2, 6), (3, 7)),
}


def recover_nodal_field(mesh: Mesh, ip_values: np.ndarray) -> np.ndarray:
    """
    Nodal values of an integration point quantity: each element's points are
    extrapolated to its nodes by least squares through the shape functions,
    and shared nodes take the volume-weighted mean of the element values.
    """
    if mesh.n_elements == 0:
        raise MeshError("cannot recover nodal values on an empty mesh")
    geometry = element_geometry(mesh)
    ip_values = np.asarray(ip_values, dtype=float)
    if ip_values.shape != geometry.dV.shape:
        raise ValueError(f"expected integration point values of shape {geometry.dV.shape}, "
                         f"got {ip_values.shape}")
    extrapolate = np.linalg.pinv(geometry.N)                 # (n_en, n_ip)
    element_nodal = ip_values @ extrapolate.T                # (n_el, n_en)
    volume = geometry.dV.sum(axis=1)
    weights = np.broadcast_to(volume[:, None], element_nodal.shape)
    conn = mesh.connectivity.ravel()
    total = np.bincount(conn, weights=(element_nodal * weights).ravel(), minlength=mesh.n_nodes)
    weight = np.bincount(conn, weights=weights.ravel(), minlength=mesh.n_nodes)
    return np.divide(total, weight, out=np.zeros(mesh.n_nodes), where=weight > 0)


def ip_gradient(mesh: Mesh, nodal: np.ndarray) -> np.ndarray:
    """(n_el, n_ip, dim) gradient of a nodal scalar at the integration points"""
    geometry = element_geometry(mesh)
    return np.einsum("epai,ea->epi", geometry.dN_dx, np.asarray(nodal, dtype=float)[mesh.connectivity])


@dataclass
class CrackCount:
    count: int
    positions: List[float] = field(default_factory=list)
    spacings: List[float] = field(default_factory=list)

    @property
    def mean_spacing(self) -> float:
        return float(np.mean(self.spacings)) if self.spacings else float("nan")

    def to_dict(self):
        return {"count": self.count, "positions": list(self.positions),
                "spacings": list(self.spacings)}


def count_runs(values: Sequence[float], positions: Sequence[float],
               threshold: float = 0.95) -> CrackCount:
    """Connected runs of values >= threshold along an ordered path"""
    values = np.asarray(values, dtype=float)
    positions = np.asarray(positions, dtype=float)
    above = values >= threshold
    edges = np.diff(np.concatenate([[0], above.astype(np.int8), [0]]))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)
    centres = [float(positions[a:b].mean()) for a, b in zip(starts, stops)]
    return CrackCount(count=len(centres), positions=centres,
                      spacings=[float(d) for d in np.diff(centres)])


def crack_count(mesh: Mesh, phi: np.ndarray, nodes, threshold: float = 0.95,
                axis: int = 0) -> CrackCount:
    """Count cracks crossing a node path, ordered along ``axis``"""
    nodes = np.asarray(nodes, dtype=np.int64)
    if nodes.size == 0:
        return CrackCount(count=0)
    order = np.argsort(mesh.coords[nodes, axis], kind="stable")
    nodes = nodes[order]
    return count_runs(np.asarray(phi)[nodes], mesh.coords[nodes, axis], threshold)


def nearest_row(mesh: Mesh, axis: int, value: float, tol: Optional[float] = None) -> np.ndarray:
    """Nodes whose coordinate along ``axis`` is the one closest to ``value``"""
    coord = mesh.coords[:, axis]
    target = coord[np.argmin(np.abs(coord - value))]
    tol = 1e-9 * max(1.0, float(np.ptp(coord))) if tol is None else tol
    return np.flatnonzero(np.abs(coord - target) <= tol)


def level_set_points(mesh: Mesh, values: np.ndarray, level: float = 0.5) -> np.ndarray:
    """
    Points where a nodal field crosses ``level``, found by linear
    interpolation along element edges between corner nodes. Each mesh edge
    contributes at most one point.
    """
    values = np.asarray(values, dtype=float)
    pairs = np.concatenate([mesh.connectivity[:, list(edge)] for edge in _CORNER_EDGES[mesh.kind]])
    pairs = np.unique(np.sort(pairs, axis=1), axis=0)
    a, b = pairs[:, 0], pairs[:, 1]
    da, db = values[a] - level, values[b] - level
    crossing = (da * db < 0) | ((da == 0) & (db != 0))
    a, b, da, db = a[crossing], b[crossing], da[crossing], db[crossing]
    s = (da / (da - db))[:, None]
    points = (1.0 - s) * mesh.coords[a] + s * mesh.coords[b]
    # nodes exactly on the level are found once per incident edge
    return np.unique(np.round(points, 14), axis=0) if points.size else points


def pit_depth(points: np.ndarray, surface: float, axis: int = 1) -> float:
    """Largest distance of the front below the surface plane ``x[axis] = surface``"""
    if len(points) == 0:
        return 0.0
    return float(np.max(surface - points[:, axis]))


def semicircle_deviation(points: np.ndarray, center: Sequence[float]) -> Tuple[float, float]:
    """
    Best-fit radius about a fixed centre (the pit mouth on the symmetry
    axis) and the largest radial deviation of the front relative to it.
    """
    if len(points) == 0:
        return 0.0, float("nan")
    r = np.linalg.norm(points - np.asarray(center, dtype=float), axis=1)
    radius = float(r.mean())
    return radius, float(np.max(np.abs(r - radius)) / radius)


def sample_line(mesh: Mesh, nodal: np.ndarray, axis: int, value: float) -> Tuple[np.ndarray, np.ndarray]:
    """Nodal values along the node row closest to ``x[axis] = value``, sorted along the other axis"""
    nodes = nearest_row(mesh, axis, value)
    other = 1 - axis if mesh.dim == 2 else (axis + 1) % 3
    order = np.argsort(mesh.coords[nodes, other], kind="stable")
    nodes = nodes[order]
    return mesh.coords[nodes, other], np.asarray(nodal)[nodes]


def connected_nodes(mesh: Mesh, mask: np.ndarray) -> np.ndarray:
    """
    Component label per node of the graph of element edges between nodes
    where ``mask`` holds; nodes outside the mask get -1.
    """
    mask = np.asarray(mask, dtype=bool)
    pairs = np.concatenate([mesh.connectivity[:, list(edge)] for edge in _CORNER_EDGES[mesh.kind]])
    pairs = pairs[mask[pairs[:, 0]] & mask[pairs[:, 1]]]
    graph = sp.coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])),
                          shape=(mesh.n_nodes, mesh.n_nodes))
    _, labels = connected_components(graph, directed=False)
    return np.where(mask, labels, -1)


def joined(mesh: Mesh, mask: np.ndarray, a, b) -> bool:
    """Whether some node of ``a`` and some node of ``b`` lie in one masked component"""
    labels = connected_nodes(mesh, mask)
    la = set(labels[np.asarray(a, dtype=np.int64)]) - {-1}
    lb = set(labels[np.asarray(b, dtype=np.int64)]) - {-1}
    return bool(la & lb)
