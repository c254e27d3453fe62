from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional

import numpy as np


class ElementKind(str, Enum):
    TRI3 = "tri3"
    QUAD4 = "quad4"
    QUAD8 = "quad8"
    HEX8 = "hex8"

    @property
    def n_nodes(self) -> int:
        return {"tri3": 3, "quad4": 4, "quad8": 8, "hex8": 8}[self.value]

    @property
    def dim(self) -> int:
        return 3 if self is ElementKind.HEX8 else 2

    @property
    def reference_volume(self) -> float:
        return {"tri3": 0.5, "quad4": 4.0, "quad8": 4.0, "hex8": 8.0}[self.value]

    @property
    def vtk_type(self) -> int:
        return {"tri3": 5, "quad4": 9, "quad8": 23, "hex8": 12}[self.value]

    @property
    def gmsh_type(self) -> int:
        return {"tri3": 2, "quad4": 3, "quad8": 16, "hex8": 5}[self.value]


@dataclass(frozen=True)
class Node:
    id: int
    coords: np.ndarray

    def __repr__(self):
        return f"<Node {self.id} at {tuple(float(c) for c in self.coords)}>"

    def to_dict(self) -> Dict[str, Any]:
        return {"id": self.id, "coords": [float(c) for c in self.coords]}


@dataclass(frozen=True)
class Element:
    id: int
    kind: ElementKind
    node_ids: tuple

    def __repr__(self):
        return f"<Element {self.id} {self.kind.value} {list(self.node_ids)}>"

    def to_dict(self) -> Dict[str, Any]:
        return {"id": self.id, "kind": self.kind.value, "node_ids": list(self.node_ids)}


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray   # (n_ip, dim) local coordinates
    weights: np.ndarray  # (n_ip,)

    @property
    def n_points(self) -> int:
        return len(self.weights)


@dataclass
class ElementGeometry:
    """Shape-function data of every element evaluated at every quadrature point"""

    rule: QuadratureRule
    N: np.ndarray        # (n_ip, n_en)
    dN_dxi: np.ndarray   # (n_ip, n_en, dim)
    dN_dx: np.ndarray    # (n_el, n_ip, n_en, dim)
    det_j: np.ndarray    # (n_el, n_ip)
    dV: np.ndarray       # (n_el, n_ip), detJ times weight
    x_ip: np.ndarray     # (n_el, n_ip, dim)

    @property
    def n_points(self) -> int:
        return self.N.shape[0]


@dataclass
class Mesh:
    coords: np.ndarray                    # (n_nodes, dim)
    connectivity: np.ndarray              # (n_elements, n_en)
    kind: ElementKind
    node_sets: Dict[str, np.ndarray] = field(default_factory=dict)
    element_sets: Dict[str, np.ndarray] = field(default_factory=dict)
    reduced_integration: bool = False
    _geometry: Dict[bool, ElementGeometry] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=float)
        self.connectivity = np.asarray(self.connectivity, dtype=np.int64)
        self.kind = ElementKind(self.kind)

    def __repr__(self):
        return (f"<Mesh {self.kind.value} dim={self.dim} nodes={self.n_nodes} "
                f"elements={self.n_elements}>")

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.coords.shape[0]

    @property
    def n_elements(self) -> int:
        return self.connectivity.shape[0]

    def node(self, node_id: int) -> Node:
        return Node(id=int(node_id), coords=self.coords[node_id].copy())

    def element(self, element_id: int) -> Element:
        return Element(id=int(element_id), kind=self.kind,
                       node_ids=tuple(int(n) for n in self.connectivity[element_id]))

    @property
    def nodes(self) -> List[Node]:
        return [self.node(i) for i in range(self.n_nodes)]

    @property
    def elements(self) -> List[Element]:
        return [self.element(e) for e in range(self.n_elements)]

    def centroids(self) -> np.ndarray:
        return self.coords[self.connectivity].mean(axis=1)

    def nodes_where(self, predicate: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Ids of nodes whose coordinates satisfy a vectorised predicate"""
        return np.flatnonzero(predicate(self.coords)).astype(np.int64)

    def elements_where(self, predicate: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Ids of elements whose centroid satisfies a vectorised predicate"""
        return np.flatnonzero(predicate(self.centroids())).astype(np.int64)

    def add_node_set(self, name: str, ids) -> np.ndarray:
        ids = np.unique(np.asarray(ids, dtype=np.int64))
        self.node_sets[name] = ids
        return ids

    def add_element_set(self, name: str, ids) -> np.ndarray:
        ids = np.unique(np.asarray(ids, dtype=np.int64))
        self.element_sets[name] = ids
        return ids

    def node_set(self, name: str) -> np.ndarray:
        if name not in self.node_sets:
            raise KeyError(f"unknown node set '{name}'")
        return self.node_sets[name]

    def element_set(self, name: str) -> np.ndarray:
        if name not in self.element_sets:
            raise KeyError(f"unknown element set '{name}'")
        return self.element_sets[name]

    def volume(self, geometry: Optional[ElementGeometry] = None) -> float:
        if geometry is None:
            geometry = self._geometry.get(self.reduced_integration)
        if geometry is None:
            raise ValueError("element geometry has not been evaluated for this mesh")
        return float(geometry.dV.sum())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "dim": self.dim,
            "n_nodes": self.n_nodes,
            "n_elements": self.n_elements,
            "node_sets": sorted(self.node_sets),
            "element_sets": sorted(self.element_sets),
        }
