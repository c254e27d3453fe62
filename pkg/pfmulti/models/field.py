from dataclasses import dataclass, field
from typing import Callable, List, Tuple, Union

import numpy as np

from pfmulti.core.errors import ConstraintError

ValueFn = Union[float, Callable[[float], float]]

FIELD_KINDS = ("displacement", "phase", "scalar")


def value_at(value: ValueFn, t: float) -> float:
    """Evaluate a constant or a function of time"""
    return float(value(t)) if callable(value) else float(value)


@dataclass(frozen=True)
class DirichletBC:
    nodes: np.ndarray
    component: int = 0
    value: ValueFn = 0.0


@dataclass(frozen=True)
class NeumannBC:
    # Facets whose nodes all belong to this set carry the flux.
    nodes: np.ndarray
    value: ValueFn = 0.0
    component: int = 0


@dataclass(frozen=True)
class VolumeSource:
    elements: np.ndarray
    value: ValueFn = 0.0


@dataclass
class FieldState:
    """Nodal unknowns of one field, node-major: dof = node * n_components + component"""

    name: str
    kind: str
    n_components: int
    values: np.ndarray
    old: np.ndarray
    dirichlet: List[DirichletBC] = field(default_factory=list)
    neumann: List[NeumannBC] = field(default_factory=list)
    sources: List[VolumeSource] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise ValueError(f"unknown field kind '{self.kind}'")
        if self.values.shape != self.old.shape:
            raise ValueError("current and previous values differ in size")
        if self.values.size % self.n_components:
            raise ValueError("value vector is not a multiple of the component count")

    @classmethod
    def create(cls, name: str, kind: str, n_nodes: int, n_components: int = 1,
               initial: float = 0.0) -> "FieldState":
        values = np.full(n_nodes * n_components, float(initial))
        return cls(name=name, kind=kind, n_components=n_components,
                   values=values, old=values.copy())

    def __repr__(self):
        return (f"<FieldState {self.name} ({self.kind}) dofs={self.n_dofs} "
                f"dirichlet={len(self.dirichlet)}>")

    @property
    def n_dofs(self) -> int:
        return self.values.size

    @property
    def n_nodes(self) -> int:
        return self.values.size // self.n_components

    @property
    def nodal(self) -> np.ndarray:
        return self.values.reshape(self.n_nodes, self.n_components)

    def set_initial(self, nodes, value: float, component: int = 0) -> None:
        dofs = np.asarray(nodes, dtype=np.int64) * self.n_components + component
        self.values[dofs] = value
        self.old[dofs] = value

    def add_dirichlet(self, nodes, value: ValueFn = 0.0, component: int = 0) -> None:
        nodes = np.asarray(nodes, dtype=np.int64)
        if nodes.size and (nodes.min() < 0 or nodes.max() >= self.n_nodes):
            raise ConstraintError(f"Dirichlet target outside field '{self.name}'")
        if not 0 <= component < self.n_components:
            raise ConstraintError(f"field '{self.name}' has no component {component}")
        self.dirichlet.append(DirichletBC(nodes=nodes, component=component, value=value))

    def constraints(self, t: float) -> Tuple[np.ndarray, np.ndarray]:
        """Constrained dofs (sorted, unique) and their target values at time t"""
        if not self.dirichlet:
            return np.zeros(0, dtype=np.int64), np.zeros(0)
        dofs = np.concatenate([bc.nodes * self.n_components + bc.component
                               for bc in self.dirichlet])
        targets = np.concatenate([np.full(bc.nodes.size, value_at(bc.value, t))
                                  for bc in self.dirichlet])
        order = np.argsort(dofs, kind="stable")
        dofs, targets = dofs[order], targets[order]
        unique, first = np.unique(dofs, return_index=True)
        # duplicates must agree with the first constraint placed on the dof
        counts = np.diff(np.append(first, dofs.size))
        reference = np.repeat(targets[first], counts)
        clash = reference != targets
        if np.any(clash):
            dof = int(dofs[np.argmax(clash)])
            raise ConstraintError(
                f"conflicting Dirichlet values on field '{self.name}' dof {dof}")
        return unique, targets[first]

    def prescribe(self, t: float) -> None:
        dofs, targets = self.constraints(t)
        self.values[dofs] = targets

    def commit(self) -> None:
        np.copyto(self.old, self.values)

    def to_dict(self):
        return {"name": self.name, "kind": self.kind, "n_components": self.n_components,
                "n_dofs": self.n_dofs, "max": float(self.values.max()) if self.n_dofs else 0.0,
                "min": float(self.values.min()) if self.n_dofs else 0.0}
