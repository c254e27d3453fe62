"""
Probes: scalar observations of a running problem, recorded after every
accepted increment into ProbeSeries.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from pfmulti.models.mesh import Mesh
from pfmulti.models.series import ProbeSeries
from pfmulti.services.mesh import element_geometry

logger = logging.getLogger(__name__)

ProbeFn = Callable[[object], float]


def nearest_node(mesh: Mesh, point: Sequence[float]) -> int:
    point = np.asarray(point, dtype=float)[:mesh.dim]
    return int(np.argmin(np.linalg.norm(mesh.coords - point, axis=1)))


def nearest_point(mesh: Mesh, point: Sequence[float]) -> Tuple[int, int]:
    """(element, integration point) closest to ``point``"""
    x_ip = element_geometry(mesh).x_ip
    point = np.asarray(point, dtype=float)[:mesh.dim]
    flat = int(np.argmin(np.linalg.norm(x_ip - point, axis=-1)))
    e, p = np.unravel_index(flat, x_ip.shape[:2])
    return int(e), int(p)


def node_probe(mesh: Mesh, name: str, point: Sequence[float], component: int = 0) -> ProbeFn:
    node = nearest_node(mesh, point)

    def probe(problem) -> float:
        f = problem.fields[name]
        return float(f.values[node * f.n_components + component])

    return probe


def point_probe(mesh: Mesh, quantity: str, point: Sequence[float]) -> ProbeFn:
    """A scalar material-point quantity (sigma_h, H, eps_bar_p, ...) at the nearest point"""
    e, p = nearest_point(mesh, point)

    def probe(problem) -> float:
        value = getattr(problem.state, quantity)
        if value.ndim != 2:
            raise ValueError(f"'{quantity}' is not a scalar material-point quantity")
        return float(value[e, p])

    return probe


def reaction_probe(name: str, nodes, component: int) -> ProbeFn:
    nodes = np.asarray(nodes, dtype=np.int64)

    def probe(problem) -> float:
        return problem.physics[name].reaction(problem, nodes, component)

    return probe


def extreme_probe(name: str, reducer: Callable[[np.ndarray], float] = np.max,
                  component: int = 0) -> ProbeFn:
    def probe(problem) -> float:
        return float(reducer(problem.fields[name].nodal[:, component]))

    return probe


def build_probe(problem, spec) -> ProbeFn:
    """Probe callable for a configured probe (see ProbeSpec)"""
    mesh = problem.mesh
    if spec.kind == "node":
        return node_probe(mesh, spec.field, spec.at, spec.component)
    if spec.kind == "point":
        return point_probe(mesh, spec.field, spec.at)
    if spec.kind == "reaction":
        return reaction_probe(spec.field, mesh.node_set(spec.set), spec.component)
    if spec.kind == "max":
        return extreme_probe(spec.field, np.max, spec.component)
    if spec.kind == "min":
        return extreme_probe(spec.field, np.min, spec.component)
    raise ValueError(f"unknown probe kind '{spec.kind}'")


@dataclass
class ProbeRecorder:
    """Observer appending every probe's value at each accepted increment"""

    probes: Dict[str, ProbeFn] = field(default_factory=dict)
    series: Dict[str, ProbeSeries] = field(default_factory=dict)

    def add(self, name: str, probe: ProbeFn) -> None:
        if name in self.probes:
            raise ValueError(f"duplicate probe '{name}'")
        self.probes[name] = probe
        self.series[name] = ProbeSeries(name=name)

    def __call__(self, problem) -> None:
        for name, probe in self.probes.items():
            self.series[name].append(problem.t, probe(problem))

    def __len__(self):
        return len(self.probes)

    def as_list(self) -> List[ProbeSeries]:
        return list(self.series.values())
