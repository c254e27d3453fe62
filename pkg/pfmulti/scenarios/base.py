"""
Shared plumbing of the scenario drivers: mesh and schedule construction from
the configuration, load ramps, geometric node/element selection and the
ScenarioRun bundle handed to the runner.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from pfmulti.core.config import settings
from pfmulti.core.errors import ConfigError
from pfmulti.models.mesh import Mesh
from pfmulti.models.system import CouplingSchedule
from pfmulti.schemas.config import Config, MeshSpec, ScheduleSpec
from pfmulti.services.assembly import element_average
from pfmulti.services.mesh import (element_geometry, generate_structured, generate_tensor,
                                   graded_axis, read_mesh)
from pfmulti.services.probes import ProbeRecorder, build_probe
from pfmulti.services.solver import Observer, Problem

logger = logging.getLogger(__name__)

Metrics = Callable[["ScenarioRun"], Dict[str, Any]]


def build_mesh(spec: MeshSpec, base_dir: Optional[str] = None) -> Mesh:
    if spec.file is not None:
        path = Path(spec.file) if base_dir is None else Path(base_dir) / spec.file
        mesh = read_mesh(path)
        mesh.reduced_integration = spec.reduced_integration
        return mesh
    if spec.bounds is not None:
        return generate_structured(spec.bounds, spec.divisions, spec.kind, spec.reduced_integration)
    axes = [graded_axis(a.breakpoints, a.divisions, a.ratios)
            for a in (spec.x_coords, spec.y_coords, spec.z_coords) if a is not None]
    return generate_tensor(axes, spec.kind, spec.reduced_integration)


def build_schedule(spec: ScheduleSpec, fields: Sequence[str], pair: Sequence[str] = ()) -> CouplingSchedule:
    return CouplingSchedule.from_scheme(
        spec.scheme, list(fields), pair=tuple(pair), passes=spec.passes, dt=spec.dt,
        t_end=spec.t_end, pass_tol=spec.pass_tol, tol_rel=spec.tol_rel, tol_abs=spec.tol_abs,
        max_iter=spec.max_iter, min_dt_factor=spec.min_dt_factor,
        max_increments=spec.max_increments)


def ramp(peak: float, duration: float) -> Callable[[float], float]:
    """Linear ramp from zero to ``peak`` over ``duration``, then held"""
    def value(t: float) -> float:
        return peak * min(t / duration, 1.0)

    return value


def switched(value: float, until: Optional[float]) -> Callable[[float], float]:
    def source(t: float) -> float:
        return value if until is None or t <= until * (1.0 + 1e-12) else 0.0

    return source


def tolerance(mesh: Mesh) -> float:
    return 1e-9 * max(1.0, float(np.ptp(mesh.coords)))


def characteristic_size(mesh: Mesh, elements=None) -> float:
    """Smallest edge-like length scale: the minimum element volume to the power 1/dim"""
    volume = element_geometry(mesh).dV.sum(axis=1)
    if elements is not None:
        volume = volume[np.asarray(elements, dtype=np.int64)]
    return float(np.min(volume) ** (1.0 / mesh.dim))


def row_nodes(mesh: Mesh, axis: int, value: float, lo: float = -np.inf, hi: float = np.inf,
              along: int = 0) -> np.ndarray:
    """Nodes on the plane x[axis] = value with lo <= x[along] <= hi"""
    tol = tolerance(mesh)
    return mesh.nodes_where(lambda c: (np.abs(c[:, axis] - value) <= tol)
                            & (c[:, along] >= lo - tol) & (c[:, along] <= hi + tol))


def segment_distance(points: np.ndarray, center: Sequence[float], length: float,
                     angle_deg: float = 0.0) -> np.ndarray:
    """In-plane (x, y) distance of points to a segment given by its centre, length and angle"""
    center = np.asarray(center, dtype=float)[:2]
    direction = np.array([np.cos(np.radians(angle_deg)), np.sin(np.radians(angle_deg))])
    rel = points[:, :2] - center
    s = np.clip(rel @ direction, -0.5 * length, 0.5 * length)
    return np.linalg.norm(rel - s[:, None] * direction, axis=1)


def check_size(problem: Problem) -> None:
    if problem.n_dofs > settings.MAX_DOFS:
        raise ConfigError(f"problem has {problem.n_dofs} unknowns, above the limit of "
                          f"{settings.MAX_DOFS} (PFMULTI_MAX_DOFS)", path="mesh")


def default_cell_data(problem: Problem) -> Dict[str, np.ndarray]:
    mesh, state = problem.mesh, problem.state
    return {"sigma_h": element_average(mesh, state.sigma_h),
            "eps_bar_p": element_average(mesh, state.eps_bar_p),
            "H": element_average(mesh, state.H)}


@dataclass
class ScenarioRun:
    """A configured problem ready to be stepped"""

    name: str
    problem: Problem
    schedule: CouplingSchedule
    recorder: ProbeRecorder = field(default_factory=ProbeRecorder)
    observers: List[Observer] = field(default_factory=list)
    metrics: Optional[Metrics] = None
    cell_data: Callable[[Problem], Dict[str, np.ndarray]] = default_cell_data
    extra: Dict[str, Any] = field(default_factory=dict)

    def __repr__(self):
        return f"<ScenarioRun {self.name} {self.problem!r}>"

    def attach_probes(self, config: Config) -> None:
        for spec in config.output.probes:
            try:
                self.recorder.add(spec.name, build_probe(self.problem, spec))
            except (KeyError, ValueError) as e:
                raise ConfigError(f"output.probes.{spec.name}: {e.args[0]}", path="output.probes")

    def summary(self) -> Dict[str, Any]:
        return self.metrics(self) if self.metrics is not None else {}
