import logging

import numpy as np

from pfmulti.core.errors import ConfigError
from pfmulti.models.field import FieldState, VolumeSource
from pfmulti.models.mesh import Mesh
from pfmulti.schemas.config import Config
from pfmulti.scenarios.base import ScenarioRun, build_schedule, check_size, switched
from pfmulti.services.assembly import integrate, scalar_at_points
from pfmulti.services.physics import heat_physics
from pfmulti.services.probes import extreme_probe
from pfmulti.services.solver import Problem

logger = logging.getLogger(__name__)


def build(config: Config, mesh: Mesh) -> ScenarioRun:
    """Transient heat conduction with Dirichlet sets, an initial hot spot and a volume source"""
    spec = config.scenario
    heat = config.materials.heat

    T = FieldState.create("T", "scalar", mesh.n_nodes, initial=spec.initial)
    if spec.hot_spot is not None:
        centre = np.asarray(spec.hot_spot.center, dtype=float)[:mesh.dim]
        inside = mesh.nodes_where(lambda x: np.linalg.norm(x - centre, axis=1) <= spec.hot_spot.radius)
        T.set_initial(inside, spec.hot_spot.value)
    try:
        for bc in spec.dirichlet:
            T.add_dirichlet(mesh.node_set(bc.set), bc.value)
        elements = (np.arange(mesh.n_elements) if spec.source_set is None
                    else mesh.element_set(spec.source_set))
    except KeyError as e:
        raise ConfigError(f"scenario: {e.args[0]}", path="scenario")
    if spec.source:
        T.sources.append(VolumeSource(elements=elements, value=switched(spec.source, spec.source_until)))

    problem = Problem.create(mesh, [T], [heat_physics(mesh, heat)])
    check_size(problem)
    run = ScenarioRun(name="diffusion", problem=problem,
                      schedule=build_schedule(config.schedule, ["T"]))
    run.recorder.add("T_max", extreme_probe("T", np.max))
    run.recorder.add("T_min", extreme_probe("T", np.min))

    def metrics(run: ScenarioRun):
        T_ip, _ = scalar_at_points(mesh, run.problem.fields["T"].values)
        return {"T_max": float(T.values.max()), "T_min": float(T.values.min()),
                "heat_content": heat.rho * heat.c_T * integrate(mesh, T_ip)}

    run.metrics = metrics
    return run
