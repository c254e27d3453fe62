"""
Thermal shock of a ceramic plate. A quarter of the plate is modelled: the
left and bottom faces are symmetry planes, the right and top faces are
brought to the ambient temperature at t = 0. Cracks nucleate at the top
face and are counted along a node row just below it.
"""

import logging

import numpy as np

from pfmulti.core.errors import ConfigError
from pfmulti.models.field import FieldState
from pfmulti.models.mesh import Mesh
from pfmulti.schemas.config import Config
from pfmulti.scenarios.base import ScenarioRun, build_schedule, check_size
from pfmulti.services.physics import MechanicsPhysics, fracture_physics, heat_physics
from pfmulti.services.postprocess import crack_count, nearest_row
from pfmulti.services.probes import extreme_probe, node_probe
from pfmulti.services.solver import Problem

logger = logging.getLogger(__name__)


def build(config: Config, mesh: Mesh) -> ScenarioRun:
    spec = config.scenario
    materials = config.materials
    if mesh.dim != 2:
        raise ConfigError("the quenching scenario needs a 2D mesh", path="mesh")
    elastic = materials.elastic.model_copy(update={"T0": spec.T_initial})
    fracture = materials.fracture

    u = FieldState.create("u", "displacement", mesh.n_nodes, n_components=2)
    phi = FieldState.create("phi", "phase", mesh.n_nodes)
    T = FieldState.create("T", "scalar", mesh.n_nodes, initial=spec.T_initial)
    u.add_dirichlet(mesh.node_set("left"), 0.0, component=0)
    u.add_dirichlet(mesh.node_set("bottom"), 0.0, component=1)
    T.add_dirichlet(mesh.node_set("right"), spec.T_ambient)
    T.add_dirichlet(mesh.node_set("top"), spec.T_ambient)

    physics = [
        MechanicsPhysics(elastic=elastic, split=spec.split, phase_field="phi",
                         k_res=fracture.k_res, thermal_field="T"),
        fracture_physics(mesh, fracture),
        heat_physics(mesh, materials.heat, phase_field="phi", k_res=fracture.k_res),
    ]
    problem = Problem.create(mesh, [u, phi, T], physics)
    check_size(problem)

    top = float(mesh.coords[:, 1].max())
    band = nearest_row(mesh, 1, top - spec.band_depth)
    run = ScenarioRun(name="quenching", problem=problem,
                      schedule=build_schedule(config.schedule, ["T", "u", "phi"], pair=("u", "phi")))
    run.recorder.add("phi_max", extreme_probe("phi", np.max))
    run.recorder.add("T_corner", node_probe(mesh, "T", [0.0, 0.0]))
    run.recorder.add("cracks", lambda p: crack_count(mesh, p.fields["phi"].values, band,
                                                     spec.crack_threshold).count)

    def metrics(run: ScenarioRun):
        counted = crack_count(mesh, run.problem.fields["phi"].values, band, spec.crack_threshold)
        logger.info("%d cracks along y=%.6g", counted.count, float(mesh.coords[band[0], 1]))
        return {"crack_count": counted.count, "crack_positions": counted.positions,
                "mean_spacing": counted.mean_spacing,
                "phi_max": float(run.problem.fields["phi"].values.max()),
                "band_y": float(mesh.coords[band[0], 1]),
                "degrade_conductivity": materials.heat.degrade_conductivity}

    run.metrics = metrics
    return run
