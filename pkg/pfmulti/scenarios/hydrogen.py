"""
Hydrogen-assisted cracking of an edge-cracked plate under a displacement
ramp. Half of the plate is modelled: the crack is the free part of the
bottom face (x < crack_length), the ligament ahead of it is a symmetry
plane. Hydrogen lowers the fracture toughness through the surface
coverage; its transport can be solved, frozen at the charging level or
held at the stress-enriched equilibrium.
"""

import logging

import numpy as np

from pfmulti.core.errors import ConfigError
from pfmulti.models.field import FieldState
from pfmulti.models.mesh import Mesh
from pfmulti.schemas.config import Config
from pfmulti.scenarios.base import ScenarioRun, build_schedule, check_size, ramp, tolerance
from pfmulti.scenarios.hydraulic import crack_tip
from pfmulti.services.physics import (MechanicsPhysics, equilibrium_hydrogen_physics,
                                      fracture_physics, hydrogen_physics)
from pfmulti.services.probes import extreme_probe, reaction_probe
from pfmulti.services.solver import Problem

logger = logging.getLogger(__name__)


def build(config: Config, mesh: Mesh) -> ScenarioRun:
    spec = config.scenario
    materials = config.materials
    if mesh.dim != 2:
        raise ConfigError("the hydrogen plate scenario needs a 2D mesh", path="mesh")
    tol = tolerance(mesh)
    x0, y0 = mesh.coords.min(axis=0)
    x1, _ = mesh.coords.max(axis=0)
    x_notch = x0 + spec.crack_length
    ligament = mesh.add_node_set("ligament", mesh.nodes_where(
        lambda c: (np.abs(c[:, 1] - y0) <= tol) & (c[:, 0] >= x_notch - tol)))
    if ligament.size < 2 or not x_notch < x1:
        raise ConfigError("the crack must end inside the bottom face", path="scenario.crack_length")
    ligament = ligament[np.argsort(mesh.coords[ligament, 0], kind="stable")]
    corner = ligament[-1:]

    u = FieldState.create("u", "displacement", mesh.n_nodes, n_components=2)
    phi = FieldState.create("phi", "phase", mesh.n_nodes)
    c = FieldState.create("c", "scalar", mesh.n_nodes, initial=spec.c_env)
    loading = ramp(spec.u_max, spec.t_load)
    u.add_dirichlet(ligament, 0.0, component=1)
    u.add_dirichlet(corner, 0.0, component=0)
    u.add_dirichlet(mesh.node_set("top"), loading, component=1)

    mechanics = MechanicsPhysics(elastic=materials.elastic, split=spec.split, phase_field="phi",
                                 k_res=materials.fracture.k_res)
    physics = [mechanics,
               fracture_physics(mesh, materials.fracture, hydrogen=materials.hydrogen,
                                hydrogen_field="c")]
    fields = ["u", "phi"]
    if spec.transport == "transient":
        for name in ("left", "right", "top"):
            c.add_dirichlet(mesh.node_set(name), spec.c_env)
        physics.append(hydrogen_physics(mesh, materials.hydrogen))
        fields.append("c")
    elif spec.transport == "steady":
        physics.append(equilibrium_hydrogen_physics(materials.hydrogen, spec.c_env))
        fields.append("c")
    problem = Problem.create(mesh, [u, phi, c], physics)
    check_size(problem)

    run = ScenarioRun(name="hydrogen_plate", problem=problem,
                      schedule=build_schedule(config.schedule, fields, pair=("u", "phi")))
    top = mesh.node_set("top")
    run.recorder.add("displacement", lambda pr: loading(pr.t))
    run.recorder.add("load", reaction_probe("u", top, 1))
    run.recorder.add("c_max", extreme_probe("c", np.max))
    run.recorder.add("phi_max", extreme_probe("phi", np.max))

    x_ligament = mesh.coords[ligament, 0]
    run.extra["tip_distance"] = []

    def watch(pr: Problem) -> None:
        tip = crack_tip(x_ligament, pr.fields["phi"].values[ligament], 0.95)
        tip_point = np.array([x_notch if tip is None else tip, y0])
        hot = int(np.argmax(pr.fields["c"].values))
        run.extra["tip_distance"].append(float(np.linalg.norm(mesh.coords[hot] - tip_point)))

    run.observers.append(watch)

    def metrics(run: ScenarioRun):
        load = run.recorder.series["load"]
        if not len(load):
            return {"peak_load": 0.0}
        i = int(np.argmax(load.values))
        # the initial record at t = 0 precedes the first observer call
        distances = [float("nan")] * (len(load) - len(run.extra["tip_distance"])) + run.extra["tip_distance"]
        return {"peak_load": load.values[i],
                "displacement_at_peak": run.recorder.series["displacement"].values[i],
                "t_peak": load.times[i],
                "c_max_tip_distance": distances[i],
                "ell": materials.fracture.ell,
                "c_env": spec.c_env, "transport": spec.transport}

    run.metrics = metrics
    return run
