"""
Fluid-driven fracture: a pre-existing crack loaded by a pressure ramp on its
faces, and injection into a central crack next to an inclined one.

Pre-cracks are node sets held at phi = 1. Both drivers solve the pressure
first and then displacement and phase field, so the mechanics sees the
pressure of the current increment.
"""

import logging
from typing import Optional

import numpy as np

from pfmulti.core.errors import ConfigError
from pfmulti.models.field import FieldState, VolumeSource
from pfmulti.models.mesh import Mesh
from pfmulti.schemas.config import Config
from pfmulti.scenarios.base import (ScenarioRun, build_schedule, characteristic_size, check_size,
                                    ramp, segment_distance, switched, tolerance)
from pfmulti.services.oracles import critical_pressure_oracle
from pfmulti.services.physics import MechanicsPhysics, fluid_physics, fracture_physics
from pfmulti.services.postprocess import joined
from pfmulti.services.probes import extreme_probe, node_probe
from pfmulti.services.solver import Problem

logger = logging.getLogger(__name__)


def crack_tip(x: np.ndarray, phi: np.ndarray, threshold: float) -> Optional[float]:
    """End of the run of phi >= threshold starting at the first node of an ordered path"""
    above = np.asarray(phi) >= threshold
    if not above.size or not above[0]:
        return None
    end = int(np.argmin(above)) if not above.all() else above.size
    return float(x[end - 1])


def build_pressurized_crack(config: Config, mesh: Mesh) -> ScenarioRun:
    """
    Quarter model of a line crack of half-length a0 on the bottom face at
    x <= a0. The bottom ligament and the left face are symmetry planes; the
    pressure ramp is prescribed on the crack nodes and the outer faces are
    drained.
    """
    spec = config.scenario
    materials = config.materials
    if mesh.dim != 2:
        raise ConfigError("the pressurized crack scenario needs a 2D mesh", path="mesh")
    tol = tolerance(mesh)
    y0 = float(mesh.coords[:, 1].min())
    x0 = float(mesh.coords[:, 0].min())
    crack = mesh.add_node_set("crack", mesh.nodes_where(
        lambda c: (np.abs(c[:, 1] - y0) <= tol) & (c[:, 0] <= x0 + spec.a0 + tol)))
    ligament = mesh.add_node_set("ligament", mesh.nodes_where(
        lambda c: (np.abs(c[:, 1] - y0) <= tol) & (c[:, 0] > x0 + spec.a0 + tol)))
    if crack.size < 2 or ligament.size == 0:
        raise ConfigError("the mesh does not resolve the initial crack along its bottom face",
                          path="scenario.a0")

    u = FieldState.create("u", "displacement", mesh.n_nodes, n_components=2)
    phi = FieldState.create("phi", "phase", mesh.n_nodes)
    p = FieldState.create("p", "scalar", mesh.n_nodes)
    u.add_dirichlet(mesh.node_set("left"), 0.0, component=0)
    u.add_dirichlet(ligament, 0.0, component=1)
    phi.set_initial(crack, 1.0)
    phi.add_dirichlet(crack, 1.0)
    p.add_dirichlet(crack, ramp(spec.p_max, spec.t_ramp))
    p.add_dirichlet(mesh.node_set("right"), 0.0)
    p.add_dirichlet(mesh.node_set("top"), 0.0)

    physics = [
        MechanicsPhysics(elastic=materials.elastic, split=spec.split, phase_field="phi",
                         k_res=materials.fracture.k_res, pressure_field="p", fluid=materials.fluid),
        fracture_physics(mesh, materials.fracture),
        fluid_physics(mesh, materials.fluid),
    ]
    problem = Problem.create(mesh, [u, phi, p], physics)
    check_size(problem)

    line = mesh.nodes_where(lambda c: np.abs(c[:, 1] - y0) <= tol)
    line = line[np.argsort(mesh.coords[line, 0], kind="stable")]
    x_line = mesh.coords[line, 0] - x0
    ahead = np.diff(x_line)[x_line[1:] > spec.a0 + tol]
    h_tip = float(ahead[0]) if ahead.size else float(np.diff(x_line).min())
    centre = node_probe(mesh, "p", [x0, y0])

    run = ScenarioRun(name="pressurized_crack", problem=problem,
                      schedule=build_schedule(config.schedule, ["p", "u", "phi"], pair=("u", "phi")))
    run.recorder.add("p_center", centre)
    run.recorder.add("crack_tip", lambda pr: crack_tip(x_line, pr.fields["phi"].values[line],
                                                       spec.crack_threshold) or 0.0)
    run.extra.update(initiation=None)

    def watch(pr: Problem) -> None:
        if run.extra["initiation"] is not None:
            return
        tip = crack_tip(x_line, pr.fields["phi"].values[line], spec.crack_threshold)
        if tip is not None and tip >= spec.a0 + h_tip * (1.0 - 1e-9):
            run.extra["initiation"] = (pr.t, centre(pr))
            logger.info("crack initiated at t=%.6g, p_center=%.6g", pr.t, centre(pr))

    run.observers.append(watch)

    def metrics(run: ScenarioRun):
        E, nu = materials.elastic.E, materials.elastic.nu
        oracle = critical_pressure_oracle(E, nu, materials.fracture.G_c, spec.a0)
        result = {"p_c_oracle": oracle, "a0": spec.a0, "h_tip": h_tip,
                  "initiated": run.extra["initiation"] is not None}
        if run.extra["initiation"] is None:
            logger.warning("crack did not initiate within the pressure ramp")
            result.update(p_c=None, t_initiation=None, ratio=None)
        else:
            t_init, p_c = run.extra["initiation"]
            result.update(p_c=p_c, t_initiation=t_init, ratio=p_c / oracle)
        return result

    run.metrics = metrics
    return run


def build_injection(config: Config, mesh: Mesh) -> ScenarioRun:
    """
    Fluid injected at rate q_m into the elements of a central pre-crack, with
    a second pre-crack inclined next to it. All outer faces are clamped and
    drained. The 3D variant extrudes both cracks through the thickness.
    """
    spec = config.scenario
    materials = config.materials
    if mesh.dim != spec.dim:
        raise ConfigError(f"scenario.dim is {spec.dim} but the mesh is {mesh.dim}D", path="scenario.dim")
    h = characteristic_size(mesh)
    central_d = segment_distance(mesh.coords, spec.center, spec.crack_length)
    inclined_d = segment_distance(mesh.coords, spec.inclined_center, spec.crack_length,
                                  spec.inclined_angle)
    central = mesh.add_node_set("central_crack", np.flatnonzero(central_d <= 0.51 * h))
    inclined = mesh.add_node_set("inclined_crack", np.flatnonzero(inclined_d <= 0.75 * h))
    if central.size == 0 or inclined.size == 0:
        raise ConfigError("the mesh does not resolve the pre-cracks", path="scenario")
    centroid_d = segment_distance(mesh.centroids(), spec.center, spec.crack_length)
    injection = mesh.add_element_set("injection", np.flatnonzero(centroid_d <= h))

    u = FieldState.create("u", "displacement", mesh.n_nodes, n_components=mesh.dim)
    phi = FieldState.create("phi", "phase", mesh.n_nodes)
    p = FieldState.create("p", "scalar", mesh.n_nodes)
    for name in ("left", "right", "bottom", "top", "back", "front"):
        if name in mesh.node_sets:
            for k in range(mesh.dim):
                u.add_dirichlet(mesh.node_set(name), 0.0, component=k)
            p.add_dirichlet(mesh.node_set(name), 0.0)
    for crack in (central, inclined):
        phi.set_initial(crack, 1.0)
        phi.add_dirichlet(crack, 1.0)
    p.sources.append(VolumeSource(elements=injection,
                                  value=switched(spec.q_m / materials.fluid.rho_fl, spec.t_inject)))

    physics = [
        MechanicsPhysics(elastic=materials.elastic, split=spec.split, phase_field="phi",
                         k_res=materials.fracture.k_res, pressure_field="p", fluid=materials.fluid),
        fracture_physics(mesh, materials.fracture),
        fluid_physics(mesh, materials.fluid),
    ]
    problem = Problem.create(mesh, [u, phi, p], physics)
    check_size(problem)

    run = ScenarioRun(name="injection", problem=problem,
                      schedule=build_schedule(config.schedule, ["p", "u", "phi"], pair=("u", "phi")))
    centre = list(spec.center[:2])
    if mesh.dim == 3:
        centre.append(0.5 * (mesh.coords[:, 2].min() + mesh.coords[:, 2].max()))
    run.recorder.add("p_center", node_probe(mesh, "p", centre))
    run.recorder.add("phi_max", extreme_probe("phi", np.max))

    def metrics(run: ScenarioRun):
        series = run.recorder.series["p_center"]
        t_peak, p_peak = series.peak() if len(series) else (0.0, 0.0)
        p_final = series.values[-1] if len(series) else 0.0
        cracked = run.problem.fields["phi"].values >= 0.95
        return {"p_peak": p_peak, "t_peak": t_peak, "p_final": p_final,
                "decayed": bool(p_final < p_peak),
                "coalesced": joined(mesh, cracked, central, inclined),
                "injection_elements": int(injection.size)}

    run.metrics = metrics
    return run
