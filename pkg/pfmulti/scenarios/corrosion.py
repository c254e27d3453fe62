"""
Pitting corrosion. Half of the plate is modelled with the pit mouth at the
top-left corner, so the left face is the pit's symmetry axis. The pit
region starts dissolved (phi = 0, c = 0), the metal intact (phi = 1, c = 1);
a core of the pit is held dissolved and drains the ions, all other faces
are impermeable.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from pfmulti.core.errors import ConfigError
from pfmulti.models.field import FieldState
from pfmulti.models.mesh import Mesh
from pfmulti.models.series import ProbeSeries
from pfmulti.schemas.config import Config
from pfmulti.schemas.materials import CorrosionParams
from pfmulti.scenarios.base import ScenarioRun, build_schedule, check_size, ramp, tolerance
from pfmulti.services.assembly import integrate, scalar_at_points
from pfmulti.services.mechanics import degradation_corrosion
from pfmulti.services.oracles import RadialPitOracle
from pfmulti.services.physics import (MechanicsPhysics, corrosion_phase_physics,
                                      ion_transport_physics)
from pfmulti.services.postprocess import (level_set_points, pit_depth, recover_nodal_field,
                                          sample_line, semicircle_deviation)
from pfmulti.services.probes import node_probe, point_probe
from pfmulti.services.solver import Problem

logger = logging.getLogger(__name__)

Region = Callable[[np.ndarray], np.ndarray]


def _seed_pit(mesh: Mesh, pit: Region, core: Region, drained: bool):
    phi = FieldState.create("phi", "phase", mesh.n_nodes, initial=1.0)
    c = FieldState.create("c", "scalar", mesh.n_nodes, initial=1.0)
    inside = mesh.add_node_set("pit", mesh.nodes_where(pit))
    phi.set_initial(inside, 0.0)
    c.set_initial(inside, 0.0)
    if drained:
        held = mesh.add_node_set("pit_core", mesh.nodes_where(core))
        if held.size == 0:
            raise ConfigError("the mesh has no node inside the pit core", path="scenario.core_fraction")
        phi.add_dirichlet(held, 0.0)
        c.add_dirichlet(held, 0.0)
    return phi, c


@dataclass
class DrainLedger:
    """
    Ions removed through a held node set, accumulated once per accepted
    increment from the flux the ion field's residual carries on those nodes.
    Must be called once after every accepted increment.
    """

    nodes: np.ndarray
    field: str = "c"
    drained: float = 0.0
    t: float = 0.0

    def __call__(self, problem) -> float:
        dt = problem.t - self.t
        if dt > 0 and self.nodes.size:
            self.drained -= problem.physics[self.field].reaction(problem, self.nodes) * dt
        self.t = problem.t
        return self.drained


def front_probes(mesh: Mesh, surface: float, centre: Sequence[float],
                 params: Optional[CorrosionParams] = None,
                 drain: Optional[DrainLedger] = None) -> Dict[str, Callable]:
    """
    Pit front probes. With ``params`` the dissolved volume and the ions
    released into the electrolyte are recorded too, both in units of
    dissolved volume: the released ions are the excess over the local
    equilibrium concentration plus what ``drain`` has carried away.
    """
    def depth(problem) -> float:
        return pit_depth(level_set_points(mesh, problem.fields["phi"].values), surface)

    def shape(problem) -> float:
        points = level_set_points(mesh, problem.fields["phi"].values)
        return semicircle_deviation(points, centre)[1] if len(points) else 0.0

    def ions(problem) -> float:
        c, _ = scalar_at_points(mesh, problem.fields["c"].values)
        return integrate(mesh, c)

    probes = {"depth": depth, "shape_deviation": shape, "ions": ions}
    if params is None:
        return probes
    jump = (params.c_Se - params.c_Le) or 1.0

    def dissolved(problem) -> float:
        phi, _ = scalar_at_points(mesh, problem.fields["phi"].values)
        g, _, _ = degradation_corrosion(phi)
        return integrate(mesh, 1.0 - g)

    def released(problem) -> float:
        phi, _ = scalar_at_points(mesh, problem.fields["phi"].values)
        c, _ = scalar_at_points(mesh, problem.fields["c"].values)
        g, _, _ = degradation_corrosion(phi)
        excess = integrate(mesh, c - params.c_Le - g * (params.c_Se - params.c_Le))
        return (excess + (drain(problem) if drain is not None else 0.0)) / jump

    probes.update(dissolved=dissolved, ions_released=released)
    return probes


def mass_balance(dissolved: ProbeSeries, released: ProbeSeries) -> float:
    """|change in dissolved - change in released| relative to the dissolved change"""
    if len(dissolved) < 2:
        return 0.0
    change = dissolved.values[-1] - dissolved.values[0]
    if change == 0.0:
        return 0.0
    return float(abs(change - (released.values[-1] - released.values[0])) / abs(change))


def oracle_depth_error(depth: ProbeSeries, oracle: RadialPitOracle, dt: float, L: float,
                       t_from: float) -> Optional[float]:
    """Worst relative gap between the recorded depth and the radial oracle for t >= t_from"""
    times, values = depth.as_arrays()
    keep = (times >= t_from) & (times > 0.0)
    if not keep.any():
        return None
    reference = np.asarray(oracle.run(times[keep], dt, L=L).values)
    return float(np.max(np.abs(values[keep] - reference) / reference))


def build_pit_free(config: Config, mesh: Mesh) -> ScenarioRun:
    """Semicircular pit growing without mechanical loading"""
    spec = config.scenario
    corrosion = config.materials.corrosion
    if mesh.dim != 2:
        raise ConfigError("the pit scenarios need a 2D mesh", path="mesh")
    x0 = float(mesh.coords[:, 0].min())
    surface = float(mesh.coords[:, 1].max())
    centre = np.array([x0, surface])
    r0, r_core = spec.pit_radius, spec.core_fraction * spec.pit_radius
    tol = tolerance(mesh)

    def radius(x):
        return np.linalg.norm(x - centre, axis=1)

    drained = not spec.insulated and spec.core_fraction > 0
    phi, c = _seed_pit(mesh, lambda x: radius(x) <= r0 + tol, lambda x: radius(x) <= r_core + tol,
                       drained=drained)
    physics = [corrosion_phase_physics(mesh, corrosion, form=spec.form),
               ion_transport_physics(mesh, corrosion)]
    problem = Problem.create(mesh, [phi, c], physics)
    check_size(problem)

    run = ScenarioRun(name="pit_free", problem=problem,
                      schedule=build_schedule(config.schedule, ["phi", "c"], pair=("phi", "c")))
    drain = DrainLedger(mesh.node_set("pit_core") if drained else np.zeros(0, dtype=np.int64))
    for name, probe in front_probes(mesh, surface, centre, corrosion, drain).items():
        run.recorder.add(name, probe)
    r_out = float(min(mesh.coords[:, 0].max() - x0, surface - mesh.coords[:, 1].min()))

    def metrics(run: ScenarioRun):
        series = run.recorder.series
        result = {"depth": series["depth"].values[-1] if len(series["depth"]) else r0,
                  "max_shape_deviation": max(series["shape_deviation"].values, default=0.0),
                  "mass_balance": mass_balance(series["dissolved"], series["ions_released"]),
                  "ions_drained": drain.drained,
                  "pit_radius": r0, "surface": surface}
        if spec.insulated:
            result["ion_drift"] = _drift(series["ions"].values)
        if drained and r0 < r_out:
            oracle = RadialPitOracle(corrosion, r0, r_core, r_out)
            result["oracle_depth_error"] = oracle_depth_error(
                series["depth"], oracle, float(np.min(config.schedule.dt)), corrosion.L0,
                0.1 * config.schedule.t_end)
        return result

    run.metrics = metrics
    return run


def _drift(values) -> float:
    if len(values) < 2 or values[0] == 0:
        return 0.0
    return float(abs(values[-1] - values[0]) / abs(values[0]))


def unimodal(values, rel_tol: float = 1e-3) -> bool:
    """Non-decreasing up to the maximum and non-increasing after it, within rel_tol of the peak"""
    values = np.asarray(values, dtype=float)
    if values.size < 3:
        return True
    peak = int(np.argmax(values))
    slack = rel_tol * max(abs(values[peak]), 1e-300)
    return bool(np.all(np.diff(values[:peak + 1]) >= -slack)
                and np.all(np.diff(values[peak:]) <= slack))


def build_pit_scc(config: Config, mesh: Mesh) -> ScenarioRun:
    """
    Semi-elliptical pit in a plate pulled along x. The right face is
    displaced linearly to u_max over t_load and then held; the mobility
    follows the local plastic strain, hydrostatic stress and film rupture
    cycle. With ``mechanics`` off the displacement field is dropped and the
    film never decays, leaving the stress-free kinetics.
    """
    spec = config.scenario
    materials = config.materials
    if mesh.dim != 2:
        raise ConfigError("the pit scenarios need a 2D mesh", path="mesh")
    x0, y0 = mesh.coords.min(axis=0)
    surface = float(mesh.coords[:, 1].max())
    centre = np.array([x0, surface])
    a, b = spec.pit_half_width, spec.pit_depth
    tol = tolerance(mesh)

    def ellipse(x):
        return ((x[:, 0] - x0) / a) ** 2 + ((surface - x[:, 1]) / b) ** 2

    phi, c = _seed_pit(mesh, lambda x: ellipse(x) <= 1.0 + tol,
                       lambda x: ellipse(x) <= spec.core_fraction ** 2 + tol,
                       drained=spec.core_fraction > 0)
    corrosion = materials.corrosion
    fields = [phi, c]
    physics = []
    order = ["phi", "c"]
    mechanics = None
    if spec.mechanics:
        u = FieldState.create("u", "displacement", mesh.n_nodes, n_components=2)
        u.add_dirichlet(mesh.node_set("left"), 0.0, component=0)
        u.add_dirichlet(mesh.node_set("right"), ramp(spec.u_max, spec.t_load), component=0)
        pin = mesh.nodes_where(lambda x: (np.abs(x[:, 0] - x0) <= tol) & (np.abs(x[:, 1] - y0) <= tol))
        u.add_dirichlet(pin, 0.0, component=1)
        mechanics = MechanicsPhysics(elastic=materials.elastic, plastic=materials.plastic,
                                     degradation="corrosion", phase_field="phi", k_res=spec.k_res)
        fields.insert(0, u)
        physics.append(mechanics)
        order.insert(0, "u")
        phase = corrosion_phase_physics(mesh, corrosion, elastic=materials.elastic,
                                        plastic=materials.plastic)
    else:
        phase = corrosion_phase_physics(mesh, corrosion.model_copy(update={"k_film": 0.0}))
    physics += [phase, ion_transport_physics(mesh, corrosion)]
    problem = Problem.create(mesh, fields, physics)
    check_size(problem)

    run = ScenarioRun(name="pit_scc", problem=problem,
                      schedule=build_schedule(config.schedule, order, pair=("phi", "c")))
    probe_at = [x0, surface - b - spec.probe_offset]
    run.recorder.add("depth", front_probes(mesh, surface, centre)["depth"])
    run.recorder.add("phi_probe", node_probe(mesh, "phi", probe_at))
    run.recorder.add("sigma_h_probe", point_probe(mesh, "sigma_h", probe_at))

    def metrics(run: ScenarioRun):
        series = run.recorder.series
        result = {"depth": series["depth"].values[-1] if len(series["depth"]) else b,
                  "sigma_h_peak": max(series["sigma_h_probe"].values, default=0.0),
                  "sigma_h_unimodal": unimodal(series["sigma_h_probe"].values),
                  "mechanics": spec.mechanics}
        if mechanics is not None:
            sigma_xx = recover_nodal_field(mesh, mechanics.stress(run.problem)[..., 0, 0])
            _, s_line = sample_line(mesh, sigma_xx, 0, x0)
            _, phi_line = sample_line(mesh, run.problem.fields["phi"].values, 0, x0)
            scale = float(np.max(np.abs(s_line))) or 1.0
            corroded = phi_line < 0.05
            result["sigma_xx_corroded_ratio"] = (float(np.max(np.abs(s_line[corroded]))) / scale
                                                 if corroded.any() else 0.0)
        return result

    run.metrics = metrics
    return run
