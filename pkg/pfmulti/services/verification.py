"""
Self-checks behind ``pfmulti verify``.

kernels   kernel derivatives against central differences at random states
jacobian  assembled stiffness against central differences of the residual
          on two-element meshes, for every kernel and the mechanics block
oracles   discrete solutions against closed-form and conservation results
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, Dict, List

import numpy as np

from pfmulti.models.field import FieldState
from pfmulti.models.kernel import KernelInput, KernelResponse
from pfmulti.models.system import CouplingSchedule
from pfmulti.schemas.materials import (CorrosionParams, ElasticProps, FluidParams, FractureParams,
                                       HeatParams, HydrogenParams, PlasticProps)
from pfmulti.services import kernels
from pfmulti.services.assembly import assemble_scalar, integrate, scalar_at_points
from pfmulti.services.mechanics import degradation_corrosion
from pfmulti.services.mesh import element_geometry, generate_structured
from pfmulti.services.oracles import (at2_profile, critical_pressure_oracle, equilibrium_hydrogen,
                                      interface_metrics, interface_profile, l2_relative_error)
from pfmulti.services.physics import (KernelPhysics, MechanicsPhysics, allen_cahn_physics,
                                      fracture_physics)
from pfmulti.services.postprocess import sample_line
from pfmulti.services.solver import Problem, run_transient

logger = logging.getLogger(__name__)

KERNEL_TOL = 1e-6
JACOBIAN_TOL = 1e-5


@dataclass
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool

    def __str__(self):
        mark = "ok" if self.passed else "FAILED"
        return f"{self.name}: {self.value:.3e} (tolerance {self.tolerance:.1e}) {mark}"

    def to_dict(self):
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance,
                "passed": self.passed}


def below(name: str, value: float, tolerance: float) -> CheckResult:
    return CheckResult(name=name, value=float(value), tolerance=tolerance,
                       passed=bool(np.isfinite(value) and value < tolerance))


def relative_error(exact, approx) -> float:
    """Largest deviation relative to the largest entry of either block"""
    exact, approx = np.asarray(exact, dtype=float), np.asarray(approx, dtype=float)
    scale = max(float(np.max(np.abs(exact), initial=0.0)), float(np.max(np.abs(approx), initial=0.0)))
    return 0.0 if scale == 0.0 else float(np.max(np.abs(exact - approx))) / scale


KernelFn = Callable[[KernelInput], KernelResponse]

# small, well-scaled parameter sets; the checks are about consistency, not materials
HEAT = HeatParams(rho=2.0, c_T=3.0, k0=1.5, degrade_conductivity=True)
FRACTURE = FractureParams(G_c=2.0, ell=0.5, k_res=1e-3)
CORROSION = CorrosionParams(A_curv=2.0, omega=1.5, kappa=0.2, c_Le=0.3, D_m=0.5, L0=1.3)
FLUID = FluidParams(rho_fl=1.0, mu_fl=0.7, C_fl=0.2, alpha_r=0.8, n_pr=0.3, K_r=0.1, K_f=2.0,
                    K_bulk=5.0)
HYDROGEN = HydrogenParams(D_H=0.4, V_H=0.5, R_gas=1.0, T_k=2.0, dg_b0=1.0, chi_H=0.5)


def kernel_cases(rng: np.random.Generator, shape: tuple, dim: int) -> Dict[str, KernelFn]:
    """One closure per kernel with its coupled quantities drawn once from ``rng``"""
    phi = rng.uniform(0.05, 0.95, shape)
    grad_phi = rng.normal(size=shape + (dim,))
    H = rng.uniform(0.0, 3.0, shape)
    c = rng.uniform(0.0, 1.0, shape)
    L = rng.uniform(0.5, 2.0, shape)
    f_b1, f_b2 = rng.normal(size=shape), rng.normal(size=shape)
    eps_vol_rate = rng.normal(size=shape)
    grad_sigma_h = rng.normal(size=shape + (dim,))
    return {
        "heat": lambda inp: kernels.heat_kernel(inp, HEAT, phi=phi, source=1.0, k_res=1e-3),
        "fracture": lambda inp: kernels.fracture_kernel(inp, FRACTURE, H),
        "allen_cahn": lambda inp: kernels.allen_cahn_kernel(
            inp, lambda p: kernels.double_well(p, 1.5), degradation_corrosion, f_b1, f_b2, 0.3, 1.2),
        "corrosion_phase": lambda inp: kernels.corrosion_phase_kernel(inp, CORROSION, L, c=c),
        "corrosion_phase_gradient": lambda inp: kernels.corrosion_phase_kernel_gradient_form(
            inp, CORROSION, L, c=c),
        "ion_transport": lambda inp: kernels.ion_transport_kernel(inp, CORROSION, phi=phi,
                                                                  grad_phi=grad_phi),
        "fluid": lambda inp: kernels.fluid_kernel(inp, FLUID, phi=phi, eps_vol_rate=eps_vol_rate,
                                                  source=0.5),
        "hydrogen": lambda inp: kernels.hydrogen_kernel(inp, HYDROGEN, grad_sigma_h=grad_sigma_h),
    }


def derivative_errors(kernel: KernelFn, inp: KernelInput, h: float = 1e-6) -> Dict[str, float]:
    """Relative error of each derivative block against central differences"""
    shape, dim = inp.s.shape, inp.dim
    exact = kernel(inp).broadcast(shape, dim)

    def at(ds: float = 0.0, k: int = 0, dg: float = 0.0) -> KernelResponse:
        grad = inp.grad_s.copy()
        grad[..., k] += dg
        return kernel(replace(inp, s=inp.s + ds, grad_s=grad)).broadcast(shape, dim)

    plus, minus = at(ds=h), at(ds=-h)
    U_s = (plus.U_new - minus.U_new) / (2 * h)
    flux_s = (plus.flux - minus.flux) / (2 * h)
    U_g = np.zeros(shape + (dim,))
    flux_g = np.zeros(shape + (dim, dim))
    for k in range(dim):
        plus, minus = at(k=k, dg=h), at(k=k, dg=-h)
        U_g[..., k] = (plus.U_new - minus.U_new) / (2 * h)
        flux_g[..., :, k] = (plus.flux - minus.flux) / (2 * h)
    return {"dU_ds": relative_error(exact.dU_ds, U_s),
            "dU_dgrad": relative_error(exact.dU_dgrad, U_g),
            "dflux_ds": relative_error(exact.dflux_ds, flux_s),
            "dflux_dgrad": relative_error(exact.dflux_dgrad, flux_g)}


def kernel_suite(n_points: int = 200, seed: int = 7) -> List[CheckResult]:
    rng = np.random.default_rng(seed)
    shape, dim = (n_points,), 2
    inp = KernelInput(s=rng.uniform(0.1, 0.9, shape), s_old=rng.uniform(0.1, 0.9, shape),
                      grad_s=rng.normal(size=shape + (dim,)), dt=rng.uniform(0.1, 1.0),
                      U_old=rng.normal(size=shape))
    results = []
    for name, kernel in kernel_cases(rng, shape, dim).items():
        for block, error in derivative_errors(kernel, inp).items():
            results.append(below(f"kernel {name} {block}", error, KERNEL_TOL))
    return results


def two_elements():
    return generate_structured([[0.0, 2.0], [0.0, 1.0]], [2, 1], "quad4")


def fd_stiffness(residual: Callable[[], np.ndarray], values: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of ``residual`` with respect to ``values`` (perturbed in place)"""
    n = values.size
    K = np.zeros((n, n))
    for j in range(n):
        saved = values[j]
        values[j] = saved + h
        plus = residual()
        values[j] = saved - h
        minus = residual()
        values[j] = saved
        K[:, j] = (plus - minus) / (2 * h)
    return K


def jacobian_suite(seed: int = 11) -> List[CheckResult]:
    rng = np.random.default_rng(seed)
    mesh = two_elements()
    n_ip = element_geometry(mesh).n_points
    shape = (mesh.n_elements, n_ip)
    results = []

    for name, kernel in kernel_cases(rng, shape, mesh.dim).items():
        field = FieldState.create("s", "scalar", mesh.n_nodes)
        field.values[:] = rng.uniform(0.1, 0.9, mesh.n_nodes)
        field.old[:] = rng.uniform(0.1, 0.9, mesh.n_nodes)
        U_old = rng.normal(size=shape)

        def residual():
            return assemble_scalar(mesh, field, kernel, 0.3, 1.0, U_old=U_old)[0].R

        system, _ = assemble_scalar(mesh, field, kernel, 0.3, 1.0, U_old=U_old)
        error = relative_error(system.K.toarray(), fd_stiffness(residual, field.values))
        results.append(below(f"jacobian {name}", error, JACOBIAN_TOL))

    elastic = ElasticProps(E=100.0, nu=0.3)
    plastic = PlasticProps(sigma_y=0.5, N_hard=0.2)
    cases = [("mechanics none", "none", None, 0.05),
             ("mechanics no_tension", "no_tension", None, 0.05),
             ("mechanics J2 elastic branch", "none", plastic, 1e-4),
             ("mechanics J2 plastic branch", "none", plastic, 0.05)]
    for label, split, plastic_props, amplitude in cases:
        u = FieldState.create("u", "displacement", mesh.n_nodes, n_components=2)
        u.values[:] = rng.normal(scale=amplitude, size=u.n_dofs)
        phi = FieldState.create("phi", "phase", mesh.n_nodes)
        phi.values[:] = rng.uniform(0.0, 0.6, mesh.n_nodes)
        physics = MechanicsPhysics(elastic=elastic, split=split, plastic=plastic_props,
                                   phase_field="phi", k_res=1e-3)
        problem = Problem.create(mesh, [u, phi], [physics])

        def residual():
            return physics.assemble(problem, 1.0, 1.0).R

        K = physics.assemble(problem, 1.0, 1.0).K.toarray()
        error = relative_error(K, fd_stiffness(residual, u.values))
        results.append(below(f"jacobian {label}", error, JACOBIAN_TOL))
    return results


def strip(length: float, n: int, start: float = 0.0):
    return generate_structured([[start, start + length], [0.0, length / n]], [n, 1], "quad4")


def at2_check(ell: float = 1.0) -> CheckResult:
    """Fully developed crack at x = 0 without driving force: phi = exp(-x / ell)"""
    mesh = strip(10.0 * ell, 50)
    phi = FieldState.create("phi", "phase", mesh.n_nodes)
    phi.add_dirichlet(mesh.node_set("left"), 1.0)
    problem = Problem.create(mesh, [phi], [fracture_physics(mesh, FractureParams(G_c=1.0, ell=ell))])
    run_transient(problem, CouplingSchedule(ordering=[("phi",)], dt=1.0, t_end=1.0, tol_abs=0.0))
    x, values = sample_line(mesh, phi.values, 1, 0.0)
    return below("oracle at2 profile L2", l2_relative_error(x, values, at2_profile(x, ell)), 0.02)


TABLE_CORROSION = CorrosionParams(A_curv=53.5e6, omega=35.3e6, kappa=51e-6, c_Le=5.1 / 143.0,
                                  D_m=8.5e-10, L0=2e-6)


def interface_checks(params: CorrosionParams = TABLE_CORROSION, steps: int = 60) -> List[CheckResult]:
    """Relax an interface of the wrong width to equilibrium and measure it"""
    thickness = params.interface_thickness
    mesh = strip(12.0 * thickness, 200, start=-6.0 * thickness)
    phi = FieldState.create("phi", "phase", mesh.n_nodes)
    phi.values[:] = interface_profile(mesh.coords[:, 0], 4.0 * params.kappa, params.omega)
    phi.commit()
    phi.add_dirichlet(mesh.node_set("left"), 0.0)
    phi.add_dirichlet(mesh.node_set("right"), 1.0)
    problem = Problem.create(mesh, [phi], [allen_cahn_physics(mesh, params.omega, params.kappa,
                                                              eta=params.omega)])
    run_transient(problem, CouplingSchedule(ordering=[("phi",)], dt=[0.5] * steps, t_end=0.5 * steps,
                                            tol_rel=1e-8, tol_abs=1e-16))
    x, values = sample_line(mesh, phi.values, 1, 0.0)
    measured_thickness, energy = interface_metrics(x, values, params.kappa, params.omega)
    return [below("oracle interface thickness",
                  abs(measured_thickness - thickness) / thickness, 0.05),
            below("oracle interface energy",
                  abs(energy - params.interface_energy) / params.interface_energy, 0.05)]


def hydrogen_equilibrium_check(slope: float = 1e11) -> CheckResult:
    """Transport under a frozen linear hydrostatic stress settles at the enriched equilibrium"""
    params = HydrogenParams(D_H=1e-8, V_H=2e-6, R_gas=8.314, T_k=300.0, dg_b0=3e4, chi_H=0.89)
    mesh = strip(1e-3, 40)
    sigma_h = slope * mesh.coords[:, 0]
    _, grad_sigma_h = scalar_at_points(mesh, sigma_h)
    c = FieldState.create("c", "scalar", mesh.n_nodes, initial=1.0)
    c.add_dirichlet(mesh.node_set("left"), 1.0)
    physics = KernelPhysics.create(mesh, "c", lambda problem, inp: kernels.hydrogen_kernel(
        inp, params, grad_sigma_h=grad_sigma_h))
    problem = Problem.create(mesh, [c], [physics])
    run_transient(problem, CouplingSchedule(ordering=[("c",)], dt=[1e4] * 6, t_end=6e4, tol_abs=1e-24))
    exact = equilibrium_hydrogen(1.0, sigma_h, params)
    return below("oracle hydrogen equilibrium", float(np.max(np.abs(c.values / exact - 1.0))), 0.02)


def _corrosion_strip(form: str, L: np.ndarray, mesh, steps: int = 10) -> np.ndarray:
    params = CorrosionParams(A_curv=1.0, omega=1.0, kappa=0.01, c_Le=0.3, D_m=1.0, L0=1.0)
    phase_kernel = (kernels.corrosion_phase_kernel if form == "rate"
                    else kernels.corrosion_phase_kernel_gradient_form)
    c_ip = np.full(L.shape, 0.3)
    phi = FieldState.create("phi", "phase", mesh.n_nodes)
    phi.values[:] = interface_profile(mesh.coords[:, 0] - 0.5, params.kappa, params.omega)
    phi.commit()
    physics = KernelPhysics.create(mesh, "phi", lambda problem, inp: phase_kernel(inp, params, L, c=c_ip))
    problem = Problem.create(mesh, [phi], [physics])
    run_transient(problem, CouplingSchedule(ordering=[("phi",)], dt=[0.05] * steps,
                                            t_end=0.05 * steps, tol_rel=1e-10, tol_abs=1e-18))
    return phi.values.copy()


def weak_form_checks() -> List[CheckResult]:
    """Rate and gradient arrangements agree for uniform mobility and differ for varying mobility"""
    mesh = strip(1.0, 40)
    x_ip = element_geometry(mesh).x_ip[..., 0]
    uniform = np.full(x_ip.shape, 1.5)
    varying = 1.0 + 2.0 * x_ip
    same = _corrosion_strip("rate", uniform, mesh) - _corrosion_strip("gradient", uniform, mesh)
    rate, gradient = _corrosion_strip("rate", varying, mesh), _corrosion_strip("gradient", varying, mesh)
    difference = float(np.max(np.abs(rate - gradient)) / np.max(np.abs(rate)))
    return [below("weak forms agree for uniform mobility", float(np.max(np.abs(same))), 1e-10),
            CheckResult(name="weak forms differ for varying mobility", value=difference,
                        tolerance=1e-3, passed=difference > 1e-3)]


def ion_conservation_check(steps: int = 100) -> CheckResult:
    """Ion content of an insulated domain with a frozen front"""
    mesh = generate_structured([[0.0, 1.0], [0.0, 1.0]], [6, 6], "quad4")
    phi_nodal = interface_profile(mesh.coords[:, 0] - 0.5, 0.01, 1.0)
    phi_ip, grad_phi = scalar_at_points(mesh, phi_nodal)
    c = FieldState.create("c", "scalar", mesh.n_nodes)
    c.values[:] = phi_nodal
    c.commit()
    physics = KernelPhysics.create(mesh, "c", lambda problem, inp: kernels.ion_transport_kernel(
        inp, CORROSION, phi=phi_ip, grad_phi=grad_phi))
    problem = Problem.create(mesh, [c], [physics])
    before = integrate(mesh, scalar_at_points(mesh, c.values)[0])
    run_transient(problem, CouplingSchedule(ordering=[("c",)], dt=[0.01] * steps, t_end=0.01 * steps))
    after = integrate(mesh, scalar_at_points(mesh, c.values)[0])
    return below("ion conservation drift", abs(after - before) / abs(before), 1e-8)


def critical_pressure_check() -> CheckResult:
    p_c = critical_pressure_oracle(210e9, 0.3, 2700.0, 0.1)
    return below("oracle critical pressure", abs(p_c - 8.91e7) / 8.91e7, 1e-3)


def oracle_suite() -> List[CheckResult]:
    results = [critical_pressure_check(), at2_check()]
    results += interface_checks()
    results.append(hydrogen_equilibrium_check())
    results += weak_form_checks()
    results.append(ion_conservation_check())
    return results


SUITES: Dict[str, Callable[[], List[CheckResult]]] = {
    "kernels": kernel_suite,
    "jacobian": jacobian_suite,
    "oracles": oracle_suite,
}


def run_suite(name: str) -> List[CheckResult]:
    if name == "all":
        return [result for suite in SUITES.values() for result in suite()]
    if name not in SUITES:
        raise KeyError(f"unknown suite '{name}'; expected one of {', '.join(list(SUITES) + ['all'])}")
    results = SUITES[name]()
    failed = sum(not r.passed for r in results)
    logger.info("suite %s: %d checks, %d failed", name, len(results), failed)
    return results
