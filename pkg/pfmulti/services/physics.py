"""
Field physics: each binds one field of a Problem to its residual and tangent.

MechanicsPhysics drives the displacement field through the constitutive laws
and writes strains, energies, the history field and the hydrostatic stress
to the problem's trial material-point state. KernelPhysics drives a scalar
field through one of the diffusion kernels and keeps the kernel's internal
energy between increments. The builder functions wire kernels to the
quantities they read from the other fields.
"""

import logging
from dataclasses import dataclass
from dataclasses import field as dataclass_field
from typing import Callable, Dict, Optional

import numpy as np
import scipy.sparse as sp

from pfmulti.models.kernel import KernelInput, KernelResponse
from pfmulti.models.system import AssembledSystem
from pfmulti.schemas.materials import (CorrosionParams, ElasticProps, FluidParams, FractureParams,
                                       HeatParams, HydrogenParams, PlasticProps)
from pfmulti.services import kernels
from pfmulti.services.assembly import (assemble_mechanics, assemble_scalar, displacement_gradient,
                                       scalar_at_points)
from pfmulti.services.mechanics import (I2, SPLITS, degradation_corrosion, effective_degradation,
                                        history_update, hydrostatic, j2_return_map,
                                        strain_from_gradient, thermal_strain, total_stress)
from pfmulti.services.mesh import element_geometry
from pfmulti.services.postprocess import ip_gradient, recover_nodal_field

logger = logging.getLogger(__name__)


def _field_at_points(problem, name: Optional[str]):
    if name is None:
        return None, None
    return scalar_at_points(problem.mesh, problem.fields[name].values)


@dataclass
class MechanicsPhysics:
    """
    Small-strain equilibrium. The stress is g(phi) sigma1 + (1 - g) sigma2
    - alpha_b p I, with sigma1/sigma2 from the energy split (or the J2
    return map when ``plastic`` is set), the temperature entering through
    the thermal strain and the pore pressure through the Biot coefficient.
    """

    elastic: ElasticProps
    field: str = "u"
    split: str = "none"
    plastic: Optional[PlasticProps] = None
    degradation: str = "at2"
    phase_field: Optional[str] = None
    k_res: float = 0.0
    thermal_field: Optional[str] = None
    pressure_field: Optional[str] = None
    fluid: Optional[FluidParams] = None
    last_residual: Optional[np.ndarray] = dataclass_field(default=None, repr=False)

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ValueError(f"unknown energy split '{self.split}'")
        if self.pressure_field is not None and self.fluid is None:
            raise ValueError("a pressure coupling needs fluid parameters for the Biot coefficient")

    def material(self, problem, dt: float):
        state, trial = problem.state, problem.trial
        phi, _ = _field_at_points(problem, self.phase_field)
        T, _ = _field_at_points(problem, self.thermal_field)
        p, _ = _field_at_points(problem, self.pressure_field)
        eps_T = thermal_strain(T, self.elastic) if T is not None else None

        def law(eps: np.ndarray):
            if self.plastic is not None:
                result = j2_return_map(eps, state.eps_p, state.eps_bar_p, self.elastic, self.plastic,
                                       psi_p_old=state.psi_p, eps_T=eps_T)
                split = result.as_split()
                np.copyto(trial.eps_p, result.eps_p)
                np.copyto(trial.eps_bar_p, result.eps_bar_p)
                np.copyto(trial.psi_p, result.psi_p)
                np.copyto(trial.psi_e, result.psi_e)
            else:
                split = SPLITS[self.split](eps if eps_T is None else eps - eps_T, self.elastic)
                np.copyto(trial.psi_e, split.psi1)

            g = 1.0 if phi is None else effective_degradation(phi, self.degradation, self.k_res)[0]
            sigma = split.stress(np.broadcast_to(g, eps.shape[:-2]))
            if p is not None:
                alpha_b = kernels.biot_coefficient(np.clip(phi if phi is not None else 0.0, 0.0, 1.0),
                                                   self.fluid)
                sigma = sigma - (alpha_b * p)[..., None, None] * I2
            tangent = split.tangent(np.broadcast_to(g, eps.shape[:-2]))

            np.copyto(trial.eps, eps)
            np.copyto(trial.psi_drive, split.driving_force)
            np.copyto(trial.H, history_update(state.H, split.psi1, split.psi2))
            np.copyto(trial.sigma_h, hydrostatic(sigma))
            tr = np.trace(eps, axis1=-2, axis2=-1) - np.trace(state.eps, axis1=-2, axis2=-1)
            np.copyto(trial.eps_vol_rate, tr / dt)
            return sigma, tangent

        return law

    def assemble(self, problem, t: float, dt: float) -> AssembledSystem:
        system = assemble_mechanics(problem.mesh, problem.fields[self.field],
                                    self.material(problem, dt), t)
        self.last_residual = system.R.copy()
        return system

    def stress(self, problem) -> np.ndarray:
        """(n_el, n_ip, 3, 3) total stress of the committed state, without touching the trial state"""
        mesh = problem.mesh
        eps = strain_from_gradient(displacement_gradient(mesh, problem.fields[self.field].values))
        if self.plastic is not None:
            eps = eps - problem.state.eps_p
        T, _ = _field_at_points(problem, self.thermal_field)
        if T is not None:
            eps = eps - thermal_strain(T, self.elastic)
        split = SPLITS["none" if self.plastic is not None else self.split](eps, self.elastic)
        phi, _ = _field_at_points(problem, self.phase_field)
        phi = np.zeros(eps.shape[:-2]) if phi is None else phi
        p, _ = _field_at_points(problem, self.pressure_field)
        alpha_b = 0.0
        if p is not None:
            alpha_b = kernels.biot_coefficient(np.clip(phi, 0.0, 1.0), self.fluid)
        return total_stress(split, phi, self.degradation, alpha_b, 0.0 if p is None else p,
                            self.k_res)

    def reaction(self, problem, nodes, component: int) -> float:
        """Sum of the internal force over a node set at the last assembly"""
        if self.last_residual is None:
            return 0.0
        dofs = np.asarray(nodes, dtype=np.int64) * problem.mesh.dim + component
        return float(self.last_residual[dofs].sum())

    def commit(self, problem, t: float, dt: float) -> None:
        pass

    def snapshot(self) -> Dict[str, np.ndarray]:
        return {}

    def restore(self, snapshot: Dict[str, np.ndarray]) -> None:
        pass


Kernel = Callable[[object, KernelInput], KernelResponse]
CommitHook = Callable[[object, float, float], None]


@dataclass
class KernelPhysics:
    """
    A scalar field driven by a diffusion kernel. ``kernel(problem, inp)``
    closes over the kernel parameters and reads coupled quantities from the
    problem. The internal energy at the last accepted increment is kept per
    integration point.
    """

    field: str
    kernel: Kernel
    U_old: np.ndarray
    U_new: np.ndarray
    on_commit: Optional[CommitHook] = None
    last_residual: Optional[np.ndarray] = dataclass_field(default=None, repr=False)

    @classmethod
    def create(cls, problem_mesh, field: str, kernel: Kernel,
               on_commit: Optional[CommitHook] = None) -> "KernelPhysics":
        shape = (problem_mesh.n_elements, element_geometry(problem_mesh).n_points)
        return cls(field=field, kernel=kernel, U_old=np.zeros(shape), U_new=np.zeros(shape),
                   on_commit=on_commit)

    def __repr__(self):
        return f"<KernelPhysics {self.field}>"

    def assemble(self, problem, t: float, dt: float) -> AssembledSystem:
        system, response = assemble_scalar(problem.mesh, problem.fields[self.field],
                                           lambda inp: self.kernel(problem, inp), dt, t,
                                           U_old=self.U_old)
        np.copyto(self.U_new, np.broadcast_to(response.U_new, self.U_new.shape))
        self.last_residual = system.R.copy()
        return system

    def reaction(self, problem, nodes, component: int = 0) -> float:
        """Residual summed over a node set at the last assembly: the flux leaving through it"""
        if self.last_residual is None:
            return 0.0
        return float(self.last_residual[np.asarray(nodes, dtype=np.int64)].sum())

    def commit(self, problem, t: float, dt: float) -> None:
        if self.on_commit is not None:
            self.on_commit(problem, t, dt)
        np.copyto(self.U_old, self.U_new)

    def snapshot(self) -> Dict[str, np.ndarray]:
        return {"U_old": self.U_old.copy(), "U_new": self.U_new.copy()}

    def restore(self, snapshot: Dict[str, np.ndarray]) -> None:
        np.copyto(self.U_old, snapshot["U_old"])
        np.copyto(self.U_new, snapshot["U_new"])


def heat_physics(mesh, params: HeatParams, field: str = "T", phase_field: Optional[str] = None,
                 k_res: float = 0.0) -> KernelPhysics:
    def kernel(problem, inp):
        phi, _ = _field_at_points(problem, phase_field)
        return kernels.heat_kernel(inp, params, phi=0.0 if phi is None else phi, k_res=k_res)

    return KernelPhysics.create(mesh, field, kernel)


def fracture_physics(mesh, params: FractureParams, field: str = "phi",
                     hydrogen: Optional[HydrogenParams] = None,
                     hydrogen_field: Optional[str] = None) -> KernelPhysics:
    """AT2 phase field driven by the trial history field; hydrogen lowers G_c when coupled"""
    def kernel(problem, inp):
        G_c = None
        if hydrogen is not None and hydrogen_field is not None:
            c_wppm, _ = _field_at_points(problem, hydrogen_field)
            c = kernels.wppm_to_mole_fraction(np.maximum(c_wppm, 0.0))
            G_c = kernels.hydrogen_toughness(c, hydrogen, params.G_c)
        return kernels.fracture_kernel(inp, params, problem.trial.H, G_c=G_c)

    return KernelPhysics.create(mesh, field, kernel)


def corrosion_phase_physics(mesh, params: CorrosionParams, field: str = "phi",
                            ion_field: str = "c", elastic: Optional[ElasticProps] = None,
                            plastic: Optional[PlasticProps] = None,
                            form: str = "rate") -> KernelPhysics:
    """
    Corrosion front. The mobility is evaluated from the trial state at the
    start-of-increment film clock; the clock advances once the increment is
    accepted.
    """
    if form not in ("rate", "gradient"):
        raise ValueError(f"unknown weak-form arrangement '{form}'")
    phase_kernel = (kernels.corrosion_phase_kernel if form == "rate"
                    else kernels.corrosion_phase_kernel_gradient_form)
    elastic = elastic or ElasticProps(E=1.0, nu=0.0)

    def kernel(problem, inp):
        c, _ = _field_at_points(problem, ion_field)
        L = kernels.mobility(problem.trial, params, elastic, plastic)
        return phase_kernel(inp, params, L, c=c)

    def on_commit(problem, t, dt):
        d_eps = problem.trial.eps_bar_p - problem.state.eps_bar_p
        kernels.advance_film_cycle(problem.trial, d_eps, dt, params)

    return KernelPhysics.create(mesh, field, kernel, on_commit=on_commit)


def ion_transport_physics(mesh, params: CorrosionParams, field: str = "c",
                          phase_field: str = "phi") -> KernelPhysics:
    def kernel(problem, inp):
        phi, grad_phi = _field_at_points(problem, phase_field)
        return kernels.ion_transport_kernel(inp, params, phi=phi, grad_phi=grad_phi)

    return KernelPhysics.create(mesh, field, kernel)


def fluid_physics(mesh, params: FluidParams, field: str = "p",
                  phase_field: Optional[str] = "phi") -> KernelPhysics:
    def kernel(problem, inp):
        phi, _ = _field_at_points(problem, phase_field)
        return kernels.fluid_kernel(inp, params, phi=0.0 if phi is None else phi,
                                    eps_vol_rate=problem.trial.eps_vol_rate)

    return KernelPhysics.create(mesh, field, kernel)


def hydrogen_physics(mesh, params: HydrogenParams, field: str = "c") -> KernelPhysics:
    """Hydrogen transport; the stress gradient comes from the nodal recovery of the trial sigma_h"""
    def kernel(problem, inp):
        nodal = recover_nodal_field(problem.mesh, problem.trial.sigma_h)
        return kernels.hydrogen_kernel(inp, params, grad_sigma_h=ip_gradient(problem.mesh, nodal))

    return KernelPhysics.create(mesh, field, kernel)


@dataclass
class ProjectionPhysics:
    """A field slaved to a nodal target computed from the rest of the problem"""

    field: str
    target: Callable[[object], np.ndarray]

    def assemble(self, problem, t: float, dt: float) -> AssembledSystem:
        f = problem.fields[self.field]
        return AssembledSystem(K=sp.identity(f.n_dofs, format="csr"),
                               R=f.values - self.target(problem),
                               dof_map={self.field: slice(0, f.n_dofs)})

    def commit(self, problem, t: float, dt: float) -> None:
        pass

    def snapshot(self) -> Dict[str, np.ndarray]:
        return {}

    def restore(self, snapshot: Dict[str, np.ndarray]) -> None:
        pass


def equilibrium_hydrogen_physics(params: HydrogenParams, c_env: float,
                                 field: str = "c") -> ProjectionPhysics:
    """Hydrogen at its stress-enriched equilibrium everywhere (slow loading limit)"""
    def target(problem):
        sigma_h = recover_nodal_field(problem.mesh, problem.trial.sigma_h)
        return c_env * np.exp(params.V_H * sigma_h / (params.R_gas * params.T_k))

    return ProjectionPhysics(field=field, target=target)


def allen_cahn_physics(mesh, omega: float, kappa: float, eta: float, field: str = "phi",
                       f_b1: float = 0.0, f_b2: float = 0.0) -> KernelPhysics:
    """Non-conserved phase field with the double well and the corrosion interpolation"""
    def kernel(problem, inp):
        return kernels.allen_cahn_kernel(inp, lambda phi: kernels.double_well(phi, omega),
                                         degradation_corrosion, f_b1, f_b2, kappa, eta)

    return KernelPhysics.create(mesh, field, kernel)
