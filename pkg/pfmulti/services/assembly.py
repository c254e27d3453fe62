"""
Galerkin residual and stiffness assembly.

Scalar fields (heat-conduction form):

    R_a = sum_ip dV [ (rho (U_new - U_old) / dt - r) N_a - dN_a . f ] - boundary inflow
    K_ab = sum_ip dV [ rho / dt (dU_ds N_a N_b + N_a dU_dgrad . dN_b)
                       - dN_a . dflux_ds N_b - dN_a . dflux_dgrad . dN_b ]

Displacement: R_ak = sum_ip dV sigma_ki dN_a/dx_i - tractions, and
K_akbl = sum_ip dV dN_a/dx_i C_kilj dN_b/dx_j.

Element contributions are scattered in element order through bincount and
COO -> CSR summation, so assembled systems are identical run to run.
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from pfmulti.core.errors import KernelError
from pfmulti.models.field import FieldState, value_at
from pfmulti.models.kernel import ArrayLike, KernelInput, KernelResponse
from pfmulti.models.mesh import Mesh
from pfmulti.models.system import AssembledSystem
from pfmulti.services.mesh import element_geometry, facet_weights

logger = logging.getLogger(__name__)

KernelBinding = Callable[[KernelInput], KernelResponse]
MaterialLaw = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]


def element_dofs(mesh: Mesh, n_components: int) -> np.ndarray:
    """(n_el, n_en * n_components) global dof numbers, node-major"""
    conn = mesh.connectivity
    dofs = conn[:, :, None] * n_components + np.arange(n_components)
    return dofs.reshape(conn.shape[0], -1)


def scalar_at_points(mesh: Mesh, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Interpolated values (n_el, n_ip) and gradients (n_el, n_ip, dim) of a nodal scalar"""
    geometry = element_geometry(mesh)
    nodal = np.asarray(values, dtype=float)[mesh.connectivity]
    return (np.einsum("pa,ea->ep", geometry.N, nodal),
            np.einsum("epai,ea->epi", geometry.dN_dx, nodal))


def displacement_gradient(mesh: Mesh, u: np.ndarray) -> np.ndarray:
    """(n_el, n_ip, dim, dim) with entry [k, i] = du_k / dx_i"""
    geometry = element_geometry(mesh)
    nodal = np.asarray(u, dtype=float).reshape(mesh.n_nodes, mesh.dim)[mesh.connectivity]
    return np.einsum("eak,epai->epki", nodal, geometry.dN_dx)


def element_average(mesh: Mesh, ip_values: np.ndarray) -> np.ndarray:
    """Volume-weighted mean of an integration point quantity per element"""
    dV = element_geometry(mesh).dV
    return (ip_values * dV).sum(axis=1) / dV.sum(axis=1)


def integrate(mesh: Mesh, ip_values: np.ndarray) -> float:
    return float((ip_values * element_geometry(mesh).dV).sum())


def _scatter(n_dofs: int, dofs: np.ndarray, Re: np.ndarray, Ke: np.ndarray):
    R = np.bincount(dofs.ravel(), weights=Re.ravel(), minlength=n_dofs)
    rows = np.repeat(dofs, dofs.shape[1], axis=1).ravel()
    cols = np.tile(dofs, (1, dofs.shape[1])).ravel()
    K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n_dofs, n_dofs)).tocsr()
    return R, K


def _neumann_load(mesh: Mesh, field: FieldState, t: float) -> np.ndarray:
    load = np.zeros(field.n_dofs)
    for bc in field.neumann:
        weights = facet_weights(mesh, bc.nodes)
        load[np.arange(mesh.n_nodes) * field.n_components + bc.component] += value_at(bc.value, t) * weights
    return load


def _source_at_points(mesh: Mesh, field: FieldState, t: float) -> np.ndarray:
    n_ip = element_geometry(mesh).n_points
    r = np.zeros((mesh.n_elements, n_ip))
    for source in field.sources:
        r[np.asarray(source.elements, dtype=np.int64)] += value_at(source.value, t)
    return r


def kernel_input(mesh: Mesh, field: FieldState, dt: float, t: float,
                 U_old: ArrayLike = 0.0, aux: Optional[dict] = None) -> KernelInput:
    s, grad = scalar_at_points(mesh, field.values)
    s_old, _ = scalar_at_points(mesh, field.old)
    return KernelInput(s=s, s_old=s_old, grad_s=grad, dt=dt, aux=aux or {}, t_total=t,
                       U_old=U_old)


def assemble_scalar(mesh: Mesh, field: FieldState, binding: KernelBinding, dt: float,
                    t: float, U_old: ArrayLike = 0.0,
                    aux: Optional[dict] = None) -> Tuple[AssembledSystem, KernelResponse]:
    """
    Residual and tangent of one scalar field for the kernel ``binding``.
    Returns the system and the kernel response; the response's ``U_new``
    becomes the next increment's ``U_old`` once the increment is accepted.
    """
    geometry = element_geometry(mesh)
    inp = kernel_input(mesh, field, dt, t, U_old, aux)
    response = binding(inp)
    resp = response.broadcast(inp.s.shape, mesh.dim)
    if not resp.is_finite():
        bad = np.argwhere(~np.isfinite(resp.U_new) | ~np.isfinite(resp.dU_ds))
        where = f" at element {bad[0][0]}, point {bad[0][1]}" if bad.size else ""
        raise KernelError(f"non-finite kernel response for field '{field.name}'{where}")

    N, dN, dV = geometry.N, geometry.dN_dx, geometry.dV
    r = resp.r + _source_at_points(mesh, field, t)
    rate = resp.rho * (resp.U_new - np.broadcast_to(U_old, inp.s.shape)) / dt - r
    Re = (np.einsum("ep,pa->ea", rate * dV, N)
          - np.einsum("ep,epai,epi->ea", dV, dN, resp.flux))

    w = dV * resp.rho / dt
    Ke = (np.einsum("ep,pa,pb->eab", w * resp.dU_ds, N, N)
          + np.einsum("ep,pa,epj,epbj->eab", w, N, resp.dU_dgrad, dN)
          - np.einsum("ep,epai,epi,pb->eab", dV, dN, resp.dflux_ds, N)
          - np.einsum("ep,epai,epij,epbj->eab", dV, dN, resp.dflux_dgrad, dN))

    dofs = element_dofs(mesh, 1)
    R, K = _scatter(field.n_dofs, dofs, Re, Ke.reshape(Ke.shape[0], -1))
    R -= _neumann_load(mesh, field, t)
    return AssembledSystem(K=K, R=R, dof_map={field.name: slice(0, field.n_dofs)}), response


def assemble_mechanics(mesh: Mesh, field: FieldState, material: MaterialLaw,
                       t: float) -> AssembledSystem:
    """
    Residual and tangent of the displacement field. ``material`` maps the
    (n_el, n_ip, 3, 3) strain to stress and fourth-order tangent.
    """
    geometry = element_geometry(mesh)
    d = mesh.dim
    grad_u = displacement_gradient(mesh, field.values)
    eps = np.zeros(grad_u.shape[:2] + (3, 3))
    eps[..., :d, :d] = 0.5 * (grad_u + np.swapaxes(grad_u, -1, -2))
    sigma, tangent = material(eps)

    dN, dV = geometry.dN_dx, geometry.dV
    Re = np.einsum("ep,epki,epai->eak", dV, sigma[..., :d, :d], dN)
    Ke = np.einsum("ep,epai,epkilj,epbj->eakbl", dV, dN, tangent[..., :d, :d, :d, :d], dN,
                   optimize=True)
    n_el, n_en = mesh.n_elements, mesh.kind.n_nodes
    dofs = element_dofs(mesh, d)
    R, K = _scatter(field.n_dofs, dofs, Re.reshape(n_el, n_en * d),
                    Ke.reshape(n_el, n_en * d * n_en * d))
    R -= _neumann_load(mesh, field, t)
    return AssembledSystem(K=K, R=R, dof_map={field.name: slice(0, field.n_dofs)})
