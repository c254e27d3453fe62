"""
Scalar transient-diffusion kernels.

Each kernel expresses one balance law in the heat-conduction form

    rho dU/dt + div(flux) = r

by returning the internal energy at the end of the increment, the flux, the
source and the derivatives of U and flux with respect to the field value
and its gradient. Energies are accumulated from ``inp.U_old`` so that
U_new - U_old is the increment over ``inp.dt``; derivatives of U include
the ``dt`` factor wherever the increment does.
"""

import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np

from pfmulti.core.errors import KernelError
from pfmulti.models.kernel import ArrayLike, KernelInput, KernelResponse
from pfmulti.schemas.materials import (CorrosionParams, ElasticProps, FluidParams, FractureParams,
                                       HeatParams, HydrogenParams, PlasticProps)
from pfmulti.services.mechanics import degradation_at2, degradation_corrosion

logger = logging.getLogger(__name__)

# hydrogen in an iron host: mole fraction = wppm * 1e-6 * M_Fe / M_H
WPPM_TO_MOLE_FRACTION = 1e-6 * 55.845 / 1.008

Triple = Tuple[np.ndarray, np.ndarray, np.ndarray]


def _identity(inp: KernelInput) -> np.ndarray:
    return np.eye(inp.dim)


def _vec(value) -> np.ndarray:
    return np.asarray(value, dtype=float)[..., None]


def _coupled(inp: KernelInput, name: str, value):
    if value is not None:
        return value
    if name not in inp.aux:
        raise KernelError(f"kernel input is missing the coupled quantity '{name}'")
    return inp.aux[name]


def heat_kernel(inp: KernelInput, params: HeatParams, phi: ArrayLike = 0.0,
                source: ArrayLike = 0.0, k_res: float = 0.0) -> KernelResponse:
    k = params.k0
    if params.degrade_conductivity:
        g, _, _ = degradation_at2(np.clip(phi, 0.0, 1.0))
        k = params.k0 * ((1.0 - k_res) * g + k_res)
    k = np.asarray(k, dtype=float)
    return KernelResponse(
        U_new=inp.U_old + params.c_T * inp.ds,
        dU_ds=params.c_T,
        dU_dgrad=0.0,
        flux=-k[..., None] * inp.grad_s,
        dflux_ds=0.0,
        dflux_dgrad=-k[..., None, None] * _identity(inp),
        r=source,
        rho=params.rho,
    )


def fracture_kernel(inp: KernelInput, params: FractureParams, H: ArrayLike,
                    G_c: Optional[ArrayLike] = None) -> KernelResponse:
    """AT2 phase field; ``G_c`` overrides the record's toughness pointwise"""
    G_c = params.G_c if G_c is None else G_c
    ell = params.ell
    phi = inp.s
    _, dg, d2g = degradation_at2(phi)
    scale = (1.0 - params.k_res) * np.asarray(H) / (np.asarray(G_c) * ell)
    rate = phi / ell ** 2 + dg * scale
    return KernelResponse(
        U_new=inp.U_old + rate * inp.dt,
        dU_ds=(1.0 / ell ** 2 + d2g * scale) * inp.dt,
        dU_dgrad=0.0,
        flux=-inp.grad_s,
        dflux_ds=0.0,
        dflux_dgrad=-_identity(inp),
    )


def double_well(phi, omega: float) -> Triple:
    """w = omega phi^2 (1 - phi)^2 and its derivatives"""
    phi = np.asarray(phi, dtype=float)
    return (omega * phi ** 2 * (1.0 - phi) ** 2,
            2.0 * omega * phi * (1.0 - phi) * (1.0 - 2.0 * phi),
            2.0 * omega * (1.0 - 6.0 * phi + 6.0 * phi ** 2))


def allen_cahn_kernel(inp: KernelInput, w: Callable[[np.ndarray], Triple],
                      g: Callable[[np.ndarray], Triple], f_b1: ArrayLike, f_b2: ArrayLike,
                      kappa: float, eta: float) -> KernelResponse:
    """General non-conserved phase field with relaxation constant eta"""
    phi = inp.s
    _, dw, d2w = w(phi)
    _, dg, d2g = g(phi)
    df = np.asarray(f_b1) - np.asarray(f_b2)
    return KernelResponse(
        U_new=inp.U_old - eta * inp.ds - (dw + dg * df) * inp.dt,
        dU_ds=-eta - (d2w + d2g * df) * inp.dt,
        dU_dgrad=0.0,
        flux=kappa * inp.grad_s,
        dflux_ds=0.0,
        dflux_dgrad=kappa * _identity(inp),
    )


def chemical_free_energy(c, phi, params: CorrosionParams):
    """
    psi = A (c - g(phi)(c_Se - c_Le) - c_Le)^2 + omega phi^2 (1 - phi)^2.
    Returns (psi, dpsi/dphi, d2psi/dphi2, dpsi/dc).
    """
    c = np.asarray(c, dtype=float)
    g, dg, d2g = degradation_corrosion(phi)
    w, dw, d2w = double_well(phi, params.omega)
    A = params.A_curv
    jump = params.c_Se - params.c_Le
    r = c - g * jump - params.c_Le
    psi = A * r ** 2 + w
    dpsi_dphi = -2.0 * A * jump * dg * r + dw
    d2psi_dphi2 = 2.0 * A * jump ** 2 * dg ** 2 - 2.0 * A * jump * d2g * r + d2w
    return psi, dpsi_dphi, d2psi_dphi2, 2.0 * A * r


def _check_mobility(L) -> np.ndarray:
    L = np.asarray(L, dtype=float)
    if np.any(~(L > 0)):
        raise KernelError(f"mobility must be positive, found {float(np.min(L)):.3e}")
    return L


def corrosion_phase_kernel(inp: KernelInput, params: CorrosionParams, L_effective: ArrayLike,
                           c: Optional[ArrayLike] = None) -> KernelResponse:
    """Mobility divides the rate term: -(1/L) dphi/dt - dpsi/dphi + kappa lap(phi) = 0"""
    L = _check_mobility(L_effective)
    c = _coupled(inp, "c", c)
    _, dpsi, d2psi, _ = chemical_free_energy(c, inp.s, params)
    return KernelResponse(
        U_new=inp.U_old - inp.ds / L - dpsi * inp.dt,
        dU_ds=-1.0 / L - d2psi * inp.dt,
        dU_dgrad=0.0,
        flux=params.kappa * inp.grad_s,
        dflux_ds=0.0,
        dflux_dgrad=params.kappa * _identity(inp),
    )


def corrosion_phase_kernel_gradient_form(inp: KernelInput, params: CorrosionParams,
                                         L_effective: ArrayLike,
                                         c: Optional[ArrayLike] = None) -> KernelResponse:
    """Mobility multiplies the flux: dphi/dt + L dpsi/dphi - div(L kappa grad(phi)) = 0"""
    L = _check_mobility(L_effective)
    c = _coupled(inp, "c", c)
    _, dpsi, d2psi, _ = chemical_free_energy(c, inp.s, params)
    return KernelResponse(
        U_new=inp.U_old - inp.ds - L * dpsi * inp.dt,
        dU_ds=-1.0 - L * d2psi * inp.dt,
        dU_dgrad=0.0,
        flux=_vec(L * params.kappa) * inp.grad_s,
        dflux_ds=0.0,
        dflux_dgrad=(L * params.kappa)[..., None, None] * _identity(inp),
    )


def ion_transport_kernel(inp: KernelInput, params: CorrosionParams,
                         phi: Optional[ArrayLike] = None,
                         grad_phi: Optional[np.ndarray] = None) -> KernelResponse:
    phi = _coupled(inp, "phi", phi)
    grad_phi = _coupled(inp, "grad_phi", grad_phi)
    _, dg, _ = degradation_corrosion(phi)
    D = params.D_m
    drift = D * (params.c_Se - params.c_Le) * _vec(dg) * grad_phi
    return KernelResponse(
        U_new=inp.U_old + inp.ds,
        dU_ds=1.0,
        dU_dgrad=0.0,
        flux=-D * inp.grad_s + drift,
        dflux_ds=0.0,
        dflux_dgrad=-D * _identity(inp),
    )


def domain_indicators(phi, c1: float, c2: float) -> Tuple[np.ndarray, np.ndarray]:
    """Reservoir and fracture indicators, linear in phi between c1 and c2"""
    if not 0 <= c1 < c2:
        raise KernelError(f"indicator constants need 0 <= c1 < c2, got {c1}, {c2}")
    phi = np.asarray(phi, dtype=float)
    chi_f = np.clip((phi - c1) / (c2 - c1), 0.0, 1.0)
    return 1.0 - chi_f, chi_f


def biot_coefficient(phi, params: FluidParams) -> np.ndarray:
    chi_r, chi_f = domain_indicators(phi, params.c1, params.c2)
    return chi_r * params.alpha_r + chi_f


def storage_coefficient(phi, params: FluidParams) -> np.ndarray:
    chi_r, chi_f = domain_indicators(phi, params.c1, params.c2)
    alpha_b = chi_r * params.alpha_r + chi_f
    n_p = chi_r * params.n_pr + chi_f
    return (1.0 - alpha_b) * (alpha_b - n_p) / params.K_bulk + n_p * params.C_fl


def fluid_kernel(inp: KernelInput, params: FluidParams, phi: Optional[ArrayLike] = None,
                 eps_vol_rate: Optional[ArrayLike] = None,
                 source: ArrayLike = 0.0) -> KernelResponse:
    """
    Biot fluid mass balance divided through by the fluid density, so the
    storage term has unit density and the source is q_m / rho_fl.
    """
    phi = np.clip(_coupled(inp, "phi", phi), 0.0, 1.0)
    eps_vol_rate = _coupled(inp, "eps_vol_rate", eps_vol_rate)
    chi_r, chi_f = domain_indicators(phi, params.c1, params.c2)
    alpha_b = chi_r * params.alpha_r + chi_f
    S = storage_coefficient(phi, params)
    K_fl = chi_r * params.K_r + phi ** params.b_exp * chi_f * params.K_f
    mobility = K_fl / params.mu_fl
    return KernelResponse(
        U_new=inp.U_old + S * inp.ds + alpha_b * chi_r * np.asarray(eps_vol_rate) * inp.dt,
        dU_ds=S,
        dU_dgrad=0.0,
        flux=-_vec(mobility) * inp.grad_s,
        dflux_ds=0.0,
        dflux_dgrad=-np.asarray(mobility)[..., None, None] * _identity(inp),
        r=np.asarray(source) / params.rho_fl,
    )


def hydrogen_kernel(inp: KernelInput, params: HydrogenParams,
                    sigma_h: Optional[ArrayLike] = None,
                    grad_sigma_h: Optional[np.ndarray] = None) -> KernelResponse:
    """Fick diffusion plus drift up the hydrostatic stress gradient; only the gradient enters"""
    grad_sigma_h = _coupled(inp, "grad_sigma_h", grad_sigma_h)
    D = params.D_H
    drift = D * params.V_H / (params.R_gas * params.T_k) * np.asarray(grad_sigma_h)
    return KernelResponse(
        U_new=inp.U_old + inp.ds,
        dU_ds=1.0,
        dU_dgrad=0.0,
        flux=-D * inp.grad_s + _vec(inp.s) * drift,
        dflux_ds=np.broadcast_to(drift, inp.grad_s.shape),
        dflux_dgrad=-D * _identity(inp),
    )


def wppm_to_mole_fraction(c_wppm):
    return np.asarray(c_wppm, dtype=float) * WPPM_TO_MOLE_FRACTION


def hydrogen_coverage(c_H, params: HydrogenParams) -> np.ndarray:
    """Langmuir-McLean coverage for a concentration in impurity mole fraction"""
    c_H = np.asarray(c_H, dtype=float)
    if np.any(c_H < 0):
        raise KernelError(f"hydrogen concentration must be non-negative, found {float(c_H.min()):.3e}")
    return c_H / (c_H + math.exp(-params.dg_b0 / (params.R_gas * params.T_k)))


def hydrogen_toughness(c_H, params: HydrogenParams, G_c0: float) -> np.ndarray:
    return (1.0 - params.chi_H * hydrogen_coverage(c_H, params)) * G_c0


def mechanochemical_factor(eps_bar_p, sigma_h, params: CorrosionParams,
                           elastic: ElasticProps, plastic: Optional[PlasticProps]) -> np.ndarray:
    """k_m = (eps_p / eps_y + 1) exp(sigma_h V_m / (R T)), eps_y = sigma_y / E"""
    strain_term = 1.0
    if plastic is not None:
        eps_y = plastic.sigma_y / elastic.E
        strain_term = np.asarray(eps_bar_p, dtype=float) / eps_y + 1.0
    return strain_term * np.exp(np.asarray(sigma_h) * params.V_m / (params.R_gas * params.T_k))


def mobility(state, params: CorrosionParams, elastic: ElasticProps,
             plastic: Optional[PlasticProps] = None) -> np.ndarray:
    """
    Effective interface kinetics coefficient at every material point of
    ``state``: k_m L0, decaying as exp(-k (t_cycle - t0)) once the film-cycle
    clock passes t0.
    """
    k_m = mechanochemical_factor(state.eps_bar_p, state.sigma_h, params, elastic, plastic)
    t_cycle = np.asarray(state.t_cycle, dtype=float)
    decay = np.exp(-params.k_film * np.maximum(t_cycle - params.t0_film, 0.0))
    return k_m * params.L0 * decay


def advance_film_cycle(state, d_eps_bar_p, dt: float, params: CorrosionParams) -> None:
    """Advance the film clocks in place; a cycle restarts when its plastic strain reaches eps_f"""
    state.t_cycle += dt
    state.eps_bar_p_cycle += np.maximum(d_eps_bar_p, 0.0)
    ruptured = state.eps_bar_p_cycle >= params.eps_f
    state.t_cycle[ruptured] = 0.0
    state.eps_bar_p_cycle[ruptured] = 0.0
