"""
Material-point constitutive laws.

All functions work on batches: strain and stress tensors are (..., 3, 3)
and fourth-order tangents (..., 3, 3, 3, 3). Plane strain is represented by
3x3 tensors whose zz strain is zero.
"""

import logging
from typing import Optional

import numpy as np

from pfmulti.core.errors import MaterialError
from pfmulti.models.mechanics import ReturnMapResult, SplitResult
from pfmulti.schemas.materials import ElasticProps, PlasticProps

logger = logging.getLogger(__name__)

I2 = np.eye(3)
I_SYM = 0.5 * (np.einsum("ik,jl->ijkl", I2, I2) + np.einsum("il,jk->ijkl", I2, I2))
I_VOL = np.einsum("ij,kl->ijkl", I2, I2)
I_DEV = I_SYM - I_VOL / 3.0

_PAIRS = ((0, 1), (0, 2), (1, 2))


def degradation_at2(phi):
    """g = (1 - phi)^2 with its first and second derivatives"""
    phi = np.asarray(phi, dtype=float)
    return (1.0 - phi) ** 2, -2.0 * (1.0 - phi), np.full_like(phi, 2.0)


def degradation_corrosion(phi):
    """g = -2 phi^3 + 3 phi^2 with its first and second derivatives"""
    phi = np.asarray(phi, dtype=float)
    return (-2.0 * phi ** 3 + 3.0 * phi ** 2,
            -6.0 * phi ** 2 + 6.0 * phi,
            -12.0 * phi + 6.0)


DEGRADATIONS = {"at2": degradation_at2, "corrosion": degradation_corrosion}


def effective_degradation(phi, kind: str = "at2", k_res: float = 0.0):
    """Degradation of stiffness-like quantities: phi clamped to [0, 1], floor k_res"""
    g, dg, _ = DEGRADATIONS[kind](np.clip(phi, 0.0, 1.0))
    return (1.0 - k_res) * g + k_res, (1.0 - k_res) * dg


def elastic_tangent(props: ElasticProps) -> np.ndarray:
    lam, mu = props.lame
    return lam * I_VOL + 2.0 * mu * I_SYM


def thermal_strain(T, props: ElasticProps) -> np.ndarray:
    dT = np.asarray(T, dtype=float) - props.T0
    return props.alpha_T * dT[..., None, None] * I2


def hydrostatic(sigma: np.ndarray) -> np.ndarray:
    return np.trace(sigma, axis1=-2, axis2=-1) / 3.0


def _isotropic(eps: np.ndarray, props: ElasticProps):
    lam, mu = props.lame
    tr = np.trace(eps, axis1=-2, axis2=-1)
    psi = 0.5 * lam * tr ** 2 + mu * np.einsum("...ij,...ij->...", eps, eps)
    sigma = lam * tr[..., None, None] * I2 + 2.0 * mu * eps
    return psi, sigma


def isotropic_split_none(eps: np.ndarray, props: ElasticProps) -> SplitResult:
    """The whole elastic energy drives damage; nothing survives full damage"""
    eps = np.asarray(eps, dtype=float)
    psi, sigma = _isotropic(eps, props)
    batch = eps.shape[:-2]
    return SplitResult(psi1=psi, psi2=np.zeros(batch), sigma1=sigma,
                       sigma2=np.zeros_like(sigma),
                       tangent1=np.broadcast_to(elastic_tangent(props), batch + (3, 3, 3, 3)),
                       tangent2=np.zeros(batch + (3, 3, 3, 3)))


def no_tension_split(eps: np.ndarray, props: ElasticProps, rel_tol: float = 1e-10) -> SplitResult:
    """
    No-tension decomposition. The second phase carries the energy of the
    compressive part of the strain and survives full damage; the first phase
    carries the full isotropic energy.

    Principal strains are sorted e1 <= e2 <= e3 and the branch is the first
    satisfied of: e1 > 0; e2 + nu e1 > 0; (1 - nu) e3 + nu (e1 + e2) > 0;
    otherwise. The tangent adds the eigenvector spin terms to the principal
    Hessian, with the coincident-eigenvalue limit 1/2 (f_aa - f_ab).
    """
    eps = np.asarray(eps, dtype=float)
    batch = eps.shape[:-2]
    flat = eps.reshape(-1, 3, 3)
    n = flat.shape[0]
    E, nu = props.E, props.nu
    lam, mu = props.lame

    w, V = np.linalg.eigh(0.5 * (flat + np.swapaxes(flat, -1, -2)))
    e1, e2, e3 = w[:, 0], w[:, 1], w[:, 2]

    b1 = e1 > 0
    b2 = ~b1 & (e2 + nu * e1 > 0)
    b3 = ~b1 & ~b2 & ((1 - nu) * e3 + nu * (e1 + e2) > 0)
    b4 = ~(b1 | b2 | b3)

    psi2 = np.zeros(n)
    f = np.zeros((n, 3))
    hess = np.zeros((n, 3, 3))

    psi2[b2] = 0.5 * E * e1[b2] ** 2
    f[b2, 0] = E * e1[b2]
    hess[b2, 0, 0] = E

    E3 = E / (1 - nu ** 2)
    psi2[b3] = 0.5 * E3 * (e1[b3] ** 2 + e2[b3] ** 2 + 2 * nu * e1[b3] * e2[b3])
    f[b3, 0] = E3 * (e1[b3] + nu * e2[b3])
    f[b3, 1] = E3 * (e2[b3] + nu * e1[b3])
    hess[b3, :2, :2] = E3 * np.array([[1.0, nu], [nu, 1.0]])

    tr4 = w[b4].sum(axis=1)
    psi2[b4] = 0.5 * lam * tr4 ** 2 + mu * (w[b4] ** 2).sum(axis=1)
    f[b4] = lam * tr4[:, None] + 2 * mu * w[b4]
    hess[b4] = lam + 2 * mu * np.eye(3)

    M = np.einsum("nia,nja->naij", V, V)
    sigma2 = np.einsum("na,naij->nij", f, M)
    tangent2 = np.einsum("nab,naij,nbkl->nijkl", hess, M, M)

    scale = np.maximum(np.abs(w).max(axis=1), 1e-300)
    for a, b in _PAIRS:
        gap = w[:, a] - w[:, b]
        close = np.abs(gap) <= rel_tol * scale
        safe_gap = np.where(close, 1.0, gap)
        coef = np.where(close, 0.5 * (hess[:, a, a] - hess[:, a, b]),
                        (f[:, a] - f[:, b]) / (2.0 * safe_gap))
        G = (np.einsum("ni,nj->nij", V[:, :, a], V[:, :, b])
             + np.einsum("ni,nj->nij", V[:, :, b], V[:, :, a]))
        tangent2 += coef[:, None, None, None, None] * np.einsum("nij,nkl->nijkl", G, G)

    psi1, sigma1 = _isotropic(flat, props)
    return SplitResult(
        psi1=psi1.reshape(batch),
        psi2=psi2.reshape(batch),
        sigma1=sigma1.reshape(batch + (3, 3)),
        sigma2=sigma2.reshape(batch + (3, 3)),
        tangent1=np.broadcast_to(elastic_tangent(props), batch + (3, 3, 3, 3)),
        tangent2=tangent2.reshape(batch + (3, 3, 3, 3)),
    )


SPLITS = {"none": isotropic_split_none, "no_tension": no_tension_split}


def flow_stress(eps_bar_p, elastic: ElasticProps, plastic: PlasticProps):
    """Power-law hardening sigma_f = sigma_y (1 + E eps_p / sigma_y)^N"""
    x = 1.0 + elastic.E * np.asarray(eps_bar_p, dtype=float) / plastic.sigma_y
    return plastic.sigma_y * x ** plastic.N_hard


def hardening_modulus(eps_bar_p, elastic: ElasticProps, plastic: PlasticProps):
    x = 1.0 + elastic.E * np.asarray(eps_bar_p, dtype=float) / plastic.sigma_y
    return plastic.N_hard * elastic.E * x ** (plastic.N_hard - 1.0)


def j2_return_map(eps: np.ndarray, eps_p_old: np.ndarray, eps_bar_p_old: np.ndarray,
                  elastic: ElasticProps, plastic: PlasticProps,
                  psi_p_old=0.0, eps_T: Optional[np.ndarray] = None,
                  tol: float = 1e-12, max_iter: int = 50) -> ReturnMapResult:
    """
    Implicit radial return for von Mises plasticity with isotropic power-law
    hardening. ``eps_bar_p`` is the accumulated equivalent plastic strain.
    Raises MaterialError (with the batch location) if the scalar Newton
    iteration on the plastic multiplier does not converge.
    """
    eps = np.asarray(eps, dtype=float)
    batch = eps.shape[:-2]
    lam, mu = elastic.lame
    K = elastic.bulk_modulus

    eps_e_tr = eps - eps_p_old
    if eps_T is not None:
        eps_e_tr = eps_e_tr - eps_T
    tr = np.trace(eps_e_tr, axis1=-2, axis2=-1)
    sigma_tr = lam * tr[..., None, None] * I2 + 2.0 * mu * eps_e_tr
    s_tr = sigma_tr - (np.trace(sigma_tr, axis1=-2, axis2=-1) / 3.0)[..., None, None] * I2
    norm_s = np.sqrt(np.einsum("...ij,...ij->...", s_tr, s_tr))
    q_tr = np.sqrt(1.5) * norm_s

    ebar_old = np.broadcast_to(np.asarray(eps_bar_p_old, dtype=float), batch)
    f_tr = q_tr - flow_stress(ebar_old, elastic, plastic)
    plastic_mask = f_tr > tol * plastic.sigma_y

    dgamma = np.zeros(batch)
    if np.any(plastic_mask):
        q = q_tr[plastic_mask]
        e0 = ebar_old[plastic_mask]
        dg = np.zeros_like(q)
        residual = q - flow_stress(e0, elastic, plastic)
        for _ in range(max_iter):
            slope = -3.0 * mu - hardening_modulus(e0 + dg, elastic, plastic)
            dg = np.maximum(dg - residual / slope, 0.0)
            residual = q - 3.0 * mu * dg - flow_stress(e0 + dg, elastic, plastic)
            if np.all(np.abs(residual) <= tol * plastic.sigma_y):
                break
        else:
            worst = int(np.argmax(np.abs(residual)))
            location = np.unravel_index(np.flatnonzero(plastic_mask.ravel())[worst], batch)
            element = int(location[0]) if len(location) > 0 else None
            point = int(location[1]) if len(location) > 1 else None
            raise MaterialError("return map did not converge",
                                residual=float(abs(residual[worst])),
                                element=element, point=point)
        dgamma[plastic_mask] = dg

    safe_q = np.where(q_tr > 0, q_tr, 1.0)
    flow_dir = 1.5 * s_tr / safe_q[..., None, None]
    d_eps_p = dgamma[..., None, None] * flow_dir
    sigma = sigma_tr - 2.0 * mu * d_eps_p
    eps_p = eps_p_old + d_eps_p
    eps_bar_p = ebar_old + dgamma
    eps_e = eps_e_tr - d_eps_p
    tr_e = np.trace(eps_e, axis1=-2, axis2=-1)
    psi_e = 0.5 * lam * tr_e ** 2 + mu * np.einsum("...ij,...ij->...", eps_e, eps_e)
    psi_p = psi_p_old + np.einsum("...ij,...ij->...", sigma, d_eps_p)

    C0 = elastic_tangent(elastic)
    tangent = np.array(np.broadcast_to(C0, batch + (3, 3, 3, 3)))
    if np.any(plastic_mask):
        q = q_tr[plastic_mask]
        dg = dgamma[plastic_mask]
        h = hardening_modulus(eps_bar_p[plastic_mask], elastic, plastic)
        n_hat = s_tr[plastic_mask] / norm_s[plastic_mask][:, None, None]
        a = 2.0 * mu * (1.0 - 3.0 * mu * dg / q)
        b = 6.0 * mu ** 2 * (dg / q - 1.0 / (3.0 * mu + h))
        tangent[plastic_mask] = (K * I_VOL + a[:, None, None, None, None] * I_DEV
                                 + b[:, None, None, None, None]
                                 * np.einsum("nij,nkl->nijkl", n_hat, n_hat))

    return ReturnMapResult(sigma=sigma, tangent=tangent, eps_p=eps_p, eps_bar_p=eps_bar_p,
                           psi_e=psi_e, psi_p=np.broadcast_to(psi_p, batch).copy(),
                           plastic=plastic_mask)


def total_stress(split: SplitResult, phi, degradation: str = "at2", alpha_b=0.0, p=0.0,
                 k_res: float = 0.0) -> np.ndarray:
    """Degraded effective stress minus the Biot pore pressure term"""
    g, _ = effective_degradation(phi, degradation, k_res)
    sigma = split.stress(g)
    pressure = np.asarray(alpha_b, dtype=float) * np.asarray(p, dtype=float)
    return sigma - pressure[..., None, None] * I2


def history_update(H_old, psi1, psi2):
    return np.maximum(H_old, np.asarray(psi1) - np.asarray(psi2))


def strain_from_gradient(grad_u: np.ndarray) -> np.ndarray:
    """Symmetric small strain, padded to 3x3 for 2D gradients"""
    dim = grad_u.shape[-1]
    eps = np.zeros(grad_u.shape[:-2] + (3, 3))
    eps[..., :dim, :dim] = 0.5 * (grad_u + np.swapaxes(grad_u, -1, -2))
    return eps
