"""
Closed-form and independent reference solutions used to check the solver.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import trapezoid

from pfmulti.models.series import ProbeSeries
from pfmulti.schemas.materials import CorrosionParams, HydrogenParams
from pfmulti.services.kernels import chemical_free_energy, double_well
from pfmulti.services.mechanics import degradation_corrosion

logger = logging.getLogger(__name__)


def critical_pressure_oracle(E: float, nu: float, G_c: float, a0: float) -> float:
    """Griffith pressure of a line crack of half-length a0 in plane strain"""
    for name, value in (("E", E), ("G_c", G_c), ("a0", a0)):
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")
    if not -1.0 < nu < 0.5:
        raise ValueError(f"nu must lie in (-1, 0.5), got {nu}")
    E_prime = E / (1.0 - nu ** 2)
    return math.sqrt(4.0 * E_prime * G_c / (math.pi * a0))


def at2_profile(x, ell: float) -> np.ndarray:
    """Stationary AT2 profile of a fully developed crack at x = 0 without driving force"""
    return np.exp(-np.abs(np.asarray(x, dtype=float)) / ell)


def interface_profile(x, kappa: float, omega: float) -> np.ndarray:
    """Equilibrium double-well interface centred at x = 0, from 0 to 1"""
    delta = math.sqrt(2.0 * kappa / omega)
    return 0.5 * (1.0 + np.tanh(np.asarray(x, dtype=float) / delta))


def interface_metrics(x: np.ndarray, phi: np.ndarray, kappa: float,
                      omega: float) -> Tuple[float, float]:
    """
    Thickness (inverse of the steepest slope) and energy per unit area of a
    sampled one-dimensional interface profile.
    """
    x = np.asarray(x, dtype=float)
    phi = np.asarray(phi, dtype=float)
    slope = np.diff(phi) / np.diff(x)
    thickness = 1.0 / float(np.max(np.abs(slope)))
    mid = 0.5 * (phi[1:] + phi[:-1])
    w, _, _ = double_well(mid, omega)
    energy = float(np.sum((0.5 * kappa * slope ** 2 + w) * np.diff(x)))
    return thickness, energy


def equilibrium_hydrogen(c_env, sigma_h, params: HydrogenParams) -> np.ndarray:
    """Zero-flux hydrogen concentration under a hydrostatic stress field"""
    return np.asarray(c_env) * np.exp(params.V_H * np.asarray(sigma_h)
                                      / (params.R_gas * params.T_k))


def l2_relative_error(x: np.ndarray, numeric: np.ndarray, exact: np.ndarray) -> float:
    diff = trapezoid((numeric - exact) ** 2, x)
    return math.sqrt(diff / trapezoid(exact ** 2, x))


@dataclass
class RadialPitOracle:
    """
    Fine-grid finite-volume solution of the corrosion front and ion transport
    equations in polar coordinates, for a circular pit whose core (r <= r_core)
    is held at phi = 0, c = 0. The front position is where phi crosses 1/2.
    """

    params: CorrosionParams
    r0: float
    r_core: float
    r_out: float
    n_cells: int = 2000
    passes: int = 2

    def __post_init__(self):
        if not 0.0 <= self.r_core < self.r0 < self.r_out:
            raise ValueError("need 0 <= r_core < r0 < r_out")
        h = self.r_out / self.n_cells
        self.r = np.linspace(0.0, self.r_out, self.n_cells + 1)
        faces = np.concatenate([[0.0], 0.5 * (self.r[1:] + self.r[:-1]), [self.r_out]])
        self.volume = 0.5 * (faces[1:] ** 2 - faces[:-1] ** 2)
        inner = faces[1:-1] / h                  # face area over spacing, between node i and i+1
        n = self.r.size
        main = np.zeros(n)
        main[:-1] -= inner
        main[1:] -= inner
        lap = sp.diags([main, inner, inner], [0, 1, -1], shape=(n, n), format="csr")
        self.laplacian = sp.diags(1.0 / self.volume) @ lap
        self.fixed = self.r <= self.r_core

    def _solve_phi(self, phi_old: np.ndarray, c: np.ndarray, dt: float, L: float) -> np.ndarray:
        kappa = self.params.kappa
        phi = phi_old.copy()
        for _ in range(50):
            _, dpsi, d2psi, _ = chemical_free_energy(c, phi, self.params)
            F = (phi - phi_old) / dt - L * (kappa * (self.laplacian @ phi) - dpsi)
            J = sp.diags(1.0 / dt + L * d2psi) - L * kappa * self.laplacian
            F[self.fixed] = 0.0
            J = _fix_rows(J, self.fixed)
            step = spla.spsolve(J.tocsc(), -F)
            phi += step
            if np.max(np.abs(step)) < 1e-12:
                break
        return phi

    def _solve_c(self, c_old: np.ndarray, phi: np.ndarray, dt: float) -> np.ndarray:
        D = self.params.D_m
        jump = self.params.c_Se - self.params.c_Le
        g, _, _ = degradation_corrosion(phi)
        rhs = c_old / dt - D * (self.laplacian @ (g * jump))
        A = sp.diags(np.full(c_old.size, 1.0 / dt)) - D * self.laplacian
        rhs[self.fixed] = 0.0
        return spla.spsolve(_fix_rows(A, self.fixed).tocsc(), rhs)

    def front(self, phi: np.ndarray) -> float:
        above = np.flatnonzero(phi >= 0.5)
        if above.size == 0:
            return self.r_out
        i = above[0]
        if i == 0:
            return 0.0
        s = (0.5 - phi[i - 1]) / (phi[i] - phi[i - 1])
        return float(self.r[i - 1] + s * (self.r[i] - self.r[i - 1]))

    def run(self, times: Sequence[float], dt: float, L: Optional[float] = None) -> ProbeSeries:
        """Front radius at each of ``times`` (increasing, > 0)"""
        L = self.params.L0 if L is None else L
        phi = np.where(self.r < self.r0, 0.0, 1.0)
        c = phi.copy()
        series = ProbeSeries(name="depth")
        t = 0.0
        for target in times:
            while t < target - 1e-12 * max(1.0, target):
                step = min(dt, target - t)
                phi_old, c_old = phi, c
                for _ in range(self.passes):
                    phi = self._solve_phi(phi_old, c, step, L)
                    c = self._solve_c(c_old, phi, step)
                t += step
            series.append(target, self.front(phi))
        return series


def _fix_rows(A, rows: np.ndarray):
    keep = sp.diags((~rows).astype(float))
    return (keep @ A + sp.diags(rows.astype(float))).tocsr()
