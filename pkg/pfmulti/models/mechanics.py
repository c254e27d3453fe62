from dataclasses import dataclass

import numpy as np


@dataclass
class SplitResult:
    """
    Energy split of the undamaged solid at a batch of points.

    ``psi1``/``sigma1``/``tangent1`` belong to the phase degraded by g(phi),
    ``psi2``/``sigma2``/``tangent2`` to the phase that survives full damage.
    Tensors are (..., 3, 3) and tangents (..., 3, 3, 3, 3).
    """

    psi1: np.ndarray
    psi2: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    tangent1: np.ndarray
    tangent2: np.ndarray

    @property
    def sigma0(self) -> np.ndarray:
        return self.sigma1

    @property
    def C_tan(self) -> np.ndarray:
        return self.tangent1

    @property
    def driving_force(self) -> np.ndarray:
        return self.psi1 - self.psi2

    def stress(self, g) -> np.ndarray:
        g = np.asarray(g)[..., None, None]
        return g * self.sigma1 + (1.0 - g) * self.sigma2

    def tangent(self, g) -> np.ndarray:
        g = np.asarray(g)[..., None, None, None, None]
        return g * self.tangent1 + (1.0 - g) * self.tangent2

    def energy(self, g) -> np.ndarray:
        return g * self.psi1 + (1.0 - g) * self.psi2


@dataclass
class ReturnMapResult:
    sigma: np.ndarray        # (..., 3, 3)
    tangent: np.ndarray      # (..., 3, 3, 3, 3)
    eps_p: np.ndarray        # (..., 3, 3)
    eps_bar_p: np.ndarray    # (...)
    psi_e: np.ndarray
    psi_p: np.ndarray
    plastic: np.ndarray      # bool mask of points that yielded

    def as_split(self) -> SplitResult:
        zeros = np.zeros_like(self.sigma)
        return SplitResult(psi1=self.psi_e + self.psi_p, psi2=np.zeros_like(self.psi_e),
                           sigma1=self.sigma, sigma2=zeros,
                           tangent1=self.tangent, tangent2=np.zeros_like(self.tangent))
