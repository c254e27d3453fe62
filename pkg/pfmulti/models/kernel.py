"""
The scalar transient-diffusion kernel contract.

A kernel maps the state of one scalar field at a batch of material points
to the internal energy, flux and source triple of the heat equation, plus
the derivatives the Newton stiffness needs. Arrays carry arbitrary leading
batch dimensions ``...``; vectors add a trailing ``dim`` axis and matrices
two of them.
"""

from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class KernelInput:
    s: np.ndarray                 # (...)
    s_old: np.ndarray             # (...)
    grad_s: np.ndarray            # (..., dim)
    dt: float
    aux: Mapping[str, np.ndarray] = field(default_factory=dict)
    t_total: float = 0.0
    U_old: ArrayLike = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"time increment must be positive, got {self.dt}")

    @property
    def dim(self) -> int:
        return self.grad_s.shape[-1]

    @property
    def ds(self) -> np.ndarray:
        return self.s - self.s_old


@dataclass
class KernelResponse:
    U_new: ArrayLike
    dU_ds: ArrayLike
    dU_dgrad: ArrayLike
    flux: np.ndarray
    dflux_ds: ArrayLike
    dflux_dgrad: ArrayLike
    r: ArrayLike = 0.0
    rho: ArrayLike = 1.0

    def broadcast(self, shape: tuple, dim: int) -> "KernelResponse":
        """Expand every entry to full batch shape so the assembler can index it"""
        vec, mat = shape + (dim,), shape + (dim, dim)
        return KernelResponse(
            U_new=np.broadcast_to(self.U_new, shape),
            dU_ds=np.broadcast_to(self.dU_ds, shape),
            dU_dgrad=np.broadcast_to(self.dU_dgrad, vec),
            flux=np.broadcast_to(self.flux, vec),
            dflux_ds=np.broadcast_to(self.dflux_ds, vec),
            dflux_dgrad=np.broadcast_to(self.dflux_dgrad, mat),
            r=np.broadcast_to(self.r, shape),
            rho=np.broadcast_to(self.rho, shape),
        )

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in (
            self.U_new, self.dU_ds, self.dU_dgrad, self.flux,
            self.dflux_ds, self.dflux_dgrad, self.r, self.rho))
