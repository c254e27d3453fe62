from dataclasses import dataclass, fields
from typing import Any, Dict

import numpy as np


@dataclass
class MaterialPointState:
    """
    Per integration point memory, stored as arrays of shape (n_el, n_ip)
    for scalars and (n_el, n_ip, 3, 3) for tensors. Tensors are always
    three-dimensional; plane strain keeps the zz components.
    """

    eps: np.ndarray             # total strain
    eps_p: np.ndarray           # plastic strain
    eps_bar_p: np.ndarray       # accumulated equivalent plastic strain
    psi_p: np.ndarray           # plastic work density
    psi_e: np.ndarray           # elastic energy density of the undamaged solid
    H: np.ndarray               # fracture history field
    psi_drive: np.ndarray       # current driving force psi1 - psi2
    eps_bar_p_cycle: np.ndarray  # plastic strain in the current film cycle
    t_cycle: np.ndarray         # time in the current film cycle
    eps_vol_rate: np.ndarray
    sigma_h: np.ndarray         # hydrostatic stress of the degraded solid

    @classmethod
    def zeros(cls, n_elements: int, n_points: int) -> "MaterialPointState":
        shape = (n_elements, n_points)
        values = {}
        for f in fields(cls):
            if f.name in ("eps", "eps_p"):
                values[f.name] = np.zeros(shape + (3, 3))
            else:
                values[f.name] = np.zeros(shape)
        return cls(**values)

    def copy(self) -> "MaterialPointState":
        return MaterialPointState(**{f.name: getattr(self, f.name).copy() for f in fields(self)})

    def assign(self, other: "MaterialPointState") -> None:
        for f in fields(self):
            np.copyto(getattr(self, f.name), getattr(other, f.name))

    def as_arrays(self) -> Dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_dict(self) -> Dict[str, Any]:
        return {name: {"shape": list(a.shape), "max": float(a.max()) if a.size else 0.0}
                for name, a in self.as_arrays().items()}
