from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp


@dataclass
class AssembledSystem:
    K: sp.csr_matrix
    R: np.ndarray
    dof_map: Dict[str, slice] = field(default_factory=dict)
    constrained: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    reactions: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if self.K.shape != (self.R.size, self.R.size):
            raise ValueError(f"stiffness {self.K.shape} does not match {self.R.size} dofs")

    @property
    def n_dofs(self) -> int:
        return self.R.size

    def copy(self) -> "AssembledSystem":
        return AssembledSystem(K=self.K.copy(), R=self.R.copy(), dof_map=dict(self.dof_map),
                               constrained=self.constrained.copy(),
                               reactions=self.reactions.copy())


@dataclass
class ConvergenceReport:
    iterations: int = 0
    norms: List[float] = field(default_factory=list)
    converged: bool = False

    def __repr__(self):
        last = f"{self.norms[-1]:.3e}" if self.norms else "n/a"
        return (f"<ConvergenceReport iterations={self.iterations} "
                f"converged={self.converged} last={last}>")

    def to_dict(self):
        return {"iterations": self.iterations, "norms": list(self.norms),
                "converged": self.converged}


SCHEMES = ("staggered", "staggered-multi", "monolithic-pair")


@dataclass
class CouplingSchedule:
    """
    Time stepping plus the ordering of field solves inside an increment.

    ``ordering`` lists solve blocks; a block with several fields is solved
    simultaneously with a block-diagonal Jacobian.
    """

    ordering: List[Tuple[str, ...]]
    dt: Union[float, Sequence[float]]
    t_end: float
    passes: int = 1
    pass_tol: float = 1e-4
    tol_rel: float = 1e-6
    tol_abs: float = 1e-10
    max_iter: int = 25
    min_dt_factor: float = 1.0 / 64.0
    max_increments: Optional[int] = None

    def __post_init__(self):
        self.ordering = [tuple(block) for block in self.ordering]
        if self.passes < 1:
            raise ValueError("passes must be at least 1")
        names = [name for block in self.ordering for name in block]
        if len(names) != len(set(names)):
            raise ValueError("each field must appear in exactly one solve block")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")

    @property
    def fields(self) -> List[str]:
        return [name for block in self.ordering for name in block]

    def increments(self) -> List[float]:
        """Nominal increment sizes covering (0, t_end]"""
        if np.ndim(self.dt) == 0:
            dt = float(self.dt)
            if dt <= 0:
                raise ValueError("dt must be positive")
            n = int(np.ceil(self.t_end / dt - 1e-9))
            steps = [dt] * n
            if n and self.t_end - dt * (n - 1) < dt:
                steps[-1] = self.t_end - dt * (n - 1)
        else:
            steps = [float(d) for d in self.dt]
        if self.max_increments is not None:
            steps = steps[:self.max_increments]
        return steps

    @classmethod
    def from_scheme(cls, scheme: str, fields: Sequence[str], pair: Sequence[str] = (),
                    passes: int = 1, **kwargs) -> "CouplingSchedule":
        """Build the block ordering for one of the named coupling schemes"""
        if scheme not in SCHEMES:
            raise ValueError(f"unknown coupling scheme '{scheme}'")
        if scheme == "monolithic-pair" and pair:
            # the pair sits where its first member sits in the field order
            first = list(fields).index(pair[0])
            ordering = ([(f,) for f in fields[:first] if f not in pair]
                        + [tuple(pair)]
                        + [(f,) for f in fields[first:] if f not in pair])
        else:
            ordering = [(f,) for f in fields]
        if scheme == "staggered":
            passes = 1
        return cls(ordering=ordering, passes=max(1, passes), **kwargs)


@dataclass
class TransientResult:
    """Accepted increments of a transient run"""

    times: List[float] = field(default_factory=list)
    steps: List[float] = field(default_factory=list)
    reports: List[Dict[str, ConvergenceReport]] = field(default_factory=list)
    bisections: int = 0

    @property
    def increments(self) -> int:
        return len(self.times)

    @property
    def t_final(self) -> float:
        return self.times[-1] if self.times else 0.0

    def to_dict(self):
        return {"increments": self.increments, "t_final": self.t_final,
                "bisections": self.bisections,
                "newton_iterations": sum(r.iterations for step in self.reports
                                         for r in step.values())}
