"""
Nonlinear and transient solution: Dirichlet elimination, sparse direct
solves, Newton iteration, the coupled increment (monolithic blocks and
single- or multi-pass staggering), time stepping with bisection, and
checkpoints.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Optional, Protocol, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from pfmulti.core.errors import (ConvergenceError, IncrementError, KernelError, MaterialError,
                                 PfmultiError, SingularMatrixError)
from pfmulti.models.field import FieldState
from pfmulti.models.mesh import Mesh
from pfmulti.models.state import MaterialPointState
from pfmulti.models.system import (AssembledSystem, ConvergenceReport, CouplingSchedule,
                                   TransientResult)
from pfmulti.services.mesh import element_geometry

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "pfmulti-checkpoint/1"


def apply_dirichlet(system: AssembledSystem, dofs, offsets=None) -> AssembledSystem:
    """
    Row and column elimination with a unit diagonal. ``offsets`` are the
    constrained residual entries (current value minus target, zero when the
    targets were prescribed beforehand); the solve then returns
    increments of -offsets on those dofs. The pre-elimination residual on
    the constrained dofs is kept as ``reactions``.
    """
    dofs = np.asarray(dofs, dtype=np.int64)
    if dofs.size == 0:
        return AssembledSystem(K=system.K, R=system.R, dof_map=system.dof_map,
                               constrained=dofs, reactions=np.zeros(0))
    n = system.n_dofs
    if dofs.min() < 0 or dofs.max() >= n:
        raise IndexError(f"constrained dof outside 0..{n - 1}")
    offsets = np.zeros(dofs.size) if offsets is None else np.asarray(offsets, dtype=float)
    reactions = system.R[dofs].copy()

    con = np.zeros(n)
    con[dofs] = 1.0
    free = 1.0 - con
    g = np.zeros(n)
    g[dofs] = offsets
    R = free * (system.R - system.K @ g) + g
    K = (sp.diags(free) @ system.K @ sp.diags(free) + sp.diags(con)).tocsr()
    return AssembledSystem(K=K, R=R, dof_map=system.dof_map, constrained=dofs,
                           reactions=reactions)


def linear_solve(K, rhs: np.ndarray) -> np.ndarray:
    """Direct sparse LU solve"""
    K = sp.csc_matrix(K)
    rhs = np.asarray(rhs, dtype=float)
    if K.shape[0] != K.shape[1] or K.shape[0] != rhs.size:
        raise ValueError(f"cannot solve a {K.shape} system with {rhs.size} right-hand side entries")
    try:
        x = spla.splu(K).solve(rhs)
    except RuntimeError as e:
        raise SingularMatrixError(f"singular stiffness matrix: {e}", _zero_pivot(K))
    if not np.all(np.isfinite(x)):
        raise SingularMatrixError("singular stiffness matrix: non-finite solution", _zero_pivot(K))
    return x


def _zero_pivot(K) -> Optional[int]:
    empty = np.flatnonzero(np.asarray(abs(K).sum(axis=1)).ravel() == 0)
    return int(empty[0]) if empty.size else None


def newton_solve(assemble: Callable[[], AssembledSystem], update: Callable[[np.ndarray], None],
                 tol_rel: float = 1e-6, tol_abs: float = 1e-10,
                 max_iter: int = 25) -> ConvergenceReport:
    """
    Newton iteration on ``assemble`` (which returns a Dirichlet-reduced
    system at the current state) applying each increment with ``update``.
    Converged when ||R|| <= max(tol_abs, tol_rel ||R_0||). A report with
    ``converged=False`` is returned on failure; the caller decides what to do.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    report = ConvergenceReport()
    reference = None
    for k in range(max_iter + 1):
        system = assemble()
        norm = float(np.linalg.norm(system.R))
        if not np.isfinite(norm):
            logger.debug("non-finite residual at iteration %d", k)
            break
        report.norms.append(norm)
        if reference is None:
            reference = norm
        if norm <= max(tol_abs, tol_rel * reference):
            report.converged = True
            break
        if k == max_iter:
            break
        update(linear_solve(system.K, -system.R))
        report.iterations += 1
        logger.debug("newton iteration %d: |R| = %.3e", k + 1, norm)
    return report


class Physics(Protocol):
    """Residual/tangent provider for one field"""

    field: str

    def assemble(self, problem: "Problem", t: float, dt: float) -> AssembledSystem: ...

    def commit(self, problem: "Problem", t: float, dt: float) -> None: ...

    def snapshot(self) -> Dict[str, np.ndarray]: ...

    def restore(self, snapshot: Dict[str, np.ndarray]) -> None: ...


@dataclass
class Problem:
    mesh: Mesh
    fields: Dict[str, FieldState]
    physics: Dict[str, Physics]
    state: MaterialPointState
    trial: MaterialPointState
    t: float = 0.0
    increment: int = 0
    params: Dict[str, object] = field(default_factory=dict)

    @classmethod
    def create(cls, mesh: Mesh, fields: Sequence[FieldState], physics: Sequence[Physics],
               **params) -> "Problem":
        n_ip = element_geometry(mesh).n_points
        state = MaterialPointState.zeros(mesh.n_elements, n_ip)
        fields = {f.name: f for f in fields}
        physics = {p.field: p for p in physics}
        missing = set(physics) - set(fields)
        if missing:
            raise ValueError(f"physics defined for unknown fields {sorted(missing)}")
        return cls(mesh=mesh, fields=fields, physics=physics, state=state,
                   trial=state.copy(), params=params)

    def __repr__(self):
        return f"<Problem t={self.t:.6g} fields={list(self.fields)} {self.mesh!r}>"

    @property
    def n_dofs(self) -> int:
        return sum(f.n_dofs for f in self.fields.values())

    def snapshot(self) -> Dict[str, object]:
        return {
            "t": self.t,
            "increment": self.increment,
            "fields": {name: (f.values.copy(), f.old.copy()) for name, f in self.fields.items()},
            "state": self.state.copy(),
            "trial": self.trial.copy(),
            "physics": {name: p.snapshot() for name, p in self.physics.items()},
        }

    def restore(self, snapshot: Dict[str, object]) -> None:
        self.t = snapshot["t"]
        self.increment = snapshot["increment"]
        for name, (values, old) in snapshot["fields"].items():
            np.copyto(self.fields[name].values, values)
            np.copyto(self.fields[name].old, old)
        self.state.assign(snapshot["state"])
        self.trial.assign(snapshot["trial"])
        for name, physics_snapshot in snapshot["physics"].items():
            self.physics[name].restore(physics_snapshot)

    def commit(self, t: float, dt: float) -> None:
        for physics in self.physics.values():
            physics.commit(self, t, dt)
        self.state.assign(self.trial)
        for f in self.fields.values():
            f.commit()
        self.t = t
        self.increment += 1


def _block_system(problem: Problem, block: Tuple[str, ...], t: float, dt: float) -> AssembledSystem:
    systems = []
    offset = 0
    dof_map = {}
    constrained = []
    reactions = []
    for name in block:
        f = problem.fields[name]
        raw = problem.physics[name].assemble(problem, t, dt)
        dofs, targets = f.constraints(t)
        reduced = apply_dirichlet(raw, dofs, f.values[dofs] - targets)
        systems.append(reduced)
        dof_map[name] = slice(offset, offset + f.n_dofs)
        constrained.append(dofs + offset)
        reactions.append(reduced.reactions)
        offset += f.n_dofs
    if len(systems) == 1:
        only = systems[0]
        return AssembledSystem(K=only.K, R=only.R, dof_map=dof_map,
                               constrained=only.constrained, reactions=only.reactions)
    return AssembledSystem(K=sp.block_diag([s.K for s in systems], format="csr"),
                           R=np.concatenate([s.R for s in systems]), dof_map=dof_map,
                           constrained=np.concatenate(constrained),
                           reactions=np.concatenate(reactions))


def solve_block(problem: Problem, block: Tuple[str, ...], t: float, dt: float,
                schedule: CouplingSchedule) -> ConvergenceReport:
    """Newton solve of one block; several fields share one block-diagonal Jacobian"""
    last: Dict[str, AssembledSystem] = {}

    def assemble() -> AssembledSystem:
        last["system"] = _block_system(problem, block, t, dt)
        return last["system"]

    def update(dx: np.ndarray) -> None:
        for name, span in last["system"].dof_map.items():
            problem.fields[name].values += dx[span]

    report = newton_solve(assemble, update, schedule.tol_rel, schedule.tol_abs, schedule.max_iter)
    if not report.converged:
        raise ConvergenceError(f"block {'+'.join(block)} did not converge at t={t:.6g}", report)
    return report


def step_increment(problem: Problem, schedule: CouplingSchedule, dt: float) -> Dict[str, ConvergenceReport]:
    """
    Advance the problem by dt: prescribe Dirichlet targets, run the solve
    blocks in order (repeating the sequence for multi-pass staggering until
    the inter-pass change of every field drops below the pass tolerance)
    and commit history variables once on acceptance.
    """
    t_new = problem.t + dt
    for f in problem.fields.values():
        f.prescribe(t_new)
    problem.trial.assign(problem.state)

    reports: Dict[str, ConvergenceReport] = {}
    for p in range(schedule.passes):
        before = {name: f.values.copy() for name, f in problem.fields.items()}
        for block in schedule.ordering:
            report = solve_block(problem, block, t_new, dt, schedule)
            key = "+".join(block)
            if key in reports:
                previous = reports[key]
                report = ConvergenceReport(iterations=previous.iterations + report.iterations,
                                           norms=previous.norms + report.norms,
                                           converged=report.converged)
            reports[key] = report
        if schedule.passes == 1:
            break
        change = max(_relative_change(problem.fields[name].values, before[name])
                     for name in schedule.fields)
        logger.debug("pass %d: max relative change %.3e", p + 1, change)
        if change < schedule.pass_tol:
            break

    problem.commit(t_new, dt)
    return reports


def _relative_change(new: np.ndarray, old: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(new)), float(np.linalg.norm(old)))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(new - old)) / scale


Observer = Callable[[Problem], None]

_RECOVERABLE = (ConvergenceError, MaterialError, KernelError, SingularMatrixError)


def run_transient(problem: Problem, schedule: CouplingSchedule,
                  observers: Sequence[Observer] = ()) -> TransientResult:
    """
    Step through the schedule's increments. A failed increment is restored
    bit for bit and bisected down to min_dt_factor of its nominal size
    before IncrementError is raised.
    """
    result = TransientResult()
    for nominal in schedule.increments():
        _advance(problem, schedule, nominal, nominal * schedule.min_dt_factor, observers, result)
    logger.info("transient run finished: %d increments, t=%.6g", result.increments, problem.t)
    return result


def _advance(problem: Problem, schedule: CouplingSchedule, dt: float, dt_min: float,
             observers: Sequence[Observer], result: TransientResult) -> None:
    snapshot = problem.snapshot()
    try:
        reports = step_increment(problem, schedule, dt)
    except _RECOVERABLE as e:
        problem.restore(snapshot)
        half = 0.5 * dt
        if half < dt_min * (1.0 - 1e-12):
            raise IncrementError(f"increment failed after bisection to dt={dt:.3e}: {e}", problem.t)
        logger.warning("increment at t=%.6g failed (%s); bisecting to dt=%.3e", problem.t, e, half)
        result.bisections += 1
        _advance(problem, schedule, half, dt_min, observers, result)
        _advance(problem, schedule, half, dt_min, observers, result)
        return
    result.times.append(problem.t)
    result.steps.append(dt)
    result.reports.append(reports)
    logger.debug("accepted increment %d at t=%.6g", problem.increment, problem.t)
    for observer in observers:
        observer(problem)


def save_checkpoint(problem: Problem, path: Union[str, Path]) -> Path:
    """Write fields, material-point state, physics memory and time to an .npz archive"""
    path = Path(path)
    arrays = {"format": np.array(CHECKPOINT_FORMAT), "t": np.array(problem.t),
              "increment": np.array(problem.increment)}
    for name, f in problem.fields.items():
        arrays[f"field/{name}/values"] = f.values
        arrays[f"field/{name}/old"] = f.old
    for name, value in problem.state.as_arrays().items():
        arrays[f"state/{name}"] = value
    for name, physics in problem.physics.items():
        for key, value in physics.snapshot().items():
            arrays[f"physics/{name}/{key}"] = value
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        np.savez(fh, **arrays)
    tmp.replace(path)
    logger.debug("checkpoint written to %s", path)
    return path


def load_checkpoint(problem: Problem, path: Union[str, Path]) -> None:
    """Restore a checkpoint written by save_checkpoint into a problem of the same layout"""
    with np.load(Path(path), allow_pickle=False) as data:
        if str(data["format"]) != CHECKPOINT_FORMAT:
            raise PfmultiError(f"unsupported checkpoint format '{data['format']}'")
        problem.t = float(data["t"])
        problem.increment = int(data["increment"])
        for name, f in problem.fields.items():
            np.copyto(f.values, data[f"field/{name}/values"])
            np.copyto(f.old, data[f"field/{name}/old"])
        for name, value in problem.state.as_arrays().items():
            np.copyto(value, data[f"state/{name}"])
        problem.trial.assign(problem.state)
        for name, physics in problem.physics.items():
            prefix = f"physics/{name}/"
            physics.restore({key[len(prefix):]: data[key] for key in data.files
                             if key.startswith(prefix)})
