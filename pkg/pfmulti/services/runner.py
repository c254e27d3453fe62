"""
Run orchestration: configuration to scenario, transient solve and the run
directory (probe table, metrics, VTK snapshots with their series index,
optional checkpoints and the run manifest).
"""

import logging
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

import pfmulti
from pfmulti.core.config import settings
from pfmulti.core.errors import OutputError, PfmultiError
from pfmulti.schemas.config import Config, config_hash, parse_config
from pfmulti.schemas.manifest import RunManifest
from pfmulti.scenarios import SCENARIOS, ScenarioRun, build_mesh
from pfmulti.services.io import write_csv, write_json, write_vtk, write_vtk_series
from pfmulti.services.solver import Problem, run_transient, save_checkpoint

logger = logging.getLogger(__name__)


def plain(value: Any) -> Any:
    """JSON-ready copy: numpy scalars unwrapped, non-finite floats as null"""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [plain(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def nodal_fields(problem: Problem, names: Optional[List[str]] = None) -> Dict[str, np.ndarray]:
    names = list(problem.fields) if names is None else names
    out = {}
    for name in names:
        if name not in problem.fields:
            continue
        f = problem.fields[name]
        out[name] = f.nodal if f.n_components > 1 else f.values
    return out


class RunWriter:
    """Observer writing VTK snapshots and checkpoints at their cadences"""

    def __init__(self, run: ScenarioRun, out_dir: Path, config: Config):
        self.run = run
        self.name = config.run.name
        self.out_dir = out_dir
        self.cadence = config.output.cadence
        self.vtk = config.output.vtk
        self.fields = config.output.fields
        self.checkpoint_every = settings.CHECKPOINT_EVERY
        self.snapshots: List[Tuple[str, float]] = []
        self.files: List[str] = []
        self.last_written = -1

    def snapshot(self, problem: Problem) -> None:
        if not self.vtk or problem.increment == self.last_written:
            return
        name = f"{self.name}_{problem.increment:05d}.vtk"
        write_vtk(problem.mesh, nodal_fields(problem, self.fields), self.out_dir / name,
                  time=problem.t, cell_data=self.run.cell_data(problem))
        self.snapshots.append((name, problem.t))
        self.files.append(name)
        self.last_written = problem.increment

    def __call__(self, problem: Problem) -> None:
        if self.cadence and problem.increment % self.cadence == 0:
            self.snapshot(problem)
        if self.checkpoint_every and problem.increment % self.checkpoint_every == 0:
            name = f"checkpoint_{problem.increment:05d}.npz"
            save_checkpoint(problem, self.out_dir / name)
            self.files.append(name)

    def finish(self, problem: Problem) -> None:
        self.snapshot(problem)
        if self.snapshots:
            name = f"{self.name}.vtk.series"
            write_vtk_series(self.out_dir / name, self.snapshots)
            self.files.append(name)


def prepare(config: Config, base_dir: Optional[Path] = None) -> ScenarioRun:
    mesh = build_mesh(config.mesh, base_dir)
    run = SCENARIOS[config.scenario.kind](config, mesh)
    run.attach_probes(config)
    logger.info("%s: %r, %d unknowns", run.name, mesh, run.problem.n_dofs)
    return run


def override(config: Config, max_increments: Optional[int] = None,
             scheme: Optional[str] = None) -> Config:
    update = {}
    if max_increments is not None:
        update["max_increments"] = max_increments
    if scheme is not None:
        update["scheme"] = scheme
    if not update:
        return config
    return config.model_copy(update={"schedule": config.schedule.model_copy(update=update)})


def execute(config_path: Union[str, Path], out_dir: Optional[Union[str, Path]] = None,
            max_increments: Optional[int] = None, scheme: Optional[str] = None) -> RunManifest:
    """Run the configuration at ``config_path`` and fill its run directory"""
    config_path = Path(config_path)
    config = override(parse_config(config_path), max_increments, scheme)
    out = Path(out_dir) if out_dir is not None else Path(settings.OUTPUT_DIR) / config.run.name
    manifest = RunManifest(name=config.run.name, scenario=config.scenario.kind,
                           config_path=str(config_path), config_hash=config_hash(config_path),
                           code_version=pfmulti.__version__,
                           started=datetime.now(timezone.utc))

    run = prepare(config, config_path.parent)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"cannot create run directory {out}: {e.strerror or e}")
    writer = RunWriter(run, out, config)
    problem = run.problem
    run.recorder(problem)
    writer.snapshot(problem)
    try:
        result = run_transient(problem, run.schedule,
                               observers=[run.recorder, *run.observers, writer])
        manifest.status = "completed"
    except PfmultiError as e:
        manifest.status = "failed"
        manifest.message = str(e)
        _finish(run, writer, config, out, manifest, {})
        raise
    _finish(run, writer, config, out, manifest, result.to_dict())
    return manifest


def _finish(run: ScenarioRun, writer: RunWriter, config: Config, out: Path,
            manifest: RunManifest, solve: Dict[str, Any]) -> None:
    problem = run.problem
    completed = manifest.status == "completed"
    if completed:
        writer.finish(problem)
    files = list(writer.files)
    if config.output.csv:
        write_csv(run.recorder.as_list(), out / "probes.csv")
        files.append("probes.csv")
    if completed:
        metrics = {"scenario": run.name, "t_final": problem.t, "increments": problem.increment,
                   "solve": solve, **run.summary()}
        write_json(out / "metrics.json", plain(metrics))
        files.append("metrics.json")
    manifest.finished = datetime.now(timezone.utc)
    manifest.increments = problem.increment
    manifest.t_final = problem.t
    manifest.files = files
    write_json(out / "manifest.json", plain(manifest.model_dump(mode="json")))
    logger.info("%s: %s after %d increments, results in %s", run.name, manifest.status,
                problem.increment, out)
