import json
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from types import SimpleNamespace

import numpy as np
import pandas as pd
import pytest

from pfmulti.core.config import settings
from pfmulti.core.errors import ConfigError
from pfmulti.models.series import ProbeSeries
from pfmulti.schemas.config import parse_config, validate_config
from pfmulti.scenarios.corrosion import DrainLedger, mass_balance
from pfmulti.services.runner import execute, override, prepare

BENCHMARKS = Path(__file__).resolve().parents[1] / "benchmarks"
BENCHMARK_FILES = sorted(BENCHMARKS.glob("*.toml"), key=lambda p: p.name)

FIELDS = {
    "diffusion": {"T"},
    "quenching": {"u", "phi", "T"},
    "pressurized_crack": {"u", "phi", "p"},
    "injection": {"u", "phi", "p"},
    "hydrogen_plate": {"u", "phi", "c"},
    "pit_free": {"phi", "c"},
    "pit_scc": {"u", "phi", "c"},
}


def scheduled(run):
    return {name for block in run.schedule.ordering for name in block}


def test_every_scenario_has_a_benchmark():
    kinds = {parse_config(path).scenario.kind for path in BENCHMARK_FILES}
    assert kinds == set(FIELDS)


@pytest.mark.parametrize("path", BENCHMARK_FILES, ids=lambda p: p.stem)
def test_benchmark_prepares(path):
    config = parse_config(path)
    run = prepare(config, path.parent)
    assert run.name == config.scenario.kind
    assert set(run.problem.fields) == FIELDS[config.scenario.kind]
    assert run.problem.n_dofs <= settings.MAX_DOFS
    assert run.schedule.t_end == pytest.approx(config.schedule.t_end)


def test_override_caps_increments_and_scheme():
    config = parse_config(BENCHMARKS / "quenching.toml")
    changed = override(config, max_increments=3, scheme="monolithic-pair")
    assert changed.schedule.max_increments == 3
    assert changed.schedule.scheme == "monolithic-pair"
    assert config.schedule.max_increments is None
    assert override(config) is config


def test_pit_starts_dissolved():
    path = BENCHMARKS / "pit_free.toml"
    run = prepare(parse_config(path), path.parent)
    mesh = run.problem.mesh
    pit = mesh.node_set("pit")
    core = mesh.node_set("pit_core")
    assert pit.size > core.size > 0
    assert np.all(run.problem.fields["phi"].values[pit] == 0.0)
    assert np.all(run.problem.fields["c"].values[pit] == 0.0)
    assert np.all(np.isin(core, pit))
    assert run.problem.fields["phi"].values.max() == 1.0


def test_stress_free_pit_drops_displacement():
    path = BENCHMARKS / "pit_scc.toml"
    config = parse_config(path)
    config = config.model_copy(update={"scenario": config.scenario.model_copy(update={"mechanics": False})})
    run = prepare(config, path.parent)
    assert set(run.problem.fields) == {"phi", "c"}
    assert scheduled(run) == {"phi", "c"}


@pytest.mark.parametrize("transport,solved", [("transient", {"u", "phi", "c"}),
                                               ("steady", {"u", "phi", "c"}),
                                               ("uniform", {"u", "phi"})])
def test_hydrogen_transport_modes(transport, solved):
    path = BENCHMARKS / "hydrogen_plate.toml"
    config = parse_config(path)
    config = config.model_copy(update={"scenario": config.scenario.model_copy(update={"transport": transport})})
    run = prepare(config, path.parent)
    assert scheduled(run) == solved
    assert np.allclose(run.problem.fields["c"].values, config.scenario.c_env)


def test_probe_on_unknown_set_is_a_config_error(diffusion_config):
    diffusion_config["output"]["probes"].append(
        {"name": "R", "kind": "reaction", "field": "T", "set": "nowhere"})
    with pytest.raises(ConfigError):
        prepare(validate_config(diffusion_config))


def test_diffusion_cools_between_fixed_faces(tmp_path, diffusion_config, write_config):
    manifest = execute(write_config(diffusion_config), out_dir=tmp_path / "out")
    assert manifest.status == "completed"
    assert manifest.increments == 4
    assert manifest.t_final == pytest.approx(40.0)
    metrics = json.loads((tmp_path / "out" / "metrics.json").read_text())
    assert 20.0 < metrics["T_max"] < 500.0
    assert metrics["T_min"] > 10.0
    assert metrics["increments"] == 4


@pytest.mark.slow
@pytest.mark.parametrize("path", BENCHMARK_FILES, ids=lambda p: p.stem)
def test_benchmark_first_increments(path, tmp_path):
    manifest = execute(path, out_dir=tmp_path / path.stem, max_increments=2)
    assert manifest.status == "completed"
    assert manifest.increments == 2
    assert (tmp_path / path.stem / "metrics.json").is_file()


def test_drain_ledger_integrates_core_flux():
    nodes = np.array([0, 1])
    flux = {"value": -2.0}
    ion = SimpleNamespace(reaction=lambda problem, held: flux["value"])
    problem = SimpleNamespace(t=0.0, physics={"c": ion})
    ledger = DrainLedger(nodes)
    assert ledger(problem) == 0.0
    problem.t = 0.5
    assert ledger(problem) == pytest.approx(1.0)
    assert ledger(problem) == pytest.approx(1.0)
    flux["value"] = -1.0
    problem.t = 1.5
    assert ledger(problem) == pytest.approx(2.0)


def test_mass_balance_compares_changes():
    dissolved = ProbeSeries(name="dissolved", times=[0.0, 1.0], values=[2.0, 3.0])
    released = ProbeSeries(name="ions_released", times=[0.0, 1.0], values=[-0.5, 0.49])
    assert mass_balance(dissolved, released) == pytest.approx(0.01)
    flat = ProbeSeries(name="dissolved", times=[0.0, 1.0], values=[2.0, 2.0])
    assert mass_balance(flat, released) == 0.0
    assert mass_balance(ProbeSeries(name="dissolved"), released) == 0.0


def test_pit_bookkeeping_over_first_increments(tmp_path):
    out = tmp_path / "pit"
    manifest = execute(BENCHMARKS / "pit_free.toml", out_dir=out, max_increments=3)
    assert manifest.status == "completed"
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["mass_balance"] < 0.01
    assert metrics["ions_drained"] >= 0.0
    # nothing recorded past the first tenth of the run yet
    assert metrics["oracle_depth_error"] is None
    probes = pd.read_csv(out / "probes.csv")
    assert {"dissolved", "ions_released", "depth"} <= set(probes.columns)


@pytest.fixture(scope="module")
def pit_free_metrics(tmp_path_factory):
    out = tmp_path_factory.mktemp("pit_free")
    assert execute(BENCHMARKS / "pit_free.toml", out_dir=out).status == "completed"
    return json.loads((out / "metrics.json").read_text())


def benchmark_data(name):
    return tomllib.loads((BENCHMARKS / f"{name}.toml").read_text(encoding="utf-8"))


def run_metrics(data, write_config, out: Path, name: str = "run.toml"):
    manifest = execute(write_config(data, name), out_dir=out)
    assert manifest.status == "completed"
    return json.loads((out / "metrics.json").read_text())


@pytest.mark.slow
def test_pit_free_conserves_ions(pit_free_metrics):
    assert pit_free_metrics["mass_balance"] < 0.01


@pytest.mark.slow
def test_pit_free_depth_follows_radial_oracle(pit_free_metrics):
    assert pit_free_metrics["depth"] > pit_free_metrics["pit_radius"]
    assert pit_free_metrics["oracle_depth_error"] < 0.1


@pytest.mark.slow
def test_pit_free_stays_semicircular(pit_free_metrics):
    assert pit_free_metrics["max_shape_deviation"] < 0.05


@pytest.mark.slow
def test_stress_free_elliptic_pit_matches_pit_free(pit_free_metrics, tmp_path, write_config):
    data = benchmark_data("pit_free")
    radius = data["scenario"]["pit_radius"]
    data["scenario"] = {"kind": "pit_scc", "pit_half_width": radius, "pit_depth": radius,
                        "core_fraction": data["scenario"]["core_fraction"], "mechanics": False}
    solid = benchmark_data("pit_scc")["materials"]
    data["materials"].update(elastic=solid["elastic"], plastic=solid["plastic"])
    metrics = run_metrics(data, write_config, tmp_path / "scc")
    assert metrics["mechanics"] is False
    assert metrics["depth"] == pytest.approx(pit_free_metrics["depth"], rel=0.02)


@pytest.mark.slow
def test_loaded_pit_unloads_corroded_material(tmp_path):
    out = tmp_path / "pit_scc"
    assert execute(BENCHMARKS / "pit_scc.toml", out_dir=out).status == "completed"
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["sigma_xx_corroded_ratio"] < 0.01
    assert metrics["sigma_h_unimodal"] is True
    assert metrics["sigma_h_peak"] > 0.0


@pytest.mark.slow
def test_quenching_cracks_grow_with_temperature_drop(tmp_path, write_config):
    counts = []
    for T0 in (300.0, 400.0, 600.0):
        data = benchmark_data("quenching")
        data["mesh"]["x_coords"] = {"breakpoints": [0.0, 0.005], "divisions": [200]}
        data["scenario"]["T_initial"] = T0
        data["schedule"].update(dt=2e-4, t_end=0.01)
        metrics = run_metrics(data, write_config, tmp_path / f"T{T0:.0f}", f"T{T0:.0f}.toml")
        counts.append(metrics["crack_count"])
    assert counts == sorted(counts)
    assert counts[-1] > 0


@pytest.mark.slow
def test_hydrogen_lowers_peak_load(tmp_path, write_config):
    peaks = []
    for c_env in (0.0, 0.1, 0.5, 1.0):
        data = benchmark_data("hydrogen_plate")
        data["mesh"]["x_coords"]["divisions"] = [10, 147]
        data["mesh"]["y_coords"]["divisions"] = [8, 16]
        data["scenario"]["c_env"] = c_env
        data["schedule"]["dt"] = 1e5
        metrics = run_metrics(data, write_config, tmp_path / f"c{c_env}", f"c{c_env}.toml")
        peaks.append(metrics["peak_load"])
        if c_env > 0:
            assert metrics["c_max_tip_distance"] <= 2.0 * metrics["ell"]
    assert all(a > b for a, b in zip(peaks, peaks[1:]))
