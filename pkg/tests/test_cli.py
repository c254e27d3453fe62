import json

import pandas as pd
import pytest

from pfmulti import __version__
from pfmulti.main import cli_main


def test_oracle_pc_prints_critical_pressure(capsys):
    code = cli_main(["oracle", "pc", "--E", "210e9", "--nu", "0.3", "--gc", "2700", "--a0", "0.1"])
    assert code == 0
    assert float(capsys.readouterr().out.strip()) == pytest.approx(8.91e7, rel=1e-3)


def test_oracle_pc_rejects_bad_poisson_ratio(capsys):
    code = cli_main(["oracle", "pc", "--E", "210e9", "--nu", "0.6", "--gc", "2700", "--a0", "0.1"])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_version(capsys):
    assert cli_main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_unknown_suite_is_a_usage_error():
    assert cli_main(["verify", "everything"]) == 2


def test_missing_config_exits_with_config_code(tmp_path, capsys):
    code = cli_main(["run", str(tmp_path / "absent.toml")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_verify_kernels(capsys):
    assert cli_main(["verify", "kernels"]) == 0
    assert "checks passed" in capsys.readouterr().out


def test_run_fills_run_directory(tmp_path, diffusion_config, write_config):
    config = write_config(diffusion_config)
    out = tmp_path / "out"

    code = cli_main(["run", str(config), "--max-increments", "2", "--out", str(out)])

    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "completed"
    assert manifest["increments"] == 2
    probes = pd.read_csv(out / "probes.csv")
    assert list(probes.columns) == ["t", "T_max", "T_min", "T_centre"]
    assert len(probes) == 3
    assert probes["t"].tolist() == pytest.approx([0.0, 10.0, 20.0])
    for name in ("hot_spot_00000.vtk", "hot_spot_00002.vtk", "hot_spot.vtk.series", "metrics.json"):
        assert (out / name).is_file()
    assert not (out / "hot_spot_00001.vtk").exists()


def test_run_rejects_invalid_config(tmp_path, diffusion_config, write_config, capsys):
    diffusion_config["materials"]["heat"]["rho"] = -1.0
    code = cli_main(["run", str(write_config(diffusion_config)), "--out", str(tmp_path / "out")])
    assert code == 2
    assert "materials.heat.rho" in capsys.readouterr().err
