from pathlib import Path

import pytest
import tomli_w

from pfmulti.services.mesh import generate_structured


@pytest.fixture
def square():
    """Unit square, 2 x 2 bilinear quads"""
    return generate_structured([[0.0, 1.0], [0.0, 1.0]], [2, 2])


@pytest.fixture
def diffusion_config():
    return {
        "run": {"name": "hot_spot"},
        "mesh": {"kind": "quad4", "bounds": [[0.0, 0.1], [0.0, 0.1]], "divisions": [6, 6]},
        "scenario": {
            "kind": "diffusion",
            "initial": 20.0,
            "dirichlet": [{"set": "left", "value": 20.0}, {"set": "right", "value": 20.0}],
            "hot_spot": {"center": [0.05, 0.05], "radius": 0.02, "value": 500.0},
        },
        "materials": {"heat": {"rho": 7850.0, "c_T": 460.0, "k0": 45.0}},
        "schedule": {"dt": 10.0, "t_end": 40.0},
        "output": {"cadence": 2, "probes": [
            {"name": "T_centre", "kind": "node", "field": "T", "at": [0.05, 0.05]}]},
    }


@pytest.fixture
def write_config(tmp_path):
    def write(data, name: str = "run.toml") -> Path:
        path = tmp_path / name
        path.write_text(tomli_w.dumps(data), encoding="utf-8")
        return path

    return write
