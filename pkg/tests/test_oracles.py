import math

import numpy as np
import pytest

from pfmulti.schemas.materials import CorrosionParams, HydrogenParams
from pfmulti.services.oracles import (RadialPitOracle, at2_profile, critical_pressure_oracle,
                                      equilibrium_hydrogen, interface_metrics, interface_profile,
                                      l2_relative_error)

CORROSION = CorrosionParams(A_curv=1.0, omega=2.0, kappa=0.5, c_Le=0.2, D_m=1.0, L0=1.0)


def test_critical_pressure_reference_value():
    assert critical_pressure_oracle(210e9, 0.3, 2700.0, 0.1) == pytest.approx(8.91e7, rel=1e-3)


def test_critical_pressure_scaling():
    p = critical_pressure_oracle(210e9, 0.3, 2700.0, 0.1)
    assert critical_pressure_oracle(210e9, 0.3, 2700.0, 0.4) == pytest.approx(p / 2)
    assert critical_pressure_oracle(4 * 210e9, 0.3, 2700.0, 0.1) == pytest.approx(2 * p)


@pytest.mark.parametrize("args", [(210e9, 0.5, 2700.0, 0.1), (0.0, 0.3, 2700.0, 0.1),
                                  (210e9, 0.3, 2700.0, -1.0)])
def test_critical_pressure_rejects_bad_input(args):
    with pytest.raises(ValueError):
        critical_pressure_oracle(*args)


def test_at2_profile():
    assert at2_profile([0.0, 2.0, -2.0], 2.0) == pytest.approx([1.0, math.exp(-1), math.exp(-1)])


def test_interface_metrics_of_the_exact_profile():
    x = np.linspace(-10.0, 10.0, 4001)
    phi = interface_profile(x, CORROSION.kappa, CORROSION.omega)
    assert phi[2000] == pytest.approx(0.5)
    thickness, energy = interface_metrics(x, phi, CORROSION.kappa, CORROSION.omega)
    assert thickness == pytest.approx(CORROSION.interface_thickness, rel=1e-3)
    assert energy == pytest.approx(CORROSION.interface_energy, rel=1e-3)


def test_equilibrium_hydrogen():
    params = HydrogenParams(D_H=1.0, V_H=2.0, R_gas=1.0, T_k=4.0, dg_b0=1.0, chi_H=0.5)
    assert equilibrium_hydrogen(0.5, np.array([0.0, 2.0]), params) == pytest.approx(
        [0.5, 0.5 * math.e])


def test_l2_error():
    x = np.linspace(0.0, 1.0, 11)
    assert l2_relative_error(x, x, x) == 0.0
    assert l2_relative_error(x, 1.1 * x, x) == pytest.approx(0.1)


def test_radial_oracle_front_and_validation():
    oracle = RadialPitOracle(CORROSION, r0=0.5, r_core=0.2, r_out=1.0, n_cells=10)
    phi = np.where(oracle.r < 0.5, 0.0, 1.0)
    assert oracle.front(phi) == pytest.approx(0.45)
    assert oracle.front(np.zeros_like(phi)) == 1.0
    with pytest.raises(ValueError):
        RadialPitOracle(CORROSION, r0=0.5, r_core=0.6, r_out=1.0)
