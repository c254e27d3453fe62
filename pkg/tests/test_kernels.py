import math

import numpy as np
import pytest

from pfmulti.core.errors import KernelError
from pfmulti.models.kernel import KernelInput
from pfmulti.schemas.materials import CorrosionParams, FluidParams, HeatParams, HydrogenParams
from pfmulti.services import kernels
from pfmulti.services.verification import kernel_suite


def make_input(n=4, dim=2, dt=0.5):
    rng = np.random.default_rng(0)
    return KernelInput(s=rng.uniform(0.2, 0.8, n), s_old=rng.uniform(0.2, 0.8, n),
                       grad_s=rng.normal(size=(n, dim)), dt=dt)


def test_every_kernel_derivative_matches_finite_differences():
    failed = [str(r) for r in kernel_suite(n_points=50) if not r.passed]
    assert not failed


def test_kernel_input_needs_positive_step():
    with pytest.raises(ValueError):
        KernelInput(s=np.zeros(1), s_old=np.zeros(1), grad_s=np.zeros((1, 2)), dt=0.0)


def test_heat_flux_follows_fourier():
    inp = make_input()
    response = kernels.heat_kernel(inp, HeatParams(rho=2.0, c_T=3.0, k0=5.0))
    assert np.allclose(response.flux, -5.0 * inp.grad_s)
    assert np.allclose(response.U_new, 3.0 * inp.ds)


def test_degraded_conductivity_keeps_residual():
    inp = make_input()
    params = HeatParams(rho=1.0, c_T=1.0, k0=2.0, degrade_conductivity=True)
    response = kernels.heat_kernel(inp, params, phi=np.ones(4), k_res=0.01)
    assert np.allclose(response.flux, -0.02 * inp.grad_s)


def test_double_well_minima():
    w, dw, _ = kernels.double_well(np.array([0.0, 0.5, 1.0]), omega=2.0)
    assert w == pytest.approx([0.0, 0.125, 0.0])
    assert dw == pytest.approx([0.0, 0.0, 0.0])


def test_chemical_free_energy_vanishes_at_equilibrium_states():
    params = CorrosionParams(A_curv=10.0, omega=1.0, kappa=0.1, c_Le=0.2, D_m=1.0, L0=1.0)
    psi, dpsi, _, dpsi_dc = kernels.chemical_free_energy(np.array([1.0, 0.2]), np.array([1.0, 0.0]),
                                                         params)
    assert psi == pytest.approx([0.0, 0.0])
    assert dpsi == pytest.approx([0.0, 0.0])
    assert dpsi_dc == pytest.approx([0.0, 0.0])


def test_corrosion_mobility_must_be_positive():
    params = CorrosionParams(A_curv=1.0, omega=1.0, kappa=0.1, c_Le=0.2, D_m=1.0, L0=1.0)
    with pytest.raises(KernelError):
        kernels.corrosion_phase_kernel(make_input(), params, np.zeros(4), c=np.ones(4))


def test_fluid_indicators_and_biot_coefficient():
    params = FluidParams(rho_fl=1.0, mu_fl=1.0, C_fl=1.0, alpha_r=0.6, n_pr=0.1, K_r=1.0,
                         K_f=1.0, K_bulk=1.0)
    chi_r, chi_f = kernels.domain_indicators(np.array([0.0, 0.7, 1.0]), params.c1, params.c2)
    assert chi_f == pytest.approx([0.0, 0.5, 1.0])
    assert chi_r + chi_f == pytest.approx([1.0, 1.0, 1.0])
    assert kernels.biot_coefficient(np.array([0.0, 1.0]), params) == pytest.approx([0.6, 1.0])


def test_hydrogen_coverage_and_toughness():
    params = HydrogenParams(D_H=1.0, V_H=1.0, dg_b0=30e3, chi_H=0.89)
    c = np.array([0.0, 1e-6, 1.0])
    reference = math.exp(-30e3 / (8.314 * 300.0))
    theta = kernels.hydrogen_coverage(c, params)
    assert theta == pytest.approx(c / (c + reference))
    G_c = kernels.hydrogen_toughness(c, params, G_c0=2.7)
    assert G_c[0] == pytest.approx(2.7)
    assert G_c[-1] == pytest.approx(2.7 * (1.0 - 0.89 * theta[-1]))
    with pytest.raises(KernelError):
        kernels.hydrogen_coverage(np.array([-1.0]), params)


def test_hydrogen_zero_flux_at_enriched_equilibrium():
    params = HydrogenParams(D_H=2.0, V_H=1.0, R_gas=1.0, T_k=1.0, dg_b0=1.0, chi_H=0.5)
    # c = exp(sigma_h) with grad(sigma_h) = (1, 0): grad(c) = c (1, 0)
    c = np.array([1.0, 2.0])
    inp = KernelInput(s=c, s_old=c, grad_s=np.stack([c, np.zeros(2)], axis=1), dt=1.0)
    response = kernels.hydrogen_kernel(inp, params, grad_sigma_h=np.array([[1.0, 0.0], [1.0, 0.0]]))
    assert np.allclose(response.flux, 0.0)


def test_wppm_conversion():
    assert kernels.wppm_to_mole_fraction(1.0) == pytest.approx(55.845e-6 / 1.008)


def test_ion_flux_vanishes_at_local_equilibrium():
    params = CorrosionParams(A_curv=1.0, omega=1.0, kappa=0.1, c_Le=0.2, D_m=3.0, L0=1.0)
    inp = make_input()
    phi = np.array([0.1, 0.4, 0.6, 0.9])
    grad_phi = np.array([[1.0, 0.0], [0.5, -1.0], [0.0, 2.0], [-1.0, 1.0]])
    dg = 6.0 * phi * (1.0 - phi)
    # grad(c) = (c_Se - c_Le) g'(phi) grad(phi)
    inp = KernelInput(s=inp.s, s_old=inp.s_old, grad_s=0.8 * dg[:, None] * grad_phi, dt=inp.dt)
    response = kernels.ion_transport_kernel(inp, params, phi=phi, grad_phi=grad_phi)
    assert np.allclose(response.flux, 0.0)
    assert np.allclose(response.U_new, inp.ds)
