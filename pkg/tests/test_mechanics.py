import numpy as np
import pytest

from pfmulti.core.errors import MaterialError
from pfmulti.schemas.materials import ElasticProps, PlasticProps
from pfmulti.services.mechanics import (degradation_at2, degradation_corrosion,
                                        effective_degradation, flow_stress, history_update,
                                        hydrostatic, isotropic_split_none, j2_return_map,
                                        no_tension_split, strain_from_gradient, thermal_strain)

ELASTIC = ElasticProps(E=100.0, nu=0.3)
PLASTIC = PlasticProps(sigma_y=0.2, N_hard=0.1)


def von_mises(sigma):
    s = sigma - np.trace(sigma, axis1=-2, axis2=-1)[..., None, None] * np.eye(3) / 3.0
    return np.sqrt(1.5 * np.einsum("...ij,...ij->...", s, s))


def random_strains(n, scale, seed):
    a = np.random.default_rng(seed).normal(scale=scale, size=(n, 3, 3))
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def test_degradation_functions():
    assert [float(v) for v in degradation_at2(0.3)] == pytest.approx([0.49, -1.4, 2.0])
    g, dg, _ = degradation_corrosion(np.array([0.0, 0.5, 1.0]))
    assert g == pytest.approx([0.0, 0.5, 1.0])
    assert dg == pytest.approx([0.0, 1.5, 0.0])


def test_effective_degradation_clamps_and_keeps_residual():
    g, _ = effective_degradation(np.array([-0.5, 2.0]), "at2", k_res=0.1)
    assert g == pytest.approx([1.0, 0.1])


def test_no_split_energy_and_stress():
    eps = random_strains(5, 0.01, seed=1)
    split = isotropic_split_none(eps, ELASTIC)
    assert np.allclose(split.psi2, 0.0)
    assert np.allclose(split.psi1, 0.5 * np.einsum("nij,nij->n", split.sigma1, eps))
    assert np.allclose(split.stress(0.0), 0.0)


def test_no_tension_split_limits():
    tension = no_tension_split(np.diag([0.01, 0.02, 0.005])[None], ELASTIC)
    assert tension.psi2 == pytest.approx([0.0])
    assert np.allclose(tension.sigma2, 0.0)

    compression = no_tension_split(-0.01 * np.eye(3)[None], ELASTIC)
    assert compression.psi2 == pytest.approx(compression.psi1)
    assert np.allclose(compression.sigma2, compression.sigma1)


def test_no_tension_stress_is_energy_derivative():
    h = 1e-7
    rng = np.random.default_rng(5)
    for eps in random_strains(20, 0.01, seed=3):
        d = rng.normal(size=(3, 3))
        d = 0.5 * (d + d.T)
        plus = no_tension_split((eps + h * d)[None], ELASTIC).psi2[0]
        minus = no_tension_split((eps - h * d)[None], ELASTIC).psi2[0]
        sigma2 = no_tension_split(eps[None], ELASTIC).sigma2[0]
        assert (plus - minus) / (2 * h) == pytest.approx(np.sum(sigma2 * d), abs=1e-6)


def test_return_map_elastic_below_yield():
    eps = np.diag([1e-4, 0.0, 0.0])[None]
    result = j2_return_map(eps, np.zeros((1, 3, 3)), np.zeros(1), ELASTIC, PLASTIC)
    assert not result.plastic.any()
    assert np.allclose(result.sigma, isotropic_split_none(eps, ELASTIC).sigma1)


def test_return_map_stays_on_hardening_surface():
    eps = np.diag([0.02, -0.005, 0.0])[None]
    result = j2_return_map(eps, np.zeros((1, 3, 3)), np.zeros(1), ELASTIC, PLASTIC)
    assert result.plastic.all()
    assert result.eps_bar_p[0] > 0
    assert von_mises(result.sigma)[0] == pytest.approx(
        flow_stress(result.eps_bar_p, ELASTIC, PLASTIC)[0], rel=1e-8)
    # plastic flow is isochoric
    assert np.trace(result.eps_p[0]) == pytest.approx(0.0, abs=1e-14)


def test_return_map_tangent_is_consistent():
    eps = np.diag([0.02, -0.005, 0.0])
    d = np.array([[1.0, 0.3, 0.0], [0.3, -0.5, 0.2], [0.0, 0.2, 0.4]])
    h = 1e-6

    def stress(e):
        return j2_return_map(e[None], np.zeros((1, 3, 3)), np.zeros(1), ELASTIC, PLASTIC).sigma[0]

    tangent = j2_return_map(eps[None], np.zeros((1, 3, 3)), np.zeros(1), ELASTIC, PLASTIC).tangent[0]
    fd = (stress(eps + h * d) - stress(eps - h * d)) / (2 * h)
    assert np.allclose(fd, np.einsum("ijkl,kl->ij", tangent, d), atol=1e-4)


def test_return_map_failure_names_the_point():
    eps = np.diag([0.02, 0.0, 0.0])[None, None]
    with pytest.raises(MaterialError) as excinfo:
        j2_return_map(eps, np.zeros((1, 1, 3, 3)), np.zeros((1, 1)), ELASTIC, PLASTIC, max_iter=0)
    assert excinfo.value.element == 0
    assert excinfo.value.point == 0


def test_small_helpers():
    assert hydrostatic(np.diag([1.0, 2.0, 3.0])) == pytest.approx(2.0)
    assert history_update(np.array([1.0, 3.0]), [2.0, 2.0], [0.0, 0.0]) == pytest.approx([2.0, 3.0])
    eps = strain_from_gradient(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert eps[0, 1] == eps[1, 0] == pytest.approx(0.5)
    assert eps[2, 2] == 0.0
    props = ElasticProps(E=1.0, nu=0.2, alpha_T=1e-5, T0=10.0)
    assert np.allclose(thermal_strain(110.0, props), 1e-3 * np.eye(3))


def random_rotations(n, seed):
    q, r = np.linalg.qr(np.random.default_rng(seed).normal(size=(n, 3, 3)))
    q = q * np.sign(np.diagonal(r, axis1=-2, axis2=-1))[:, None, :]
    q[np.linalg.det(q) < 0, :, 0] *= -1.0
    return q


def rotate(Q, eps):
    return np.einsum("nij,njk,nlk->nil", Q, eps, Q)


def test_no_tension_split_is_frame_indifferent():
    eps = random_strains(1000, 0.01, seed=21)
    Q = random_rotations(1000, seed=22)
    split = no_tension_split(eps, ELASTIC)
    turned = no_tension_split(rotate(Q, eps), ELASTIC)
    scale = np.max(np.abs(split.psi1))
    assert np.max(np.abs(turned.psi2 - split.psi2)) <= 1e-9 * scale
    for sigma, sigma_turned in ((split.sigma1, turned.sigma1), (split.sigma2, turned.sigma2)):
        stress_scale = np.max(np.abs(split.sigma1))
        assert np.max(np.abs(sigma_turned - rotate(Q, sigma))) <= 1e-9 * stress_scale


@pytest.mark.parametrize("principal", [(0.003, 0.006, 0.01),
                                       (-0.004, 0.005, 0.009),
                                       (-0.01, -0.004, 0.012),
                                       (-0.01, -0.006, -0.002)],
                         ids=["all_tension", "one_compressed", "two_compressed", "all_compressed"])
def test_no_tension_tangent_matches_central_differences(principal):
    Q = random_rotations(1, seed=int(1e3 * abs(principal[0])))[0]
    eps = Q @ np.diag(principal) @ Q.T
    split = no_tension_split(eps[None], ELASTIC)
    if principal[0] > 0:
        assert split.psi2[0] == 0.0
    h = 1e-7
    rng = np.random.default_rng(9)
    for _ in range(5):
        d = rng.normal(size=(3, 3))
        d = 0.5 * (d + d.T)
        plus = no_tension_split((eps + h * d)[None], ELASTIC).sigma2[0]
        minus = no_tension_split((eps - h * d)[None], ELASTIC).sigma2[0]
        fd = (plus - minus) / (2 * h)
        exact = np.einsum("ijkl,kl->ij", split.tangent2[0], d)
        assert np.max(np.abs(fd - exact)) <= 1e-5 * max(np.max(np.abs(exact)), 1e-12) + 1e-9


def test_degraded_stress_is_energy_derivative_at_fixed_phase():
    g = float(degradation_at2(0.4)[0])
    h = 1e-7
    rng = np.random.default_rng(13)
    for eps in random_strains(20, 0.01, seed=14):
        d = rng.normal(size=(3, 3))
        d = 0.5 * (d + d.T)
        plus = no_tension_split((eps + h * d)[None], ELASTIC).energy(g)[0]
        minus = no_tension_split((eps - h * d)[None], ELASTIC).energy(g)[0]
        sigma = no_tension_split(eps[None], ELASTIC).stress(g)[0]
        exact = np.sum(sigma * d)
        assert (plus - minus) / (2 * h) == pytest.approx(exact, rel=1e-5, abs=1e-10)


def test_power_law_hardening_of_steel():
    steel = ElasticProps(E=190000.0, nu=0.3)
    plastic = PlasticProps(sigma_y=520.0, N_hard=0.067)
    assert float(flow_stress(0.01, steel, plastic)) == pytest.approx(577.0, abs=1.0)

    # strain-driven isochoric path reaching eps_bar_p = 0.01 in many small steps
    mu = steel.lame[1]
    target = 0.01 + float(flow_stress(0.01, steel, plastic)) / (3.0 * mu)
    eps_p, eps_bar_p = np.zeros((1, 3, 3)), np.zeros(1)
    for e in np.linspace(0.0, target, 51)[1:]:
        result = j2_return_map(np.diag([e, -0.5 * e, -0.5 * e])[None], eps_p, eps_bar_p,
                               steel, plastic)
        assert result.eps_bar_p[0] >= eps_bar_p[0]
        assert von_mises(result.sigma)[0] <= flow_stress(result.eps_bar_p, steel, plastic)[0] * (1 + 1e-9)
        eps_p, eps_bar_p = result.eps_p, result.eps_bar_p
    assert eps_bar_p[0] == pytest.approx(0.01, rel=1e-8)
    assert von_mises(result.sigma)[0] == pytest.approx(577.0, abs=1.0)
