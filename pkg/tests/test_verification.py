import pytest

from pfmulti.services.verification import (CheckResult, at2_check, below, critical_pressure_check,
                                           hydrogen_equilibrium_check, interface_checks,
                                           ion_conservation_check, jacobian_suite, kernel_suite,
                                           run_suite, weak_form_checks)


def failures(results):
    return [str(r) for r in results if not r.passed]


def test_below_refuses_nan():
    assert below("x", 1e-9, 1e-6).passed
    assert not below("x", float("nan"), 1e-6).passed
    assert not below("x", 1e-3, 1e-6).passed


def test_check_result_text():
    text = str(CheckResult(name="heat", value=2e-7, tolerance=1e-6, passed=True))
    assert text.startswith("heat: 2.000e-07")
    assert text.endswith("ok")


def test_kernel_suite_passes():
    assert failures(kernel_suite(n_points=40)) == []


def test_jacobian_suite_passes():
    results = jacobian_suite()
    assert results
    assert failures(results) == []


def test_critical_pressure_check():
    assert critical_pressure_check().passed


def test_at2_profile_check():
    assert failures([at2_check()]) == []


def test_interface_checks():
    results = interface_checks()
    assert len(results) == 2
    assert failures(results) == []


def test_hydrogen_equilibrium_check():
    assert failures([hydrogen_equilibrium_check()]) == []


def test_weak_form_checks():
    assert failures(weak_form_checks()) == []


def test_ion_conservation_check():
    assert failures([ion_conservation_check()]) == []


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("bogus")


@pytest.mark.slow
def test_oracle_suite_passes():
    assert failures(run_suite("oracles")) == []
