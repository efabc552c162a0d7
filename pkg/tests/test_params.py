import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lindblad_kt.params import (HBARC_MEV_FM, Check, DCoefficients, DxxMode, PhysicalParams,
                                check_dekker, check_harmonic_condition, derive_coefficients,
                                from_internal, harmonic_condition_lhs, to_internal)

from conftest import HBARC, M, T

PAPER = dict(mass_mev=470.0, temperature_mev=300.0, gamma_cfm=0.5)


def test_hbarc_value():
    assert HBARC_MEV_FM == HBARC


@pytest.mark.parametrize("value,unit,expected", [
    (470.0, "MeV", 2.38183),
    (300.0, "MeV", 1.52032),
    (40.0, "fm", 40.0),
    (0.5, "c/fm", 0.5),
    (20.0, "fm/c", 20.0),
])
def test_to_internal_examples(value, unit, expected):
    assert to_internal(value, unit) == pytest.approx(expected, abs=5e-6)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_to_internal_rejects_non_finite(bad):
    with pytest.raises(ValueError):
        to_internal(bad, "MeV")


def test_unknown_unit():
    with pytest.raises(ValueError):
        to_internal(1.0, "GeV")


@given(st.floats(-1e6, 1e6, allow_nan=False), st.sampled_from(["MeV", "fm", "c/fm", "fm/c"]))
def test_unit_round_trip(value, unit):
    back = from_internal(to_internal(value, unit), unit)
    assert back == pytest.approx(value, rel=1e-12, abs=1e-300)


def test_paper_coefficients():
    c = derive_coefficients(PhysicalParams(**PAPER))
    assert c.d_pp == pytest.approx(2 * 0.5 * M * T, rel=1e-14)
    assert c.d_pp == pytest.approx(3.62115, abs=5e-6)
    assert c.d_px == pytest.approx(-0.125, rel=1e-14)
    assert c.d_xx == 0.0
    assert c.gamma == 0.5
    assert c.mass == pytest.approx(M, rel=1e-15)


def test_thermal_dxx():
    c = derive_coefficients(PhysicalParams(**PAPER, dxx_mode="thermal"))
    assert c.d_xx == pytest.approx(0.5 / (6 * M * T), rel=1e-14)
    assert c.d_xx == pytest.approx(0.023013, abs=5e-7)


def test_omega_cutoff_default():
    p = PhysicalParams(**PAPER)
    assert p.omega_cutoff_mev == 1200.0


def test_closed_system_limit():
    c = derive_coefficients(PhysicalParams(470.0, 300.0, 0.0, dxx_mode=DxxMode.THERMAL))
    assert (c.d_pp, c.d_px, c.d_xx) == (0.0, 0.0, 0.0)


@pytest.mark.parametrize("kwargs", [
    dict(mass_mev=0.0, temperature_mev=300.0),
    dict(mass_mev=470.0, temperature_mev=-1.0),
    dict(mass_mev=470.0, temperature_mev=300.0, gamma_cfm=-0.1),
    dict(mass_mev=470.0, temperature_mev=300.0, omega_cutoff_mev=0.0),
    dict(mass_mev=math.nan, temperature_mev=300.0),
])
def test_invalid_params(kwargs):
    with pytest.raises(ValueError):
        PhysicalParams(**kwargs)


@given(st.floats(1e-3, 10.0), st.sampled_from(list(DxxMode)))
def test_coefficients_homogeneous_in_gamma(gamma, mode):
    c1 = derive_coefficients(PhysicalParams(470.0, 300.0, gamma, dxx_mode=mode))
    c2 = derive_coefficients(PhysicalParams(470.0, 300.0, 2 * gamma, dxx_mode=mode))
    assert c2.d_pp == 2 * c1.d_pp
    assert c2.d_px == 2 * c1.d_px
    assert c2.d_xx == 2 * c1.d_xx


@given(st.floats(1e-4, 100.0), st.floats(1.0, 1000.0))
def test_dekker_always_holds_for_thermal_mode(gamma, temperature):
    c = derive_coefficients(PhysicalParams(470.0, temperature, gamma, dxx_mode="thermal"))
    assert check_dekker(c) is Check.PASS


def test_dekker_examples():
    assert check_dekker(derive_coefficients(PhysicalParams(470.0, 300.0, 0.0))) is Check.NOT_APPLICABLE
    assert check_dekker(derive_coefficients(PhysicalParams(**PAPER))) is Check.NOT_APPLICABLE
    bad = DCoefficients(d_pp=1.0, d_px=0.3, d_xx=0.01, gamma=0.5, mass=1.0)
    assert check_dekker(bad) is Check.FAIL
    assert not check_dekker(bad)
    assert check_dekker(bad, gamma=0.0) is Check.FAIL


def test_harmonic_condition_paper_set():
    c = derive_coefficients(PhysicalParams(**PAPER))
    lhs = harmonic_condition_lhs(c, M, 0.5, 0.5)
    assert lhs == pytest.approx(4 * T**2 * (1 + 2 * 0.5 / (4 * T)) / 0.25, rel=1e-12)
    assert lhs == pytest.approx(43.07, abs=0.01)
    assert check_harmonic_condition(c, M, 0.5, 0.5)


def test_harmonic_condition_boundary_and_large_omega():
    c = derive_coefficients(PhysicalParams(**PAPER))
    omega_b = 2 * T * math.sqrt(1 + 2 * 0.5 / (4 * T))
    assert harmonic_condition_lhs(c, M, omega_b, 0.5) == pytest.approx(1.0, rel=1e-12)
    assert check_harmonic_condition(c, M, omega_b, 0.5)
    assert not check_harmonic_condition(c, M, 1e6, 0.5)


@pytest.mark.parametrize("omega", [0.0, -1.0])
def test_harmonic_condition_needs_positive_omega(omega):
    c = derive_coefficients(PhysicalParams(**PAPER))
    with pytest.raises(ValueError):
        check_harmonic_condition(c, M, omega, 0.5)
