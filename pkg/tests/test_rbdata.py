import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fourlevel_eit.constants import GAMMA_D1 as G, TWO_PI
from fourlevel_eit.errors import ConfigurationError, TemperatureRangeError
from fourlevel_eit.rbdata import (
    BeamConfig,
    RABI_REFERENCE,
    T_MELT,
    atom_system,
    constants_report,
    hyperfine_dipole,
    isotope,
    number_density,
    rabi_from_power,
    relative_strength,
    transition_config,
)

#: Frozen regression constant of the calibrated vapor law (Rb85, 24.5 C).
DENSITY_24_5C = 1.3124614026027366e16


def test_isotope_constants():
    rb85, rb87 = isotope("Rb85"), isotope("87")
    assert rb85.omega43.value == pytest.approx(TWO_PI * 361e6, rel=1e-15)
    assert rb87.omega43.value == pytest.approx(TWO_PI * 817e6, rel=1e-15)
    assert rb85.gamma.value == pytest.approx(TWO_PI * 5.75e6, rel=1e-15)
    assert rb85.omega21.value == pytest.approx(TWO_PI * 3.035732439e9)
    assert rb87.mass.unit == "kg" and rb87.mass.source


def test_unknown_isotope():
    with pytest.raises(ConfigurationError):
        isotope("Cs133")


@pytest.mark.parametrize(
    "iso, F, Fp, s",
    [
        ("Rb85", 2, 2, Fraction(2, 9)),
        ("Rb85", 2, 3, Fraction(7, 9)),
        ("Rb85", 3, 2, Fraction(5, 9)),
        ("Rb85", 3, 3, Fraction(4, 9)),
        ("Rb87", 1, 1, Fraction(1, 6)),
        ("Rb87", 1, 2, Fraction(5, 6)),
        ("Rb87", 2, 1, Fraction(1, 2)),
        ("Rb87", 2, 2, Fraction(1, 2)),
    ],
)
def test_relative_strengths(iso, F, Fp, s):
    assert relative_strength(iso, F, Fp) == s


def test_strengths_sum_to_one():
    for iso in ("Rb85", "Rb87"):
        d = isotope(iso)
        for F in d.ground_F:
            assert sum(relative_strength(iso, F, Fp) for Fp in d.excited_F) == 1


def test_rb85_dipole_ratios():
    tc = transition_config("Rb85", 2, 3)
    assert tc.alpha == pytest.approx(np.sqrt(7 / 2), rel=1e-15)
    assert tc.beta == pytest.approx(np.sqrt(4 / 5), rel=1e-15)


def test_role_swap_exchanges_ratios():
    for iso, (a, b) in (("Rb85", (2, 3)), ("Rb87", (1, 2))):
        t1, t2 = transition_config(iso, a), transition_config(iso, b)
        assert t1.alpha == pytest.approx(t2.beta) and t1.beta == pytest.approx(t2.alpha)


def test_equal_dipoles_rb87_only():
    assert transition_config("Rb87", 2).alpha == 1.0
    assert transition_config("Rb85", 3).alpha != 1.0


def test_invalid_configuration():
    with pytest.raises(ConfigurationError):
        transition_config("Rb87", 3)
    with pytest.raises(ConfigurationError):
        transition_config("Rb85", 2, 2)


def test_rabi_anchor():
    beam = BeamConfig(RABI_REFERENCE["power"], RABI_REFERENCE["diameter"])
    om = rabi_from_power(beam, transition_config("Rb85", 2).d31)
    assert om / G == pytest.approx(18.0, rel=1e-12)


def test_rabi_trivial_cases():
    d = hyperfine_dipole("Rb85", 2, 2)
    assert rabi_from_power(BeamConfig(0.0, 1e-3), d) == 0.0
    r1 = rabi_from_power(BeamConfig(0.01, 1e-3), d)
    assert rabi_from_power(BeamConfig(0.04, 1e-3), d) == pytest.approx(2 * r1, rel=1e-14)


def test_beam_validation():
    with pytest.raises(ConfigurationError):
        BeamConfig(0.1, 0.0)


def test_density_anchor_and_regression():
    assert number_density(323.15, "Rb85") == pytest.approx(1.5e17, rel=1e-14)
    assert number_density(297.65, "Rb85") == pytest.approx(DENSITY_24_5C, rel=1e-12)


def test_density_range():
    for T in (250.0, 500.0, 600.0):
        with pytest.raises(TemperatureRangeError):
            number_density(T)


def test_density_continuous_at_melting_point():
    lo, hi = number_density(T_MELT - 1e-9), number_density(T_MELT + 1e-9)
    assert hi == pytest.approx(lo, rel=1e-8)


@given(st.floats(251.0, 498.0), st.floats(0.01, 1.0))
def test_density_strictly_increasing(T, dT):
    assert number_density(T + dT) > number_density(T)


def test_atom_system_overrides():
    a = atom_system("Rb87", 1, gamma21=0.1 * G, gamma32=G)
    assert a.gamma32 == G and a.gamma42 == G / 2 and a.gamma21 == 0.1 * G


def test_constants_report_serializable():
    rep = constants_report()
    text = json.dumps(rep)
    assert "Rb85" in rep and "Rb87" in rep
    assert rep["Rb85"]["omega43"]["unit"] == "rad/s"
    assert json.loads(text)["density_calibration"]["reference_density_m3"] == 1.5e17
