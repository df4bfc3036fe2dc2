import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fourlevel_eit.atomic import (
    AtomSystem,
    FieldConfig,
    Model,
    WeakProbeWarning,
    chi_four_level,
    chi_from_sigma,
    chi_model,
    chi_single_lambda,
    chi_two_three_level,
    denominator_Z,
    sigma32_analytic,
    sigma42_analytic,
    steady_state_oracle,
)
from fourlevel_eit.constants import EPS0, GAMMA_D1 as G, HBAR, TWO_PI
from fourlevel_eit.errors import ConfigurationError, DegenerateDenominatorError
from fourlevel_eit.rbdata import atom_system

MHZ = TWO_PI * 1e6


@pytest.fixture
def atom():
    return atom_system("Rb85", 2, gamma21=0.25 * G)


def test_defaults_and_derived_dipoles(atom):
    assert atom.gamma32 == atom.gamma_nat / 2
    assert atom.gamma43 == atom.gamma_nat
    assert atom.d41 == pytest.approx(atom.alpha * atom.d31)
    assert atom.d42 == pytest.approx(atom.beta * atom.d32)


@pytest.mark.parametrize(
    "bad",
    [dict(omega43=0.0), dict(alpha=-1.0), dict(gamma21=-1.0), dict(gamma32=np.inf), dict(d32=0.0)],
)
def test_invalid_atom_rejected(atom, bad):
    with pytest.raises(ConfigurationError):
        atom.with_(**bad).__class__(**{**atom.to_dict(), **bad})


def test_negative_rabi_rejected():
    with pytest.raises(ConfigurationError):
        FieldConfig(-1.0)


def test_weak_probe_warning():
    with pytest.warns(WeakProbeWarning):
        FieldConfig(TWO_PI * 1e3, omega_p32=TWO_PI * 1e3)


def test_control_off_is_two_level_lorentzians(atom):
    f = FieldConfig(0.0, 0.0, np.linspace(-50, 50, 7) * MHZ)
    d3 = atom.gamma32 + 1j * f.delta_2
    d4 = atom.gamma42 + 1j * (atom.omega43 + f.delta_2)
    np.testing.assert_allclose(sigma32_analytic(atom, f), 0.5j * f.omega_p32 / d3, rtol=1e-14)
    np.testing.assert_allclose(sigma42_analytic(atom, f), 0.5j * atom.beta * f.omega_p32 / d4, rtol=1e-14)


def test_control_off_no_decoherence_no_nan():
    a = atom_system("Rb85", 2, gamma21=0.0)
    s = sigma32_analytic(a, FieldConfig(0.0, 0.0, 0.0))
    assert np.isfinite(s)


def test_lambda_dark_resonance_exact():
    # an isolated lambda with no ground decoherence is transparent at two-photon resonance
    a = atom_system("Rb85", 2, gamma21=0.0)
    f = FieldConfig(5 * G, 30 * MHZ, 0.0)
    assert chi_single_lambda(a, f, 1e16, 3).chi32 == 0
    assert chi_single_lambda(a, f, 1e16, 4).chi42 == 0


def test_two_three_level_is_sum_of_lambdas(atom):
    f = FieldConfig(5 * G, 10 * MHZ, np.linspace(-20, 20, 9) * MHZ)
    two = chi_two_three_level(atom, f, 1e16)
    np.testing.assert_array_equal(two.chi32, chi_single_lambda(atom, f, 1e16, 3).chi32)
    np.testing.assert_array_equal(two.chi42, chi_single_lambda(atom, f, 1e16, 4).chi42)


def test_chi_from_sigma_formula(atom):
    sigma = 0.1 + 0.2j
    chi = chi_from_sigma(atom, 2e16, "32", sigma, 1e4)
    assert chi == pytest.approx(2 * 2e16 * atom.d32**2 * sigma / (EPS0 * HBAR * 1e4))
    with pytest.raises(ConfigurationError):
        chi_from_sigma(atom, 2e16, "31", sigma, 1e4)


def test_chi_independent_of_probe_rabi(atom):
    f1 = FieldConfig(5 * G, 0.0, 3 * MHZ, omega_p32=TWO_PI * 1e3)
    f2 = f1.with_(omega_p32=TWO_PI * 1e2)
    np.testing.assert_allclose(chi_four_level(atom, f1, 1e16).total, chi_four_level(atom, f2, 1e16).total, rtol=1e-13)


def test_denominator_zero_raises():
    # lossless, g = 0 and d4 + α² d3 = 0 at Δ = -ω43/2 with α = 1
    a = AtomSystem(omega43=1.0, alpha=1.0, beta=1.0, d31=1e-29, d32=1e-29, gamma_nat=1.0,
                   gamma31=0.0, gamma32=0.0, gamma41=0.0, gamma42=0.0, gamma21=0.0)
    f = FieldConfig(2.0, -0.5, 0.0, omega_p32=1e-3)
    assert denominator_Z(a, f) == 0
    with pytest.raises(DegenerateDenominatorError):
        sigma32_analytic(a, f)
    with pytest.raises(ZeroDivisionError):
        sigma42_analytic(a, f)


def test_model_dispatch(atom):
    f = FieldConfig(5 * G)
    for m in Model:
        assert chi_model(m, atom, f, 1e16).model is m


@pytest.mark.parametrize("seed", range(5))
def test_oracle_agreement_sample(seed):
    rng = np.random.default_rng(seed)
    a = AtomSystem(
        omega43=rng.uniform(50, 1000) * MHZ,
        alpha=rng.uniform(0.3, 3),
        beta=rng.uniform(0.3, 3),
        d31=1e-29,
        d32=1e-29,
        gamma21=rng.uniform(0, 1) * G,
    )
    f = FieldConfig(rng.uniform(0.1, 30) * G, rng.uniform(-1000, 1000) * MHZ, rng.uniform(-50, 50) * MHZ)
    o = steady_state_oracle(a, f)
    assert abs(sigma32_analytic(a, f) - o.sigma32) <= 1e-9 * abs(o.sigma32)
    assert abs(sigma42_analytic(a, f) - o.sigma42) <= 1e-9 * abs(o.sigma42)


@given(st.floats(-1000.0, 1000.0), st.floats(-100.0, 100.0), st.floats(0.0, 1.0))
def test_control_off_reference_absorbs(D, d, g21):
    a = atom_system("Rb85", 2, gamma21=g21 * G)
    off = chi_four_level(a, FieldConfig(0.0, D * MHZ, d * MHZ), 1e16)
    assert np.imag(off.chi32) > 0 and np.imag(off.chi42) > 0


@given(st.floats(0.1, 30.0), st.floats(-500.0, 500.0), st.floats(-50.0, 50.0))
def test_far_upper_state_reduces_to_lambda3(rabi, D, d):
    a = atom_system("Rb85", 2, gamma21=0.1 * G, omega43=TWO_PI * 1e18)
    f = FieldConfig(rabi * G, D * MHZ, d * MHZ)
    np.testing.assert_allclose(
        chi_four_level(a, f, 1e16).chi32, chi_single_lambda(a, f, 1e16, 3).chi32, rtol=1e-6
    )
