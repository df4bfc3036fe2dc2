import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fourlevel_eit.errors import FaddeevaOverflowError
from fourlevel_eit.faddeeva import doppler_kernel, erfc_complex, exp_erfc_i, faddeeva_w

from oracles import erfc_ref, faddeeva_ref, pole_integral_ref

finite = st.floats(-30.0, 30.0, allow_nan=False)


def test_w_at_zero_is_one():
    assert faddeeva_w(0.0) == 1.0


def test_w_on_imaginary_axis_matches_erfcx():
    # w(iy) = exp(y^2) erfc(y) for real y
    from scipy.special import erfcx

    y = np.array([0.0, 0.3, 1.0, 4.0, 25.0])
    np.testing.assert_allclose(faddeeva_w(1j * y).real, erfcx(y), rtol=1e-13)


@pytest.mark.parametrize("z", [0.5 + 0.5j, 3.0 + 0.1j, -7.0 + 2.0j, 4.0 - 1.0j, 0.01 - 20.0j, 1e3 + 1e-3j])
def test_w_matches_oracle(z):
    ref = faddeeva_ref(z)
    assert abs(faddeeva_w(z) - ref) <= 1e-12 * abs(ref)


@pytest.mark.parametrize("z", [0.2 + 0.1j, 5.0 + 3.0j, -3.0 - 2.0j, 0.1 + 6.0j, -2.5 + 0.5j])
def test_erfc_matches_oracle(z):
    ref = erfc_ref(z)
    assert abs(erfc_complex(z) - ref) <= 1e-12 * abs(ref)


def test_erfc_real_axis():
    from scipy.special import erfc

    x = np.linspace(-5, 5, 41)
    np.testing.assert_allclose(erfc_complex(x).real, erfc(x), rtol=1e-13, atol=1e-300)


def test_exp_erfc_i_is_reflected_w():
    z = np.array([0.3 + 0.2j, -4.0 + 1.0j, 10.0 + 5.0j])
    np.testing.assert_allclose(exp_erfc_i(z), faddeeva_w(-z), rtol=0)


def test_lower_half_plane_overflow_is_reported():
    with pytest.raises(FaddeevaOverflowError):
        faddeeva_w(0.0 - 30.0j)
    with pytest.raises(OverflowError):
        erfc_complex(0.0 + 30.0j)


def test_nonfinite_argument_rejected():
    with pytest.raises(ValueError):
        faddeeva_w(np.nan + 0j)


@pytest.mark.parametrize("a", [0.3 + 0.05j, -1.2 + 0.4j, 0.7 - 0.02j, 2.5 - 1.0j])
def test_doppler_kernel_matches_quadrature(a):
    ref = pole_integral_ref(a, 1.0)
    assert abs(doppler_kernel(a, 1.0) - ref) <= 1e-10 * abs(ref)


def test_doppler_kernel_scales_with_u():
    # J(a; u) = J(a/u; 1) for the unnormalized integral
    a = 0.4 + 0.1j
    np.testing.assert_allclose(doppler_kernel(3.0 * a, 3.0), doppler_kernel(a, 1.0), rtol=1e-14)


@given(finite, st.floats(0.0, 30.0))
def test_w_reflection_symmetry(x, y):
    z = complex(x, y)
    np.testing.assert_allclose(faddeeva_w(-np.conj(z)), np.conj(faddeeva_w(z)), rtol=1e-14, atol=1e-300)


@given(finite, st.floats(0.0, 30.0))
def test_w_bounded_in_upper_half_plane(x, y):
    assert abs(faddeeva_w(complex(x, y))) <= 1.0 + 1e-15


@given(finite, finite)
def test_erfc_reflection(x, y):
    z = complex(x, y)
    try:
        a, b = erfc_complex(z), erfc_complex(-z)
    except FaddeevaOverflowError:
        return
    np.testing.assert_allclose(a + b, 2.0, rtol=1e-10, atol=1e-10 * max(1.0, abs(a), abs(b)))
