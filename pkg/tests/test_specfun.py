import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import erfcx, wofz

from eeqt_arrival.errors import OverflowRegionError
from eeqt_arrival.specfun import (
    CF_RADIUS,
    TAYLOR_RADIUS,
    erfc_scaled_ray,
    erfc_scaled_ray_derivative,
    erfc_scaled_ray_integral,
    faddeeva,
)


def w_series(z, terms=400, dps=100):
    """Independent oracle: the Taylor series sum (iz)^n / Gamma(n/2+1) in high precision."""
    with mp.workdps(dps):
        z = mp.mpc(z)
        return complex(mp.fsum((1j * z) ** n / mp.gamma(mp.mpf(n) / 2 + 1) for n in range(terms)))


def test_w_at_zero_is_one():
    assert faddeeva(0) == 1


@pytest.mark.parametrize("x", [0.1, 1.0, 3.0, 10.0, 25.0])
def test_imaginary_axis_is_scaled_erfc(x):
    w = faddeeva(1j * x)
    assert w.imag == 0
    assert w.real == pytest.approx(erfcx(x), rel=1e-13)


def test_w_i_against_series_oracle():
    assert abs(faddeeva(1j) - w_series(1j)) <= 1e-10 * abs(w_series(1j))


@pytest.mark.parametrize("z", [0.3 + 0.2j, 1.2 - 0.7j, 2.5 + 1.0j, -3 + 0.5j, 4.0 + 4.0j, 5.5 - 0.1j])
def test_against_series_oracle(z):
    ref = w_series(z)
    assert abs(faddeeva(z) - ref) <= 1e-10 * abs(ref)


def test_relative_accuracy_up_to_radius_30(rng):
    # mpmath's erfc is an independent implementation
    r = rng.uniform(0, 30, 400)
    theta = rng.uniform(-0.25 * np.pi, 1.25 * np.pi, 400)
    z = r * np.exp(1j * theta)
    z = z[np.real(-(z * z)) < 600]
    ours = faddeeva(z)
    with mp.workdps(40):
        ref = np.array([complex(mp.exp(-mp.mpc(x) ** 2) * mp.erfc(-1j * mp.mpc(x))) for x in z])
    assert np.max(np.abs(ours - ref) / np.abs(ref)) <= 1e-10


@pytest.mark.parametrize("radius", [TAYLOR_RADIUS, CF_RADIUS])
def test_branches_agree_at_seams(radius):
    theta = np.linspace(0, np.pi, 181)
    inside = faddeeva(radius * (1 - 1e-12) * np.exp(1j * theta))
    outside = faddeeva(radius * (1 + 1e-12) * np.exp(1j * theta))
    assert np.max(np.abs(inside - outside) / np.abs(outside)) <= 1e-10


def test_agrees_with_scipy_wofz(rng):
    z = rng.uniform(-20, 20, 500) + 1j * rng.uniform(-5, 20, 500)
    assert np.allclose(faddeeva(z), wofz(z), rtol=1e-12, atol=0)


def test_overflow_is_an_error():
    with pytest.raises(OverflowRegionError):
        faddeeva(-30j)


def test_non_finite_input_rejected():
    with pytest.raises(ValueError):
        faddeeva(complex(np.nan, 0))


finite = st.floats(-12, 12)


@given(x=finite, y=st.floats(-5, 12))
def test_conjugate_reflection(x, y):
    # w(-conj z) = conj w(z)
    z = complex(x, y)
    assert faddeeva(-z.conjugate()) == pytest.approx(np.conj(faddeeva(z)), rel=1e-12, abs=1e-300)


# -- memory kernel ----------------------------------------------------------

def eps_of(kappa):
    return kappa / (2 * np.sqrt(2)) * np.exp(-1j * np.pi / 4)


def test_kernel_at_zero_is_exactly_one():
    assert erfc_scaled_ray(eps_of(2.0), 0.0) == 1


def test_kernel_decays_monotonically_for_real_eps():
    t = np.linspace(0, 400, 2001)
    f = erfc_scaled_ray(0.7, t)
    assert np.all(np.abs(f.imag) == 0)
    assert np.all(np.diff(f.real) < 0)
    assert f.real == pytest.approx(erfcx(0.7 * np.sqrt(t)), rel=1e-13)


def test_kernel_against_quadrature_of_erfc_definition():
    """f(1) for kappa = 2 from erfc(z) = 2/sqrt(pi) int_0^inf exp(-(z+s)^2) ds."""
    eps = eps_of(2.0)
    with mp.workdps(30):
        z = mp.mpc(eps)
        erfc_z = 2 / mp.sqrt(mp.pi) * mp.quad(lambda s: mp.exp(-((z + s) ** 2)), [0, 1, 3, 8, mp.inf])
        ref = complex(mp.exp(z**2) * erfc_z)
    assert abs(erfc_scaled_ray(eps, 1.0) - ref) <= 1e-9


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        erfc_scaled_ray(0.5, -1.0)


@given(kappa=st.floats(0.05, 20), t=st.floats(1e-3, 200))
def test_derivative_identity_by_finite_differences(kappa, t):
    eps = eps_of(kappa)
    h = 1e-4 * t
    fd = (erfc_scaled_ray(eps, t + h) - erfc_scaled_ray(eps, t - h)) / (2 * h)
    exact = erfc_scaled_ray_derivative(eps, t)
    assert abs(fd - exact) <= 1e-6 * abs(exact)


@given(kappa=st.floats(0.01, 20), t=st.floats(0, 300))
def test_conjugation_symmetry(kappa, t):
    eps = eps_of(kappa)
    assert erfc_scaled_ray(np.conj(eps), t) == pytest.approx(np.conj(erfc_scaled_ray(eps, t)), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("kappa", [0.01, 0.5, 2.0, 10.0])
def test_antiderivative_matches_quadrature(kappa):
    eps = eps_of(kappa)
    t = np.array([1e-4, 0.3, 2.0, 9.0, 50.0])
    with mp.workdps(25):
        e = mp.mpc(eps)
        ref = [complex(mp.quad(lambda s: mp.exp(e**2 * s) * mp.erfc(e * mp.sqrt(s)), [0, x])) for x in t]
    assert np.allclose(erfc_scaled_ray_integral(eps, t), ref, rtol=1e-11, atol=0)
