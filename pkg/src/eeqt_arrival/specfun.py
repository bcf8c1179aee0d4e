"""Faddeeva function w(z) = exp(-z^2) erfc(-iz) and the memory kernel built on it.

Three branches cover the upper half plane:

* ``|z| < 1.5``: Taylor series  w(z) = sum (iz)^n / Gamma(n/2 + 1)
* ``1.5 <= |z| < 6``: Weideman's rational expansion (N = 40 terms)
* ``|z| >= 6``: Laplace continued fraction

All three agree to ~1e-15 relative at the seams.  The lower half plane is
reached through w(z) = 2 exp(-z^2) - w(-z), which is where overflow can occur.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gamma

from .errors import OverflowRegionError

TAYLOR_RADIUS = 1.5
CF_RADIUS = 6.0
_TAYLOR_TERMS = 48
_CF_DEPTH = 60
_WEIDEMAN_N = 40
# exp(709.78) is the largest finite double
_MAX_EXPONENT = 700.0
_SQRT_PI = np.sqrt(np.pi)


def _weideman_coefficients(n: int) -> tuple[float, np.ndarray]:
    m = 2 * n
    k = np.arange(-m + 1, m)
    L = np.sqrt(n / np.sqrt(2.0))
    theta = k * np.pi / m
    t = L * np.tan(theta / 2)
    f = np.concatenate([[0.0], np.exp(-t**2) * (L**2 + t**2)])
    a = np.real(np.fft.fft(np.fft.fftshift(f))) / (2 * m)
    return L, np.flipud(a[1 : n + 1])


_WL, _WA = _weideman_coefficients(_WEIDEMAN_N)
# Taylor coefficients, highest power first for polyval
_TAYLOR = (1j ** np.arange(_TAYLOR_TERMS) / gamma(np.arange(_TAYLOR_TERMS) / 2 + 1))[::-1]


def _w_taylor(z):
    return np.polyval(_TAYLOR, z)


def _w_weideman(z):
    d = _WL - 1j * z
    Z = (_WL + 1j * z) / d
    return 2 * np.polyval(_WA, Z) / d**2 + 1 / (_SQRT_PI * d)


def _w_contfrac(z):
    r = np.zeros_like(z)
    for k in range(_CF_DEPTH, 0, -1):
        r = (k / 2) / (z - r)
    return 1j / (_SQRT_PI * (z - r))


def _w_upper(z: np.ndarray) -> np.ndarray:
    """w(z) for Im z >= 0."""
    out = np.empty_like(z)
    r = np.abs(z)
    small = r < TAYLOR_RADIUS
    large = r >= CF_RADIUS
    mid = ~(small | large)
    if small.any():
        out[small] = _w_taylor(z[small])
    if mid.any():
        out[mid] = _w_weideman(z[mid])
    if large.any():
        out[large] = _w_contfrac(z[large])
    return out


def faddeeva(z):
    """Faddeeva function w(z) = exp(-z**2) * erfc(-1j*z).

    Accepts scalars or arrays.  Raises ``OverflowRegionError`` for points in
    the lower half plane where exp(-z**2) is not representable, and
    ``ValueError`` for non-finite input.
    """
    z_arr = np.asarray(z, dtype=complex)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)
    if not np.all(np.isfinite(z_arr)):
        raise ValueError("faddeeva requires finite arguments")

    out = np.empty_like(z_arr)
    upper = z_arr.imag >= 0
    if upper.any():
        out[upper] = _w_upper(z_arr[upper])
    lower = ~upper
    if lower.any():
        zl = z_arr[lower]
        exponent = -(zl * zl)
        if np.any(exponent.real > _MAX_EXPONENT):
            worst = zl[np.argmax(exponent.real)]
            raise OverflowRegionError(
                f"w(z) overflows at z={worst!r}: exp(-z^2) exceeds double range"
            )
        out[lower] = 2 * np.exp(exponent) - _w_upper(-zl)
    return out[0] if scalar else out


def erfc_scaled_ray(epsilon: complex, t):
    """Memory kernel f(t) = exp(eps^2 t) erfc(eps sqrt(t)), evaluated as w(i eps sqrt t).

    ``f(0) == 1`` exactly.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("erfc_scaled_ray is defined for t >= 0 only")
    return faddeeva(1j * epsilon * np.sqrt(t_arr))


def erfc_scaled_ray_derivative(epsilon: complex, t):
    """df/dt = eps^2 f(t) - eps / sqrt(pi t), for t > 0."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValueError("the kernel derivative is singular at t = 0")
    return epsilon**2 * erfc_scaled_ray(epsilon, t_arr) - epsilon / np.sqrt(np.pi * t_arr)


def _series_integral(epsilon, s):
    # int_0^s f = sum_n (-eps)^n s^(n/2+1) / Gamma(n/2+2)
    x = -epsilon * np.sqrt(s)
    n = np.arange(_TAYLOR_TERMS)
    coef = (1.0 / gamma(n / 2 + 2))[::-1]
    return s * np.polyval(coef, x)


def erfc_scaled_ray_integral(epsilon: complex, t):
    """Antiderivative  int_0^t f(s) ds = (f(t) - 1 + 2 eps sqrt(t/pi)) / eps^2.

    The closed form cancels badly for small |eps^2 t|, where the termwise
    integrated Taylor series is used instead.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t_arr.shape, dtype=complex)
    r = np.abs(epsilon) * np.sqrt(t_arr)
    small = r < TAYLOR_RADIUS
    if small.any():
        out[small] = _series_integral(epsilon, t_arr[small])
    big = ~small
    if big.any():
        tb = t_arr[big]
        out[big] = (erfc_scaled_ray(epsilon, tb) - 1 + 2 * epsilon * np.sqrt(tb / np.pi)) / epsilon**2
    return out if np.ndim(t) else out[0]
