"""Gamma-family functions for real and complex arguments.

Gamma uses the Lanczos approximation (g = 7, nine coefficients) with the
reflection formula for Re(z) < 1/2.  At the poles z = 0, -1, -2, ... the
gamma function returns a signed infinity and `rgamma` returns exactly zero,
which is what the kernel terms (x - a)^k / Gamma(k + 1) rely on.
"""

from __future__ import annotations

import cmath
import math
from numbers import Number

import numpy as np

_LANCZOS_G = 7
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# B_2k / (2k) for the digamma asymptotic series
_DIGAMMA_ASYMP = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def _is_real(z) -> bool:
    return not isinstance(z, complex) and not (
        isinstance(z, np.generic) and np.iscomplexobj(z)
    )


def pole_index(z) -> int | None:
    """Return k if z == -k for a whole number k, else None."""
    if isinstance(z, complex) or (isinstance(z, np.generic) and np.iscomplexobj(z)):
        if z.imag != 0.0:
            return None
        z = z.real
    z = float(z)
    if z <= 0.0 and z == math.floor(z):
        return int(-z)
    return None


def is_whole(z) -> bool:
    """True for 0, 1, 2, ... (real or complex with zero imaginary part)."""
    if isinstance(z, complex):
        if z.imag != 0.0:
            return False
        z = z.real
    z = float(z)
    return z >= 0.0 and z == math.floor(z)


def _lanczos(z):
    # valid for Re(z) >= 1/2
    z = z - 1
    x = _LANCZOS_COEF[0]
    for i in range(1, _LANCZOS_G + 2):
        x += _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    if _is_real(z):
        return _SQRT_2PI * t ** (z + 0.5) * math.exp(-t) * x
    return _SQRT_2PI * cmath.exp((z + 0.5) * cmath.log(t) - t) * x


def gamma(z):
    """Gamma function of a real or complex number."""
    k = pole_index(z)
    if k is not None:
        inf = math.inf if k % 2 == 0 else -math.inf
        return complex(inf, 0.0) if not _is_real(z) else inf
    if _is_real(z):
        z = float(z)
        if z == math.floor(z) and 0 < z <= 171:
            return float(math.factorial(int(z) - 1))
        if z < 0.5:
            return math.pi / (math.sin(math.pi * z) * gamma(1.0 - z))
        if z > 171.7:
            return math.inf
        return _lanczos(z)
    z = complex(z)
    if z.real < 0.5:
        return math.pi / (cmath.sin(math.pi * z) * gamma(1.0 - z))
    return _lanczos(z)


def rgamma(z):
    """Reciprocal gamma 1/Gamma(z); exactly zero at the poles."""
    if pole_index(z) is not None:
        return 0.0 if _is_real(z) else 0j
    if _is_real(z):
        z = float(z)
        if z > 171.7:
            return 0.0
        if z < 0.5:
            # 1/Gamma(z) = sin(pi z) Gamma(1 - z) / pi, no overflow near poles
            return math.sin(math.pi * z) * gamma(1.0 - z) / math.pi
    else:
        z = complex(z)
        if z.real < 0.5:
            return cmath.sin(math.pi * z) * gamma(1.0 - z) / math.pi
    return 1.0 / gamma(z)


def digamma(z):
    """Logarithmic derivative of the gamma function."""
    if pole_index(z) is not None:
        return math.nan
    real = _is_real(z)
    z = float(z) if real else complex(z)
    if z.real < 0.5:
        cot = (
            math.cos(math.pi * z) / math.sin(math.pi * z)
            if real
            else cmath.cos(math.pi * z) / cmath.sin(math.pi * z)
        )
        return digamma(1.0 - z) - math.pi * cot
    acc = 0.0
    while abs(z) < 10.0:
        acc -= 1.0 / z
        z += 1.0
    log = math.log if real else cmath.log
    z2 = 1.0 / (z * z)
    series = 0.0
    zpow = z2
    for c in _DIGAMMA_ASYMP:
        series += c * zpow
        zpow *= z2
    return acc + log(z) - 0.5 / z - series


def binom(q, s: int):
    """Generalized binomial coefficient C(q, s) for whole s.

    Uses Gamma(q + 1) / (Gamma(s + 1) Gamma(q - s + 1)) with the reciprocal
    gamma pole convention, so C(q, s) = 0 whenever q is whole and s > q.
    Negative integer q falls back to the falling-factorial product.
    """
    s = int(s)
    if s < 0:
        return 0.0
    if pole_index(q + 1) is not None:
        out = 1.0
        for i in range(s):
            out *= (q - i) / (i + 1)
        return out
    return gamma(q + 1) * rgamma(s + 1) * rgamma(q - s + 1)


def gamma_array(z) -> np.ndarray:
    """Elementwise `gamma` over an array-like."""
    arr = np.asarray(z)
    out = np.array([gamma(v.item()) for v in arr.ravel()])
    return out.reshape(arr.shape)


def is_number(x) -> bool:
    return isinstance(x, Number) and not isinstance(x, bool)
