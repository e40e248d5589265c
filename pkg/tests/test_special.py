import cmath
import math

import pytest
from hypothesis import given, strategies as st

from fracforms.special import binom, digamma, gamma, is_whole, pole_index, rgamma

finite_real = st.floats(min_value=-20, max_value=30, allow_nan=False).filter(
    lambda z: abs(z - round(z)) > 1e-3 or z > 0)


@pytest.mark.parametrize("z", [0.1, 0.5, 1.5, 2.7, 7.25, 33.3, -0.5, -2.3])
def test_gamma_matches_math(z):
    assert gamma(z) == pytest.approx(math.gamma(z), rel=1e-13)


def test_gamma_whole_numbers_are_exact():
    assert gamma(6) == 120.0
    assert gamma(1) == 1.0


def test_poles():
    assert pole_index(-3) == 3
    assert pole_index(0.0) == 0
    assert pole_index(-2.5) is None
    assert rgamma(-4) == 0.0
    assert math.isinf(gamma(-1))
    assert math.isnan(digamma(-2))


def test_complex_gamma_reflection():
    z = 0.3 + 0.4j
    lhs = gamma(z) * gamma(1 - z)
    assert abs(lhs - math.pi / cmath.sin(math.pi * z)) < 1e-12


@pytest.mark.parametrize("z,want", [
    (1.0, -0.5772156649015329),
    (3.0, 0.9227843350984671),
    (0.5, -1.9635100260214235),
    (-0.5, 0.03648997397857652),
])
def test_digamma_values(z, want):
    assert digamma(z) == pytest.approx(want, rel=1e-12, abs=1e-14)


def test_binomial():
    assert binom(5, 2) == pytest.approx(10.0)
    assert binom(2, 3) == 0.0
    assert binom(0.5, 2) == pytest.approx(-0.125)
    assert binom(-1, 3) == pytest.approx(-1.0)
    assert binom(3, -1) == 0.0


def test_is_whole():
    assert is_whole(0) and is_whole(3.0) and is_whole(2 + 0j)
    assert not is_whole(-1) and not is_whole(0.5) and not is_whole(1 + 1j)


@given(finite_real)
def test_recurrence(z):
    g = gamma(z)
    if not math.isfinite(g) or abs(g) > 1e250:
        return
    assert gamma(z + 1) == pytest.approx(z * g, rel=1e-11)


@given(st.floats(min_value=0.05, max_value=40))
def test_digamma_recurrence(z):
    assert digamma(z + 1) == pytest.approx(digamma(z) + 1 / z, rel=1e-11, abs=1e-12)


@given(finite_real)
def test_reciprocal(z):
    g = gamma(z)
    if math.isfinite(g) and abs(g) < 1e250:
        assert rgamma(z) * g == pytest.approx(1.0, rel=1e-12)


@given(st.floats(min_value=-3, max_value=3), st.integers(min_value=1, max_value=8))
def test_pascal_rule(q, s):
    assert binom(q + 1, s) == pytest.approx(binom(q, s) + binom(q, s - 1), rel=1e-10, abs=1e-12)
