import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from fracforms.differint import (DifferintSpec, composition_with_corrections, differint, differint_field,
                                 differint_values, lambda_derivative, power_rule_oracle, product_rule_series,
                                 scalar_value)
from fracforms.errors import DomainError, PoleError, UnsupportedOrder
from fracforms.fields import parse

# frozen from an independent arbitrary-precision evaluator (mpmath.differint)
ORACLE = [
    ("sin(x1)", 1.0, 0.5, 0.0, 0.84605678672415291),
    ("sin(x1)", 2.0, -0.5, 0.0, 1.2999503439548851),
    ("exp(x1)", 1.0, 0.5, 0.0, 2.8548878358509945),
    ("exp(x1)", 0.5, -1.5, 0.0, 0.32768012616701605),
    ("exp(x1)", 2.0, 1.5, 0.0, 7.3520588067853835),
    ("x1^2", 2.0, 1.5, 0.0, 3.1915382432114614),
    ("cos(x1)", 1.2, 0.3, 0.0, -0.032658533658452941),
    ("sin(x1)", 1.3, -2.5, 0.0, 0.20115037297060953),
    ("(x1 - 0.5)^2", 1.5, 0.5, 0.5, 1.5045055561273501),
    ("sin(x1)", 1.5, 0.5, 0.5, 0.69190784052260459),
]


@pytest.mark.parametrize("expr,x,nu,a,want", ORACLE)
def test_quadrature_against_frozen_values(expr, x, nu, a, want):
    got = differint(expr, DifferintSpec(nu, a), x)
    assert got.value == pytest.approx(want, rel=1e-9, abs=1e-11)
    assert got.scheme_used == "quadrature"


@pytest.mark.parametrize("expr,x,nu,a,want", ORACLE)
def test_grunwald_against_frozen_values(expr, x, nu, a, want):
    got = differint(expr, DifferintSpec(nu, a, scheme="grunwald"), x)
    assert got.value == pytest.approx(want, rel=1e-6, abs=1e-8)


def test_half_derivative_of_identity():
    r = differint("x1", DifferintSpec(0.5), 1.0)
    assert r.value == pytest.approx(2 / math.sqrt(math.pi), rel=1e-12)


def test_auto_scheme_reports_agreement():
    r = differint("exp(x1)", DifferintSpec(0.5, scheme="auto"), 1.0)
    assert r.scheme_used == "auto"
    assert r.value == pytest.approx(2.8548878358509945, rel=1e-9)
    assert r.estimated_error < 1e-5


def test_order_zero_and_whole_orders():
    assert differint("sin(x1)", DifferintSpec(0.0), 0.7).value == pytest.approx(math.sin(0.7), abs=0)
    assert differint("x1^3", DifferintSpec(2.0), 1.5).value == pytest.approx(9.0, rel=1e-12)


def test_kernel_function_is_annihilated():
    # x^(nu - 1) lies in the kernel of D^nu
    assert abs(differint("x1^-0.5", DifferintSpec(0.5), 1.0).value) < 1e-10


def test_weak_endpoint_singularity():
    r = differint("1/sqrt(x1)", DifferintSpec(-0.5), 1.0)
    assert r.value == pytest.approx(math.sqrt(math.pi), rel=1e-9)


def test_complex_order_uses_closed_form():
    got = scalar_value("x1^2", 0.5 + 0.5j, 1, 0.0, 1.5)
    assert got == pytest.approx(2.9023745069021739 + 0.4496025289232303j, rel=1e-12)
    with pytest.raises(UnsupportedOrder):
        scalar_value("sin(x1)", 0.3 + 0.2j, 1, 0.0, 1.0)
    with pytest.raises(UnsupportedOrder):
        differint("x1", DifferintSpec(0.5 + 0.1j), 1.0)


def test_errors():
    with pytest.raises(DomainError):
        differint("x1", DifferintSpec(0.5, 1.0), 0.5)
    with pytest.raises(PoleError):
        power_rule_oracle(-1.5, 0.5)
    with pytest.raises(ValueError):
        DifferintSpec(0.5, scheme="spline")
    with pytest.raises(ValueError):
        DifferintSpec(0.5, grid_size=4)


def test_second_coordinate():
    # D^0.5 in x2 of x1 * x2 at (3, 1) is 3 * 2/sqrt(pi)
    got = differint("x1*x2", DifferintSpec(0.5, variable_index=2), [3.0, 1.0])
    assert got.value == pytest.approx(6 / math.sqrt(math.pi), rel=1e-10)


def test_product_rule_against_frozen_value():
    got = product_rule_series("exp(x1)", "x1^2", 0.5, 0.0, 1.0)
    assert got == pytest.approx(4.8550063168523013, rel=1e-8)


def test_composition_with_boundary_terms():
    c = composition_with_corrections("x1^0.5", 0.5, 0.5, 0.0, 1.0)
    assert c.lhs == pytest.approx(c.rhs, abs=1e-6)


def test_lambda_derivative_frozen():
    # d/dlambda of D^lambda x^p at x = 1
    assert lambda_derivative("x1", DifferintSpec(-1.0), 1.0) == pytest.approx(0.46139216754923357, abs=1e-8)
    assert lambda_derivative("x1^2", DifferintSpec(1.0), 1.0) == pytest.approx(0.84556867019693428, abs=1e-8)
    assert lambda_derivative("x1", DifferintSpec(0.5), 1.0) == pytest.approx(0.041174526445283101, abs=1e-7)


# ---------------------------------------------------------------------------
# properties

orders = st.floats(min_value=-1.8, max_value=1.8).filter(lambda v: abs(v) > 1e-3)
points = st.floats(min_value=0.3, max_value=2.5)


@given(st.floats(min_value=0, max_value=3), orders, points)
def test_power_rule(p, nu, x):
    want = float(power_rule_oracle(p, nu)(x))
    got = differint(f"pow(x1, {p!r})", DifferintSpec(nu), x).value
    assert got == pytest.approx(want, rel=1e-6, abs=1e-8)


@given(orders, points, st.floats(min_value=-3, max_value=3), st.floats(min_value=-3, max_value=3))
def test_linearity(nu, x, alpha, beta):
    f, g = parse("sin(x1)"), parse("x1^2")
    both = differint(f"{alpha!r}*sin(x1) + {beta!r}*x1^2", DifferintSpec(nu), x).value
    parts = alpha * differint(f, DifferintSpec(nu), x).value + beta * differint(g, DifferintSpec(nu), x).value
    assert both == pytest.approx(parts, rel=1e-8, abs=1e-9)


@given(st.floats(min_value=0.1, max_value=1.5), st.floats(min_value=0.1, max_value=1.5), points)
def test_integrals_form_a_semigroup(p, q, x):
    inner = differint_field("exp(x1)", -q)
    nested = differint_values(inner, -p, 1, 0.0, np.array([[x]]))[0]
    direct = differint("exp(x1)", DifferintSpec(-(p + q)), x).value
    assert nested == pytest.approx(direct, rel=1e-7)


@given(orders, st.floats(min_value=-2, max_value=2), st.floats(min_value=0.2, max_value=2))
def test_translation_invariance(nu, a, span):
    shifted = differint(f"exp(x1 - {a!r})", DifferintSpec(nu, a), a + span).value
    base = differint("exp(x1)", DifferintSpec(nu, 0.0), span).value
    assert shifted == pytest.approx(base, rel=1e-7, abs=1e-9)


@given(orders, points)
def test_schemes_agree(nu, x):
    assume(x > 0.4)
    q = differint("cos(x1)", DifferintSpec(nu), x).value
    g = differint("cos(x1)", DifferintSpec(nu, scheme="grunwald"), x).value
    assert q == pytest.approx(g, rel=1e-5, abs=1e-6)


@given(st.integers(min_value=16, max_value=40), orders)
def test_refining_grid_does_not_move_converged_values(n, nu):
    coarse = differint("sin(x1)", DifferintSpec(nu, grid_size=16), 1.0).value
    fine = differint("sin(x1)", DifferintSpec(nu, grid_size=n), 1.0).value
    # positive orders carry the finite-difference error of the outer derivative
    assert fine == pytest.approx(coarse, rel=1e-7, abs=1e-9)
