import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracforms.coords import (CHARTS, chart, inverse_system_jacobian, jacobian, make_chart, matrix_order_jacobian,
                              metric, polar_example, system_matrix)
from fracforms.errors import NonDiagonalizableOrder, SingularSystem

R, THETA = 2.0, math.pi / 3


def classical(name, y):
    a, b = y
    if name == "polar":
        return np.array([[math.cos(b), math.sin(b)], [-a * math.sin(b), a * math.cos(b)]])
    if name == "shear":
        return np.array([[2.0, 0.0], [1.0, 1.0]])
    if name == "exp-radial":
        e = math.exp(a)
        return np.array([[e * math.cos(b), e * math.sin(b)], [-e * math.sin(b), e * math.cos(b)]])
    return np.eye(2)


def test_builtin_charts_invert():
    for name in CHARTS:
        c = chart(name)
        y = np.array([[1.3, 0.4]])
        np.testing.assert_allclose(c.to_chart(c.to_cartesian(y)), y, atol=1e-12)
    with pytest.raises(KeyError):
        chart("spherical")


@pytest.mark.parametrize("name", ["polar", "shear", "exp-radial"])
def test_whole_order_is_classical(name):
    y = [R, THETA] if name == "polar" else [0.5, 0.6]
    J = jacobian(chart(name), 1.0, y)
    np.testing.assert_allclose(J.values, classical(name, y), atol=1e-8)


def test_polar_system_at_minus_one_frozen():
    # independent arbitrary-precision solve of the same linear system
    J = jacobian(chart("polar"), -1.0, [R, THETA])
    want = [[0.66666666666666667, 0.38490017945975051], [-0.38490017945975051, 1.1111111111111111]]
    np.testing.assert_allclose(J.values, want, atol=1e-10)
    assert J.residual <= 1e-9


def test_polar_system_at_half_frozen():
    J = jacobian(chart("polar"), 0.5, [R, THETA])
    want = [[0.47140452079103168, 0.62040323940139973], [-0.94669874601414398, 1.7540243469270919]]
    np.testing.assert_allclose(J.values, want, rtol=1e-8)


def test_shear_metric_frozen():
    g = metric(chart("shear"), 0.5, [1.0, 0.5])
    np.testing.assert_allclose(g.g, [[1.88, 0.45254833995939042], [0.45254833995939042, 0.96]], rtol=1e-9)
    np.testing.assert_allclose(g.g @ g.g_inv, np.eye(2), atol=1e-12)


def test_polar_system_entries():
    s = system_matrix(chart("polar"), -1.0, [R, THETA])
    x, y = 1.0, math.sqrt(3.0)
    np.testing.assert_allclose(s.A, [[x * x / 2, x * y], [x * y, y * y / 2]], atol=1e-12)
    # D^-1 in theta of r sin(theta) from 0 is r(1 - cos theta)
    np.testing.assert_allclose(s.B, [[1.0, y], [y, R * (1 - math.cos(THETA))]], atol=1e-9)


@pytest.mark.parametrize("theta", [0.0, math.pi / 2])
def test_axes_are_singular(theta):
    with pytest.raises(SingularSystem):
        jacobian(chart("polar"), -1.0, [R, theta])


def test_order_zero_is_degenerate():
    # every row of A is the point itself
    with pytest.raises(SingularSystem):
        jacobian(chart("polar"), 0.0, [R, THETA])


def test_round_trip_at_whole_order():
    J = jacobian(chart("polar"), 1.0, [R, THETA]).values
    K = inverse_system_jacobian(chart("polar"), 1.0, [R, THETA]).values
    np.testing.assert_allclose(J @ K, np.eye(2), atol=1e-8)


def test_round_trip_fails_for_fractional_order():
    # the two systems use different lower-limit data, so they are not inverse
    J = jacobian(chart("polar"), 0.5, [R, THETA]).values
    K = inverse_system_jacobian(chart("polar"), 0.5, [R, THETA]).values
    assert np.max(np.abs(J @ K - np.eye(2))) > 1e-2


def test_identity_chart_is_trivial():
    np.testing.assert_allclose(jacobian(chart("identity"), 0.5, [1.0, 2.0]).values, np.eye(2), atol=1e-12)


def test_custom_chart():
    c = make_chart("scaled", ["3*u", "v"], ["x1/3", "x2"], ["u", "v"])
    np.testing.assert_allclose(jacobian(c, 1.0, [1.0, 1.0]).values, [[3.0, 0.0], [0.0, 1.0]], atol=1e-10)


def test_matrix_order_slices():
    JA = matrix_order_jacobian(chart("polar"), np.diag([0.5, 1.0]), [R, THETA])
    for j in range(2):
        for i in range(2):
            assert JA[j, i][0, 0] == pytest.approx(jacobian(chart("polar"), 0.5, [R, THETA]).values[j, i])
            assert JA[j, i][1, 1] == pytest.approx(jacobian(chart("polar"), 1.0, [R, THETA]).values[j, i])
    with pytest.raises(NonDiagonalizableOrder):
        matrix_order_jacobian(chart("polar"), [[1.0, 1.0], [0.0, 1.0]], [R, THETA])


def test_polar_example_report():
    ex = polar_example(R, THETA)
    assert ex["residual"] <= 1e-9
    assert ex["comparison"]["dx_dr"]["reference"] == pytest.approx(0.821367, abs=1e-6)
    assert ex["comparison"]["dx_dtheta"]["reference"] == pytest.approx(-1.924501, abs=1e-6)
    for c in ex["comparison"].values():
        assert c["delta"] == pytest.approx(c["computed"] - c["reference"])


@settings(max_examples=15)
@given(st.sampled_from([-1.0, -0.5, 0.5, 1.0]), st.floats(min_value=0.5, max_value=3.0),
       st.floats(min_value=0.15, max_value=1.4))
def test_defining_system_residual(nu, r, theta):
    assert jacobian(chart("polar"), nu, [r, theta]).residual <= 1e-9


@settings(max_examples=15)
@given(st.floats(min_value=-1.0, max_value=1.0).filter(lambda v: abs(v) > 0.1), st.floats(min_value=0.5, max_value=2.0),
       st.floats(min_value=0.2, max_value=1.3))
def test_metric_is_symmetric_positive_definite(nu, r, theta):
    g = metric(chart("polar"), nu, [r, theta]).g
    np.testing.assert_allclose(g, g.T, atol=0)
    assert np.all(np.linalg.eigvalsh(g) > 0)
