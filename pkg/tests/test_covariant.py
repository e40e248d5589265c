import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracforms import covariant as cov
from fracforms.coords import chart
from fracforms.errors import DomainError, NotPositiveDefinite
from fracforms.fields import parse

NAMES = {"r": 1, "theta": 2}
POLAR = chart("polar").with_limits(lower_y=(0.5, 0.0))


def field(*texts, names=NAMES):
    return [parse(t, names) for t in texts]


def christoffel(V, b, r, t):
    """Covector covariant derivative with the polar Christoffel symbols."""
    Vr, Vt = (float(v.at([r, t])) for v in V)
    d = [float(v.diff(b).at([r, t])) for v in V]
    if b == 1:
        return np.array([d[0], d[1] - Vt / r])
    return np.array([d[0] - Vt / r, d[1] + r * Vr])


@pytest.mark.parametrize("b", [1, 2])
def test_whole_order_matches_christoffel_symbols(b):
    V = field("r^2", "r*sin(theta)")
    got = cov.covariant_direct(V, POLAR, 1.0, b, [1.5, 0.7])
    np.testing.assert_allclose(got, christoffel(V, b, 1.5, 0.7), atol=1e-8)


def test_limit_approaches_classical_monotonically():
    V = field("r^2*theta", "r*theta^2")
    want = christoffel(V, 1, 1.5, 0.8)
    errs = [np.max(np.abs(cov.covariant_direct(V, chart("polar"), nu, 1, [1.5, 0.8]) - want))
            for nu in (0.9, 0.99, 1.0)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-8


def test_identity_chart_is_the_plain_differintegral():
    ident = chart("identity")
    V = field("x1^2*x2", "sin(x1)", names=None)
    for b in (1, 2):
        direct = cov.covariant_direct(V, ident, 0.5, b, [1.2, 0.9])
        plain = cov.plain_derivative(V, ident, 0.5, b, [1.2, 0.9])
        np.testing.assert_array_equal(direct, plain)
    assert cov.is_trivial_chart(ident)
    assert not cov.is_trivial_chart(POLAR)


def test_series_decomposition():
    V = field("r^2", "r^12")
    direct = cov.covariant_direct(V, POLAR, 0.5, 1, [2.0, 0.8])
    conn = cov.connection_functional(V, POLAR, 0.5, 1, [2.0, 0.8], tolerance=1e-6)
    series = cov.plain_derivative(V, POLAR, 0.5, 1, [2.0, 0.8]) + conn.value
    assert np.max(np.abs(direct - series)) / max(np.max(np.abs(direct)), 1.0) <= 2e-6
    assert conn.terms_used >= 1


def test_whole_order_series_terminates():
    V = field("r^2", "r*sin(theta)")
    conn = cov.connection_functional(V, POLAR, 1.0, 2, [1.5, 0.7])
    assert conn.tail == 0.0 and conn.terms_used == 1


def test_transformation_law_on_linear_fields():
    # Cartesian components W = (x1 + 2 x2, 3 x1 - x2) pulled back to the chart
    cmap = chart("shear")
    W = field("x1 + 2*x2", "3*x1 - x2", names=None)
    V = cov.pull_back(W, cmap, 0.5)
    lhs, rhs = cov.vector_transform_check(V, cmap, 0.5, [1.0, 0.8], W=W)
    np.testing.assert_allclose(lhs, rhs, atol=1e-3)


def test_matrix_order_slices_match_scalars():
    V = field("r^2", "r*sin(theta)")
    out = cov.matrix_covariant(V, POLAR, np.diag([0.5, 1.0]), 1, [1.5, 0.7])
    for lam, idx in ((0.5, 0), (1.0, 1)):
        want = cov.covariant_direct(V, POLAR, lam, 1, [1.5, 0.7])
        np.testing.assert_allclose(out[:, idx, idx].real, want, atol=1e-12)


def test_errors():
    V = field("r^2", "r")
    with pytest.raises(DomainError):
        cov.covariant_direct(V, POLAR, -0.5, 1, [1.5, 0.7])
    with pytest.raises(NotPositiveDefinite):
        cov.matrix_covariant(V, POLAR, np.diag([-0.5, 1.0]), 1, [1.5, 0.7])
    with pytest.raises(NotPositiveDefinite):
        cov.matrix_covariant(V, POLAR, [[1.0, 1.0], [0.0, 1.0]], 1, [1.5, 0.7])


@settings(max_examples=10)
@given(st.floats(min_value=-2, max_value=2), st.floats(min_value=-2, max_value=2),
       st.floats(min_value=0.2, max_value=0.9))
def test_linear_in_the_field(a, b, nu):
    V1, V2 = field("r^2", "theta"), field("r", "r*theta")
    mix = field(f"{a!r}*r^2 + {b!r}*r", f"{a!r}*theta + {b!r}*r*theta")
    y = [1.5, 0.7]
    lhs = cov.covariant_direct(mix, POLAR, nu, 1, y)
    rhs = a * cov.covariant_direct(V1, POLAR, nu, 1, y) + b * cov.covariant_direct(V2, POLAR, nu, 1, y)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-7, atol=1e-8)
