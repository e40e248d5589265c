"""Covariant fractional derivative of covector fields in a chart.

With J = J(x, y, nu) (dx_i = sum_j dy_j J[j, i]) and its inverse K = J(y, x, nu),
the Cartesian components of V are W_k(y) = sum_a K[k, a] V_a(y), and

    nabla_b V_l = sum_k J[l, k] D^nu_{y_b} W_k.

Expanding D^nu of the product K V with the fractional Leibniz rule splits
this into D^nu V_l plus a connection series; both routes are provided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Chebyshev

from .coords import CoordMap, inverse_jacobian_batch, jacobian_batch
from .differint import _as_points, differint_values
from .errors import DomainError, NotPositiveDefinite, SeriesNoConverge
from .fields import LazyField, Var, as_field
from .matrix_order import as_matrix_order
from .special import binom

SERIES_CAP = 40
_CHEB_DEGREE = 24


def cartesian_components(V, cmap: CoordMap, nu: float, grid_size: int = 16) -> list[LazyField]:
    """W_k(y) = sum_a J(y, x, nu)[k, a] V_a(y) as lazy fields of y."""
    comps = [as_field(v) for v in V]
    n = cmap.n

    def make(k):
        def fn(pts):
            K = inverse_jacobian_batch(cmap, nu, pts, grid_size)
            vals = np.stack([np.broadcast_to(c(*pts.T), pts.shape[:1]) for c in comps], axis=-1)
            return np.einsum("pa,pa->p", K[:, k, :], vals)
        return LazyField(fn, n, label=f"W{k + 1}")

    return [make(k) for k in range(n)]


def pull_back(W, cmap: CoordMap, nu: float, grid_size: int = 16) -> list[LazyField]:
    """Chart components V_a(y) = sum_k J(x, y, nu)[a, k] W_k(x(y)) of a field
    given by Cartesian component expressions W_k(x)."""
    comps = [as_field(w) for w in W]
    n = cmap.n

    def make(a):
        def fn(pts):
            J = jacobian_batch(cmap, nu, pts, grid_size)
            x = cmap.to_cartesian(pts)
            vals = np.stack([np.broadcast_to(c(*x.T), x.shape[:1]) for c in comps], axis=-1)
            return np.einsum("pk,pk->p", J[:, a, :], vals)
        return LazyField(fn, n, label=f"V{a + 1}")

    return [make(a) for a in range(n)]


def is_trivial_chart(cmap: CoordMap) -> bool:
    """x_k = y_k with matching lower limits: J is exactly the identity."""
    return (all(isinstance(e, Var) and e.index == k + 1 for k, e in enumerate(cmap.forward))
            and tuple(cmap.lower_x) == tuple(cmap.lower_y))


def covariant_direct(V, cmap: CoordMap, nu: float, b: int, point, grid_size: int = 16) -> np.ndarray:
    """nabla_b V_l for l = 1..n at one chart point (b is 1-based).

    On a trivial chart the connection vanishes and the plain differintegral
    is returned directly.
    """
    if nu < 0:
        raise DomainError("covariant derivative is defined for nonnegative order")
    if is_trivial_chart(cmap):
        return plain_derivative(V, cmap, nu, b, point, grid_size)
    y = _as_points(point, cmap.n)
    W = cartesian_components(V, cmap, nu, grid_size)
    DW = np.array([differint_values(w, nu, b, cmap.lower_y[b - 1], y, grid_size)[0] for w in W])
    J = jacobian_batch(cmap, nu, y, grid_size)[0]
    return J @ DW


def plain_derivative(V, cmap: CoordMap, nu: float, b: int, point, grid_size: int = 16) -> np.ndarray:
    y = _as_points(point, cmap.n)
    return np.array([differint_values(as_field(v), nu, b, cmap.lower_y[b - 1], y, grid_size)[0] for v in V])


@dataclass(frozen=True)
class ConnectionValue:
    value: np.ndarray
    terms_used: int
    tail: float


def _fit_derivatives(cmap, nu, b, y0, half, s_max, grid_size):
    yb = y0[b - 1]
    k = np.arange(_CHEB_DEGREE + 1)
    nodes = np.cos(np.pi * (k + 0.5) / (_CHEB_DEGREE + 1))
    pts = np.tile(y0, (len(nodes), 1))
    pts[:, b - 1] = yb + half * nodes
    K = inverse_jacobian_batch(cmap, nu, pts, grid_size)
    n = cmap.n
    out = np.zeros((s_max + 1, n, n))
    for i in range(n):
        for j in range(n):
            cheb = Chebyshev.fit(pts[:, b - 1], K[:, i, j], _CHEB_DEGREE, domain=[yb - half, yb + half])
            for s in range(1, s_max + 1):
                out[s, i, j] = cheb.deriv(s)(yb)
    return out


def inverse_derivatives(cmap: CoordMap, nu: float, b: int, y0: np.ndarray, s_max: int,
                        grid_size: int = 16, half_width: float | None = None):
    """d^s/dy_b^s of J(y, x, nu) at y0 for s = 0..s_max, with error estimates.

    Two Chebyshev fits on nested intervals are compared; their difference is
    the reliability estimate of each derivative.
    """
    s_max = min(s_max, _CHEB_DEGREE)
    room = y0[b - 1] - cmap.lower_y[b - 1]
    half = half_width if half_width is not None else min(0.5 * room, 1.0)
    wide = _fit_derivatives(cmap, nu, b, y0, half, s_max, grid_size)
    narrow = _fit_derivatives(cmap, nu, b, y0, 0.7 * half, s_max, grid_size)
    return wide, np.abs(wide - narrow)


def connection_functional(V, cmap: CoordMap, nu: float, b: int, point, tolerance: float = 1e-6,
                          grid_size: int = 16, half_width: float | None = None) -> ConnectionValue:
    """sum_{k,a} J[l, k] sum_{s>=1} C(nu, s) d^s K[k, a] D^(nu - s) V_a.

    Summation stops once a term is below tolerance times the larger of the
    running sum and the leading term D^nu V; whole nu terminates exactly.
    SeriesNoConverge is raised when the cap is reached first or when the
    derivative estimates of K become too uncertain to reach the tolerance.
    """
    if nu < 0:
        raise DomainError("covariant derivative is defined for nonnegative order")
    y = _as_points(point, cmap.n)
    comps = [as_field(v) for v in V]
    a_b = cmap.lower_y[b - 1]
    J = jacobian_batch(cmap, nu, y, grid_size)[0]
    lead = np.array([differint_values(c, nu, b, a_b, y, grid_size)[0] for c in comps])
    floor = float(np.max(np.abs(lead))) if lead.size else 0.0
    terminating = float(nu).is_integer()
    last = int(nu) if terminating else SERIES_CAP
    dK, dK_err = inverse_derivatives(cmap, nu, b, y[0], min(last, SERIES_CAP), grid_size, half_width)
    total = np.zeros(cmap.n)
    uncertainty = 0.0
    tail = math.inf
    used = 0
    for s in range(1, last + 1):
        c = binom(nu, s)
        if c == 0:
            tail = 0.0
            break
        if s >= dK.shape[0]:
            break
        used = s
        Dv = np.array([differint_values(comp, nu - s, b, a_b, y, grid_size)[0] for comp in comps])
        term = c * (J @ (dK[s] @ Dv))
        uncertainty += float(np.max(np.abs(c) * (np.abs(J) @ (dK_err[s] @ np.abs(Dv)))))
        total = total + term
        tail = float(np.max(np.abs(term)))
        scale = max(float(np.max(np.abs(total))), floor)
        if uncertainty > tolerance * scale:
            raise SeriesNoConverge(
                f"derivative estimates too uncertain after {s} terms ({uncertainty:.3e})")
        if tail <= tolerance * scale:
            break
    if terminating:
        tail = 0.0
    elif tail > tolerance * max(float(np.max(np.abs(total))), floor):
        raise SeriesNoConverge(f"connection series tail {tail:.3e} after {used} terms")
    return ConnectionValue(total, used, tail)


def vector_transform_check(V, cmap: CoordMap, nu: float, point, W=None, grid_size: int = 16):
    """Both sides of the tensor transformation law at one chart point.

    lhs[j, k] = sum_{i,m} K[j, i] K[k, m] nabla_i V_m (chart side);
    rhs[j, k] = D^nu_{x_j} W_k (Cartesian side), with W the Cartesian
    components as fields of x (derived from V through the inverse map when
    not supplied).
    """
    n = cmap.n
    y = _as_points(point, n)
    K = inverse_jacobian_batch(cmap, nu, y, grid_size)[0]
    nab = np.stack([covariant_direct(V, cmap, nu, i + 1, y, grid_size) for i in range(n)])  # [i, m]
    lhs = K @ nab @ K.T
    x = cmap.to_cartesian(y)
    if W is None:
        Wy = cartesian_components(V, cmap, nu, grid_size)

        def make(k):
            def fn(xp):
                return Wy[k](*cmap.to_chart(xp).T)
            return LazyField(fn, n)

        W = [make(k) for k in range(n)]
    W = [as_field(w) for w in W]
    rhs = np.array([[differint_values(W[k], nu, j + 1, cmap.lower_x[j], x, grid_size)[0]
                     for k in range(n)] for j in range(n)])
    return lhs, rhs


def matrix_covariant(V, cmap: CoordMap, A, b: int, point, grid_size: int = 16) -> np.ndarray:
    """Per-eigenvalue covariant derivatives assembled as P diag(.) P^-1;
    result[l] is the m x m matrix for component l."""
    A = as_matrix_order(A)
    if not A.diagonalizable or any(abs(z.imag) > 0 or z.real <= 0 for z in A.eigenvalues):
        raise NotPositiveDefinite("matrix order must be diagonalizable with positive eigenvalues")
    slices = {lam: covariant_direct(V, cmap, lam.real, b, point, grid_size) for lam in A.distinct}
    out = np.empty((cmap.n, A.m, A.m), dtype=complex)
    for l in range(cmap.n):
        out[l] = A.P @ np.diag([slices[lam][l] for lam in A.eigenvalues]) @ A.P_inv
    return out


def matrix_covariant_series(V, cmap: CoordMap, A, b: int, point, tolerance: float = 1e-6,
                            grid_size: int = 16) -> np.ndarray:
    """D^A V + connection, each assembled from per-eigenvalue scalars."""
    A = as_matrix_order(A)
    if not A.diagonalizable or any(abs(z.imag) > 0 or z.real <= 0 for z in A.eigenvalues):
        raise NotPositiveDefinite("matrix order must be diagonalizable with positive eigenvalues")
    slices = {}
    for lam in A.distinct:
        nu = lam.real
        conn = connection_functional(V, cmap, nu, b, point, tolerance, grid_size).value
        slices[lam] = plain_derivative(V, cmap, nu, b, point, grid_size) + conn
    out = np.empty((cmap.n, A.m, A.m), dtype=complex)
    for l in range(cmap.n):
        out[l] = A.P @ np.diag([slices[lam][l] for lam in A.eigenvalues]) @ A.P_inv
    return out
