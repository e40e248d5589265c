"""Fractional coordinate transformations.

For a chart x = x(y) the order-nu differentials are related by

    sum_i dx_i^nu A_ik = b_k,   A_ik = D^nu_{x_i} x_k,   b_k = sum_j dy_j^nu B_jk,
    B_jk = D^nu_{y_j} x_k(y),

so the transformation matrix J with dx_i = sum_j dy_j J[j, i] solves
J A = B.  Each row of J is found by Cramer's rule.  A is known in closed
form (differintegrals of Cartesian coordinates); B is evaluated
numerically through the chart.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .differint import differint_values
from .errors import NonDiagonalizableOrder, SingularSystem
from .fields import Expr, parse
from .matrix_order import as_matrix_order
from .special import rgamma

SINGULAR_RTOL = 1e-12
RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class CoordMap:
    """Cartesian coordinates x_i(y) in terms of chart coordinates y_j, with
    the inverse y_j(x) and the lower limits on both sides."""

    name: str
    forward: tuple[Expr, ...]
    inverse: tuple[Expr, ...]
    names: tuple[str, ...]
    lower_x: tuple[float, ...]
    lower_y: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.forward)

    def to_cartesian(self, y) -> np.ndarray:
        y = np.atleast_2d(np.asarray(y, dtype=float))
        return np.stack([np.broadcast_to(f(*y.T), y.shape[:1]) for f in self.forward], axis=-1)

    def to_chart(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.stack([np.broadcast_to(g(*x.T), x.shape[:1]) for g in self.inverse], axis=-1)

    def with_limits(self, lower_x=None, lower_y=None) -> "CoordMap":
        return CoordMap(self.name, self.forward, self.inverse, self.names,
                        tuple(lower_x if lower_x is not None else self.lower_x),
                        tuple(lower_y if lower_y is not None else self.lower_y))


def make_chart(name: str, forward: list[str], inverse: list[str], names: list[str],
               lower_x=None, lower_y=None) -> CoordMap:
    n = len(forward)
    ymap = {nm: i + 1 for i, nm in enumerate(names)}
    xmap = {f"x{i + 1}": i + 1 for i in range(n)}
    xmap.update({"x": 1, "y": 2} if n == 2 else {})
    fwd = tuple(parse(e, ymap) for e in forward)
    inv = tuple(parse(e, xmap) for e in inverse)
    return CoordMap(name, fwd, inv, tuple(names),
                    tuple(lower_x or [0.0] * n), tuple(lower_y or [0.0] * n))


def chart(name: str) -> CoordMap:
    """Built-in charts: identity (n = 2), polar, shear, exp-radial."""
    if name == "polar":
        return make_chart("polar", ["r*cos(theta)", "r*sin(theta)"],
                          ["sqrt(x1^2 + x2^2)", "atan2(x2, x1)"], ["r", "theta"])
    if name == "shear":
        return make_chart("shear", ["2*y1 + y2", "y2"], ["(x1 - x2)/2", "x2"], ["y1", "y2"])
    if name == "exp-radial":
        return make_chart("exp-radial", ["exp(y1)*cos(y2)", "exp(y1)*sin(y2)"],
                          ["ln(x1^2 + x2^2)/2", "atan2(x2, x1)"], ["y1", "y2"],
                          lower_y=[-1.0, 0.0])
    if name == "identity":
        return make_chart("identity", ["y1", "y2"], ["x1", "x2"], ["y1", "y2"])
    raise KeyError(f"unknown chart {name!r}")


CHARTS = ("identity", "polar", "shear", "exp-radial")


# ---------------------------------------------------------------------------
# the linear system


def cartesian_matrix(x: np.ndarray, nu: float, lower) -> np.ndarray:
    """A_ik = D^nu_{x_i} x_k at each row of x; shape (P, n, n)."""
    x = np.atleast_2d(x)
    a = np.asarray(lower, dtype=float)
    s = x - a
    if np.any(s <= 0):
        raise SingularSystem("Cartesian point must exceed the lower limits")
    P, n = x.shape
    with np.errstate(all="ignore"):
        pow_nu = s ** (-nu) * rgamma(1 - nu)
        A = x[:, None, :] * pow_nu[:, :, None]
        diag = s ** (1 - nu) * rgamma(2 - nu) + a * pow_nu
    idx = np.arange(n)
    A[:, idx, idx] = diag
    return A


def chart_matrix(cmap: CoordMap, nu: float, y: np.ndarray, grid_size: int = 16) -> np.ndarray:
    """B_jk = D^nu_{y_j} x_k(y) at each row of y; shape (P, n, n)."""
    y = np.atleast_2d(y)
    P, n = y.shape
    B = np.empty((P, n, n))
    for j in range(n):
        for k in range(n):
            B[:, j, k] = differint_values(cmap.forward[k], nu, j + 1, cmap.lower_y[j], y, grid_size)
    return B


def _regularity(A: np.ndarray) -> np.ndarray:
    """Hadamard ratio |det| / prod(row norms) after row and column scaling.

    Scaling makes small differintegrals near a lower limit acceptable; true
    rank loss is caught here, cancellation by the residual check in
    cramer_rows.
    """
    with np.errstate(all="ignore"):
        E = A / np.max(np.abs(A), axis=2, keepdims=True)
        E = E / np.max(np.abs(E), axis=1, keepdims=True)
        ratio = np.abs(np.linalg.det(E)) / np.prod(np.linalg.norm(E, axis=2), axis=1)
    return np.nan_to_num(ratio, nan=0.0)


def cramer_rows(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve J A = B row by row with Cramer's rule (stacked over P)."""
    P, n, _ = A.shape
    det = np.linalg.det(A)
    if np.any(~np.isfinite(det)) or np.any(_regularity(A) <= SINGULAR_RTOL):
        raise SingularSystem("transformation system is singular at the evaluation point")
    J = np.empty_like(B)
    for j in range(n):
        for i in range(n):
            Ai = A.copy()
            Ai[:, i, :] = B[:, j, :]
            J[:, j, i] = np.linalg.det(Ai) / det
    # on an axis the determinant is pure rounding and J is garbage
    res = np.abs(np.einsum("pji,pik->pjk", J, A) - B).max(axis=(1, 2))
    if np.any(~(res <= RESIDUAL_RTOL * np.abs(B).max(axis=(1, 2)))):
        raise SingularSystem("transformation system is singular at the evaluation point")
    return J


_CACHE: OrderedDict = OrderedDict()
_CACHE_SIZE = 32


def jacobian_batch(cmap: CoordMap, nu: float, y, grid_size: int = 16) -> np.ndarray:
    """J[p, j, i] with dx_i = sum_j dy_j J[j, i], at each chart point y[p]."""
    y = np.ascontiguousarray(np.atleast_2d(np.asarray(y, dtype=float)))
    key = (id(cmap), float(nu), grid_size, y.shape, y.tobytes())
    hit = _CACHE.get(key)
    if hit is not None and hit[0] is cmap:
        _CACHE.move_to_end(key)
        return hit[1]
    A = cartesian_matrix(cmap.to_cartesian(y), nu, cmap.lower_x)
    B = chart_matrix(cmap, nu, y, grid_size)
    J = cramer_rows(A, B)
    _CACHE[key] = (cmap, J)
    if len(_CACHE) > _CACHE_SIZE:
        _CACHE.popitem(last=False)
    return J


def inverse_jacobian_batch(cmap: CoordMap, nu: float, y, grid_size: int = 16) -> np.ndarray:
    """J(y, x, nu) as the matrix inverse of J(x, y, nu)."""
    J = jacobian_batch(cmap, nu, y, grid_size)
    if np.any(_regularity(J) <= SINGULAR_RTOL):
        raise SingularSystem("transformation matrix is singular: the chart degenerates on the integration path")
    return np.linalg.inv(J)


@dataclass(frozen=True)
class SystemSolution:
    A: np.ndarray
    B: np.ndarray


def system_matrix(cmap: CoordMap, nu: float, point, grid_size: int = 16) -> SystemSolution:
    """A (n x n) and the dy-components of each b_k as rows of B."""
    y = np.atleast_2d(np.asarray(point, dtype=float))
    A = cartesian_matrix(cmap.to_cartesian(y), nu, cmap.lower_x)[0]
    B = chart_matrix(cmap, nu, y, grid_size)[0]
    return SystemSolution(A, B)


@dataclass(frozen=True)
class TransformMatrix:
    """dx_i^nu = sum_j dy_j^nu values[j, i]; direction 'x<-y' or 'y<-x'."""

    order: float
    values: np.ndarray
    direction: str
    residual: float


def jacobian(cmap: CoordMap, nu: float, point, grid_size: int = 16) -> TransformMatrix:
    sysm = system_matrix(cmap, nu, point, grid_size)
    J = cramer_rows(sysm.A[None], sysm.B[None])[0]
    residual = float(np.max(np.abs(J @ sysm.A - sysm.B)))
    return TransformMatrix(nu, J, "x<-y", residual)


def inverse_system_jacobian(cmap: CoordMap, nu: float, point, grid_size: int = 16) -> TransformMatrix:
    """J(y, x, nu) from its own system: the chart coordinates' differintegrals
    against the Cartesian ones, evaluated through the inverse map."""
    y = np.atleast_2d(np.asarray(point, dtype=float))
    x = cmap.to_cartesian(y)
    A = cartesian_matrix(y, nu, cmap.lower_y)[0]
    n = cmap.n
    B = np.empty((n, n))
    for i in range(n):
        for l in range(n):
            B[i, l] = differint_values(cmap.inverse[l], nu, i + 1, cmap.lower_x[i], x, grid_size)[0]
    J = cramer_rows(A[None], B[None])[0]
    return TransformMatrix(nu, J, "y<-x", float(np.max(np.abs(J @ A - B))))


@dataclass(frozen=True)
class FracMetric:
    order: float
    g: np.ndarray
    g_inv: np.ndarray


def metric(cmap: CoordMap, nu: float, point, grid_size: int = 16) -> FracMetric:
    """g_jl = sum_i J_j^i J_l^i with J = J(x, y, nu): the metric that makes the
    Cartesian-orthonormal inner product chart independent."""
    J = jacobian(cmap, nu, point, grid_size).values
    g = J @ J.T
    g = 0.5 * (g + g.T)
    return FracMetric(nu, g, np.linalg.inv(g))


def matrix_order_jacobian(cmap: CoordMap, A, point, grid_size: int = 16) -> np.ndarray:
    """J(A)[j, i] = P diag(J[j, i](lambda_1), ...) P^-1; shape (n, n, m, m)."""
    A = as_matrix_order(A)
    if not A.diagonalizable:
        raise NonDiagonalizableOrder("matrix-order transformation needs a diagonalizable order")
    if any(abs(z.imag) > 0 for z in A.eigenvalues):
        raise NonDiagonalizableOrder("matrix-order transformation needs real eigenvalues")
    slices = {}
    for lam in A.distinct:
        slices[lam] = jacobian(cmap, lam.real, point, grid_size).values
    n = cmap.n
    out = np.empty((n, n, A.m, A.m), dtype=complex)
    for j in range(n):
        for i in range(n):
            D = np.diag([slices[lam][j, i] for lam in A.eigenvalues])
            out[j, i] = A.P @ D @ A.P_inv
    return out


# ---------------------------------------------------------------------------
# the published polar example


POLAR_REFERENCE = {
    # closed forms printed for nu = -1 with the origin as lower limit
    "dx_dr": lambda r, t: (2 * math.tan(t) - 1) / 3,
    "dx_dtheta": lambda r, t: -2 * (math.tan(t) ** 2 + 2) / (3 * r * math.sin(t)),
    "dy_dr": lambda r, t: (2 / math.tan(t) - 1) / 3,
    "dy_dtheta": lambda r, t: 2 * (1 / math.tan(t) ** 2 + 2) / (3 * r * math.cos(t)),
}


def polar_example(r: float, theta: float, nu: float = -1.0, grid_size: int = 16) -> dict:
    """Solve the polar system and compare with the printed closed forms."""
    cmap = chart("polar")
    sysm = system_matrix(cmap, nu, [r, theta], grid_size)
    J = cramer_rows(sysm.A[None], sysm.B[None])[0]
    residual = float(np.max(np.abs(J @ sysm.A - sysm.B)))
    computed = {"dx_dr": J[0, 0], "dx_dtheta": J[1, 0], "dy_dr": J[0, 1], "dy_dtheta": J[1, 1]}
    comparison = {}
    if nu == -1.0:
        for key, fn in POLAR_REFERENCE.items():
            ref = fn(r, theta)
            comparison[key] = {"computed": float(computed[key]), "reference": ref,
                               "delta": float(computed[key] - ref)}
    return {
        "r": r,
        "theta": theta,
        "order": nu,
        "A": sysm.A,
        "B": sysm.B,
        "det_A": float(np.linalg.det(sysm.A)),
        "J": J,
        "residual": residual,
        "comparison": comparison,
    }
