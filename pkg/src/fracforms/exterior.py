"""Exterior differintegral d^nu = sum_j dx_j^nu D^nu_{x_j} on forms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .differint import differint_field
from .errors import NonDiagonalizableOrder, UnsupportedOrder
from .fields import as_field
from .forms import FracForm, wedge
from .matrix_order import as_matrix_order


@dataclass(frozen=True)
class ExteriorSpec:
    order: float
    lower_limits: tuple[float, ...]
    grid_size: int = 16

    def __post_init__(self):
        object.__setattr__(self, "lower_limits", tuple(float(a) for a in self.lower_limits))


def exterior_differint(alpha: FracForm, spec: ExteriorSpec) -> FracForm:
    """d^nu alpha with lazily evaluated coefficients.

    Basis differentials are constant, so D^nu acts on coefficients only.
    """
    n = alpha.n
    if len(spec.lower_limits) != n:
        raise ValueError("need one lower limit per coordinate")
    result = None
    for j in range(1, n + 1):
        dxj = FracForm.basis([(spec.order, j)], n)
        terms = {}
        for key, c in alpha.terms.items():
            terms[key] = differint_field(as_field(c), spec.order, j, spec.lower_limits[j - 1],
                                         spec.grid_size, arity=n)
        piece = wedge(dxj, FracForm(alpha.signature, terms))
        result = piece if result is None else result + piece
    return result


def coefficient_values(form: FracForm, points) -> np.ndarray:
    """Coefficients at each point; shape (terms, P)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    rows = []
    for _, c in sorted(form.terms.items()):
        f = as_field(c)
        rows.append(np.broadcast_to(np.asarray(f(*pts.T), dtype=float), pts.shape[:1]))
    return np.array(rows) if rows else np.zeros((0, len(pts)))


def poincare_residual(alpha: FracForm, spec: ExteriorSpec, points) -> float:
    """max |component| of d^nu d^nu alpha over the points."""
    dd = exterior_differint(exterior_differint(alpha, spec), spec)
    vals = coefficient_values(dd, points)
    return float(np.max(np.abs(vals))) if vals.size else 0.0


def mixed_partial_gap(f, nu: float, j: int, k: int, lower, point, grid_size: int = 16) -> float:
    """|D_k D_j f - D_j D_k f| at one point: the symmetry behind d^nu d^nu = 0."""
    n = len(lower)
    f = as_field(f)
    pts = np.atleast_2d(np.asarray(point, dtype=float))
    jk = differint_field(differint_field(f, nu, j, lower[j - 1], grid_size, n), nu, k, lower[k - 1], grid_size, n)
    kj = differint_field(differint_field(f, nu, k, lower[k - 1], grid_size, n), nu, j, lower[j - 1], grid_size, n)
    return float(np.max(np.abs(jk(*pts.T) - kj(*pts.T))))


def matrix_exterior_residual(alpha: FracForm, A, lower_limits, points, grid_size: int = 16) -> list[float]:
    """Poincare residual at each distinct eigenvalue of a diagonalizable order."""
    A = as_matrix_order(A)
    if not A.diagonalizable:
        raise NonDiagonalizableOrder("d^A d^A = 0 is only available for diagonalizable orders")
    out = []
    for lam in A.distinct:
        if lam.imag:
            raise UnsupportedOrder("numerical residuals need real eigenvalues")
        out.append(poincare_residual(alpha, ExteriorSpec(lam.real, tuple(lower_limits), grid_size), points))
    return out
