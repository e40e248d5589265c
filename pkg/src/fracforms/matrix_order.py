"""Differintegrals whose order is a square matrix.

A matrix order A is split into its eigen-structure once; every operator
D^A f is then assembled from scalar differintegrals D^lambda f at the
eigenvalues.  Defective matrices are handled through Jordan chains, the
off-diagonal block entries coming from derivatives in the order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .differint import (
    corrected_composition,
    differint_field,
    differint_values,
    lambda_derivative,
    scalar_value,
    DifferintSpec,
    _as_points,
    _stencil,
    classical_derivative_values,
)
from .errors import (
    IllConditioned,
    NonDiagonalizableOrder,
    NotNormal,
    UndefinedAtEigenvalue,
    UnsupportedOrder,
    ZeroMatrix,
)
from .fields import as_field
from .special import binom

CLUSTER_RTOL = 1e-9
MAX_COND = 1e10
MAX_JORDAN = 4


@dataclass(frozen=True, eq=False)
class MatrixOrder:
    entries: np.ndarray
    classification: str  # normal | diagonalizable | jordan_only
    eigenvalues: np.ndarray  # one per column of P, sorted by (real, imag)
    P: np.ndarray
    P_inv: np.ndarray
    distinct: tuple  # distinct eigenvalues, sorted
    multiplicities: tuple
    projectors: tuple  # (lambda_i, G_i) over distinct eigenvalues
    jordan_blocks: tuple = ()  # (lambda, size) in column order of P

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def diagonalizable(self) -> bool:
        return self.classification != "jordan_only"

    @property
    def J(self) -> np.ndarray:
        """The (Jordan or diagonal) normal form with A = P J P^-1."""
        out = np.diag(self.eigenvalues).astype(complex)
        col = 0
        for _, size in self.jordan_blocks:
            for r in range(size - 1):
                out[col + r, col + r + 1] = 1.0
            col += size
        return out


@dataclass(frozen=True)
class MatrixDifferintResult:
    value: np.ndarray

    @property
    def real(self) -> np.ndarray:
        return self.value.real


def _clean(z: complex, scale: float) -> complex:
    tiny = 1e-12 * max(1.0, scale)
    re = 0.0 if abs(z.real) <= tiny else z.real
    im = 0.0 if abs(z.imag) <= tiny else z.imag
    return complex(re, im)


def _sort_key(z):
    return (round(z.real, 12), round(z.imag, 12))


def _cluster(values, scale: float, widen: float = 1.0) -> list[tuple[complex, int]]:
    vals = sorted(values, key=_sort_key)
    tol = widen * CLUSTER_RTOL * max(1.0, scale)
    groups: list[list[complex]] = []
    for v in vals:
        if groups and abs(v - groups[-1][0]) <= tol:
            groups[-1].append(v)
        else:
            groups.append([v])
    return [(_clean(complex(np.mean(g)), scale), len(g)) for g in groups]


def _null_space(M: np.ndarray, tol: float) -> np.ndarray:
    _, s, vh = np.linalg.svd(M)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def _rank(M: np.ndarray, tol: float) -> int:
    if M.size == 0:
        return 0
    return int(np.sum(np.linalg.svd(M, compute_uv=False) > tol))


def _spectral_projectors(A: np.ndarray, distinct) -> tuple:
    m = A.shape[0]
    eye = np.eye(m, dtype=complex)
    out = []
    for i, li in enumerate(distinct):
        G = eye.copy()
        for j, lj in enumerate(distinct):
            if j != i:
                G = G @ (A - lj * eye) / (li - lj)
        out.append((li, G))
    return tuple(out)


def _jordan_chains(A: np.ndarray, lam: complex, mult: int, tol: float):
    """Columns [N^(s-1) v, ..., v] for each chain, longest first."""
    m = A.shape[0]
    N = A - lam * np.eye(m)
    powers = [np.eye(m, dtype=complex)]
    for _ in range(mult):
        powers.append(powers[-1] @ N)
    dims = [0] + [m - _rank(powers[j], tol) for j in range(1, mult + 1)]
    if dims[-1] != mult:
        raise IllConditioned("generalized eigenspace dimension does not match multiplicity")
    chosen: list[np.ndarray] = []  # all chain vectors found so far
    chains = []
    for s in range(mult, 0, -1):
        count = (dims[s] - dims[s - 1]) - ((dims[s + 1] - dims[s]) if s < mult else 0)
        if count <= 0:
            continue
        ker_s = _null_space(powers[s], tol)
        ker_prev = _null_space(powers[s - 1], tol) if s > 1 else np.zeros((m, 0), complex)
        base = np.hstack([ker_prev] + [c.reshape(m, 1) for c in chosen]) if chosen or ker_prev.size else np.zeros((m, 0), complex)
        r0 = _rank(base, tol)
        for c in range(ker_s.shape[1]):
            if count == 0:
                break
            v = ker_s[:, c]
            trial = np.hstack([base, v.reshape(m, 1)])
            if _rank(trial, tol) > r0:
                chain = [np.linalg.matrix_power(N, t) @ v for t in range(s - 1, -1, -1)]
                chains.append(chain)
                chosen.extend(chain)
                base = np.hstack([base] + [w.reshape(m, 1) for w in chain])
                r0 = _rank(base, tol)
                count -= 1
        if count:
            raise IllConditioned("could not complete Jordan chains")
    return chains


def classify_and_decompose(A, *, allow_zero: bool = False) -> MatrixOrder:
    """Classify A as normal / diagonalizable / jordan_only and decompose it."""
    A = np.array(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix order must be square")
    m = A.shape[0]
    scale = float(np.linalg.norm(A))
    if scale == 0.0:
        if not allow_zero:
            raise ZeroMatrix("matrix order is zero")
        eye = np.eye(m, dtype=complex)
        return MatrixOrder(A, "normal", np.zeros(m, complex), eye, eye, (0j,), (m,), ((0j, eye),))
    comm = A @ A.conj().T - A.conj().T @ A
    if np.linalg.norm(comm) < 1e-12 * scale**2:
        T, Z = scipy.linalg.schur(A, output="complex")
        ev = np.array([_clean(z, scale) for z in np.diag(T)])
        order = sorted(range(m), key=lambda i: _sort_key(ev[i]))
        U = Z[:, order]
        ev = ev[order]
        clusters = _cluster(ev, scale)
        ev = _snap(ev, clusters, scale)
        projectors = []
        for lam, _ in clusters:
            cols = np.isclose(ev, lam, atol=CLUSTER_RTOL * max(1, scale))
            Uc = U[:, cols]
            projectors.append((lam, Uc @ Uc.conj().T))
        return MatrixOrder(A, "normal", ev, U, U.conj().T, tuple(c[0] for c in clusters),
                           tuple(c[1] for c in clusters), tuple(projectors))

    raw = [_clean(z, scale) for z in np.linalg.eigvals(A)]
    try:
        return _decompose(A, raw, _cluster(raw, scale), scale)
    except IllConditioned:
        # a defective eigenvalue of multiplicity k is split by about eps^(1/k)
        loose = _cluster(raw, scale, 10.0 * np.finfo(float).eps ** (1.0 / m) / CLUSTER_RTOL)
        if len(loose) == len(set(raw)) or len(loose) == len(_cluster(raw, scale)):
            raise
        return _decompose(A, raw, loose, scale)


def _decompose(A: np.ndarray, raw, clusters, scale: float) -> MatrixOrder:
    m = A.shape[0]
    null_tol = 1e-9 * max(1.0, scale)
    cols, ev = [], []
    defective = False
    for lam, k in clusters:
        ns = _null_space(A - lam * np.eye(m), null_tol)
        if ns.shape[1] < k:
            defective = True
            break
        cols.append(ns[:, :k])
        ev.extend([lam] * k)
    distinct = tuple(c[0] for c in clusters)
    mults = tuple(c[1] for c in clusters)
    if not defective:
        P = np.hstack(cols)
        if np.linalg.cond(P) > MAX_COND:
            raise IllConditioned("eigenvector matrix is ill-conditioned (near-defective order)")
        P_inv = np.linalg.inv(P)
        return MatrixOrder(A, "diagonalizable", np.array(ev), P, P_inv, distinct, mults,
                           _spectral_projectors(A, distinct))

    if m > MAX_JORDAN:
        raise NonDiagonalizableOrder(f"Jordan decomposition supported for m <= {MAX_JORDAN}")
    cols, ev, blocks = [], [], []
    for lam, k in clusters:
        for chain in _jordan_chains(A, lam, k, null_tol):
            cols.extend(chain)
            ev.extend([lam] * len(chain))
            blocks.append((lam, len(chain)))
    P = np.column_stack(cols)
    if np.linalg.cond(P) > MAX_COND:
        raise IllConditioned("Jordan basis is ill-conditioned")
    P_inv = np.linalg.inv(P)
    projectors = []
    for lam in distinct:
        E = np.diag([1.0 if e == lam else 0.0 for e in ev]).astype(complex)
        projectors.append((lam, P @ E @ P_inv))
    return MatrixOrder(A, "jordan_only", np.array(ev), P, P_inv, distinct, mults,
                       tuple(projectors), tuple(blocks))


def _snap(ev, clusters, scale):
    tol = CLUSTER_RTOL * max(1.0, scale)
    out = ev.copy()
    for lam, _ in clusters:
        out[np.abs(ev - lam) <= tol] = lam
    return out


def as_matrix_order(A) -> MatrixOrder:
    if isinstance(A, MatrixOrder):
        return A
    return classify_and_decompose(A, allow_zero=True)


def _finite(v, lam):
    v = complex(v)
    if not (math.isfinite(v.real) and math.isfinite(v.imag)):
        raise UndefinedAtEigenvalue(f"function is not finite at eigenvalue {lam}")
    return v


def _fd_derivative(g, lam, k: int, h0: float = 0.05) -> complex:
    # Ridders-style central differences along the real axis
    offsets, coef = _stencil(k)
    table = []
    for level in range(6):
        h = h0 / 2.0**level
        table.append(sum(c * g(lam + o * h) for c, o in zip(coef, offsets)) / h**k)
    best, err = table[-1], math.inf
    prev = np.array(table, dtype=complex)
    for m in range(1, 6):
        fac = 4.0**m
        cur = (fac * prev[1:] - prev[:-1]) / (fac - 1.0)
        for i in range(len(cur)):
            e = max(abs(cur[i] - prev[i + 1]), abs(cur[i] - prev[i]))
            if e < err:
                best, err = cur[i], e
        prev = cur
    return complex(best)


def matrix_function(A, g: Callable, derivative: Callable | None = None) -> np.ndarray:
    """g(A) by similarity (normal / diagonalizable) or Jordan block filling.

    ``derivative(lam, k)`` supplies g^(k)(lam) for Jordan blocks; by default a
    central-difference estimate is used.
    """
    A = as_matrix_order(A)
    cache: dict = {}

    def gv(lam):
        if lam not in cache:
            try:
                cache[lam] = _finite(g(lam), lam)
            except (ValueError, ZeroDivisionError, OverflowError) as exc:
                raise UndefinedAtEigenvalue(f"function undefined at eigenvalue {lam}: {exc}") from exc
        return cache[lam]

    if A.diagonalizable:
        D = np.diag([gv(lam) for lam in A.eigenvalues])
        return A.P @ D @ A.P_inv
    if derivative is None:
        def derivative(lam, k):
            return _fd_derivative(g, lam, k)
    F = np.zeros((A.m, A.m), dtype=complex)
    col = 0
    for lam, size in A.jordan_blocks:
        vals = [gv(lam)] + [_finite(derivative(lam, k), lam) / math.factorial(k) for k in range(1, size)]
        for r in range(size):
            for c in range(r, size):
                F[col + r, col + c] = vals[c - r]
        col += size
    return A.P @ F @ A.P_inv


def spectral_function(A, g: Callable) -> np.ndarray:
    """sum_i G_i g(lambda_i) over distinct eigenvalues (diagonalizable A)."""
    A = as_matrix_order(A)
    if not A.diagonalizable:
        raise NonDiagonalizableOrder("spectral sum needs a diagonalizable order")
    return sum(G * _finite(g(lam), lam) for lam, G in A.projectors)


class _ScalarTable:
    """Memoized scalar differintegrals D^lam f(x) shared by the assembly routes."""

    def __init__(self, f, a: float, x, variable_index: int, grid_size: int):
        self.f = as_field(f)
        self.a = a
        self.point = _as_points(x, variable_index)
        self.k = variable_index
        self.grid_size = grid_size
        self._single: dict = {}
        self._pair: dict = {}

    def single(self, lam):
        lam = _key(lam)
        if lam not in self._single:
            order = lam.real if lam.imag == 0 else lam
            self._single[lam] = complex(scalar_value(self.f, order, self.k, self.a, self.point, self.grid_size))
        return self._single[lam]

    def lam_derivative(self, lam, k):
        lam = _key(lam)
        order = lam.real if lam.imag == 0 else lam
        spec = DifferintSpec(order=order, lower_limit=self.a, variable_index=self.k, grid_size=self.grid_size)
        return complex(lambda_derivative(self.f, spec, self.point, k))

    def pair(self, lam, rho, method: str):
        key = (_key(lam), _key(rho), method)
        if key not in self._pair:
            self._pair[key] = self._compute_pair(key[0], key[1], method)
        return self._pair[key]

    def _compute_pair(self, lam, rho, method):
        if rho == 0:
            return self.single(lam)
        if lam == 0:
            return self.single(rho)
        if method == "nested":
            if lam.imag or rho.imag:
                raise UnsupportedOrder("nested evaluation needs real eigenvalues")
            inner = differint_field(self.f, rho.real, self.k, self.a, self.grid_size, arity=self.point.shape[1])
            return complex(differint_values(inner, lam.real, self.k, self.a, self.point, self.grid_size)[0])
        if rho.imag:
            raise UnsupportedOrder("composition with a complex inner order")
        outer = lam.real if lam.imag == 0 else lam
        val, _ = corrected_composition(self.f, outer, rho.real, self.k, self.a, self.point, self.grid_size)
        return complex(val)


def _key(lam) -> complex:
    z = complex(lam)
    return complex(round(z.real, 13), round(z.imag, 13))


def matrix_differint(A, f, a: float, x, *, variable_index: int = 1, grid_size: int = 16,
                     table: _ScalarTable | None = None) -> MatrixDifferintResult:
    """D^A f(x): spectral sum for diagonalizable A, Jordan blocks otherwise."""
    A = as_matrix_order(A)
    table = table or _ScalarTable(f, a, x, variable_index, grid_size)
    if A.diagonalizable:
        return MatrixDifferintResult(spectral_function(A, table.single))
    return MatrixDifferintResult(matrix_function(A, table.single, table.lam_derivative))


def compose_matrix_differint(A, B, f, a: float, x, *, form: str = "similarity", method: str = "identity",
                             variable_index: int = 1, grid_size: int = 16,
                             table: _ScalarTable | None = None) -> MatrixDifferintResult:
    """D^A (D^B f) at x.

    form="similarity": P [R_ij S_ij] Q^-1 with R = P^-1 Q;
    form="spectral":  sum_ij G_i H_j S(lambda_i, rho_j) over distinct eigenvalues.
    S(lambda, rho) is the scalar D^lambda D^rho f, either from the composition
    rules with boundary corrections (method="identity") or by nesting two
    numerical differintegrals (method="nested").
    """
    A = as_matrix_order(A)
    B = as_matrix_order(B)
    if not (A.diagonalizable and B.diagonalizable):
        raise NonDiagonalizableOrder("composition needs diagonalizable orders")
    if A.m != B.m:
        raise ValueError("orders must have equal size")
    table = table or _ScalarTable(f, a, x, variable_index, grid_size)
    if form == "similarity":
        R = A.P_inv @ B.P
        S = np.array([[table.pair(li, rj, method) for rj in B.eigenvalues] for li in A.eigenvalues])
        return MatrixDifferintResult(A.P @ (R * S) @ B.P_inv)
    if form == "spectral":
        out = np.zeros((A.m, A.m), dtype=complex)
        for li, G in A.projectors:
            for rj, H in B.projectors:
                out += G @ H * table.pair(li, rj, method)
        return MatrixDifferintResult(out)
    raise ValueError(f"unknown form {form!r}")


def transpose_identity_check(A, B, f, a: float, x, *, method: str = "nested", grid_size: int = 16):
    """((D^A D^B f)^T, D^B D^A f) for real symmetric orders A and B."""
    mats = []
    for M in (A, B):
        E = M.entries if isinstance(M, MatrixOrder) else np.asarray(M, dtype=complex)
        if np.any(np.abs(E.imag) > 0) or not np.allclose(E, E.T, atol=1e-12):
            raise NotNormal("transpose identity needs real symmetric orders")
        mats.append(as_matrix_order(E))
    A, B = mats
    table = _ScalarTable(f, a, x, 1, grid_size)
    lhs = compose_matrix_differint(A, B, f, a, x, method=method, table=table).value.T
    rhs = compose_matrix_differint(B, A, f, a, x, method=method, table=table).value
    return lhs, rhs


def sequential_determinant(A, f, a: float, x, *, variable_index: int = 1, grid_size: int | None = None) -> float:
    """prod_i D^lambda_i f(x) as nested operators, eigenvalues applied in
    ascending order (the smallest acts first on f)."""
    A = as_matrix_order(A)
    if not A.diagonalizable:
        raise NonDiagonalizableOrder("sequential determinant needs a diagonalizable order")
    ev = sorted(A.eigenvalues, key=_sort_key)
    if any(abs(z.imag) > 0 for z in ev):
        raise UnsupportedOrder("sequential application needs real eigenvalues")
    orders = [z.real for z in ev if z.real != 0.0]
    pts = _as_points(x, variable_index)
    if grid_size is None:
        grid_size = 16 if len(orders) <= 2 else (12 if len(orders) == 3 else 8)
    g = as_field(f)
    if not orders:
        return float(g(*pts.T)[0])
    for lam in orders[:-1]:
        g = differint_field(g, lam, variable_index, a, grid_size, arity=pts.shape[1])
    return float(differint_values(g, orders[-1], variable_index, a, pts, grid_size)[0])


def trace_differint(A, f, a: float, x, *, variable_index: int = 1, grid_size: int = 16) -> float:
    """D^Tr(A) f(x), the closed side of the trace identity."""
    A = as_matrix_order(A)
    tr = complex(np.trace(A.entries))
    order = tr.real if abs(tr.imag) <= 1e-12 else tr
    return complex(scalar_value(f, order, variable_index, a, x, grid_size)).real


def integer_shift_check(A, m: int, f, a: float, x, *, variable_index: int = 1, grid_size: int = 16):
    """(d^m/dx^m applied entrywise to D^A f, D^(A + mI) f)."""
    A = as_matrix_order(A)
    pts = _as_points(x, variable_index)
    if m == 0:
        v = matrix_differint(A, f, a, x, variable_index=variable_index, grid_size=grid_size).value
        return v, v.copy()
    lhs = np.zeros((A.m, A.m), dtype=complex)
    for lam, G in A.projectors:
        if lam.imag:
            raise UnsupportedOrder("integer shift check needs real eigenvalues")
        fld = differint_field(f, lam.real, variable_index, a, grid_size, arity=pts.shape[1])
        lhs += G * float(classical_derivative_values(fld, variable_index, pts, m)[0])
    shifted = as_matrix_order(A.entries + m * np.eye(A.m))
    rhs = matrix_differint(shifted, f, a, x, variable_index=variable_index, grid_size=grid_size).value
    return lhs, rhs


def matrix_binomial(A, s: int) -> np.ndarray:
    """P diag(C(lambda_i, s)) P^-1."""
    A = as_matrix_order(A)
    if not A.diagonalizable:
        raise NonDiagonalizableOrder("matrix binomial needs a diagonalizable order")
    return matrix_function(A, lambda lam: binom(lam.real if lam.imag == 0 else lam, s))


def read_matrix(data) -> np.ndarray:
    """Row-major nested list of [re, im] pairs (or plain numbers) to a complex array."""
    rows = []
    for row in data:
        out = []
        for v in row:
            if isinstance(v, (list, tuple)):
                if len(v) != 2:
                    raise ValueError("matrix entries must be [re, im] pairs")
                out.append(complex(float(v[0]), float(v[1])))
            else:
                out.append(complex(float(v)))
        rows.append(out)
    M = np.array(rows, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    return M


def write_matrix(M: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M, dtype=complex)]
