"""Graded fractional differential forms.

A form is homogeneous: every term carries the same multiset of differential
orders.  The basis element dx_{i1}^{v1} ^ ... is stored under a key with one
index tuple per order block.  Blocks are kept in ascending order of their
order value and indices increase inside each block; the sign of the
permutation that produces this layout is absorbed into the coefficient.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import AmbientMismatch, BlockTooLarge, SignatureMismatch
from .fields import parse
from .special import is_number


@dataclass(frozen=True)
class OrderSignature:
    """Blocks of (order, multiplicity) in ascending order, ambient dimension n.

    Multiplicity 0 is allowed so that the Hodge dual of a full block keeps
    track of its order.
    """

    blocks: tuple[tuple[float, int], ...]
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("ambient dimension must be positive")
        merged: dict[float, int] = {}
        for v, p in self.blocks:
            if p < 0:
                raise ValueError("multiplicities are nonnegative")
            merged[float(v)] = merged.get(float(v), 0) + int(p)
        object.__setattr__(self, "blocks", tuple(sorted(merged.items())))

    @property
    def orders(self) -> tuple[float, ...]:
        return tuple(v for v, _ in self.blocks)

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(p for _, p in self.blocks)

    @property
    def degree(self) -> int:
        return sum(self.multiplicities)

    @property
    def total_order(self) -> float:
        return sum(v * p for v, p in self.blocks)

    def keys(self) -> Iterable[tuple[tuple[int, ...], ...]]:
        """All canonical basis keys."""
        per_block = [itertools.combinations(range(1, self.n + 1), p) for p in self.multiplicities]
        return itertools.product(*per_block)

    def to_json(self) -> list:
        return [{"order": v, "multiplicity": p} for v, p in self.blocks]


def signature(*blocks, n: int) -> OrderSignature:
    return OrderSignature(tuple(blocks), n)


def dim(sig: OrderSignature) -> int:
    """Dimension of the space of forms with this signature."""
    return math.prod(math.comb(sig.n, p) for p in sig.multiplicities)


def _parity(seq: list) -> int:
    inv = 0
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                inv += 1
    return -1 if inv % 2 else 1


def canonicalize(factors: list[tuple[float, int]], n: int, target: OrderSignature | None = None):
    """Sort (order, index) differentials; returns (sign, signature, key) or
    None when a differential repeats.

    With ``target`` the key is laid out on that signature's blocks, so empty
    blocks of multiplicity 0 are kept.
    """
    if len(set(factors)) != len(factors):
        return None
    sign = _parity(factors)
    ordered = sorted(factors)
    blocks: dict[float, list[int]] = {}
    for v, i in ordered:
        blocks.setdefault(float(v), []).append(i)
    if target is not None:
        if not set(blocks) <= set(target.orders):
            raise SignatureMismatch("differential order missing from the signature")
        return sign, target, tuple(tuple(blocks.get(v, ())) for v in target.orders)
    sig = OrderSignature(tuple((v, len(ix)) for v, ix in blocks.items()), n)
    key = tuple(tuple(blocks[v]) for v in sig.orders)
    return sign, sig, key


def _is_zero(c) -> bool:
    return is_number(c) and c == 0


def _scale(c, s):
    if s == 1:
        return c
    return -c if not is_number(c) else s * c


@dataclass(frozen=True, eq=False)
class FracForm:
    signature: OrderSignature
    terms: Mapping[tuple, object] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for key, c in dict(self.terms).items():
            key = tuple(tuple(int(i) for i in b) for b in key)
            if len(key) != len(self.signature.blocks):
                raise SignatureMismatch("key does not match the signature blocks")
            for (v, p), idx in zip(self.signature.blocks, key):
                if len(idx) != p:
                    raise SignatureMismatch(f"block of order {v} needs {p} indices")
                if any(not 1 <= i <= self.signature.n for i in idx):
                    raise AmbientMismatch("index outside the ambient dimension")
            # canonicalize within blocks
            factors = [(v, i) for v, idx in zip(self.signature.orders, key) for i in idx]
            res = canonicalize(factors, self.signature.n, self.signature)
            if res is None:
                continue
            sign, _, ckey = res
            c = _scale(c, sign)
            if ckey in clean:
                c = clean[ckey] + c
            clean[ckey] = c
        clean = {k: c for k, c in clean.items() if not _is_zero(c)}
        object.__setattr__(self, "terms", clean)

    @property
    def n(self) -> int:
        return self.signature.n

    @classmethod
    def basis(cls, factors: list[tuple[float, int]], n: int, coefficient=1.0) -> "FracForm":
        """dx_{i1}^{v1} ^ dx_{i2}^{v2} ^ ... in the given order."""
        res = canonicalize(list(factors), n)
        if res is None:
            sig = OrderSignature(tuple((v, 1) for v, _ in factors), n)
            return cls(sig, {})
        sign, sig, key = res
        return cls(sig, {key: _scale(coefficient, sign)})

    @classmethod
    def scalar(cls, value, n: int) -> "FracForm":
        return cls(OrderSignature((), n), {(): value})

    def __add__(self, other: "FracForm") -> "FracForm":
        self._check(other)
        sig = self.signature if self.terms or not other.terms else other.signature
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms[k] + c if k in terms else c
        return FracForm(sig, terms)

    def __neg__(self) -> "FracForm":
        return FracForm(self.signature, {k: _scale(c, -1) for k, c in self.terms.items()})

    def __sub__(self, other: "FracForm") -> "FracForm":
        return self + (-other)

    def __mul__(self, s) -> "FracForm":
        return FracForm(self.signature, {k: c * s for k, c in self.terms.items()})

    __rmul__ = __mul__

    def _check(self, other: "FracForm"):
        if self.n != other.n:
            raise AmbientMismatch(f"ambient dimensions differ: {self.n} vs {other.n}")
        if self.signature != other.signature and self.terms and other.terms:
            raise SignatureMismatch("forms have different signatures")

    def coefficient(self, key, point=None):
        c = self.terms.get(tuple(tuple(b) for b in key), 0.0)
        if point is not None and not is_number(c):
            return float(np.asarray(c.at(point)))
        return c

    def factors(self, key) -> list[tuple[float, int]]:
        return [(v, i) for v, idx in zip(self.signature.orders, key) for i in idx]

    def evaluate(self, point) -> "FracForm":
        """Numeric form with every coefficient evaluated at point."""
        out = {}
        for k, c in self.terms.items():
            out[k] = c if is_number(c) else float(np.asarray(c.at(point)))
        return FracForm(self.signature, out)

    def to_json(self) -> dict:
        terms = []
        for k, c in sorted(self.terms.items()):
            entry = {"indices": [list(b) for b in k]}
            if is_number(c):
                entry["coefficient"] = float(np.real(c))
            else:
                entry["expression"] = str(c)
            terms.append(entry)
        return {"n": self.n, "signature": self.signature.to_json(), "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping, names: Mapping[str, int] | None = None) -> "FracForm":
        n = int(data["n"])
        sig = OrderSignature(tuple((float(b["order"]), int(b["multiplicity"])) for b in data["signature"]), n)
        terms = {}
        for t in data["terms"]:
            key = tuple(tuple(b) for b in t["indices"])
            if "expression" in t:
                c = parse(t["expression"], names)
            else:
                c = float(t["coefficient"])
            terms[key] = terms[key] + c if key in terms else c
        return cls(sig, terms)

    def __repr__(self) -> str:
        parts = []
        for k, c in sorted(self.terms.items()):
            basis = "^".join(f"dx{i}^{v:g}" for v, i in self.factors(k)) or "1"
            parts.append(f"({c})*{basis}")
        return " + ".join(parts) if parts else "0"


def wedge(alpha: FracForm, beta: FracForm) -> FracForm:
    """Exterior product; differentials of any orders anticommute."""
    if alpha.n != beta.n:
        raise AmbientMismatch(f"ambient dimensions differ: {alpha.n} vs {beta.n}")
    n = alpha.n
    sig = OrderSignature(alpha.signature.blocks + beta.signature.blocks, n)
    terms: dict = {}
    for ka, ca in alpha.terms.items():
        fa = alpha.factors(ka)
        for kb, cb in beta.terms.items():
            res = canonicalize(fa + beta.factors(kb), n, sig)
            if res is None:
                continue
            sign, _, key = res
            c = _scale(_product(ca, cb), sign)
            terms[key] = terms[key] + c if key in terms else c
    return FracForm(sig, terms)


def _product(a, b):
    if is_number(a) and a == 1:
        return b
    if is_number(b) and b == 1:
        return a
    return a * b


def graded_sign(alpha: FracForm, beta: FracForm) -> int:
    return -1 if (alpha.signature.degree * beta.signature.degree) % 2 else 1


def _coef_value(c, point):
    if is_number(c):
        return c
    if point is None:
        raise ValueError("field coefficients need an evaluation point")
    return float(np.asarray(c.at(point)))


def inner_product(alpha: FracForm, beta: FracForm, metric: Callable | None = None, point=None) -> float:
    """Sum of coefficient products over the basis (Cartesian), or the
    contraction with the inverse metric block by block.

    ``metric(order)`` returns the n x n inverse metric g^{ij} at the point for
    differentials of that order.  A block with indices I, J contributes the
    determinant of the minor g^{I J}.
    """
    if alpha.n != beta.n:
        raise AmbientMismatch("ambient dimensions differ")
    if alpha.signature != beta.signature:
        raise SignatureMismatch("inner product needs identical signatures")
    if metric is None:
        total = 0.0
        for k, ca in alpha.terms.items():
            if k in beta.terms:
                total += _coef_value(ca, point) * _coef_value(beta.terms[k], point)
        return total
    ginv = {v: np.asarray(metric(v), dtype=float) for v in alpha.signature.orders}
    total = 0.0
    for ka, ca in alpha.terms.items():
        va = _coef_value(ca, point)
        for kb, cb in beta.terms.items():
            w = 1.0
            for v, I, J in zip(alpha.signature.orders, ka, kb):
                if I:
                    w *= float(np.linalg.det(ginv[v][np.ix_([i - 1 for i in I], [j - 1 for j in J])]))
            total += va * _coef_value(cb, point) * w
    return total


def hodge(alpha: FracForm, jacobian: Callable | None = None) -> FracForm:
    """Block-wise Hodge dual.

    Each block I of order v maps to its sorted complement I^c with the sign
    of the permutation (I, I^c) of (1..n).  ``jacobian(v)`` is the
    transformation determinant of a curvilinear chart; the coefficient is
    divided by it once per block.
    """
    n = alpha.n
    for v, p in alpha.signature.blocks:
        if p > n:
            raise BlockTooLarge(f"block of order {v} has {p} > n = {n} differentials")
    sig = OrderSignature(tuple((v, n - p) for v, p in alpha.signature.blocks), n)
    terms = {}
    for key, c in alpha.terms.items():
        sign = 1
        out_key = []
        for I in key:
            comp = tuple(i for i in range(1, n + 1) if i not in I)
            sign *= _parity(list(I) + list(comp))
            out_key.append(comp)
        if jacobian is not None:
            for v in alpha.signature.orders:
                c = c / jacobian(v)
        terms[tuple(out_key)] = _scale(c, sign)
    return FracForm(sig, terms)


def double_hodge_sign(sig: OrderSignature, n: int | None = None) -> int:
    n = sig.n if n is None else n
    s = 1
    for p in sig.multiplicities:
        if (p * (n - p)) % 2:
            s = -s
    return s


# ---------------------------------------------------------------------------
# order-spectrum forms: dx_i^{v1} ^ dx_j^{v - v1} integrated over v1


@dataclass(frozen=True, eq=False)
class SpectrumForm:
    """Midpoint-discretized family over v1 in (0, v).

    ``coefficients[m, i, j]`` multiplies the pair of blocks labelled
    (i + 1, j + 1) at node m.  In the direct layout a label is the coordinate
    of a single differential; in the dual layout (``dual=True``) it names the
    coordinate missing from an (n - 1)-block.
    """

    v: float
    n: int
    coefficients: np.ndarray
    dual: bool = False

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if c.ndim != 3 or c.shape[1:] != (self.n, self.n):
            raise ValueError("coefficients must have shape (M, n, n)")
        if c.shape[0] % 2:
            raise ValueError("node count must be even so v/2 is never a node")
        if self.v <= 0:
            raise ValueError("total order must be positive")
        object.__setattr__(self, "coefficients", c)

    @property
    def M(self) -> int:
        return self.coefficients.shape[0]

    @property
    def block_size(self) -> int:
        return self.n - 1 if self.dual else 1

    @property
    def nodes(self) -> np.ndarray:
        return (np.arange(self.M) + 0.5) * self.v / self.M

    @classmethod
    def from_function(cls, v: float, n: int, M: int, fn: Callable[[float], np.ndarray]) -> "SpectrumForm":
        nodes = (np.arange(M) + 0.5) * v / M
        return cls(v, n, np.stack([np.asarray(fn(t), dtype=float) for t in nodes]))

    def block(self, label: int) -> tuple[int, ...]:
        if not self.dual:
            return (label,)
        return tuple(k for k in range(1, self.n + 1) if k != label)

    def components(self, node: int) -> dict:
        """Basis keys (block of order v1, block of order v - v1) at one node."""
        out = {}
        for i in range(self.n):
            for j in range(self.n):
                c = self.coefficients[node, i, j]
                if c != 0:
                    out[(self.block(i + 1), self.block(j + 1))] = float(c)
        return out


def spectrum_inner_product(alpha: SpectrumForm, beta: SpectrumForm, metric: Callable | None = None) -> float:
    """Midpoint rule over v1 of sum_ij alpha_ij beta_ij.

    With ``metric(order)`` giving the inverse metric for differentials of
    that order, the pair indices are contracted with g^(v1) and g^(v - v1).
    """
    if (alpha.v, alpha.n, alpha.M, alpha.dual) != (beta.v, beta.n, beta.M, beta.dual):
        raise SignatureMismatch("spectrum forms live on different grids")
    h = alpha.v / alpha.M
    if metric is None:
        return float(h * np.sum(alpha.coefficients * beta.coefficients))
    if alpha.dual:
        raise ValueError("metric contraction is defined for the direct layout")
    total = 0.0
    for m, t in enumerate(alpha.nodes):
        g1 = np.asarray(metric(t), dtype=float)
        g2 = np.asarray(metric(alpha.v - t), dtype=float)
        total += float(np.einsum("ik,jl,ij,kl->", alpha.coefficients[m], beta.coefficients[m], g1, g2))
    return h * total


def spectrum_hodge(alpha: SpectrumForm, jacobian: Callable | None = None) -> SpectrumForm:
    """Node-wise dual of each pair of blocks.

    dx_i maps to the (n - 1)-block missing i with sign (-1)^(i-1); that
    block maps back to dx_i with sign (-1)^(n-i).  ``jacobian(v)`` divides
    once per block.
    """
    n = alpha.n
    i = np.arange(1, n + 1)
    sign = (-1.0) ** (n - i) if alpha.dual else (-1.0) ** (i - 1)
    c = alpha.coefficients * sign[None, :, None] * sign[None, None, :]
    if jacobian is not None:
        scale = np.array([jacobian(t) * jacobian(alpha.v - t) for t in alpha.nodes])
        c = c / scale[:, None, None]
    return SpectrumForm(alpha.v, n, c, not alpha.dual)
