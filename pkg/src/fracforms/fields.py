"""Scalar fields over numbered coordinates.

Two kinds of field share one calling convention, ``field(*coords)``, with
numpy broadcasting across the coordinate arrays:

* `Expr` trees built from constants, coordinates, arithmetic and a handful
  of elementary functions.  They can be differentiated symbolically and are
  what the expression mini-language parses into.
* `LazyField` wraps a function of a ``(P, n)`` array of points.  Results of
  numerical differintegration are returned this way so they can be fed back
  into another differintegral.

Coordinates are numbered from 1, matching the ``x1 .. xn`` identifiers.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import ParseError
from .special import is_number


class Field:
    """Base class for pointwise-evaluable scalar fields."""

    arity: int = 0

    def __call__(self, *coords):
        coords = [np.asarray(c) for c in coords]
        shape = np.broadcast_shapes(*(c.shape for c in coords)) if coords else ()
        with np.errstate(all="ignore"):
            out = np.asarray(self._eval(coords, shape))
        if out.shape != shape:
            out = np.broadcast_to(out, shape).copy()
        return out

    def _eval(self, coords, shape):
        raise NotImplementedError

    def depends_on(self, k: int) -> bool:
        return True

    def at(self, point) -> float:
        """Evaluate at a single point given as a sequence of coordinates."""
        point = np.atleast_1d(np.asarray(point))
        return self(*point).item()

    # arithmetic, promoted to Expr when both sides are expressions
    def _combine(self, other, op, sym):
        other = as_field(other)
        if isinstance(self, Expr) and isinstance(other, Expr):
            return _EXPR_OPS[sym](self, other)
        left, right = self, other
        arity = max(left.arity, right.arity)

        def fn(pts):
            cols = [pts[:, i] for i in range(pts.shape[1])]
            return op(left(*cols), right(*cols))

        return LazyField(fn, arity, label=f"({left} {sym} {right})")

    def __add__(self, other):
        return self._combine(other, np.add, "+")

    def __radd__(self, other):
        return as_field(other)._combine(self, np.add, "+")

    def __sub__(self, other):
        return self._combine(other, np.subtract, "-")

    def __rsub__(self, other):
        return as_field(other)._combine(self, np.subtract, "-")

    def __mul__(self, other):
        return self._combine(other, np.multiply, "*")

    def __rmul__(self, other):
        return as_field(other)._combine(self, np.multiply, "*")

    def __truediv__(self, other):
        return self._combine(other, np.divide, "/")

    def __rtruediv__(self, other):
        return as_field(other)._combine(self, np.divide, "/")

    def __neg__(self):
        return self * -1.0


class LazyField(Field):
    """A field computed numerically from a function of stacked points.

    ``fn`` receives a float array of shape ``(P, n)`` and returns ``P`` values.
    Small evaluations are memoized per instance; the values are deterministic
    so concurrent writers can only store identical entries.
    """

    _CACHE_LIMIT = 64

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], arity: int, label: str = "lazy"):
        self.fn = fn
        self.arity = arity
        self.label = label
        self._cache: dict = {}

    def _eval(self, coords, shape):
        if len(coords) < self.arity:
            raise ValueError(f"field needs {self.arity} coordinates, got {len(coords)}")
        pts = np.stack([np.broadcast_to(c, shape).ravel() for c in coords], axis=1)
        if pts.dtype.kind not in "fc":
            pts = pts.astype(float)
        key = None
        if pts.shape[0] <= self._CACHE_LIMIT:
            key = (pts.shape, pts.dtype.str, pts.tobytes())
            hit = self._cache.get(key)
            if hit is not None:
                return hit.reshape(shape)
        vals = np.asarray(self.fn(pts))
        if key is not None:
            self._cache[key] = vals
        return vals.reshape(shape)

    def __repr__(self):
        return f"LazyField({self.label})"

    __str__ = __repr__


class FunctionField(Field):
    """Adapter for a plain vectorized callable ``f(*coords)``."""

    def __init__(self, fn: Callable, arity: int = 1):
        self.fn = fn
        self.arity = arity

    def _eval(self, coords, shape):
        return self.fn(*coords[: self.arity])

    def __repr__(self):
        return f"FunctionField({getattr(self.fn, '__name__', 'fn')})"


# ---------------------------------------------------------------------------
# expression trees


class Expr(Field):
    """Symbolic expression node."""

    def diff(self, k: int) -> "Expr":
        raise NotImplementedError

    def diff_n(self, k: int, n: int) -> "Expr":
        out = self
        for _ in range(n):
            out = out.diff(k)
        return out

    def free_vars(self) -> set[int]:
        raise NotImplementedError

    def depends_on(self, k: int) -> bool:
        return k in self.free_vars()

    @property
    def arity(self) -> int:  # type: ignore[override]
        return max(self.free_vars(), default=0)

    def poly_degree(self, k: int) -> int | None:
        """Degree as a polynomial in coordinate k, or None if not polynomial."""
        return None


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: float | complex

    def _eval(self, coords, shape):
        return np.full(shape, self.value)

    def diff(self, k):
        return ZERO

    def free_vars(self):
        return set()

    def poly_degree(self, k):
        return 0

    def __str__(self):
        v = self.value
        if isinstance(v, complex):
            return f"({v.real!r}+{v.imag!r}*i)"
        if v < 0:
            return f"({v!r})"
        return repr(float(v)) if v != int(v) or abs(v) > 1e15 else str(int(v))


@dataclass(frozen=True, eq=True)
class Var(Expr):
    index: int
    name: str | None = None

    def _eval(self, coords, shape):
        if self.index > len(coords):
            raise ValueError(f"coordinate x{self.index} not supplied")
        return coords[self.index - 1]

    def diff(self, k):
        return ONE if k == self.index else ZERO

    def free_vars(self):
        return {self.index}

    def poly_degree(self, k):
        return 1 if k == self.index else 0

    def __str__(self):
        return self.name or f"x{self.index}"


@dataclass(frozen=True, eq=True)
class Add(Expr):
    left: Expr
    right: Expr

    def _eval(self, coords, shape):
        return self.left._eval(coords, shape) + self.right._eval(coords, shape)

    def diff(self, k):
        return add(self.left.diff(k), self.right.diff(k))

    def free_vars(self):
        return self.left.free_vars() | self.right.free_vars()

    def poly_degree(self, k):
        a, b = self.left.poly_degree(k), self.right.poly_degree(k)
        return None if a is None or b is None else max(a, b)

    def __str__(self):
        return f"({self.left} + {self.right})"


@dataclass(frozen=True, eq=True)
class Sub(Expr):
    left: Expr
    right: Expr

    def _eval(self, coords, shape):
        return self.left._eval(coords, shape) - self.right._eval(coords, shape)

    def diff(self, k):
        return sub(self.left.diff(k), self.right.diff(k))

    def free_vars(self):
        return self.left.free_vars() | self.right.free_vars()

    def poly_degree(self, k):
        a, b = self.left.poly_degree(k), self.right.poly_degree(k)
        return None if a is None or b is None else max(a, b)

    def __str__(self):
        return f"({self.left} - {self.right})"


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    left: Expr
    right: Expr

    def _eval(self, coords, shape):
        return self.left._eval(coords, shape) * self.right._eval(coords, shape)

    def diff(self, k):
        return add(mul(self.left.diff(k), self.right), mul(self.left, self.right.diff(k)))

    def free_vars(self):
        return self.left.free_vars() | self.right.free_vars()

    def poly_degree(self, k):
        a, b = self.left.poly_degree(k), self.right.poly_degree(k)
        return None if a is None or b is None else a + b

    def __str__(self):
        return f"({self.left} * {self.right})"


@dataclass(frozen=True, eq=True)
class Div(Expr):
    left: Expr
    right: Expr

    def _eval(self, coords, shape):
        return self.left._eval(coords, shape) / self.right._eval(coords, shape)

    def diff(self, k):
        u, v = self.left, self.right
        num = sub(mul(u.diff(k), v), mul(u, v.diff(k)))
        return div(num, power(v, Const(2.0)))

    def free_vars(self):
        return self.left.free_vars() | self.right.free_vars()

    def poly_degree(self, k):
        if self.right.depends_on(k):
            return None
        return self.left.poly_degree(k)

    def __str__(self):
        return f"({self.left} / {self.right})"


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exponent: Expr

    def _eval(self, coords, shape):
        b = self.base._eval(coords, shape)
        e = self.exponent._eval(coords, shape)
        return np.power(b, e)

    def diff(self, k):
        u, v = self.base, self.exponent
        if not v.depends_on(k):
            if isinstance(v, Const):
                inner = power(u, Const(v.value - 1))
            else:
                inner = power(u, sub(v, ONE))
            return mul(mul(v, inner), u.diff(k))
        # general case u^v (v' ln u + v u'/u)
        return mul(self, add(mul(v.diff(k), func("ln", u)), div(mul(v, u.diff(k)), u)))

    def free_vars(self):
        return self.base.free_vars() | self.exponent.free_vars()

    def poly_degree(self, k):
        if not self.depends_on(k):
            return 0
        if self.exponent.depends_on(k) or not isinstance(self.exponent, Const):
            return None
        p = self.exponent.value
        d = self.base.poly_degree(k)
        if d is None or isinstance(p, complex) or p < 0 or p != int(p):
            return None
        return d * int(p)

    def __str__(self):
        return f"({self.base} ^ {self.exponent})"



_FUNCS: dict[str, tuple[Callable, int]] = {
    "sin": (np.sin, 1),
    "cos": (np.cos, 1),
    "tan": (np.tan, 1),
    "exp": (np.exp, 1),
    "ln": (np.log, 1),
    "sqrt": (np.sqrt, 1),
    "atan": (np.arctan, 1),
    "atan2": (np.arctan2, 2),
}


@dataclass(frozen=True, eq=True)
class Func(Expr):
    name: str
    args: tuple

    def _eval(self, coords, shape):
        fn, _ = _FUNCS[self.name]
        vals = [a._eval(coords, shape) for a in self.args]
        return fn(*vals)

    def diff(self, k):
        n = self.name
        if n == "atan2":
            y, x = self.args
            num = sub(mul(x, y.diff(k)), mul(y, x.diff(k)))
            return div(num, add(power(x, TWO), power(y, TWO)))
        (u,) = self.args
        du = u.diff(k)
        if du == ZERO:
            return ZERO
        if n == "sin":
            d = func("cos", u)
        elif n == "cos":
            d = neg(func("sin", u))
        elif n == "tan":
            d = add(ONE, power(func("tan", u), TWO))
        elif n == "exp":
            d = self
        elif n == "ln":
            d = div(ONE, u)
        elif n == "sqrt":
            d = div(ONE, mul(TWO, self))
        elif n == "atan":
            d = div(ONE, add(ONE, power(u, TWO)))
        else:  # pragma: no cover
            raise ValueError(n)
        return mul(d, du)

    def free_vars(self):
        out: set[int] = set()
        for a in self.args:
            out |= a.free_vars()
        return out

    def poly_degree(self, k):
        return 0 if not self.depends_on(k) else None

    def __str__(self):
        return f"{self.name}(" + ", ".join(str(a) for a in self.args) + ")"


ZERO = Const(0.0)
ONE = Const(1.0)
TWO = Const(2.0)


def _const(e) -> float | complex | None:
    return e.value if isinstance(e, Const) else None


def add(a: Expr, b: Expr) -> Expr:
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return Const(ca + cb)
    if ca == 0:
        return b
    if cb == 0:
        return a
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return Const(ca - cb)
    if cb == 0:
        return a
    if ca == 0:
        return neg(b)
    return Sub(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return Const(ca * cb)
    if ca == 0 or cb == 0:
        return ZERO
    if ca == 1:
        return b
    if cb == 1:
        return a
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None and cb != 0:
        return Const(ca / cb)
    if ca == 0:
        return ZERO
    if cb == 1:
        return a
    return Div(a, b)


def neg(a: Expr) -> Expr:
    ca = _const(a)
    if ca is not None:
        return Const(-ca)
    return Mul(Const(-1.0), a)


def power(a: Expr, b: Expr) -> Expr:
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return Const(ca**cb)
    if cb == 0:
        return ONE
    if cb == 1:
        return a
    return Pow(a, b)


def func(name: str, *args: Expr) -> Expr:
    if name not in _FUNCS:
        raise ValueError(f"unknown function {name!r}")
    if all(isinstance(a, Const) for a in args):
        with np.errstate(all="ignore"):
            return Const(complex_or_float(_FUNCS[name][0](*[a.value for a in args])))
    return Func(name, tuple(args))


def complex_or_float(v):
    v = np.asarray(v).item()
    return v


_EXPR_OPS = {"+": add, "-": sub, "*": mul, "/": div}


def as_field(obj, names: Mapping[str, int] | None = None) -> Field:
    """Coerce numbers, strings and callables to a `Field`."""
    if isinstance(obj, Field):
        return obj
    if is_number(obj) or isinstance(obj, np.generic):
        return Const(np.asarray(obj).item())
    if isinstance(obj, str):
        return parse(obj, names)
    if callable(obj):
        return FunctionField(obj, 1)
    raise TypeError(f"cannot interpret {obj!r} as a field")


def power_law(expr: Field, k: int, a: float):
    """Match ``expr == coef * (x_k - a)^p`` with coef independent of x_k.

    Returns ``(coef, p)`` where coef is an Expr, or None.
    """
    if not isinstance(expr, Expr):
        return None
    if not expr.depends_on(k):
        return expr, 0.0
    if _is_shifted_var(expr, k, a):
        return ONE, 1.0
    if isinstance(expr, Pow) and isinstance(expr.exponent, Const):
        if _is_shifted_var(expr.base, k, a):
            return ONE, expr.exponent.value
        inner = power_law(expr.base, k, a)
        if inner is not None and not isinstance(expr.exponent.value, complex):
            c, p = inner
            e = expr.exponent.value
            return power(c, Const(e)), p * e
        return None
    if isinstance(expr, Mul):
        lhs, rhs = power_law(expr.left, k, a), power_law(expr.right, k, a)
        if lhs is None or rhs is None:
            return None
        return mul(lhs[0], rhs[0]), lhs[1] + rhs[1]
    if isinstance(expr, Div) and not expr.right.depends_on(k):
        lhs = power_law(expr.left, k, a)
        if lhs is None:
            return None
        return div(lhs[0], expr.right), lhs[1]
    return None


def _is_shifted_var(e: Expr, k: int, a: float) -> bool:
    if isinstance(e, Var) and e.index == k:
        return a == 0
    if isinstance(e, Sub) and isinstance(e.left, Var) and e.left.index == k:
        return isinstance(e.right, Const) and e.right.value == a
    if isinstance(e, Add) and isinstance(e.left, Var) and e.left.index == k:
        return isinstance(e.right, Const) and e.right.value == -a
    return False


# ---------------------------------------------------------------------------
# mini-language

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)
_CONSTANTS = {"pi": math.pi, "e": math.e}
_XN = re.compile(r"x(\d+)$")


class _Parser:
    def __init__(self, text: str, names: Mapping[str, int] | None):
        self.text = text
        self.names = dict(names or {})
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m:
                start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
                raise ParseError(f"unexpected character {text[start]!r}", self._byte(start))
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def _byte(self, char_offset: int) -> int:
        return len(self.text[:char_offset].encode("utf-8"))

    def peek(self):
        return self.tokens[self.i]

    def take(self, value=None):
        tok = self.tokens[self.i]
        if value is not None and tok[1] != value:
            what = tok[1] or "end of input"
            raise ParseError(f"expected {value!r}, found {what!r}", self._byte(tok[2]))
        self.i += 1
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", self._byte(tok[2]))
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return neg(self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.pow()

    def pow(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            return power(base, self.unary())
        return base

    def atom(self):
        kind, val, off = self.take()
        if kind == "num":
            return Const(float(val))
        if kind == "op" and val == "(":
            e = self.expr()
            self.take(")")
            return e
        if kind == "id":
            if self.peek()[1] == "(":
                self.take("(")
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.take(")")
                if val == "pow":
                    if len(args) != 2:
                        raise ParseError("pow takes two arguments", self._byte(off))
                    return power(args[0], args[1])
                if val not in _FUNCS:
                    raise ParseError(f"unknown function {val!r}", self._byte(off))
                if len(args) != _FUNCS[val][1]:
                    raise ParseError(f"{val} takes {_FUNCS[val][1]} argument(s)", self._byte(off))
                return func(val, *args)
            if val in self.names:
                return Var(self.names[val], val)
            m = _XN.match(val)
            if m and int(m.group(1)) >= 1:
                return Var(int(m.group(1)))
            if val in _CONSTANTS:
                return Const(_CONSTANTS[val])
            raise ParseError(f"unknown identifier {val!r}", self._byte(off))
        what = val or "end of input"
        raise ParseError(f"unexpected {what!r}", self._byte(off))


def parse(text: str, names: Mapping[str, int] | None = None) -> Expr:
    """Parse the infix mini-language into an `Expr`.

    Identifiers ``x1 .. xn`` are coordinates; ``names`` maps extra identifiers
    (for instance ``{"r": 1, "theta": 2}``) to coordinate numbers.
    """
    return _Parser(text, names).parse()
