"""Command-line front end: ``fracforms <subcommand> [options]``.

Exit status is 0 on success, 1 on a computation error (or a failing
identity suite) and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from . import coords as C
from . import covariant as cov
from . import exterior as X
from . import forms as F
from . import identities as ids
from .differint import DifferintSpec, SCHEMES, closed_form_value, differint
from .errors import FracFormsError, ParseError, SeriesNoConverge
from .fields import parse
from .matrix_order import as_matrix_order, matrix_differint
from .serialize import complex_matrix, document, dumps, fmt, load_json, parse_matrix, parse_point, parse_points

PROG = "fracforms"


class UsageError(Exception):
    def __init__(self, message: str, parser: argparse.ArgumentParser):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, self)


def _one_line_usage(parser: argparse.ArgumentParser) -> str:
    return " ".join(parser.format_usage().split())


# ---------------------------------------------------------------------------
# argument types; their names appear in argparse's "invalid <type> value"


def number(text: str) -> float:
    v = float(text)
    if not np.isfinite(v):
        raise ValueError(text)
    return v


def order(text: str):
    """Real order, or complex written like ``0.5+0.2j``."""
    try:
        return number(text)
    except ValueError:
        z = complex(text.replace(" ", ""))
        return z.real if z.imag == 0 else z


def count(text: str) -> int:
    v = int(text)
    if v < 1:
        raise ValueError(text)
    return v


def number_list(text: str) -> tuple[float, ...]:
    return tuple(number(t) for t in text.split(","))


# ---------------------------------------------------------------------------
# payload readers; failures become usage errors naming the flag


@dataclass
class Ctx:
    parser: argparse.ArgumentParser
    args: argparse.Namespace

    def fail(self, flag: str, message: str):
        raise UsageError(f"argument {flag}: {message}", self.parser)

    def read(self, flag: str, value: str) -> str:
        """Inline payload, or the contents of a file path."""
        if value.lstrip()[:1] in ("[", "{"):
            return value
        try:
            with open(value, encoding="utf-8") as fh:
                return fh.read()
        except OSError as exc:
            self.fail(flag, f"cannot read {value!r}: {exc.strerror}")

    def expr(self, flag: str, text: str, names=None):
        try:
            return parse(text, names)
        except ParseError as exc:
            self.fail(flag, str(exc))

    def points(self, n: int | None = None, names=None) -> tuple[list[str] | None, np.ndarray]:
        a = self.args
        if a.points is not None:
            try:
                header, pts = parse_points(self.read("--points", a.points))
            except ParseError as exc:
                self.fail("--points", str(exc))
            if names and set(header) == set(names):
                pts = pts[:, [header.index(nm) for nm in names]]
                header = list(names)
        else:
            header = None
            try:
                pts = np.array([parse_point(t) for t in a.at])
            except ParseError as exc:
                self.fail("--at", str(exc))
            except ValueError:
                self.fail("--at", "points must have the same number of coordinates")
        if n is not None and pts.shape[1] != n:
            self.fail("--points" if a.points is not None else "--at",
                      f"expected {n} coordinates per point, got {pts.shape[1]}")
        return header, pts

    def matrix(self, flag: str = "--matrix"):
        try:
            return parse_matrix(self.read(flag, getattr(self.args, flag[2:].replace("-", "_"))))
        except ParseError as exc:
            self.fail(flag, str(exc))

    def chart(self) -> C.CoordMap:
        a = self.args
        if a.chart is not None and a.forward is not None:
            self.fail("--forward", "not allowed together with --chart")
        if a.chart is not None:
            cmap = C.chart(a.chart)
        elif a.forward is not None:
            fwd = [t.strip() for t in a.forward.split(";")]
            if a.inverse is None:
                self.fail("--inverse", "required with --forward")
            inv = [t.strip() for t in a.inverse.split(";")]
            names = [t.strip() for t in a.names.split(",")] if a.names else [f"y{i + 1}" for i in range(len(fwd))]
            if not (len(fwd) == len(inv) == len(names)):
                self.fail("--inverse", "forward, inverse and names need the same length")
            try:
                cmap = C.make_chart("custom", fwd, inv, names)
            except ParseError as exc:
                self.fail("--forward", str(exc))
        else:
            self.fail("--chart", "a chart name or --forward/--inverse is required")
        for flag, attr in (("--lower-x", "lower_x"), ("--lower-y", "lower_y")):
            v = getattr(a, attr)
            if v is not None and len(v) != cmap.n:
                self.fail(flag, f"expected {cmap.n} values")
        return cmap.with_limits(a.lower_x, a.lower_y)

    def form(self, flag: str, value: str) -> F.FracForm:
        try:
            data = load_json(self.read(flag, value), "form")
            return _form_from_json(data)
        except ParseError as exc:
            self.fail(flag, str(exc))
        except (KeyError, TypeError, ValueError) as exc:
            self.fail(flag, f"malformed form: {exc}")

    def order_or_matrix(self):
        a = self.args
        if (a.order is None) == (a.matrix is None):
            self.fail("--order", "give exactly one of --order or --matrix")
        if a.matrix is not None:
            return None, self.matrix()
        if isinstance(a.order, complex):
            self.fail("--order", "complex orders are only supported by differint")
        return a.order, None


def _form_from_json(data) -> F.FracForm:
    """Canonical layout (signature + indices) or a list of factor products:

    {"n": 2, "terms": [{"factors": [[0.5, 1], [0.5, 2]], "expression": "x1*x2"}]}
    """
    if not isinstance(data, dict):
        raise TypeError("form must be a JSON object")
    if "signature" in data:
        return F.FracForm.from_json(data)
    n = int(data["n"])
    total = None
    for t in data["terms"]:
        coef = parse(t["expression"]) if "expression" in t else float(t.get("coefficient", 1.0))
        factors = [(float(v), int(i)) for v, i in t.get("factors", [])]
        piece = F.FracForm.basis(factors, n, coef)
        total = piece if total is None else total + piece
    if total is None:
        raise ValueError("form has no terms")
    return total


# ---------------------------------------------------------------------------
# output


def _emit(args, command: str, payload: dict, table: list[str]) -> None:
    if args.json is not None:
        text = dumps(document(command, payload))
        if args.json == "-":
            sys.stdout.write(text)
        else:
            with open(args.json, "w", encoding="utf-8") as fh:
                fh.write(text)
        return
    sys.stdout.write("\n".join(table) + "\n")


def _row(*cells) -> str:
    return "  ".join(c if isinstance(c, str) else fmt(c) for c in cells)


def _pt_text(p) -> str:
    return ",".join(fmt(v) for v in p)


def _matrix_text(M) -> list[str]:
    return ["  " + _row(*[complex(z) if np.iscomplexobj(M) else float(z) for z in row]) for row in np.asarray(M)]


# ---------------------------------------------------------------------------
# subcommands


def cmd_differint(ctx: Ctx) -> None:
    a = ctx.args
    names = {nm: i + 1 for i, nm in enumerate(a.names.split(","))} if a.names else None
    header, pts = ctx.points()
    if names is None and header and not all(h == f"x{i + 1}" for i, h in enumerate(header)):
        names = {nm: i + 1 for i, nm in enumerate(header)}
    f = ctx.expr("--expr", a.expr, names)
    if a.var > pts.shape[1]:
        ctx.fail("--var", f"points have only {pts.shape[1]} coordinates")
    out, table = [], [_row("point", "value", "scheme", "estimated_error")]
    for p in pts:
        if isinstance(a.order, complex):
            val = complex(closed_form_value(f, a.order, a.var, a.lower, p))
            res = {"point": p, "value": val, "scheme": "closed-form", "estimated_error": 0.0}
        else:
            spec = DifferintSpec(a.order, a.lower, a.var, a.scheme, a.grid_size, a.tolerance)
            r = differint(f, spec, p)
            res = {"point": p, "value": r.value, "scheme": r.scheme_used, "estimated_error": r.estimated_error}
        out.append(res)
        table.append(_row(_pt_text(p), res["value"], res["scheme"], res["estimated_error"]))
    _emit(a, "differint", {"expression": str(f), "order": a.order, "lower": a.lower,
                           "variable_index": a.var, "results": out}, table)


def cmd_matrix_differint(ctx: Ctx) -> None:
    a = ctx.args
    A = as_matrix_order(ctx.matrix())
    _, pts = ctx.points()
    f = ctx.expr("--expr", a.expr)
    out, table = [], [f"classification {A.classification}"]
    for p in pts:
        M = matrix_differint(A, f, a.lower, p, variable_index=a.var, grid_size=a.grid_size).value
        out.append({"point": p, "value": complex_matrix(M)})
        table.append(f"point {_pt_text(p)}")
        table.extend(_matrix_text(M))
    _emit(a, "matrix-differint", {"expression": str(f), "lower": a.lower, "classification": A.classification,
                                  "eigenvalues": [complex(z) for z in A.eigenvalues], "results": out}, table)


def cmd_jacobian(ctx: Ctx) -> None:
    a = ctx.args
    cmap = ctx.chart()
    nu, Mx = ctx.order_or_matrix()
    _, pts = ctx.points(cmap.n, cmap.names)
    out, table = [], []
    for p in pts:
        table.append(f"point {_pt_text(p)}")
        if Mx is None:
            J = C.jacobian(cmap, nu, p, a.grid_size)
            out.append({"point": p, "jacobian": J.values, "residual": J.residual})
            table.extend(_matrix_text(J.values))
            table.append(_row("residual", J.residual))
        else:
            JA = C.matrix_order_jacobian(cmap, Mx, p, a.grid_size)
            out.append({"point": p, "jacobian": [[complex_matrix(JA[j, i]) for i in range(cmap.n)]
                                                 for j in range(cmap.n)]})
            for j in range(cmap.n):
                for i in range(cmap.n):
                    table.append(f" [{j + 1},{i + 1}]")
                    table.extend(_matrix_text(JA[j, i]))
    _emit(a, "jacobian", {"chart": cmap.name, "names": list(cmap.names), "order": nu,
                          "matrix": None if Mx is None else complex_matrix(Mx), "results": out}, table)


def cmd_metric(ctx: Ctx) -> None:
    a = ctx.args
    cmap = ctx.chart()
    if a.order is None:
        ctx.fail("--order", "required")
    _, pts = ctx.points(cmap.n, cmap.names)
    out, table = [], []
    for p in pts:
        g = C.metric(cmap, a.order, p, a.grid_size)
        out.append({"point": p, "g": g.g, "g_inv": g.g_inv})
        table.append(f"point {_pt_text(p)}")
        table.extend(_matrix_text(g.g))
    _emit(a, "metric", {"chart": cmap.name, "order": a.order, "results": out}, table)


def _form_output(form: F.FracForm, at) -> tuple[dict, list[str]]:
    shown = form.evaluate(at) if at is not None else form
    return shown.to_json(), [repr(shown)]


def _single_point(ctx: Ctx):
    a = ctx.args
    if a.at is None:
        return None
    if len(a.at) != 1:
        ctx.fail("--at", "give a single point")
    try:
        return parse_point(a.at[0])
    except ParseError as exc:
        ctx.fail("--at", str(exc))


def cmd_wedge(ctx: Ctx) -> None:
    a = ctx.args
    left, right = ctx.form("--left", a.left), ctx.form("--right", a.right)
    at = _single_point(ctx)
    result = F.wedge(left, right)
    doc, table = _form_output(result, at)
    _emit(a, "wedge", {"form": doc, "graded_sign": F.graded_sign(left, right)}, table)


def _chart_metric_inverse(ctx: Ctx, at):
    cmap = ctx.chart()
    if at is None:
        ctx.fail("--at", "required with a chart")
    return lambda v: C.metric(cmap, v, at, ctx.args.grid_size).g_inv


def cmd_hodge(ctx: Ctx) -> None:
    a = ctx.args
    form = ctx.form("--form", a.form)
    at = _single_point(ctx)
    jac = None
    if a.chart is not None or a.forward is not None:
        cmap = ctx.chart()
        if at is None:
            ctx.fail("--at", "required with a chart")
        jac = lambda v: float(np.linalg.det(C.jacobian(cmap, v, at, a.grid_size).values))  # noqa: E731
    result = F.hodge(form, jac)
    doc, table = _form_output(result, at)
    _emit(a, "hodge", {"form": doc, "double_hodge_sign": F.double_hodge_sign(form.signature)}, table)


def cmd_inner(ctx: Ctx) -> None:
    a = ctx.args
    left, right = ctx.form("--left", a.left), ctx.form("--right", a.right)
    at = _single_point(ctx)
    metric = None
    if a.chart is not None or a.forward is not None:
        metric = _chart_metric_inverse(ctx, at)
    value = F.inner_product(left, right, metric, at)
    _emit(a, "inner", {"value": value}, [_row("inner", value)])


def cmd_poincare(ctx: Ctx) -> None:
    a = ctx.args
    if (a.form is None) == (a.expr is None):
        ctx.fail("--form", "give exactly one of --form or --expr")
    if a.form is not None:
        form = ctx.form("--form", a.form)
    else:
        form = F.FracForm.scalar(ctx.expr("--expr", a.expr), a.dim)
    n = form.n
    lower = a.lower if a.lower is not None else (0.0,) * n
    if len(lower) != n:
        ctx.fail("--lower", f"expected {n} values")
    nu, Mx = ctx.order_or_matrix()
    _, pts = ctx.points(n)
    tol = a.tolerance
    residuals, table = [], [_row("order", "point", "residual")]
    orders = [nu] if Mx is None else None
    if Mx is not None:
        vals = X.matrix_exterior_residual(form, Mx, lower, pts, a.grid_size)
        orders = [z.real for z in as_matrix_order(Mx).distinct]
        for lam, r in zip(orders, vals):
            residuals.append({"order": lam, "residual": r})
            table.append(_row(lam, "all", r))
    else:
        spec = X.ExteriorSpec(nu, lower, a.grid_size)
        for p in pts:
            r = X.poincare_residual(form, spec, p[None])
            residuals.append({"order": nu, "point": p, "residual": r})
            table.append(_row(nu, _pt_text(p), r))
    ok = all(r["residual"] <= tol for r in residuals)
    table.append(_row("tolerance", tol) + f"  pass {str(ok).lower()}")
    _emit(a, "poincare", {"residuals": residuals, "tolerance": tol, "pass": ok}, table)


def cmd_covariant(ctx: Ctx) -> None:
    a = ctx.args
    cmap = ctx.chart()
    nu, Mx = ctx.order_or_matrix()
    names = {nm: i + 1 for i, nm in enumerate(cmap.names)}
    V = [ctx.expr("--field", t.strip(), names) for t in a.field.split(";")]
    if len(V) != cmap.n:
        ctx.fail("--field", f"expected {cmap.n} components separated by ';'")
    if not 1 <= a.direction <= cmap.n:
        ctx.fail("--direction", f"must be between 1 and {cmap.n}")
    _, pts = ctx.points(cmap.n, cmap.names)
    b = a.direction
    out, table = [], [_row("point", "component", "direct", "series", "residual")]
    for p in pts:
        if Mx is None:
            direct = cov.covariant_direct(V, cmap, nu, b, p, a.grid_size)
            try:
                conn = cov.connection_functional(V, cmap, nu, b, p, a.tolerance, a.grid_size)
            except SeriesNoConverge as exc:
                # the direct value stands on its own; the series is a diagnostic
                out.append({"point": p, "direct": direct, "series": None, "residual": None,
                            "series_error": str(exc)})
                for l in range(cmap.n):
                    table.append(_row(_pt_text(p), str(l + 1), direct[l], "-", "-"))
                table.append(f"  series: {exc}")
                continue
            series = cov.plain_derivative(V, cmap, nu, b, p, a.grid_size) + conn.value
            res = float(np.max(np.abs(direct - series)))
            out.append({"point": p, "direct": direct, "series": series, "residual": res,
                        "series_terms": conn.terms_used})
            for l in range(cmap.n):
                table.append(_row(_pt_text(p), str(l + 1), direct[l], series[l], res))
        else:
            direct = cov.matrix_covariant(V, cmap, Mx, b, p, a.grid_size)
            series = cov.matrix_covariant_series(V, cmap, Mx, b, p, a.tolerance, a.grid_size)
            res = float(np.max(np.abs(direct - series)))
            out.append({"point": p, "direct": [complex_matrix(D) for D in direct],
                        "series": [complex_matrix(S) for S in series], "residual": res})
            table.append(_row(_pt_text(p), "all", "-", "-", res))
    _emit(a, "covariant", {"chart": cmap.name, "order": nu, "direction": b, "tolerance": a.tolerance,
                           "results": out}, table)


def cmd_identities(ctx: Ctx) -> int:
    a = ctx.args
    report = ids.run_suite(a.filter, a.profile, a.seed)
    if a.json is not None:
        text = ids.report_json(report)
        if a.json == "-":
            sys.stdout.write(text)
        else:
            with open(a.json, "w", encoding="utf-8") as fh:
                fh.write(text)
    else:
        sys.stdout.write(ids.report_table(report))
    return 1 if ids.suite_failed(report) else 0


def cmd_polar_example(ctx: Ctx) -> None:
    a = ctx.args
    ex = C.polar_example(a.r, a.theta, a.order, a.grid_size)
    table = [_row("r", ex["r"], "theta", ex["theta"], "order", ex["order"]), "J"]
    table.extend(_matrix_text(ex["J"]))
    table.append(_row("residual", ex["residual"]))
    for key, c in sorted(ex["comparison"].items()):
        table.append(_row(key, c["computed"], c["reference"], c["delta"]))
    _emit(a, "polar-example", ex, table)


# ---------------------------------------------------------------------------
# parser


def _add_json(p):
    p.add_argument("--json", nargs="?", const="-", metavar="PATH",
                   help="emit JSON (to PATH if given, else standard output)")


def _add_points(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--at", action="append", metavar="X1,X2,...", help="one point (repeatable)")
    g.add_argument("--points", metavar="FILE", help="CSV file with a header row")


def _add_chart(p):
    p.add_argument("--chart", choices=C.CHARTS)
    p.add_argument("--forward", metavar="EXPRS", help="x_i(y) expressions separated by ';'")
    p.add_argument("--inverse", metavar="EXPRS", help="y_j(x) expressions separated by ';'")
    p.add_argument("--names", metavar="NAMES", help="chart coordinate names, comma separated")
    p.add_argument("--lower-x", type=number_list, metavar="A1,A2")
    p.add_argument("--lower-y", type=number_list, metavar="B1,B2")


def _add_grid(p):
    p.add_argument("--grid-size", type=count, default=16, metavar="N")


def build_parser() -> _Parser:
    parser = _Parser(prog=PROG, description="Fractional exterior calculus engine.", allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text, allow_abbrev=False)
        _add_json(p)
        return p

    p = add("differint", "Riemann-Liouville differintegral of an expression.")
    p.add_argument("--expr", required=True)
    p.add_argument("--order", type=order, required=True)
    p.add_argument("--lower", type=number, default=0.0)
    p.add_argument("--var", type=count, default=1, help="1-based coordinate index")
    p.add_argument("--names", help="coordinate names, comma separated")
    p.add_argument("--scheme", choices=SCHEMES, default="quadrature")
    p.add_argument("--tolerance", type=number, default=1e-6)
    _add_grid(p)
    _add_points(p)

    p = add("matrix-differint", "Differintegral of matrix order.")
    p.add_argument("--matrix", required=True, metavar="FILE")
    p.add_argument("--expr", required=True)
    p.add_argument("--lower", type=number, default=0.0)
    p.add_argument("--var", type=count, default=1)
    _add_grid(p)
    _add_points(p)

    p = add("jacobian", "Fractional transformation matrix of a chart.")
    _add_chart(p)
    p.add_argument("--order", type=order)
    p.add_argument("--matrix", metavar="FILE")
    _add_grid(p)
    _add_points(p)

    p = add("metric", "Fractional metric of a chart.")
    _add_chart(p)
    p.add_argument("--order", type=number)
    _add_grid(p)
    _add_points(p)

    p = add("wedge", "Wedge product of two forms.")
    p.add_argument("--left", required=True, metavar="FORM")
    p.add_argument("--right", required=True, metavar="FORM")
    p.add_argument("--at", action="append", metavar="X1,X2,...")

    p = add("hodge", "Hodge dual of a form.")
    p.add_argument("--form", required=True)
    p.add_argument("--at", action="append", metavar="X1,X2,...")
    _add_chart(p)
    _add_grid(p)

    p = add("inner", "Inner product of two forms.")
    p.add_argument("--left", required=True, metavar="FORM")
    p.add_argument("--right", required=True, metavar="FORM")
    p.add_argument("--at", action="append", metavar="X1,X2,...")
    _add_chart(p)
    _add_grid(p)

    p = add("poincare", "Residual of d^nu d^nu on a form.")
    p.add_argument("--form", metavar="FORM")
    p.add_argument("--expr", help="0-form expression (with --dim)")
    p.add_argument("--dim", type=count, default=2)
    p.add_argument("--order", type=order)
    p.add_argument("--matrix", metavar="FILE")
    p.add_argument("--lower", type=number_list, metavar="A1,A2")
    p.add_argument("--tolerance", type=number, default=1e-3)
    _add_grid(p)
    _add_points(p)

    p = add("covariant", "Covariant fractional derivative of a covector field.")
    _add_chart(p)
    p.add_argument("--order", type=order)
    p.add_argument("--matrix", metavar="FILE")
    p.add_argument("--field", required=True, metavar="EXPRS", help="components separated by ';'")
    p.add_argument("--direction", type=count, required=True, metavar="B")
    p.add_argument("--tolerance", type=number, default=1e-6)
    _add_grid(p)
    _add_points(p)

    p = add("identities", "Run the identity suite.")
    p.add_argument("--filter", default=None, help="comma separated case ids or eqN tokens")
    p.add_argument("--profile", choices=("fast", "full"), default="fast")
    p.add_argument("--seed", type=int, default=None, help="overrides FRACFORM_SEED")

    p = add("polar-example", "Solve the worked polar-coordinate system.")
    p.add_argument("--r", type=number, required=True)
    p.add_argument("--theta", type=number, required=True)
    p.add_argument("--order", type=number, default=-1.0)
    _add_grid(p)
    return parser


COMMANDS = {
    "differint": cmd_differint,
    "matrix-differint": cmd_matrix_differint,
    "jacobian": cmd_jacobian,
    "metric": cmd_metric,
    "wedge": cmd_wedge,
    "hodge": cmd_hodge,
    "inner": cmd_inner,
    "poincare": cmd_poincare,
    "covariant": cmd_covariant,
    "identities": cmd_identities,
    "polar-example": cmd_polar_example,
}


def _subparser(parser: argparse.ArgumentParser, name: str | None):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction) and name in action.choices:
            return action.choices[name]
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args, extra = parser.parse_known_args(argv)
        ctx = Ctx(_subparser(parser, args.command), args)
        if extra:
            raise UsageError(f"unrecognized arguments: {' '.join(extra)}", ctx.parser)
        status = COMMANDS[args.command](ctx)
    except UsageError as exc:
        sys.stderr.write(f"{exc.parser.prog}: error: {exc}\n{_one_line_usage(exc.parser)}\n")
        return 2
    except (FracFormsError, ValueError, KeyError, OverflowError, ZeroDivisionError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"{PROG}: {type(exc).__name__}: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"{PROG}: cannot write output: {exc}\n")
        return 1
    sys.stdout.flush()
    return status or 0


if __name__ == "__main__":
    sys.exit(main())
