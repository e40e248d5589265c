"""JSON and CSV plumbing shared by the CLI and the identity suite."""

from __future__ import annotations

import csv
import io
import json
import math
from importlib import resources

import numpy as np

from .errors import ParseError
from .matrix_order import read_matrix

SCHEMA_VERSION = "1"
SIG_DIGITS = 12


def round_sig(x: float) -> float | None:
    """12 significant digits; non-finite values become null."""
    if not math.isfinite(x):
        return None
    return float(f"{x:.{SIG_DIGITS}g}")


def clean(obj):
    """Recursively convert numpy and complex values to rounded JSON data.

    Complex numbers become [re, im] pairs.
    """
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in sorted(obj.items())}
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_sig(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [round_sig(obj.real), round_sig(obj.imag)]
    return obj


def document(command: str, payload: dict) -> dict:
    out = {"schema_version": SCHEMA_VERSION, "command": command}
    out.update(payload)
    return clean(out)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def fmt(x) -> str:
    """Locale-independent 12-significant-digit text."""
    if isinstance(x, (complex, np.complexfloating)):
        if x.imag == 0:
            return fmt(x.real)
        return f"{x.real:.{SIG_DIGITS}g}{x.imag:+.{SIG_DIGITS}g}j"
    return f"{float(x):.{SIG_DIGITS}g}"


def complex_matrix(M) -> list:
    """Matrix as rows of [re, im] pairs."""
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def schema() -> dict:
    text = resources.files("fracforms").joinpath("schema/output-v1.json").read_text(encoding="utf-8")
    return json.loads(text)


def _byte_offset(text: str, char_pos: int) -> int:
    return len(text[:char_pos].encode("utf-8"))


def load_json(text: str, what: str = "JSON"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid {what}: {exc.msg}", _byte_offset(text, exc.pos)) from None


def parse_matrix(text: str) -> np.ndarray:
    """Matrix text: JSON rows of [re, im] pairs (plain numbers allowed)."""
    data = load_json(text, "matrix")
    try:
        return read_matrix(data)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"invalid matrix: {exc}", 0) from None


def parse_points(text: str) -> tuple[list[str], np.ndarray]:
    """CSV with a header row naming the coordinates, one point per row."""
    reader = csv.reader(io.StringIO(text))
    offsets = []
    pos = 0
    for line in text.splitlines(keepends=True):
        offsets.append(pos)
        pos += len(line.encode("utf-8"))
    rows = list(reader)
    if not rows or not any(c.strip() for c in rows[0]):
        raise ParseError("points file needs a header row", 0)
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header) or any(not h for h in header):
        raise ParseError("header names must be distinct and nonempty", 0)
    pts = []
    for r, row in enumerate(rows[1:], start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"row {r} has {len(row)} fields, header has {len(header)}", offsets[min(r, len(offsets) - 1)])
        try:
            pts.append([float(c) for c in row])
        except ValueError:
            bad = next(c for c in row if not _is_float(c))
            line = text.splitlines(keepends=True)[r]
            col = line.find(bad)
            raise ParseError(f"not a number: {bad.strip()!r}", offsets[r] + len(line[:max(col, 0)].encode("utf-8"))) from None
    if not pts:
        raise ParseError("points file has no data rows", pos)
    return header, np.array(pts, dtype=float)


def _is_float(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def parse_point(text: str) -> np.ndarray:
    """Comma-separated coordinates, e.g. ``1.5,0.8``."""
    parts = text.split(",")
    vals = []
    pos = 0
    for p in parts:
        try:
            vals.append(float(p))
        except ValueError:
            raise ParseError(f"not a number: {p.strip()!r}", len(text[:pos].encode("utf-8"))) from None
        pos += len(p) + 1
    return np.array(vals, dtype=float)
