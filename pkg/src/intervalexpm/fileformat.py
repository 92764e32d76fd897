"""Reading and writing interval-matrix documents.

The document is JSON::

    {"rows": 2, "cols": 2,
     "lower": [[0, 1], [0, -3]],
     "upper": [[0, 1], [0, -2]]}

A point matrix may instead give a single ``"entries"`` grid.  Numbers are
read as exact decimals and rounded outward (lower entries down, upper
entries up), so the parsed matrix contains the set the document describes.
Entries may also be strings holding hexadecimal floats, which are exact.
"""

from __future__ import annotations

import json
import os
from fractions import Fraction
from typing import Any

import numpy as np

from intervalexpm.errors import ParseError
from intervalexpm.interval import Interval
from intervalexpm.matrix import IntervalMatrix


def _grid(doc: dict, key: str, rows: int | None, cols: int | None) -> list[list[Interval]]:
    grid = doc.get(key)
    if not isinstance(grid, list) or not grid or not all(isinstance(r, list) for r in grid):
        raise ParseError(f"field {key!r} must be a non-empty list of rows")
    if rows is not None and len(grid) != rows:
        raise ParseError(f"field {key!r} has {len(grid)} rows, expected {rows}")
    width = len(grid[0])
    if any(len(r) != width for r in grid) or (cols is not None and width != cols):
        raise ParseError(f"field {key!r} is ragged or has the wrong number of columns")
    out = []
    for r in grid:
        row = []
        for tok in r:
            if isinstance(tok, bool) or not isinstance(tok, (str, int, float)):
                raise ParseError(f"non-numeric entry {tok!r} in {key!r}")
            row.append(Interval.enclosing(str(tok)))
        out.append(row)
    return out


def _int_field(doc: dict, key: str) -> int | None:
    if key not in doc:
        return None
    try:
        v = int(doc[key])
    except (TypeError, ValueError) as exc:
        raise ParseError(f"field {key!r} must be an integer") from exc
    if v <= 0:
        raise ParseError(f"field {key!r} must be positive")
    return v


def matrix_from_document(doc: Any) -> IntervalMatrix:
    if not isinstance(doc, dict):
        raise ParseError("interval-matrix document must be a JSON object")
    rows, cols = _int_field(doc, "rows"), _int_field(doc, "cols")
    if "entries" in doc:
        g = _grid(doc, "entries", rows, cols)
        lower = [[x.lo for x in r] for r in g]
        upper = [[x.hi for x in r] for r in g]
    else:
        if "lower" not in doc or "upper" not in doc:
            raise ParseError("document needs either 'entries' or both 'lower' and 'upper'")
        lo = _grid(doc, "lower", rows, cols)
        hi = _grid(doc, "upper", rows, cols)
        if len(lo) != len(hi) or len(lo[0]) != len(hi[0]):
            raise ParseError("'lower' and 'upper' differ in shape")
        lower = [[x.lo for x in r] for r in lo]
        upper = [[x.hi for x in r] for r in hi]
    try:
        return IntervalMatrix(lower, upper)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def loads(text: str) -> IntervalMatrix:
    try:
        doc = json.loads(text, parse_float=str, parse_int=str)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if isinstance(doc, dict):
        for key in ("rows", "cols"):
            if key in doc and isinstance(doc[key], str):
                doc[key] = Fraction(doc[key])
                if doc[key].denominator != 1:
                    raise ParseError(f"field {key!r} must be an integer")
    return matrix_from_document(doc)


def read_matrix(path: str | os.PathLike) -> IntervalMatrix:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def read_point_matrix(path: str | os.PathLike) -> np.ndarray:
    """Read a document as a real matrix of nearest floats.

    Used where a real centre matrix is wanted rather than an enclosure; for
    interval documents the nearest-float midpoint of each entry is returned.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.loads(fh.read(), parse_float=str, parse_int=str)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("interval-matrix document must be a JSON object")

    def num(tok) -> float:
        try:
            s = str(tok)
            return float.fromhex(s) if "0x" in s.lower() else float(Fraction(s))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"cannot parse number {tok!r}") from exc

    if "entries" in doc:
        return np.array([[num(t) for t in r] for r in doc["entries"]], dtype=np.float64)
    matrix_from_document(doc)  # validates shape and ordering
    lo = np.array([[num(t) for t in r] for r in doc["lower"]])
    hi = np.array([[num(t) for t in r] for r in doc["upper"]])
    return lo + 0.5 * (hi - lo)


def format_float(x: float) -> str:
    """17 significant digits: enough to round-trip binary64."""
    x = float(x)
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def to_document(M: IntervalMatrix) -> dict:
    return {
        "rows": M.rows,
        "cols": M.cols,
        "lower": [[_json_number(x) for x in r] for r in M.lower.tolist()],
        "upper": [[_json_number(x) for x in r] for r in M.upper.tolist()],
    }


class _RawNumber(float):
    """Marks a float for fixed 17-digit rendering in :func:`_encode`."""


def _json_number(x: float):
    if np.isinf(x):
        return format_float(x)  # strings; JSON has no infinity literal
    return _RawNumber(x)


def dumps(M: IntervalMatrix, extra: dict | None = None) -> str:
    doc = to_document(M)
    if extra:
        doc.update(extra)
    return _encode(doc)


def _encode(o) -> str:
    # json.dumps would print floats with repr; keep the fixed 17-digit form.
    if isinstance(o, _RawNumber):
        return format_float(o)
    if isinstance(o, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in o.items()) + "}"
    if isinstance(o, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in o) + "]"
    return json.dumps(o)


def write_matrix(M: IntervalMatrix, path: str | os.PathLike, extra: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(M, extra))
        fh.write("\n")
