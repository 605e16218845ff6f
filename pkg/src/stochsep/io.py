"""CSV and JSON helpers shared by the command line tools."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import DegenerateInput

SCHEMA_VERSION = 1


class CSVFormatError(DegenerateInput):
    """A cell of an input CSV is not a finite number."""


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_matrix(path) -> np.ndarray:
    """Read one point per row from a numeric CSV file.

    A first row containing any non-numeric cell is taken as a header.  Later
    non-numeric or non-finite cells raise :class:`CSVFormatError` naming the
    1-based line and column.
    """
    text = Path(path).read_text(encoding="utf-8")
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise CSVFormatError(f"{path}: no data rows")
    start = 0
    if not all(_is_number(c.strip()) for c in rows[0]):
        start = 1
    width = None
    values = []
    for line_no, row in enumerate(rows[start:], start=start + 1):
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise CSVFormatError(f"{path}: line {line_no} has {len(row)} columns, expected {width}")
        parsed = []
        for col, cell in enumerate(row, start=1):
            try:
                v = float(cell.strip())
            except ValueError:
                raise CSVFormatError(
                    f"{path}: line {line_no}, column {col}: non-numeric cell {cell!r}"
                ) from None
            if not math.isfinite(v):
                raise CSVFormatError(f"{path}: line {line_no}, column {col}: non-finite value {cell!r}")
            parsed.append(v)
        values.append(parsed)
    if not values:
        raise CSVFormatError(f"{path}: header only, no data rows")
    return np.asarray(values, dtype=np.float64)


def matrix_to_csv(X: np.ndarray, header: list[str] | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header is not None:
        w.writerow(header)
    for row in np.atleast_2d(X):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def rows_to_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def dumps(payload: dict, kind: str) -> str:
    """Serialise with a leading ``schema_version``/``kind`` pair and sorted keys."""
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind, **payload}
    return json.dumps(doc, indent=2, sort_keys=True, default=_default, allow_nan=False) + "\n"


def loads(text: str) -> dict:
    return json.loads(text)


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
