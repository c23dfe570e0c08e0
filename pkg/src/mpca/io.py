"""CSV ingestion and report serialization.

Reports are JSON documents in which every float is written with 17
significant digits, so parsing a report and writing it again reproduces the
same text. Empty scale cells are the string ``"empty"``; NaN is never
written.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from mpca.core import Dataset, center, normalize
from mpca.errors import InvalidInputError, ParseError

EMPTY = "empty"
MAX_COLUMNS = 64


def _parse_cell(text: str, row: int, col: int) -> float:
    try:
        value = float(text.strip())
    except ValueError:
        raise ParseError(f"non-numeric value {text!r}", row=row, column=col) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {text!r}", row=row, column=col)
    return value


def _select(names: list[str] | None, width: int, columns: Sequence[int | str]) -> list[int]:
    picked = []
    for c in columns:
        if isinstance(c, str) and not c.strip().lstrip("-").isdigit():
            if names is None or c not in names:
                raise ParseError(f"unknown column {c!r}")
            picked.append(names.index(c))
            continue
        idx = int(c)
        if not 0 <= idx < width:
            raise ParseError(f"column index {idx} out of range for {width} columns")
        picked.append(idx)
    return picked


def read_matrix(path: str | Path, has_header: bool = False,
                columns: Sequence[int | str] | None = None) -> tuple[np.ndarray, list[str] | None]:
    """Parse a rectangular numeric CSV file.

    Row and column numbers in errors are 1-based and count the header line.
    Blank lines are skipped.
    """
    rows: list[list[float]] = []
    names = None
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            if has_header and names is None:
                names = [cell.strip() for cell in record]
                width = len(names)
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise ParseError(f"expected {width} fields, found {len(record)}", row=lineno)
            rows.append([_parse_cell(cell, lineno, j) for j, cell in enumerate(record, start=1)])
    if not rows:
        raise ParseError(f"{path}: no data rows")
    X = np.array(rows, dtype=np.float64)
    if columns is not None:
        idx = _select(names, X.shape[1], columns)
        X = X[:, idx]
        names = [names[i] for i in idx] if names is not None else None
    return X, names


def ingest_csv(path: str | Path, has_header: bool = False, normalization: str = "none",
               columns: Sequence[int | str] | None = None) -> Dataset:
    """Read, normalize and center a CSV dataset."""
    X, names = read_matrix(path, has_header, columns)
    if X.shape[0] < 2:
        raise ParseError(f"{path}: need at least 2 data rows, got {X.shape[0]}")
    if X.shape[1] > MAX_COLUMNS:
        raise InvalidInputError(f"{X.shape[1]} columns exceeds the limit of {MAX_COLUMNS}")
    return center(normalize(X, normalization), column_names=names)


def write_matrix(path: str | Path, X: np.ndarray, header: Sequence[str] | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if header is not None:
            w.writerow(header)
        for row in np.asarray(X):
            w.writerow([format_float(float(v)) for v in row])


def write_table(path: str | Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([format_float(v) if isinstance(v, float) else ("" if v is None else v) for v in row])


def format_float(x: float) -> str:
    if math.isnan(x):
        raise ValueError("NaN is not serializable in reports")
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _encode(obj: Any, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        text = format_float(x)
        out.append(text if math.isfinite(x) else json.dumps(text))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (key, value) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(key)))
            out.append(": ")
            _encode(value, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, value in enumerate(obj):
            if i:
                out.append(", ")
            _encode(value, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(report: dict[str, Any]) -> str:
    out: list[str] = []
    _encode(report, out)
    return "".join(out) + "\n"


def loads(text: str) -> dict[str, Any]:
    return json.loads(text)
