"""Reading series and design matrices from delimited text."""
from __future__ import annotations

import csv
import io
import sys

import numpy as np

__all__ = ["read_table", "read_series", "read_matrix"]


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_table(path) -> tuple[list[str] | None, np.ndarray]:
    """
    Read a numeric table from CSV or whitespace-separated text.

    A first row that is not entirely numeric is taken as a header. ``path``
    may be ``"-"`` for standard input.

    Returns
    -------
    header : list of str or None
    data : ndarray
        (rows, columns) float array.
    """
    try:
        text = sys.stdin.read() if str(path) == "-" else open(path).read()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError(f"{path}: no data")
    delim = "," if "," in lines[0] else None
    if delim:
        rows = list(csv.reader(io.StringIO("\n".join(lines))))
    else:
        rows = [ln.split() for ln in lines]
    header = None
    if not all(_is_number(c) for c in rows[0]):
        header, rows = [c.strip() for c in rows[0]], rows[1:]
    if not rows:
        raise ValueError(f"{path}: header but no data rows")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise ValueError(f"{path}: row {i + 1} has {len(r)} fields, expected {width}")
    try:
        data = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc})") from exc
    return header, data


def _column_index(header, column, width) -> int:
    if column is None:
        return 0
    if isinstance(column, int) or str(column).lstrip("-").isdigit():
        idx = int(column)
        if not -width <= idx < width:
            raise ValueError(f"column {idx} out of range for {width} columns")
        return idx % width
    if header is None or column not in header:
        raise ValueError(f"column {column!r} not found")
    return header.index(column)


def read_series(path, column=None) -> np.ndarray:
    """Read one column (first by default) as a 1-d series."""
    header, data = read_table(path)
    return data[:, _column_index(header, column, data.shape[1])]


def read_matrix(path, columns=None) -> tuple[list[str] | None, np.ndarray]:
    """Read selected columns (all by default) as an (n, d) array."""
    header, data = read_table(path)
    if columns is None:
        return header, data
    idx = [_column_index(header, c, data.shape[1]) for c in columns]
    names = [header[i] for i in idx] if header else None
    return names, data[:, idx]
