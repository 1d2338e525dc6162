"""CSV ingestion and export for finite spaces.

Point files carry a header ``x0,x1,...[,weight]`` (or ``bits[,weight]`` for
Hamming payloads, one 0/1 string per row). Distance-matrix files are N rows of
N numbers with no header; non-uniform weights of a matrix space go to a
``<name>.weights.csv`` companion file.
"""

import csv
from pathlib import Path

import numpy as np

from .errors import DataError
from .space import FiniteSpace


def _weights_companion(path):
    path = Path(path)
    return path.with_name(path.stem + ".weights.csv")


def _read_rows(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise DataError(f"{path} is not UTF-8 text") from exc


def _to_float(cell, where):
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"non-numeric cell {cell!r} at {where}") from None
    if not np.isfinite(value):
        raise DataError(f"non-finite cell {cell!r} at {where}")
    return value


def _normalized(weights):
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w <= 0):
        raise DataError("weights must be strictly positive")
    return w / w.sum()


def _sniff_format(rows):
    try:
        for cell in rows[0]:
            float(cell)
    except ValueError:
        return "points"
    return "matrix"


def load_dataset(path, format="auto", metric=None):
    """Read a FiniteSpace from CSV.

    ``format`` is ``"points"``, ``"matrix"`` or ``"auto"`` (a headerless
    numeric first row means a matrix). ``metric`` defaults to ``hamming`` for
    a ``bits`` column, ``precomputed`` for matrices and ``euclidean`` otherwise.
    """
    rows = _read_rows(path)
    if not rows:
        raise DataError(f"{path} is empty")
    if format == "auto":
        format = "matrix" if metric == "precomputed" else _sniff_format(rows)
    if format == "matrix":
        if metric not in (None, "precomputed"):
            raise DataError(f"a distance-matrix file needs metric 'precomputed', got {metric!r}")
        return _load_matrix(path, rows)
    if format != "points":
        raise DataError(f"unknown format {format!r}")
    if metric == "precomputed":
        raise DataError("metric 'precomputed' needs a distance-matrix file")
    return _load_points(path, rows, metric)


def _load_matrix(path, rows):
    n = len(rows)
    matrix = np.empty((n, n))
    for i, row in enumerate(rows):
        if len(row) != n:
            raise DataError(f"ragged matrix row {i + 1}: {len(row)} cells, expected {n}")
        matrix[i] = [_to_float(c, f"row {i + 1}") for c in row]
    weights = None
    companion = _weights_companion(path)
    if companion.exists():
        wrows = _read_rows(companion)
        if not wrows or [c.strip() for c in wrows[0]] != ["weight"]:
            raise DataError(f"{companion} must have a single 'weight' column")
        weights = [_to_float(r[0], f"{companion} row {k + 2}") for k, r in enumerate(wrows[1:])]
        if len(weights) != n:
            raise DataError(f"{companion} has {len(weights)} weights for {n} points")
        weights = _normalized(weights)
    return FiniteSpace.from_matrix(matrix, weights=weights, meta={"source": str(path)})


def _load_points(path, rows, metric):
    header = [c.strip() for c in rows[0]]
    body = rows[1:]
    if not body:
        raise DataError(f"{path} has a header but no points")
    w_col = header.index("weight") if "weight" in header else None
    cols = [k for k in range(len(header)) if k != w_col]
    for i, row in enumerate(body):
        if len(row) != len(header):
            raise DataError(f"ragged row {i + 2}: {len(row)} cells, expected {len(header)}")
    weights = None
    if w_col is not None:
        weights = _normalized([_to_float(r[w_col], f"row {i + 2}, column weight") for i, r in enumerate(body)])
    if [header[k] for k in cols] == ["bits"]:
        if metric not in (None, "hamming"):
            raise DataError(f"a 'bits' column needs metric 'hamming', got {metric!r}")
        strings = [r[cols[0]].strip() for r in body]
        width = len(strings[0])
        bits = np.zeros((len(strings), width), dtype=np.uint8)
        for i, s in enumerate(strings):
            if len(s) != width or set(s) - {"0", "1"}:
                raise DataError(f"row {i + 2}: bit strings must be 0/1 of equal length")
            bits[i] = [c == "1" for c in s]
        return FiniteSpace.from_points(bits, "hamming", weights, meta={"source": str(path)})
    if metric == "hamming":
        raise DataError("hamming metric needs a 'bits' column")
    points = np.array([[_to_float(r[k], f"row {i + 2}, column {header[k]}") for k in cols] for i, r in enumerate(body)])
    return FiniteSpace.from_points(points, "euclidean", weights, meta={"source": str(path)})


def save_dataset(space, path):
    """Write ``space`` in the matching CSV format; floats use repr round-trip."""
    path = Path(path)
    uniform = space.is_uniform
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        if space.metric == "precomputed":
            for row in space.matrix:
                out.writerow([repr(float(x)) for x in row])
        elif space.metric == "hamming":
            out.writerow(["bits"] + ([] if uniform else ["weight"]))
            for k, row in enumerate(space.points):
                cells = ["".join("1" if b else "0" for b in row)]
                out.writerow(cells if uniform else cells + [repr(float(space.weights[k]))])
        else:
            dim = space.points.shape[1]
            out.writerow([f"x{k}" for k in range(dim)] + ([] if uniform else ["weight"]))
            for k, row in enumerate(space.points):
                cells = [repr(float(x)) for x in row]
                out.writerow(cells if uniform else cells + [repr(float(space.weights[k]))])
    companion = _weights_companion(path)
    if space.metric == "precomputed" and not uniform:
        with open(companion, "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["weight"])
            for w in space.weights:
                out.writerow([repr(float(w))])
    return path
