"""File formats: grid functions as JSON (or two-column CSV in 1D) and
discrete measures as CSV.

Grid-function JSON:
    {"dim": 1, "bounds": [[lo, hi]], "shape": [n], "values": [...]}
with values row-major and the string "inf" standing for +inf.  Floats are
written with repr so a write/read round trip is bit-exact.

Measure CSV: first line ``dim=<d>,even=<0|1>``, then a ``x1[,x2],weight``
header, then one atom per line.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .grid import ExtendedGridFunction, Grid, PreconditionError
from .measures import DiscreteMeasure

__all__ = [
    "FileFormatError",
    "write_grid_function", "read_grid_function",
    "write_grid_function_csv", "read_grid_function_csv",
    "write_measure", "read_measure",
]


class FileFormatError(ValueError):
    """Malformed input file; message carries a line/column diagnostic."""


def _encode_value(x: float):
    return "inf" if np.isinf(x) else float(x)


def _decode_value(x, where: str) -> float:
    if isinstance(x, str):
        if x.strip().lower() in ("inf", "+inf", "infinity"):
            return float("inf")
        raise FileFormatError(f"{where}: unrecognized value {x!r}")
    v = float(x)
    if np.isnan(v) or v == -np.inf:
        raise FileFormatError(f"{where}: values must be finite or 'inf'")
    return v


def write_grid_function(fun: ExtendedGridFunction, path) -> None:
    doc = {
        "dim": fun.grid.dim,
        "bounds": [list(b) for b in fun.grid.bounds],
        "shape": list(fun.grid.shape),
        "values": [_encode_value(v) for v in fun.values.ravel(order="C")],
    }
    Path(path).write_text(json.dumps(doc))


def read_grid_function(path) -> ExtendedGridFunction:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FileFormatError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        dim = int(doc["dim"])
        bounds = tuple(tuple(map(float, b)) for b in doc["bounds"])
        shape = tuple(int(n) for n in doc["shape"])
        raw = doc["values"]
    except (KeyError, TypeError, ValueError) as e:
        raise FileFormatError(f"{path}: missing or malformed field: {e}") from e
    if len(bounds) != dim or len(shape) != dim:
        raise FileFormatError(f"{path}: dim={dim} inconsistent with bounds/shape")
    expected = int(np.prod(shape))
    if len(raw) != expected:
        raise FileFormatError(f"{path}: expected {expected} values, found {len(raw)}")
    values = np.array([_decode_value(v, f"{path}: values[{i}]") for i, v in enumerate(raw)])
    try:
        return ExtendedGridFunction(Grid(bounds, shape), values.reshape(shape))
    except PreconditionError as e:
        raise FileFormatError(f"{path}: {e}") from e


def write_grid_function_csv(fun: ExtendedGridFunction, path) -> None:
    if fun.grid.dim != 1:
        raise PreconditionError("CSV grid functions are 1D only")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "value"])
        for x, v in zip(fun.grid.axes[0], fun.values):
            w.writerow([repr(float(x)), "inf" if np.isinf(v) else repr(float(v))])


def read_grid_function_csv(path) -> ExtendedGridFunction:
    xs, vs = [], []
    with open(path, newline="") as fh:
        for ln, row in enumerate(csv.reader(fh), start=1):
            if not row or (ln == 1 and row[0].strip().lower() == "x"):
                continue
            if len(row) != 2:
                raise FileFormatError(f"{path}: line {ln}: expected 2 columns, got {len(row)}")
            xs.append(_decode_value(row[0], f"{path}: line {ln}, column 1"))
            vs.append(_decode_value(row[1], f"{path}: line {ln}, column 2"))
    if len(xs) < 3:
        raise FileFormatError(f"{path}: need at least 3 rows")
    x = np.asarray(xs)
    h = np.diff(x)
    if np.any(h <= 0) or not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise FileFormatError(f"{path}: x column must be uniformly increasing")
    grid = Grid(((x[0], x[-1]),), (len(x),))
    return ExtendedGridFunction(grid, np.asarray(vs))


def write_measure(m: DiscreteMeasure, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"dim={m.dim},even={int(m.even)}\n")
        w = csv.writer(fh)
        w.writerow([f"x{k + 1}" for k in range(m.dim)] + ["weight"])
        for pt, wt in zip(m.points, m.weights):
            w.writerow([repr(float(c)) for c in pt] + [repr(float(wt))])


def read_measure(path) -> DiscreteMeasure:
    with open(path, newline="") as fh:
        header = fh.readline().strip()
        try:
            fields = dict(kv.split("=") for kv in header.split(","))
            dim = int(fields["dim"])
            even = bool(int(fields["even"]))
        except (ValueError, KeyError) as e:
            raise FileFormatError(
                f"{path}: line 1: expected 'dim=<d>,even=<0|1>', got {header!r}") from e
        pts, wts = [], []
        for ln, row in enumerate(csv.reader(fh), start=2):
            if not row or row[-1].strip().lower() == "weight":
                continue
            if len(row) != dim + 1:
                raise FileFormatError(
                    f"{path}: line {ln}: expected {dim + 1} columns, got {len(row)}")
            pts.append([_decode_value(c, f"{path}: line {ln}, column {k + 1}")
                        for k, c in enumerate(row[:-1])])
            wts.append(_decode_value(row[-1], f"{path}: line {ln}, column {dim + 1}"))
    if not pts:
        raise FileFormatError(f"{path}: measure has no atoms")
    try:
        return DiscreteMeasure(np.asarray(pts), np.asarray(wts), even=even)
    except PreconditionError as e:
        raise FileFormatError(f"{path}: {e}") from e
