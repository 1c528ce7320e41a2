"""Piecewise linear paths and their signatures.

The signature of a path is the collection of its iterated integrals up
to a truncation degree.  For a piecewise linear path it equals the
product of tensor exponentials of the segment increments, which is what
:func:`signature` evaluates, streaming left to right over segments.  It
depends only on the traced-out track: reparametrization, refinement of
breakpoints and translation all leave it unchanged.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .tensor_algebra import TruncatedTensor, unit

__all__ = [
    "PiecewiseLinearPath",
    "CsvFormatError",
    "make_path",
    "from_time_series",
    "signature",
    "concat",
    "reverse",
    "translate",
    "time_augment",
    "insert_midpoint",
    "read_paths_csv",
    "write_paths_csv",
]


class CsvFormatError(ValueError):
    """Malformed path CSV; the message carries file and line context."""


@dataclass(frozen=True, eq=False)
class PiecewiseLinearPath:
    """Polyline through ``points`` (one row per breakpoint).

    ``times`` is an optional strictly increasing parametrization of the
    breakpoints.  Operations that only depend on the track ignore it.
    ``meta`` records bookkeeping such as synthesized time grids.
    """

    points: np.ndarray
    times: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.points.ndim != 2 or self.points.shape[0] < 1:
            raise ValueError("points must be a nonempty (n, d) array")
        if self.points.shape[1] < 1:
            raise ValueError("paths need at least one coordinate")
        if self.times is not None:
            if self.times.shape != (self.points.shape[0],):
                raise ValueError("times must match the number of breakpoints")
            if np.any(np.diff(self.times) <= 0):
                raise ValueError("times must be strictly increasing")

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n_segments(self) -> int:
        return self.points.shape[0] - 1

    def increments(self) -> np.ndarray:
        return np.diff(self.points, axis=0)


def make_path(points, times=None, meta=None) -> PiecewiseLinearPath:
    """Builds a path from array-likes, coercing to float arrays."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    t = None if times is None else np.asarray(times, dtype=float).reshape(-1)
    return PiecewiseLinearPath(pts, t, dict(meta) if meta else {})


def from_time_series(rows) -> PiecewiseLinearPath:
    """Builds a timed path from an iterable of (time, value) pairs."""
    rows = list(rows)
    if not rows:
        raise ValueError("time series must contain at least one row")
    times = np.array([float(t) for t, _ in rows])
    points = np.array([np.asarray(v, dtype=float).reshape(-1) for _, v in rows])
    return make_path(points, times)


def signature(path: PiecewiseLinearPath, depth: int) -> TruncatedTensor:
    """Truncated signature, as the left-to-right product of segment
    exponentials.  Cost is linear in the number of segments."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    d = path.dim
    if depth == 0 or path.n_segments == 0:
        return unit(d, depth)
    levels = [np.zeros(d**m) for m in range(depth + 1)]
    levels[0][0] = 1.0
    for v in np.diff(path.points, axis=0):
        _fold_segment(levels, v, depth)
    return TruncatedTensor(d, depth, tuple(levels))


def _fold_segment(levels: list[np.ndarray], v: np.ndarray, depth: int) -> None:
    # In-place update levels <- levels * exp(v).  Processing degrees top
    # down keeps the lower-degree factors at their pre-update values.
    pows = [None, v]
    for j in range(2, depth + 1):
        pows.append(np.multiply.outer(pows[-1], v).reshape(-1) / j)
    for m in range(depth, 0, -1):
        acc = levels[m]
        acc += pows[m]  # scalar part of the running product is 1
        for j in range(1, m):
            acc += np.multiply.outer(levels[m - j], pows[j]).reshape(-1)


def concat(x: PiecewiseLinearPath, y: PiecewiseLinearPath) -> PiecewiseLinearPath:
    """Concatenation: y is translated to start at the endpoint of x.

    Times are stitched when both operands carry them, else dropped.
    """
    if x.dim != y.dim:
        raise ValueError(f"cannot concatenate dims {x.dim} and {y.dim}")
    shifted = y.points - y.points[0] + x.points[-1]
    points = np.vstack([x.points, shifted[1:]])
    times = None
    if x.times is not None and y.times is not None:
        tail = x.times[-1] + (y.times - y.times[0])
        times = np.concatenate([x.times, tail[1:]])
    return PiecewiseLinearPath(points, times)


def reverse(x: PiecewiseLinearPath) -> PiecewiseLinearPath:
    """Runs the path backwards; a time grid is reflected in place."""
    times = None
    if x.times is not None:
        times = x.times[0] + (x.times[-1] - x.times[::-1])
    return PiecewiseLinearPath(x.points[::-1].copy(), times)


def translate(x: PiecewiseLinearPath, offset) -> PiecewiseLinearPath:
    offset = np.asarray(offset, dtype=float).reshape(-1)
    if offset.shape[0] != x.dim:
        raise ValueError("offset dimension must match the path")
    return PiecewiseLinearPath(x.points + offset, x.times, dict(x.meta))


def time_augment(x: PiecewiseLinearPath) -> PiecewiseLinearPath:
    """Prepends the parametrization as coordinate 0.

    Missing times are synthesized as 0..n with unit spacing and the
    substitution is recorded in ``meta["times_synthesized"]``.
    """
    synthesized = x.times is None
    times = np.arange(x.points.shape[0], dtype=float) if synthesized else x.times
    points = np.column_stack([times, x.points])
    meta = dict(x.meta)
    meta["times_synthesized"] = synthesized
    return PiecewiseLinearPath(points, times.copy(), meta)


def insert_midpoint(x: PiecewiseLinearPath, segment: int) -> PiecewiseLinearPath:
    """Splits one segment at its midpoint; the track is unchanged."""
    if not 0 <= segment < x.n_segments:
        raise ValueError(f"segment index {segment} out of range")
    mid = 0.5 * (x.points[segment] + x.points[segment + 1])
    points = np.insert(x.points, segment + 1, mid, axis=0)
    times = None
    if x.times is not None:
        tmid = 0.5 * (x.times[segment] + x.times[segment + 1])
        times = np.insert(x.times, segment + 1, tmid)
    return PiecewiseLinearPath(points, times)


def _open_maybe(source, mode):
    if hasattr(source, "read") or hasattr(source, "write"):
        return source, False
    return open(source, mode, newline=""), True


def read_paths_csv(source) -> dict[str, PiecewiseLinearPath]:
    """Reads paths from long-format CSV.

    Expected header is ``series_id,t,x1,...,xd`` where the ``t`` column
    is optional.  Rows are grouped by ``series_id`` (series ordered by
    first appearance) and sorted by ``t`` within a series.  Malformed
    content raises :class:`CsvFormatError` naming the offending line.
    """
    f, close = _open_maybe(source, "r")
    name = getattr(f, "name", str(source))
    try:
        rows = list(csv.reader(f))
    finally:
        if close:
            f.close()
    if not rows:
        raise CsvFormatError(f"{name}: empty file")
    header = [c.strip() for c in rows[0]]
    if not header or header[0] != "series_id":
        raise CsvFormatError(f"{name} line 1: header must start with series_id")
    has_t = len(header) > 1 and header[1] == "t"
    first_col = 2 if has_t else 1
    dim = len(header) - first_col
    if dim < 1:
        raise CsvFormatError(f"{name} line 1: no value columns in header")
    groups: dict[str, list] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise CsvFormatError(
                f"{name} line {lineno}: expected {len(header)} columns, "
                f"got {len(row)}"
            )
        sid = row[0].strip()
        try:
            t = float(row[1]) if has_t else None
            vals = [float(c) for c in row[first_col:]]
        except ValueError:
            raise CsvFormatError(
                f"{name} line {lineno}: invalid numeric value"
            ) from None
        groups.setdefault(sid, []).append((t, lineno, vals))
    if not groups:
        raise CsvFormatError(f"{name}: no data rows")
    out = {}
    for sid, entries in groups.items():
        if has_t:
            entries.sort(key=lambda e: e[0])
            times = [e[0] for e in entries]
            for a, b in zip(times, times[1:]):
                if b <= a:
                    raise CsvFormatError(
                        f"{name}: series {sid!r} has duplicate time {b!r}"
                    )
            out[sid] = make_path([e[2] for e in entries], times)
        else:
            out[sid] = make_path([e[2] for e in entries])
    return out


def write_paths_csv(series: dict[str, PiecewiseLinearPath], dest) -> None:
    """Writes paths in the long CSV format read by :func:`read_paths_csv`.

    A missing time grid is written as 0..n with unit spacing.
    """
    if not series:
        raise ValueError("nothing to write")
    dims = {p.dim for p in series.values()}
    if len(dims) != 1:
        raise ValueError("all series must share one dimension")
    d = dims.pop()
    buf = io.StringIO()
    buf.write("series_id,t," + ",".join(f"x{i + 1}" for i in range(d)) + "\n")
    for sid, path in series.items():
        times = path.times
        if times is None:
            times = np.arange(path.points.shape[0], dtype=float)
        for t, row in zip(times, path.points):
            vals = ",".join(repr(float(v)) for v in row)
            buf.write(f"{sid},{float(t)!r},{vals}\n")
    f, close = _open_maybe(dest, "w")
    try:
        f.write(buf.getvalue())
    finally:
        if close:
            f.close()
