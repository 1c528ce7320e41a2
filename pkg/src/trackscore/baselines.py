"""Dynamic time warping baselines.

Classic DTW and its soft-min relaxation over the step set
{(1,0), (0,1), (1,1)} with squared Euclidean ground cost and no band
constraint.  Inputs are paths or plain (n, d) arrays; time grids are
ignored, only the visited points matter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["CostMatrix", "cost_matrix", "dtw", "soft_dtw"]


@dataclass(frozen=True)
class CostMatrix:
    """Pairwise squared Euclidean costs between two point sequences."""

    rows: int
    cols: int
    entries: np.ndarray


def _as_points(obj) -> np.ndarray:
    pts = np.asarray(getattr(obj, "points", obj), dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError("expected a nonempty (n, d) point array")
    return pts


def cost_matrix(x, y) -> CostMatrix:
    a, b = _as_points(x), _as_points(y)
    if a.shape[1] != b.shape[1]:
        raise ValueError(
            f"sequences have different dimensions {a.shape[1]} and {b.shape[1]}"
        )
    diff = a[:, None, :] - b[None, :, :]
    return CostMatrix(a.shape[0], b.shape[0], np.einsum("ijk,ijk->ij", diff, diff))


def dtw(x, y) -> float:
    """Minimal accumulated squared cost over monotone alignments.

    Zero for identical sequences and invariant under duplicating
    breakpoints, which is what makes it a reparametrization-robust
    baseline.
    """
    c = cost_matrix(x, y)
    entries = c.entries.tolist()
    inf = math.inf
    prev = [0.0] + [inf] * c.cols
    for i in range(c.rows):
        row = entries[i]
        cur = [inf] * (c.cols + 1)
        for j in range(1, c.cols + 1):
            best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            if prev[j - 1] < best:
                best = prev[j - 1]
            cur[j] = row[j - 1] + best
        prev = cur
    return prev[c.cols]


def _softmin3(a: float, b: float, c: float, gamma: float) -> float:
    m = min(a, b, c)
    if m == math.inf:
        return m
    s = (
        math.exp(-(a - m) / gamma)
        + math.exp(-(b - m) / gamma)
        + math.exp(-(c - m) / gamma)
    )
    return m - gamma * math.log(s)


def soft_dtw(x, y, gamma: float) -> float:
    """Soft-min relaxation of :func:`dtw` at temperature gamma.

    Converges to the hard value as gamma -> 0.  Because the soft min
    lies below the hard min, the value can be negative; in particular
    ``soft_dtw(x, x, gamma) <= 0``.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    c = cost_matrix(x, y)
    entries = c.entries.tolist()
    inf = math.inf
    prev = [0.0] + [inf] * c.cols
    for i in range(c.rows):
        row = entries[i]
        cur = [inf] * (c.cols + 1)
        for j in range(1, c.cols + 1):
            cur[j] = row[j - 1] + _softmin3(prev[j], cur[j - 1], prev[j - 1], gamma)
        prev = cur
    return prev[c.cols]
