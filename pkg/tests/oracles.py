"""Independent reference computations used to pin expected values.

The iterated-integral oracle evaluates signature coefficients by direct
Riemann-sum quadrature over the order simplex, never touching the
product-of-exponentials code path under test.  Degree k is built from
the running degree-(k-1) integral by trapezoidal accumulation; on a
piecewise linear path the degree-1 integrand is exact and higher
degrees converge at second order in the subdivision width.
"""

from __future__ import annotations

import numpy as np

from trackscore.tensor_algebra import TruncatedTensor


def refine_polyline(points: np.ndarray, subdivisions: int) -> np.ndarray:
    """Inserts ``subdivisions - 1`` evenly spaced nodes per segment."""
    pts = [points[:1]]
    for a, b in zip(points[:-1], points[1:]):
        lam = np.linspace(0.0, 1.0, subdivisions + 1)[1:, None]
        pts.append(a + lam * (b - a))
    return np.vstack(pts)


def iterated_integrals(points, depth: int, subdivisions: int = 200) -> TruncatedTensor:
    """Signature coefficients by quadrature over the refined polyline."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    d = points.shape[1]
    fine = refine_polyline(points, subdivisions)
    dx = np.diff(fine, axis=0)  # (n, d)
    n = dx.shape[0]
    levels = [np.ones(1)]
    # running[t] = degree-k integral over [0, t], at the n+1 nodes
    running = np.ones((n + 1, 1))
    for _ in range(depth):
        avg = 0.5 * (running[:-1] + running[1:])  # (n, d**(k-1))
        contrib = np.einsum("ti,tj->tij", avg, dx).reshape(n, -1)
        running = np.vstack([np.zeros((1, contrib.shape[1])), np.cumsum(contrib, axis=0)])
        levels.append(running[-1].copy())
    return TruncatedTensor(d, depth, tuple(levels))
