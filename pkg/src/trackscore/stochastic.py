"""Seeded simulators used by the simulation experiments.

All randomness flows through numpy's PCG64 generator.  Top-level
simulators derive their generator from ``SimConfig.seed``; the sampler
classes accept an explicit generator so that callers can hand every
draw its own derived stream and stay order-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .signature import PiecewiseLinearPath, make_path

__all__ = [
    "OMEGA_MAX",
    "SimConfig",
    "brownian",
    "power_warp",
    "sample_omega",
    "spiral_process",
    "warped_mix_process",
    "SpiralModel",
    "WarpedMixModel",
]

# Angular velocities are drawn uniformly from [0, OMEGA_MAX).
OMEGA_MAX = 8.0 * math.pi


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings: seed, horizon, grid resolution, dimension."""

    seed: int = 0
    horizon: float = 1.0
    resolution: float = 1e-2
    dim: int = 2

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if not 0 < self.resolution < self.horizon:
            raise ValueError("resolution must lie in (0, horizon)")
        if self.dim < 1:
            raise ValueError("dim must be at least 1")


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def _grid(horizon: float, resolution: float) -> np.ndarray:
    n = int(round(horizon / resolution))
    return np.arange(n + 1) * resolution


def _brownian(rng, horizon, resolution, dim) -> PiecewiseLinearPath:
    times = _grid(horizon, resolution)
    steps = rng.normal(0.0, math.sqrt(resolution), size=(times.shape[0] - 1, dim))
    points = np.vstack([np.zeros(dim), np.cumsum(steps, axis=0)])
    return make_path(points, times)


def brownian(cfg: SimConfig) -> PiecewiseLinearPath:
    """Brownian path started at the origin on the uniform grid.

    Increments per coordinate are independent N(0, resolution).
    """
    return _brownian(_rng(cfg.seed), cfg.horizon, cfg.resolution, cfg.dim)


def power_warp(x: PiecewiseLinearPath, p: float) -> PiecewiseLinearPath:
    """Resamples x along the warp ``phi(t) = T (t/T)^p``, p >= 1.

    The output lives on the original grid; values are read off the
    polyline by linear interpolation, so endpoints are fixed and p = 1
    is the identity.
    """
    if not p >= 1:
        raise ValueError("warp exponent must be at least 1")
    if x.times is None:
        raise ValueError("power_warp needs a timed path")
    if p == 1.0:
        return make_path(x.points.copy(), x.times.copy(), dict(x.meta))
    tau = x.times - x.times[0]
    horizon = tau[-1]
    phi = horizon * (tau / horizon) ** p
    cols = [np.interp(phi, tau, x.points[:, k]) for k in range(x.dim)]
    return make_path(np.column_stack(cols), x.times.copy())


def sample_omega(rng_or_seed) -> float:
    """Uniform angular velocity on [0, OMEGA_MAX)."""
    rng = rng_or_seed if isinstance(rng_or_seed, np.random.Generator) else _rng(rng_or_seed)
    return float(rng.uniform(0.0, OMEGA_MAX))


def _spiral(rng, rho, omega, horizon, resolution) -> PiecewiseLinearPath:
    noise = _brownian(rng, horizon, resolution, 2)
    t = noise.times
    det = np.column_stack([t * np.cos(omega * t), t * np.sin(omega * t)])
    points = rho * det + math.sqrt(1.0 - rho * rho) * noise.points
    return make_path(points, t)


def spiral_process(rho: float, omega: float, cfg: SimConfig) -> PiecewiseLinearPath:
    """Planar spiral of angular velocity omega mixed with Brownian noise.

    ``rho`` in [0, 1] interpolates between pure noise (0) and the
    deterministic spiral ``t (cos omega t, sin omega t)`` (1).
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    if cfg.dim != 2:
        raise ValueError("spiral process is planar; use dim=2")
    return _spiral(_rng(cfg.seed), rho, omega, cfg.horizon, cfg.resolution)


def _warped_mix(rng, rho, cfg, p=None):
    # Draw order is fixed: base path, warp exponent, then noise path.
    # The exponent draw is consumed even when overridden so that x and
    # y stay put when p is pinned from outside.
    x = _brownian(rng, cfg.horizon, cfg.resolution, cfg.dim)
    drawn = float(rng.uniform(1.0, 10.0))
    if p is None:
        p = drawn
    y = _brownian(rng, cfg.horizon, cfg.resolution, cfg.dim)
    z = _mix_with(x, rho, p, y)
    return x, z, p


def _mix_with(x, rho, p, y) -> PiecewiseLinearPath:
    xw = power_warp(x, p)
    points = rho * xw.points + math.sqrt(1.0 - rho * rho) * y.points
    return make_path(points, x.times.copy())


def warped_mix_process(rho: float, cfg: SimConfig, p: float | None = None):
    """Mixture ``z = rho x_warped + sqrt(1 - rho^2) y`` of two Brownian
    paths, with warp exponent drawn uniformly from [1, 10).

    Returns ``(x, z, p)``.  Passing ``p`` overrides the draw (the two
    remaining draws keep their positions in the stream).
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    return _warped_mix(_rng(cfg.seed), rho, cfg, p)


@dataclass(frozen=True)
class SpiralModel:
    """Conditional sampler for the spiral family: the condition is the
    angular velocity, the track is the spiral plus fresh noise."""

    rho: float
    cfg: SimConfig

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        if self.cfg.dim != 2:
            raise ValueError("spiral model is planar; use dim=2")

    def sample_condition(self, rng) -> float:
        return sample_omega(rng)

    def sample_path(self, rng, condition: float) -> PiecewiseLinearPath:
        return _spiral(rng, self.rho, condition, self.cfg.horizon, self.cfg.resolution)


@dataclass(frozen=True)
class WarpedMixModel:
    """Conditional sampler for the warped mixture: the condition is the
    base path, the track mixes its random time warp with fresh noise."""

    rho: float
    cfg: SimConfig

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")

    def sample_condition(self, rng) -> PiecewiseLinearPath:
        return _brownian(rng, self.cfg.horizon, self.cfg.resolution, self.cfg.dim)

    def sample_path(self, rng, condition: PiecewiseLinearPath) -> PiecewiseLinearPath:
        p = float(rng.uniform(1.0, 10.0))
        y = _brownian(rng, self.cfg.horizon, self.cfg.resolution, self.cfg.dim)
        return _mix_with(condition, self.rho, p, y)
