"""Synthetic grey-level data for calibration runs."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .grid import Grid

KINDS = ("two_phase", "disk", "step_edge", "constant")


def make_datum(kind: str, grid: Grid, noise: float = 0.0, seed: int = 0, value: float = 0.0) -> np.ndarray:
    X, Y = grid.coords()
    if kind == "two_phase":
        # disk of radius 0.3 * min side on a zero background
        r = 0.3 * min(grid.lx, grid.ly)
        g = (np.hypot(X - 0.5 * grid.lx, Y - 0.5 * grid.ly) < r).astype(float)
    elif kind == "disk":
        r = 0.25 * min(grid.lx, grid.ly)
        g = (np.hypot(X - 0.5 * grid.lx, Y - 0.5 * grid.ly) < r).astype(float)
    elif kind == "step_edge":
        # vertical edge through the middle, length ly
        g = (X >= 0.5 * grid.lx).astype(float)
    elif kind == "constant":
        g = np.full(grid.shape, float(value))
    else:
        raise ValueError(f"unknown synthetic datum {kind!r}; expected one of {KINDS}")
    if noise > 0:
        g = g + noise * np.random.default_rng(seed).standard_normal(grid.shape)
    return g


def smooth(field: np.ndarray, grid: Grid, sigma: float) -> np.ndarray:
    """Gaussian blur with standard deviation ``sigma`` in length units (reflecting edges)."""
    if sigma <= 0:
        return np.array(field, dtype=float)
    return ndimage.gaussian_filter(np.asarray(field, dtype=float),
                                   sigma=(sigma / grid.hy, sigma / grid.hx), mode="nearest")
