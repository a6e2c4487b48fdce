"""Sharp crack extraction from a diffuse phase field by level-set slicing.

The sublevel set {rho < s} is taken on the cell-mean field.  Cell-mean values
sit at cell centres; the field is extended to the domain boundary by edge
replication so the contour reaches the boundary at a right angle (the
Neumann-natural continuation).  Only the perimeter inside the domain counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energy import Params, diffuse_crack_length
from .grid import Grid


def sample_points(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Coordinates of the padded cell-centre lattice along x and y."""
    xs = np.concatenate([[0.0], (np.arange(grid.nx - 1) + 0.5) * grid.hx, [grid.lx]])
    ys = np.concatenate([[0.0], (np.arange(grid.ny - 1) + 0.5) * grid.hy, [grid.ly]])
    return xs, ys


def padded_cell_mean(grid: Grid, rho) -> np.ndarray:
    return np.pad(grid.cell_mean(rho), 1, mode="edge")


def contour_length(values: np.ndarray, xs: np.ndarray, ys: np.ndarray, level: float) -> float:
    """Total length of the marching-squares contour ``values == level``.

    ``values[j, i]`` is sampled at ``(xs[i], ys[j])``.  Saddle squares are
    resolved with the square-centre average.
    """
    a = values[:-1, :-1]  # (x_i, y_j)
    b = values[:-1, 1:]   # (x_i+1, y_j)
    c = values[1:, 1:]    # (x_i+1, y_j+1)
    d = values[1:, :-1]   # (x_i, y_j+1)
    wx = np.diff(xs)[None, :]
    wy = np.diff(ys)[:, None]
    ia, ib, ic, id_ = a < level, b < level, c < level, d < level

    with np.errstate(divide="ignore", invalid="ignore"):
        # crossing points in local square coordinates
        bottom = (np.where(ia != ib, (level - a) / (b - a), np.nan) * wx, np.zeros_like(a))
        right = (np.broadcast_to(wx, a.shape), np.where(ib != ic, (level - b) / (c - b), np.nan) * wy)
        top = (np.where(id_ != ic, (level - d) / (c - d), np.nan) * wx, np.broadcast_to(wy, a.shape))
        left = (np.zeros_like(a), np.where(ia != id_, (level - a) / (d - a), np.nan) * wy)
    edges = {"bottom": bottom, "right": right, "top": top, "left": left}
    has = {k: ~np.isnan(v[0] if k in ("bottom", "top") else v[1]) for k, v in edges.items()}
    count = sum(m.astype(int) for m in has.values())

    def seg(e1, e2):
        p, q = edges[e1], edges[e2]
        return np.hypot(p[0] - q[0], p[1] - q[1])

    total = 0.0
    pairs = [("bottom", "right"), ("bottom", "top"), ("bottom", "left"),
             ("right", "top"), ("right", "left"), ("top", "left")]
    two = count == 2
    for e1, e2 in pairs:
        m = two & has[e1] & has[e2]
        if m.any():
            total += float(np.sum(seg(e1, e2)[m]))

    saddle = count == 4
    if saddle.any():
        centre_in = 0.25 * (a + b + c + d) < level
        cut_bd = saddle & (ia == centre_in)
        cut_ac = saddle & (ia != centre_in)
        total += float(np.sum((seg("bottom", "right") + seg("top", "left"))[cut_bd]))
        total += float(np.sum((seg("bottom", "left") + seg("right", "top"))[cut_ac]))
    return total


def level_set_perimeter(rho, s: float, grid: Grid) -> float:
    """Perimeter in the domain of {rho < s}, rho taken through its cell means."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"threshold s must lie in (0, 1) (got {s})")
    rho = grid.check_field(rho, "rho")
    xs, ys = sample_points(grid)
    return contour_length(padded_cell_mean(grid, rho), xs, ys, s)


def thresholds(delta1: float, delta2: float, n: int) -> np.ndarray:
    """``n`` equispaced levels strictly inside (delta1, delta2)."""
    return delta1 + (delta2 - delta1) * np.arange(1, n + 1) / (n + 1)


@dataclass(frozen=True)
class CrackEstimate:
    threshold: float
    perimeter: float
    sliced_length: float  # perimeter / 2: a thin band {rho < s} has two faces
    diffuse_length: float


def extract_crack(rho, params: Params, delta1: float = 0.1, delta2: float = 0.9,
                  n_thresholds: int = 33) -> CrackEstimate:
    """Scan thresholds in (delta1, delta2) and keep the one of least perimeter."""
    if not (0.0 < delta1 < delta2 < 1.0):
        raise ValueError(f"need 0 < delta1 < delta2 < 1 (got {delta1}, {delta2})")
    if n_thresholds < 1:
        raise ValueError("n_thresholds must be >= 1")
    grid = params.grid
    rho = grid.check_field(rho, "rho")
    xs, ys = sample_points(grid)
    field = padded_cell_mean(grid, rho)
    levels = thresholds(delta1, delta2, n_thresholds)
    perims = np.array([contour_length(field, xs, ys, s) for s in levels])
    k = int(np.argmin(perims))
    return CrackEstimate(float(levels[k]), float(perims[k]), 0.5 * float(perims[k]),
                         diffuse_crack_length(rho, params))
