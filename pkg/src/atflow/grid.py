"""Uniform node grid on a rectangle and its discrete operators.

Fields are numpy arrays of shape ``(ny, nx)`` (row index = y), so the
flattened layout is row-major.  Cell quantities have shape ``(ny-1, nx-1)``.

The gradient is the one-point-quadrature bilinear element gradient (average
of the two edge differences along each axis).  ``divergence_adjoint`` is its
exact negative adjoint with respect to the lumped-mass inner product on nodes
and the area-weighted inner product on cells; homogeneous Neumann conditions
are therefore natural.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GridError(ValueError):
    """Raised when a field does not match its grid or a grid is invalid."""


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0
    _weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny:
            raise GridError("nx and ny must be integers")
        if self.nx < 2 or self.ny < 2:
            raise GridError(f"need nx, ny >= 2 (got {self.nx}, {self.ny})")
        if not (np.isfinite(self.lx) and np.isfinite(self.ly)) or self.lx <= 0 or self.ly <= 0:
            raise GridError(f"lx, ly must be finite and > 0 (got {self.lx}, {self.ly})")
        w = np.full((self.ny, self.nx), self.hx * self.hy)
        w[0, :] *= 0.5
        w[-1, :] *= 0.5
        w[:, 0] *= 0.5
        w[:, -1] *= 0.5
        w.setflags(write=False)
        object.__setattr__(self, "_weights", w)

    @property
    def hx(self) -> float:
        return self.lx / (self.nx - 1)

    @property
    def hy(self) -> float:
        return self.ly / (self.ny - 1)

    @property
    def h(self) -> float:
        return max(self.hx, self.hy)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def cell_shape(self) -> tuple[int, int]:
        return (self.ny - 1, self.nx - 1)

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    @property
    def area(self) -> float:
        return self.lx * self.ly

    @property
    def weights(self) -> np.ndarray:
        """Lumped nodal mass weights (read-only)."""
        return self._weights

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.linspace(0.0, self.lx, self.nx)
        y = np.linspace(0.0, self.ly, self.ny)
        return np.meshgrid(x, y)

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        x = (np.arange(self.nx - 1) + 0.5) * self.hx
        y = (np.arange(self.ny - 1) + 0.5) * self.hy
        return np.meshgrid(x, y)

    # -- validation -------------------------------------------------------

    def check_field(self, f, name: str = "field") -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != self.shape:
            if f.size == self.nx * self.ny and f.ndim == 1:
                f = f.reshape(self.shape)
            else:
                raise GridError(f"{name} has shape {f.shape}, grid expects {self.shape}")
        if not np.all(np.isfinite(f)):
            raise GridError(f"{name} has non-finite entries")
        return f

    def check_phase(self, rho, name: str = "rho") -> np.ndarray:
        rho = self.check_field(rho, name)
        if rho.min() < 0.0 or rho.max() > 1.0:
            raise GridError(f"{name} must lie in [0, 1] (range {rho.min():.3g}..{rho.max():.3g})")
        return rho

    def check_cells(self, s, name: str = "cell field") -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if s.shape != self.cell_shape:
            raise GridError(f"{name} has shape {s.shape}, grid expects {self.cell_shape}")
        return s

    # -- operators --------------------------------------------------------

    def gradient(self, f) -> tuple[np.ndarray, np.ndarray]:
        """Per-cell gradient ``(gx, gy)`` of a nodal field."""
        f = self.check_field(f)
        dx = f[:, 1:] - f[:, :-1]
        dy = f[1:, :] - f[:-1, :]
        gx = (dx[:-1, :] + dx[1:, :]) / (2.0 * self.hx)
        gy = (dy[:, :-1] + dy[:, 1:]) / (2.0 * self.hy)
        return gx, gy

    def gradient_transpose(self, gx, gy) -> np.ndarray:
        """Euclidean transpose of :meth:`gradient` (scatter to nodes)."""
        gx = self.check_cells(gx, "gx") / (2.0 * self.hx)
        gy = self.check_cells(gy, "gy") / (2.0 * self.hy)
        out = np.zeros(self.shape)
        out[:-1, 1:] += gx
        out[1:, 1:] += gx
        out[:-1, :-1] -= gx
        out[1:, :-1] -= gx
        out[1:, :-1] += gy
        out[1:, 1:] += gy
        out[:-1, :-1] -= gy
        out[:-1, 1:] -= gy
        return out

    def divergence_adjoint(self, gx, gy) -> np.ndarray:
        """Nodal field ``d`` with <d, f>_M = -<(gx, gy), gradient(f)>_cells."""
        return -self.cell_area * self.gradient_transpose(gx, gy) / self._weights

    def cell_mean(self, f) -> np.ndarray:
        f = self.check_field(f)
        return 0.25 * (f[:-1, :-1] + f[:-1, 1:] + f[1:, :-1] + f[1:, 1:])

    def cell_mean_transpose(self, s) -> np.ndarray:
        s = 0.25 * self.check_cells(s)
        out = np.zeros(self.shape)
        out[:-1, :-1] += s
        out[:-1, 1:] += s
        out[1:, :-1] += s
        out[1:, 1:] += s
        return out

    # -- integrals --------------------------------------------------------

    def mass_inner(self, f, g) -> float:
        return float(np.sum(self._weights * self.check_field(f) * self.check_field(g)))

    def mass_norm(self, f) -> float:
        f = self.check_field(f)
        return float(np.sqrt(np.sum(self._weights * f * f)))

    def node_integral(self, f) -> float:
        return float(np.sum(self._weights * self.check_field(f)))

    def cell_integral(self, s) -> float:
        return float(np.sum(self.check_cells(s)) * self.cell_area)

    def cell_inner(self, a: tuple, b: tuple) -> float:
        return float(np.sum(a[0] * b[0] + a[1] * b[1]) * self.cell_area)
