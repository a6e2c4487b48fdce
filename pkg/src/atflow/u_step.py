"""Quadratic u-subproblem of one minimizing-movement step.

For fixed rho, minimize E(u, rho) + ||u - u_prev||_M^2 / (2 delta).  The
Euler-Lagrange equation in mass-represented form is

    (1/delta + beta) u + K(rho) u = u_prev / delta + beta g,

with K(rho) u = -div((eta + mean(rho)^2) grad u).  Multiplying by the lumped
mass gives a Euclidean-symmetric positive definite system that is solved by
Jacobi-preconditioned conjugate gradients, matrix-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energy import Params, stiffness_coefficient
from .grid import Grid


class SolverError(RuntimeError):
    """A subproblem solver did not converge; ``report`` carries the last state."""

    def __init__(self, message: str, report: "SolveReport"):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    relative_residual: float
    converged: bool


class UOperator:
    """The map v -> (1/delta + beta) v + K(rho) v, self-adjoint in the mass inner product."""

    def __init__(self, grid: Grid, coefficient: np.ndarray, shift: float):
        self.grid = grid
        self.coefficient = grid.check_cells(coefficient, "coefficient")
        self.shift = float(shift)
        w = grid.weights
        # diag of G^T C G at each node: corner weights 1/(4hx^2) + 1/(4hy^2) per adjacent cell
        cd = grid.cell_area * self.coefficient * (0.25 / grid.hx**2 + 0.25 / grid.hy**2)
        stiff_diag = 4.0 * grid.cell_mean_transpose(cd)
        self.diagonal = self.shift * w + stiff_diag

    @classmethod
    def for_step(cls, rho, delta: float, params: Params) -> "UOperator":
        return cls(params.grid, stiffness_coefficient(rho, params), 1.0 / delta + params.beta)

    def apply_weighted(self, v: np.ndarray) -> np.ndarray:
        """Euclidean-symmetric form M A v."""
        grid = self.grid
        gx, gy = grid.gradient(v)
        c = self.coefficient
        return self.shift * grid.weights * v + grid.cell_area * grid.gradient_transpose(c * gx, c * gy)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.apply_weighted(v) / self.grid.weights


def conjugate_gradient(op: UOperator, rhs_weighted: np.ndarray, x0: np.ndarray,
                       tol: float = 1e-10, max_iter: int | None = None):
    """Jacobi-PCG for ``op.apply_weighted(x) = rhs_weighted``.

    Residuals are measured in the mass norm of the mass-represented residual,
    relative to the same norm of the right-hand side.
    """
    w = op.grid.weights
    max_iter = 10 * w.size if max_iter is None else max_iter
    inv_diag = 1.0 / op.diagonal

    def mnorm(r):
        return np.sqrt(np.sum(r * r / w))

    b_norm = mnorm(rhs_weighted)
    x = x0.copy()
    r = rhs_weighted - op.apply_weighted(x)
    if b_norm == 0.0:
        b_norm = 1.0
    res = mnorm(r) / b_norm
    if res <= tol:
        return x, SolveReport(0, float(res), True)
    z = inv_diag * r
    d = z.copy()
    rz = np.sum(r * z)
    for k in range(1, max_iter + 1):
        Ad = op.apply_weighted(d)
        step = rz / np.sum(d * Ad)
        x += step * d
        r -= step * Ad
        res = mnorm(r) / b_norm
        if res <= tol:
            return x, SolveReport(k, float(res), True)
        z = inv_diag * r
        rz_new = np.sum(r * z)
        d = z + (rz_new / rz) * d
        rz = rz_new
    return x, SolveReport(max_iter, float(res), False)


def solve_u_step(u_prev, rho, delta: float, params: Params, cg_tol: float = 1e-10,
                 max_iter: int | None = None, u_start=None):
    """Return ``(u, report)`` minimizing E(., rho) + ||. - u_prev||_M^2 / (2 delta).

    CG is warm-started from ``u_start`` (default ``u_prev``).
    """
    if not delta > 0:
        raise ValueError(f"delta must be > 0 (got {delta})")
    grid = params.grid
    u_prev = grid.check_field(u_prev, "u_prev")
    rho = grid.check_field(rho, "rho")
    op = UOperator.for_step(rho, delta, params)
    rhs = grid.weights * (u_prev / delta + params.beta * params.g)
    x0 = u_prev if u_start is None else grid.check_field(u_start, "u_start")
    u, report = conjugate_gradient(op, rhs, x0, tol=cg_tol, max_iter=max_iter)
    if not report.converged:
        raise SolverError(
            f"u-step CG stalled at relative residual {report.relative_residual:.3e} "
            f"after {report.iterations} iterations", report)
    return u, report
