"""Obstacle-constrained phase-field subproblem.

For fixed u, minimize the convex map rho -> E(u, rho) over 0 <= rho <= rho_bar
by projected gradient descent with Barzilai-Borwein steps and monotone Armijo
backtracking along the projection arc.  The descent direction is scaled by the
Hessian diagonal: the potential (1 - rho)^p flattens as rho -> 1, so
curvatures across the domain span many orders of magnitude and the unscaled
iteration stalls.  A diagonal metric keeps the box projection a plain clip.
"""

from __future__ import annotations

import numpy as np

from .energy import Params, rho_gradient_terms
from .grid import GridError
from .u_step import SolveReport, SolverError

BACKTRACK = 0.5
SUFFICIENT_DECREASE = 1e-4
STEP_MIN, STEP_MAX = 1e-10, 1e10


def default_pg_tol(params: Params) -> float:
    return 1e-8 * np.sqrt(params.grid.area)


class RhoObjective:
    """rho-dependent part of E(u, .) for a frozen u (bulk coupling + surface)."""

    def __init__(self, u, params: Params):
        grid = params.grid
        self.params = params
        gx, gy = grid.gradient(u)
        self.sq_grad_u = gx * gx + gy * gy

    def value(self, rho: np.ndarray) -> float:
        prm = self.params
        grid = prm.grid
        p, eps = prm.p, prm.epsilon
        rb = grid.cell_mean(rho)
        gx, gy = grid.gradient(rho)
        cells = 0.5 * rb * rb * self.sq_grad_u + eps ** (p - 1.0) / p * (gx * gx + gy * gy) ** (p / 2.0)
        pot = prm.alpha / (prm.p_prime * eps) * np.sum(grid.weights * np.abs(1.0 - rho) ** p)
        return float(np.sum(cells) * grid.cell_area + pot)

    def gradient(self, rho: np.ndarray) -> np.ndarray:
        return rho_gradient_terms(self.sq_grad_u, rho, self.params)

    def hessian_diagonal(self, rho: np.ndarray) -> np.ndarray:
        """Mass-represented upper estimate of the Hessian diagonal."""
        prm = self.params
        grid = prm.grid
        p, eps = prm.p, prm.epsilon
        gx, gy = grid.gradient(rho)
        q = eps ** (p - 1.0) * (p - 1.0) * (gx * gx + gy * gy) ** ((p - 2.0) / 2.0)
        stencil = 0.25 / grid.hx ** 2 + 0.25 / grid.hy ** 2
        cells = 0.25 * self.sq_grad_u + 4.0 * stencil * q
        diag = grid.cell_area * grid.cell_mean_transpose(cells) / grid.weights
        diag += prm.alpha * p * (p - 1.0) / (prm.p_prime * eps) * np.abs(1.0 - rho) ** (p - 2.0)
        return np.maximum(diag, 1e-12 * diag.max() + np.finfo(float).tiny)


def projected_gradient(rho, grad, rho_bar) -> np.ndarray:
    return rho - np.maximum(np.minimum(rho - grad, rho_bar), 0.0)


def solve_rho_step(u, rho_bar, params: Params, pg_tol: float | None = None,
                   max_iter: int = 20000, rho_start=None):
    """Return ``(rho, report)``, the minimizer of E(u, .) on {0 <= rho <= rho_bar}."""
    grid = params.grid
    u = grid.check_field(u, "u")
    try:
        rho_bar = grid.check_phase(rho_bar, "rho_bar")
    except GridError as exc:
        raise ValueError(str(exc)) from None
    tol = default_pg_tol(params) if pg_tol is None else float(pg_tol)
    w = grid.weights

    def project(x):
        return np.maximum(np.minimum(x, rho_bar), 0.0)

    def mnorm(v):
        return float(np.sqrt(np.sum(w * v * v)))

    obj = RhoObjective(u, params)
    x = project(rho_bar if rho_start is None else grid.check_field(rho_start, "rho_start"))
    f = obj.value(x)
    r = obj.gradient(x)
    step = 1.0
    pg = mnorm(projected_gradient(x, r, rho_bar))
    for k in range(max_iter):
        if pg <= tol:
            return x, SolveReport(k, pg, True)
        scale = obj.hessian_diagonal(x)
        direction = r / scale
        step = min(max(step, STEP_MIN), STEP_MAX)
        slack = 4.0 * np.finfo(float).eps * max(abs(f), 1.0)
        while True:
            xn = project(x - step * direction)
            d = xn - x
            gd = float(np.sum(w * r * d))
            fn = obj.value(xn)
            if fn <= f + SUFFICIENT_DECREASE * gd + slack or step <= STEP_MIN:
                break
            step *= BACKTRACK
        rn = obj.gradient(xn)
        y = rn - r
        sy = float(np.sum(w * d * y))
        ss = float(np.sum(w * scale * d * d))
        step = ss / sy if sy > 0 else STEP_MAX
        x, f, r = xn, fn, rn
        pg = mnorm(projected_gradient(x, r, rho_bar))
    report = SolveReport(max_iter, pg, pg <= tol)
    if report.converged:
        return x, report
    raise SolverError(f"rho-step projected gradient {pg:.3e} > {tol:.3e} after {max_iter} iterations",
                      report)


def init_rho(u0, params: Params, pg_tol: float | None = None, max_iter: int = 20000):
    """Unconstrained phase-field minimizer for the initial displacement (rho <= 1 is inactive)."""
    rho, _ = solve_rho_step(u0, np.ones(params.grid.shape), params, pg_tol, max_iter)
    return rho
