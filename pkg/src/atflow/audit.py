"""Unilateral slope and per-step audits of the discrete flow laws."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energy import Params, grad_u, total_energy

AUDIT_RTOL = 1e-9
MAX_PRINCIPLE_SLACK = 1e-8


def slope(u, rho, params: Params) -> float:
    """Mass norm of div((eta + rho^2) grad u) - beta (u - g)."""
    return params.grid.mass_norm(grad_u(u, rho, params))


@dataclass(frozen=True)
class Check:
    ok: bool
    value: float  # violation magnitude (>= 0) or signed slack (>= -tol passes)


@dataclass(frozen=True)
class AuditReport:
    rho_monotone: Check
    max_principle: Check
    energy_inequality: Check
    surface_monotone: Check
    bulk_monotone: Check

    @property
    def ok(self) -> bool:
        return all(c.ok for c in (self.rho_monotone, self.max_principle, self.energy_inequality,
                                  self.surface_monotone, self.bulk_monotone))

    def failures(self) -> list[str]:
        return [name for name in ("rho_monotone", "max_principle", "energy_inequality",
                                  "surface_monotone", "bulk_monotone")
                if not getattr(self, name).ok]


def audit_step(prev, nxt, delta: float, params: Params) -> AuditReport:
    """Check one step ``prev -> nxt`` against the laws of the unilateral scheme.

    Never raises on a violated law; each check carries its magnitude.  Slack-type
    checks pass when slack >= -1e-9 * max(E_prev, E_next).
    """
    grid = params.grid
    rho_inc = float(np.max(nxt.rho - prev.rho))
    rho_violation = max(rho_inc, 0.0, float(-nxt.rho.min()))

    bound = max(float(np.abs(prev.u).max()), float(np.abs(params.g).max()))
    mp_violation = max(float(np.abs(nxt.u).max()) - bound, 0.0)

    e_prev = total_energy(prev.u, prev.rho, params)
    e_next = total_energy(nxt.u, nxt.rho, params)
    tol = AUDIT_RTOL * max(e_prev.total, e_next.total)
    du = nxt.u - prev.u
    dissipation = grid.mass_inner(du, du) / (2.0 * delta)
    energy_slack = e_prev.total - e_next.total - dissipation
    surface_slack = e_next.surface - e_prev.surface
    bulk_slack = e_prev.bulk - e_next.bulk
    return AuditReport(
        rho_monotone=Check(rho_violation == 0.0, rho_violation),
        max_principle=Check(mp_violation <= MAX_PRINCIPLE_SLACK, mp_violation),
        energy_inequality=Check(energy_slack >= -tol, energy_slack),
        surface_monotone=Check(surface_slack >= -tol, surface_slack),
        bulk_monotone=Check(bulk_slack >= -tol, bulk_slack),
    )

