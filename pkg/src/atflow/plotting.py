"""PNG figures written next to the CSV output of ``run`` and ``sweep``."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 120,
}


def figsize(width=6.0, aspect=(np.sqrt(5) - 1.0) / 2.0):
    return (width, width * aspect)


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return path


def energy_figure(trace, path):
    """Energy split, Lyapunov slack and slope/velocity against time."""
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=figsize(8.0, 0.4))
        if trace.records:
            t = np.array([r.t for r in trace.records])
            for name in ("total", "bulk", "surface", "fidelity"):
                ax1.plot(t, [getattr(r.energy, name) for r in trace.records], label=name)
            ax1.set_xlabel("t")
            ax1.set_ylabel("energy")
            ax1.legend()
            slope = np.array([r.slope for r in trace.records])
            vel = np.array([r.velocity_norm for r in trace.records])
            ax2.semilogy(t, np.maximum(slope, 1e-300), label="slope")
            ax2.semilogy(t, np.maximum(vel, 1e-300), "--", label="velocity")
            ax2.set_xlabel("t")
            ax2.legend()
        return _save(fig, path)


def fields_figure(u, rho, grid, path, title=""):
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, 2, figsize=figsize(8.0, 0.45))
        extent = (0.0, grid.lx, 0.0, grid.ly)
        for ax, f, name, cmap in ((axes[0], u, "u", "gray"), (axes[1], rho, "rho", "magma")):
            im = ax.imshow(f, origin="lower", extent=extent, cmap=cmap)
            ax.set_title(f"{name} {title}".strip())
            ax.grid(False)
            fig.colorbar(im, ax=ax, shrink=0.8)
        return _save(fig, path)


def sweep_figure(report, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize(5.0))
        eps = [r.epsilon for r in report.rows]
        ax.semilogx(eps, [r.diffuse_length for r in report.rows], "o-", label="diffuse length")
        ax.semilogx(eps, [r.sliced_length for r in report.rows], "s--", label="sliced length")
        ax.semilogx(eps, [r.ms_energy for r in report.rows], "^:", label="MS estimate")
        ax.invert_xaxis()
        ax.set_xlabel("epsilon")
        ax.legend()
        return _save(fig, path)
