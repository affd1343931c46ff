"""Figure rendering for the CLI report paths.

Everything here draws to files through the Agg backend — no display,
no interactivity — so figures land next to the delimited data they
illustrate.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import moment_engine as me  # noqa: E402
from .distribution_engine import GriddedDistribution  # noqa: E402


def save_trajectory_figure(path, params, w_grid=None) -> None:
    """Error–disturbance trajectory against the three bound curves.

    X axis is the normalized error, Y the normalized disturbance, both
    logarithmic.  The hyperbola is the naive product bound, the lower
    curve the trade-off bound boundary, the arc the circle bound at its
    closed-form radius.
    """
    rows = me.trajectory(params, w_grid)
    eps = np.array([r[1] for r in rows])
    eta = np.array([r[2] for r in rows])
    bound, w_star = me.circle_minimum(params)

    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    grid = np.geomspace(1e-2, 1e2, 512)
    ax.plot(grid, 1.0 / grid, "k--", lw=1.0, label="product bound")
    lo = grid[grid < 1.0]
    ax.plot(lo, (1.0 - lo) / (1.0 + lo), "k:", lw=1.0,
            label="trade-off bound")
    radius = np.sqrt(bound)
    arc = np.linspace(0.0, np.pi / 2.0, 256)
    ax.plot(radius * np.cos(arc), radius * np.sin(arc), "-", color="0.6",
            lw=1.0, label="circle bound")
    ax.plot(eps, eta, "-", color="C0", lw=1.6, label="trajectory")
    if np.isfinite(w_star) and w_star > 0.0:
        e_s, n_s = me.normalized_moments(params, w_star)
        ax.plot([e_s], [n_s], "o", color="C3", ms=5, label="closest approach")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlim(1e-2, 1e2)
    ax.set_ylim(1e-2, 1e2)
    ax.set_xlabel("normalized error")
    ax.set_ylabel("normalized disturbance")
    ax.set_title(f"a={params.a:g}, b={params.b:g}, "
                 f"c={params.c:g}, d={params.d:g}")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_distribution_figure(path, curves) -> None:
    """Overlay labelled densities: ``curves`` is (label, distribution) pairs."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for label, dist in curves:
        if not isinstance(dist, GriddedDistribution):
            raise TypeError(f"{label}: expected a GriddedDistribution")
        ax.plot(dist.coordinates(), dist.values, lw=1.2, label=label)
    ax.set_xlabel("coordinate")
    ax.set_ylabel("density")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_limit_study_figure(path, rows) -> None:
    """Log–log convergence plot for a weak-coupling limit study."""
    rows = list(rows)
    a = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    ax.loglog(a, [r[1] for r in rows], "o-", label="readout L1 gap")
    ax.loglog(a, [r[2] for r in rows], "s-", label="momentum L1 gap")
    ax.set_xlabel("coupling a")
    ax.set_ylabel("L1 distance to limit")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
