"""Report figures rendered to files (Agg backend, no display)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def series_figure(report, path):
    """Residual, curvature floor and barrier distances against flow time."""
    s = report.series
    t = np.asarray(s["t_flow"])
    fig, axes = plt.subplots(3, 1, figsize=(6.4, 7.2), sharex=True)
    axes[0].semilogy(t, np.maximum(s["residual"], 1e-300), color="k")
    axes[0].set_ylabel(r"$\max|\Phi(F)-\tilde f|$")
    axes[1].plot(t, s["kappa_min"], color="C0", label=r"$\kappa_{\min}$")
    axes[1].plot(t, s["vtilde_max"], color="C1", label=r"$\tilde v_{\max}$")
    axes[1].legend(frameon=False)
    axes[2].plot(t, s["dist_lower"], color="C2", label=r"$\min(u-u_1)$")
    axes[2].plot(t, s["dist_upper"], color="C3", label=r"$\min(u_2-u)$")
    axes[2].legend(frameon=False)
    axes[2].set_xlabel("flow time")
    fig.suptitle(f"stop cause: {report.stop_cause}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def field_figure(state, path, title="final u"):
    """The graph function: a line for n = 1, an image (mid slice for n = 3) otherwise."""
    u = state.u
    x = state.grid.axes()
    fig, ax = plt.subplots(figsize=(5.6, 4.6))
    if state.grid.n == 1:
        ax.plot(x[0], u, color="k")
        ax.set_xlabel("$x^1$")
        ax.set_ylabel("u")
    else:
        img = u if state.grid.n == 2 else u[..., u.shape[-1] // 2]
        mesh = ax.pcolormesh(x[0], x[1], img.T, shading="auto", cmap="viridis")
        fig.colorbar(mesh, ax=ax)
        ax.set_xlabel("$x^1$")
        ax.set_ylabel("$x^2$")
        ax.set_aspect("equal")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
