"""Static figure rendering for the report paths.

matplotlib is imported lazily and forced onto the Agg backend so the CLI
works headless; every figure is written to a file, never shown.
"""

from __future__ import annotations

import numpy as np


def _plt():
    import matplotlib
    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt
    return plt


def save_surface_figure(surface, path, v_span=(-1.0, 1.0), n_rulings: int = 48,
                        n_profile: int = 160) -> None:
    """3D wireframe of the ruled surface with the striction curve overlaid."""
    plt = _plt()
    fig = plt.figure(figsize=(6.0, 5.0))
    ax = fig.add_subplot(111, projection="3d")
    us = np.linspace(surface.u_min, surface.u_max, n_rulings)
    v0, v1 = v_span
    for u in us:
        f = surface.base.point(float(u))
        q = surface.director.point(float(u))
        seg = np.stack([f + v0 * q, f + v1 * q])
        ax.plot(seg[:, 0], seg[:, 1], seg[:, 2], color="0.65", lw=0.6)
    up = np.linspace(surface.u_min, surface.u_max, n_profile)
    for v in (v0, v1):
        pts = surface.point(up, np.full_like(up, v))
        ax.plot(pts[:, 0], pts[:, 1], pts[:, 2], color="0.3", lw=0.8)
    try:
        st = surface.striction()
        ax.plot(st.points[:, 0], st.points[:, 1], st.points[:, 2],
                color="crimson", lw=1.6, label="striction curve")
        ax.legend(loc="upper left", fontsize=8)
    except Exception:
        pass  # cylindrical: no striction curve to draw
    ax.set_title(surface.name or "ruled surface", fontsize=10)
    ax.set_xlabel("x"), ax.set_ylabel("y"), ax.set_zlabel("z")
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_profile_figure(F, theta, d_values, path) -> None:
    """Panels of d(u), curvatures k1/k2 over s, and f(phi)."""
    plt = _plt()
    fig, axes = plt.subplots(2, 2, figsize=(8.0, 5.6))
    ax = axes[0, 0]
    ax.plot(F.u, d_values, lw=1.0)
    ax.axhline(0.0, color="0.8", lw=0.6)
    ax.set_xlabel("u"), ax.set_ylabel("distribution parameter d")
    ax = axes[0, 1]
    ax.plot(F.s, F.k1, lw=1.0, label="k1")
    ax.plot(F.s, F.k2, lw=1.0, label="k2")
    ax.set_xlabel("striction arc length s"), ax.legend(fontsize=8)
    ax = axes[1, 0]
    valid = F.k1 > 0
    ax.plot(F.phi[valid], (F.k2 / F.k1)[valid], lw=1.0)
    ax.set_xlabel("phi"), ax.set_ylabel("structure function f")
    ax = axes[1, 1]
    if theta is not None:
        ax.plot(theta.s, theta.theta, lw=1.0)
        ax.set_xlabel("s"), ax.set_ylabel("tangent angle theta")
    else:
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_comparison_figure(sf_a, sf_b, report, path) -> None:
    """Structure functions on the shared phi span plus the lambda profile."""
    plt = _plt()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.4, 3.4))
    grid = np.linspace(0.0, report.phi_overlap, 512)
    ax1.plot(grid, sf_a(grid), lw=1.0, label="surface A")
    ax1.plot(grid, sf_b(grid), lw=1.0, ls="--", label="surface B")
    ax1.set_xlabel("phi"), ax1.set_ylabel("f = k2/k1")
    ax1.legend(fontsize=8)
    t = report.transformation
    if t is not None:
        ax2.plot(t.s_source, t.lam, lw=1.0)
        ax2.set_xlabel("s_b"), ax2.set_ylabel("lambda = d s_a / d s_b")
    else:
        ax2.axis("off")
    verdict = "similar" if report.verdict else "not similar"
    fig.suptitle(f"{verdict} ({report.mode})", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
