"""Figures written next to the CSV reports of ``verify`` and ``bench``."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from zones.sphere import alpha_array  # noqa: E402

_STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.dpi": 100,
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, bbox_inches="tight", metadata={"Software": None})
    plt.close(fig)
    return path


def plot_alpha(thetas, path, samples=None) -> Path:
    """Alpha against |dec| for each theta, with the secant approximation dashed.

    ``samples`` is an optional list of ``(theta, dec, sampled_alpha)`` points
    drawn as markers.
    """
    with plt.rc_context(_STYLE):
        fig, (ax, ax_err) = plt.subplots(1, 2, figsize=(9, 3.6))
        for theta in thetas:
            dec = np.linspace(0.0, 90.0 - theta - 1e-6, 400)
            a = alpha_array(theta, dec)
            approx = theta / np.cos(np.radians(dec))
            line, = ax.semilogy(dec, a, label=f"theta={theta:g}")
            ax.semilogy(dec, approx, ls="--", color=line.get_color(), lw=0.8)
            ax_err.semilogy(dec, np.abs(a - approx) / a, color=line.get_color(), label=f"theta={theta:g}")
        if samples:
            s = np.asarray(samples, dtype=float)
            ax.semilogy(np.abs(s[:, 1]), s[:, 2], "k.", ms=3, label="sampled circle")
        ax.set_xlabel("|dec| (deg)")
        ax.set_ylabel("alpha (deg)")
        ax.legend(loc="upper left")
        ax_err.axhline(1e-5, color="k", lw=0.6, ls=":")
        ax_err.set_xlabel("|dec| (deg)")
        ax_err.set_ylabel("relative error of theta/cos(dec)")
        fig.tight_layout()
        return _save(fig, path)


def plot_bench(rows, path) -> Path:
    """Bar chart of wall time per method; ``rows`` as produced by ``zones bench``."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.2))
        names = [r["method"] for r in rows]
        secs = [max(float(r["seconds"]), 1e-6) for r in rows]
        bars = ax.bar(names, secs, color=["#4477aa", "#ee6677", "#228833"][: len(rows)])
        ax.set_yscale("log")
        ax.set_ylabel("wall time (s)")
        for b, r in zip(bars, rows):
            ax.annotate(f"{float(r['speedup_vs_batch']):.1f}x", (b.get_x() + b.get_width() / 2, b.get_height()),
                        ha="center", va="bottom", fontsize=8)
        ax.set_title(f"self-match, n={rows[0]['n']}, theta={rows[0]['theta']}")
        fig.tight_layout()
        return _save(fig, path)


def plot_match_distances(distances, theta: float, path) -> Path:
    """Histogram of match separations, scaled by area so a uniform sky is flat."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.2))
        d = np.asarray(distances, dtype=float)
        edges = np.linspace(0.0, theta, 41)
        counts, _ = np.histogram(d, bins=edges)
        ring = np.cos(np.radians(edges[:-1])) - np.cos(np.radians(edges[1:]))
        ax.step(edges[:-1], counts / np.where(ring > 0, ring, 1.0), where="post")
        ax.set_xlabel("separation (deg)")
        ax.set_ylabel("pairs per unit area")
        fig.tight_layout()
        return _save(fig, path)
