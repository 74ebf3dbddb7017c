"""Figure rendering for experiment reports (files only, Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = [
    "plot_region",
    "plot_decay",
    "plot_series",
    "plot_scatter",
]


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_region(vertices, path, title=""):
    """Trapezoid in the (1/r, 1/s') square with the duality line."""
    fig, ax = plt.subplots(figsize=(5, 5))
    xs = [float(u) for u, _ in vertices] + [float(vertices[0][0])]
    ys = [float(v) for _, v in vertices] + [float(vertices[0][1])]
    ax.plot([0, 1], [1, 0], "k--", lw=0.8, label="duality line")
    ax.plot(xs, ys, "o-", color="tab:blue", label="region boundary")
    ax.fill(xs, ys, alpha=0.15, color="tab:blue")
    for i, (u, v) in enumerate(vertices, start=1):
        ax.annotate(f"v{i}", (float(u), float(v)), textcoords="offset points", xytext=(4, 4))
    ax.set_xlim(-0.05, 1.1)
    ax.set_ylim(-0.05, 1.1)
    ax.set_xlabel("1/r")
    ax.set_ylabel("1/s'")
    ax.set_title(title)
    ax.legend(loc="lower left", fontsize=8)
    _save(fig, path)


def plot_decay(series, fits, path, title="", ylabel="log2 norm"):
    """Per-label (j, norm) series with fitted lines; log2 vertical scale."""
    import numpy as np

    fig, ax = plt.subplots(figsize=(6, 4))
    for label, pts in sorted(series.items()):
        js = sorted(pts)
        vals = [np.log2(max(pts[j], 1e-300)) for j in js]
        line, = ax.plot(js, vals, "o-", label=label)
        fit = fits.get(label)
        if fit is not None:
            ax.plot(js, [fit.slope * j + fit.intercept for j in js], "--",
                    color=line.get_color(), lw=0.8)
    ax.set_xlabel("j")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_series(xs, ys, path, xlabel="", ylabel="", title="", logy=False):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs, ys, "o-")
    if logy:
        ax.set_yscale("log", base=2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    _save(fig, path)


def plot_scatter(xs, ys, path, xlabel="", ylabel="", title=""):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter(xs, ys, s=12)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    _save(fig, path)
