"""Figure rendering for the CLI reports.  Everything is written as SVG.

Output is byte-stable across runs: the SVG id salt is fixed and the
date/creator metadata is dropped.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "xtick.labelsize": 7,
    "ytick.labelsize": 7,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 0.8,
    "svg.fonttype": "none",
    "svg.hashsalt": "cosa",
    "path.simplify": False,
}

BACKGROUND = "#9a9a9a"
PALETTE = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#bcbd22"]


def group_color(label: int) -> str:
    return BACKGROUND if label <= 0 else PALETTE[(label - 1) % len(PALETTE)]


def new_figure(width=6.5, height=4.0, nrows=1, ncols=1):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(nrows=nrows, ncols=ncols, figsize=(width, height), squeeze=False)
    return fig, ax


def save(fig, path):
    with plt.rc_context(STYLE):
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)


def draw_dendrogram(ax, dend, labels=None, leaf_names=None, title=None):
    """Draw from merges + leaf order; leaves coloured by ``labels`` (0 = grey)."""
    n = dend.n
    xpos = np.empty(2 * n - 1)
    ypos = np.zeros(2 * n - 1)
    xpos[np.asarray(dend.leaf_order)] = np.arange(n)
    with plt.rc_context(STYLE):
        for t, m in enumerate(dend.merges):
            v = n + t
            xl, xr = xpos[m.left], xpos[m.right]
            yl, yr = ypos[m.left], ypos[m.right]
            xpos[v] = (xl + xr) / 2
            ypos[v] = m.height
            ax.plot([xl, xl, xr, xr], [yl, m.height, m.height, yr], color="#333333", lw=0.6)
        if labels is not None:
            labels = np.asarray(labels)
            colors = [group_color(int(labels[i])) for i in dend.leaf_order]
            ax.scatter(np.arange(n), np.zeros(n), c=colors, s=9, zorder=3, linewidths=0)
        if leaf_names is not None and n <= 60:
            ax.set_xticks(np.arange(n))
            ax.set_xticklabels([leaf_names[i] for i in dend.leaf_order], rotation=90)
        else:
            ax.set_xticks([])
        ax.set_xlim(-1, n)
        ax.set_ylabel("height")
        if title:
            ax.set_title(title)


def plot_dendrogram(path, dend, labels=None, leaf_names=None, title=None):
    fig, ax = new_figure(7.0, 4.0)
    draw_dendrogram(ax[0, 0], dend, labels, leaf_names, title or f"{dend.linkage} linkage")
    save(fig, path)


def plot_embedding(path, Z, labels=None, title=None):
    fig, ax = new_figure(5.0, 5.0)
    a = ax[0, 0]
    Z = np.asarray(Z)
    if Z.shape[1] == 1:
        Z = np.column_stack([Z[:, 0], np.zeros(len(Z))])
    labels = np.zeros(len(Z), dtype=int) if labels is None else np.asarray(labels)
    with plt.rc_context(STYLE):
        # background first so groups stay visible on top
        for lab in sorted(set(labels.tolist())):
            sel = labels == lab
            a.scatter(Z[sel, 0], Z[sel, 1], s=14, color=group_color(lab), linewidths=0,
                      label="background" if lab == 0 else f"group {lab}")
        a.set_aspect("equal", adjustable="datalim")
        a.set_xlabel("dimension 1")
        a.set_ylabel("dimension 2")
        if len(set(labels.tolist())) > 1:
            a.legend(frameon=False, fontsize=7)
        if title:
            a.set_title(title)
    save(fig, path)


def plot_importance(path, report, title=None):
    """Observed importance curve (black), null curves (green), null mean (red)."""
    fig, ax = new_figure(7.0, 3.5)
    a = ax[0, 0]
    ranks = np.arange(1, len(report.imp) + 1)
    with plt.rc_context(STYLE):
        for curve in report.null_curves:
            a.plot(ranks, curve, color="#2ca02c", lw=0.5)
        if len(report.null_mean):
            a.plot(ranks, report.null_mean, color="#d62728", lw=1.0, label="null mean")
        a.plot(ranks, report.imp, color="black", lw=1.2, label="observed")
        a.set_xlabel("ordered attributes")
        a.set_ylabel("importance")
        a.legend(frameon=False, fontsize=7)
        if title:
            a.set_title(title)
    save(fig, path)


def plot_dendrogram_grid(path, cells, labels=None):
    """``cells`` maps (row_name, col_name) -> Dendrogram; missing cells stay blank."""
    rows = sorted({r for r, _ in cells}, key=["l1", "sqeuclid"].index)
    cols = [c for c in ("unweighted", "external", "cosa") if any(cc == c for _, cc in cells)]
    fig, ax = new_figure(3.2 * len(cols), 2.8 * len(rows), nrows=len(rows), ncols=len(cols))
    for i, r in enumerate(rows):
        for j, c in enumerate(cols):
            if (r, c) in cells:
                draw_dendrogram(ax[i, j], cells[(r, c)], labels, title=f"{r} / {c}")
            else:
                ax[i, j].set_axis_off()
    with plt.rc_context(STYLE):
        fig.tight_layout()
    save(fig, path)
