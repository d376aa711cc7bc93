"""Report figures written to files (Agg backend, no display needed)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
from matplotlib import pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# PNG metadata carries the matplotlib version by default; drop it so reruns are byte-identical
_SAVE = {"dpi": 120, "metadata": {"Software": None}}


def set_style(font_size: int = 10) -> None:
    plt.rcParams.update(
        {
            "axes.titlesize": font_size + 1,
            "axes.labelsize": font_size,
            "font.size": font_size,
            "legend.fontsize": font_size - 1,
            "xtick.labelsize": font_size - 1,
            "ytick.labelsize": font_size - 1,
            "axes.spines.top": False,
            "axes.spines.right": False,
        }
    )


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def scree_plot(eigenvalues: Sequence[float], path, n_show: int = 40, k: int | None = None) -> Path:
    """Eigenvalues by component with the eigenvalue-one line and the chosen k."""
    set_style()
    lam = np.asarray(eigenvalues)[:n_show]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    x = np.arange(1, lam.size + 1)
    ax.plot(x, lam, marker="o", ms=3, lw=1, color="0.2")
    ax.axhline(1.0, color="tab:red", lw=0.8, ls="--", label="eigenvalue = 1")
    if k is not None:
        ax.axvline(k + 0.5, color="tab:blue", lw=0.8, ls=":", label=f"k = {k}")
    ax.set_xlabel("Component")
    ax.set_ylabel("Eigenvalue")
    ax.legend(frameon=False)
    fig.tight_layout()
    return _save(fig, path)


def group_means_plot(labels: Sequence[str], means: Sequence[float], sizes: Sequence[int], path, cutpoints=()) -> Path:
    set_style()
    order = np.argsort(-np.asarray(means), kind="stable")
    fig, ax = plt.subplots(figsize=(6, 0.35 * len(labels) + 1.2))
    y = np.arange(len(order))
    ax.barh(y, np.asarray(means)[order], color="0.55")
    ax.set_yticks(y, [f"{labels[i]} (n={sizes[i]})" for i in order])
    ax.invert_yaxis()
    for c in cutpoints:
        ax.axvline(c, color="tab:red", lw=0.8, ls="--")
    ax.set_xlabel("Mean citations per journal")
    fig.tight_layout()
    return _save(fig, path)


def dendrogram_plot(linkage: np.ndarray, path, names: Sequence[str] = (), k: int | None = None) -> Path:
    from scipy.cluster.hierarchy import dendrogram

    set_style(8)
    n = linkage.shape[0] + 1
    fig, ax = plt.subplots(figsize=(min(2 + 0.12 * n, 24), 4))
    z = np.asarray(linkage, dtype=float).copy()
    # scipy's drawing code requires non-decreasing heights
    z[:, 2] = np.maximum.accumulate(z[:, 2]) if z.size else z[:, 2]
    dendrogram(z, ax=ax, labels=list(names) if names else None, no_labels=n > 120, color_threshold=0)
    if k is not None and 1 < k <= n:
        h = (z[n - k - 1, 2] + z[n - k, 2]) / 2 if n - k - 1 >= 0 else z[-1, 2]
        ax.axhline(h, color="tab:red", lw=0.8, ls="--")
    ax.set_ylabel("Ward distance")
    fig.tight_layout()
    return _save(fig, path)


def q_history_plot(q_history: Sequence[float], path) -> Path:
    set_style()
    fig, ax = plt.subplots(figsize=(4, 3))
    ax.plot(np.arange(1, len(q_history) + 1), q_history, marker="o", color="0.2")
    ax.set_xlabel("Outer pass")
    ax.set_ylabel("Modularity Q")
    fig.tight_layout()
    return _save(fig, path)


def loadings_heatmap(loadings: np.ndarray, labels: np.ndarray, path) -> Path:
    """Loadings with journals sorted by assigned factor, then by loading."""
    set_style(8)
    L = np.asarray(loadings)
    lab = np.asarray(labels)
    key = np.where(lab < 0, L.shape[1], lab)
    best = L[np.arange(L.shape[0]), np.clip(lab, 0, None)]
    order = np.lexsort((-best, key))
    fig, ax = plt.subplots(figsize=(1.5 + 0.3 * L.shape[1], 5))
    lim = max(float(np.abs(L).max(initial=0.0)), 1e-12)
    im = ax.imshow(L[order], aspect="auto", cmap="RdBu_r", vmin=-lim, vmax=lim, interpolation="nearest")
    ax.set_xlabel("Factor")
    ax.set_ylabel("Journal (sorted by assignment)")
    ax.set_xticks(range(L.shape[1]), [str(f + 1) for f in range(L.shape[1])])
    fig.colorbar(im, ax=ax, label="Loading")
    fig.tight_layout()
    return _save(fig, path)
