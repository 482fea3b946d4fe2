"""Figure rendering for run and sweep outputs.

Renders reconstructions and metric curves to PNG files next to the
delimited output.  Kept separate from the pipeline stages: everything here
consumes already-computed results and owns no numerics.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def save_image_figure(values: np.ndarray, path, title: str = "",
                      reference: np.ndarray | None = None) -> None:
    """One reconstruction panel, optionally next to the ground-truth image."""
    n_panels = 2 if reference is not None else 1
    fig, axes = plt.subplots(1, n_panels, figsize=(4.0 * n_panels, 2.6))
    axes = np.atleast_1d(axes)
    if reference is not None:
        axes[0].imshow(reference, cmap="gray", aspect="auto")
        axes[0].set_title("object")
        axes[0].axis("off")
    ax = axes[-1]
    im = ax.imshow(values, cmap="gray", aspect="auto")
    ax.set_title(title or "reconstruction", fontsize=9)
    ax.axis("off")
    fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_grid_figure(panels, path) -> None:
    """Panel grid: panels is a list of (row_label, col_label, values)."""
    row_labels = list(dict.fromkeys(p[0] for p in panels))
    col_labels = list(dict.fromkeys(p[1] for p in panels))
    n_rows, n_cols = len(row_labels), len(col_labels)
    fig, axes = plt.subplots(n_rows, n_cols,
                             figsize=(2.6 * n_cols, 1.8 * n_rows), squeeze=False)
    lookup = {(r, c): v for r, c, v in panels}
    for i, rl in enumerate(row_labels):
        for j, cl in enumerate(col_labels):
            ax = axes[i][j]
            values = lookup.get((rl, cl))
            if values is not None:
                ax.imshow(values, cmap="gray", aspect="auto")
            if i == 0:
                ax.set_title(cl, fontsize=9)
            if j == 0:
                ax.set_ylabel(rl, fontsize=9)
            ax.set_xticks([])
            ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_metric_curves(rows, x_field: str, path, y_field: str = "cnr") -> None:
    """Mean metric vs a swept field, one line per matrix mode.

    rows are pipeline summary dictionaries (numeric values, one per trial);
    trials sharing (matrix_mode, x) are averaged.
    """
    modes = list(dict.fromkeys(r["matrix_mode"] for r in rows))
    fig, ax = plt.subplots(figsize=(4.5, 3.0))
    for mode in modes:
        pts: dict[float, list[float]] = {}
        for r in rows:
            if r["matrix_mode"] != mode:
                continue
            pts.setdefault(float(r[x_field]), []).append(float(r[y_field]))
        xs = sorted(pts)
        ys = [float(np.mean(pts[x])) for x in xs]
        ax.plot(xs, ys, marker="o", label=mode)
    ax.set_xlabel(x_field)
    ax.set_ylabel(f"mean {y_field}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
