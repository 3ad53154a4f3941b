"""Figure rendering for the report pipeline (PNG files next to the CSVs)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_convergence_figure",
    "save_strong_count_figure",
    "save_q_matrix_figure",
    "save_sweep_figure",
    "save_compare_figure",
]

_FLOOR = 1e-16  # log-scale floor for exact zeros


def _grouped(records):
    groups = {}
    for rec in records:
        groups.setdefault((rec.algorithm, rec.pop_size), []).append(rec)
    return groups


def save_convergence_figure(records, path: str) -> str:
    """Mean best F(x) - F(x*) versus evaluations, one curve per (algorithm, M)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for (alg, pop), group in sorted(_grouped(records).items()):
        length = min(len(rec.best_fitness) for rec in group)
        fes = np.asarray(group[0].fes[:length])
        gaps = np.stack([
            np.asarray(rec.best_fitness[:length]) - rec.optimum_value for rec in group])
        mean_gap = np.maximum(gaps.mean(axis=0), _FLOOR)
        ax.plot(fes, mean_gap, label=f"{alg} (M={pop})")
    ax.set_yscale("log")
    ax.set_xlabel("function evaluations")
    ax.set_ylabel("mean best F(x) - F(x*)")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_strong_count_figure(records, path: str) -> str:
    """Average number of strongly dependent variables versus evaluations."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for (alg, pop), group in sorted(_grouped(records).items()):
        length = min(len(rec.n_strong) for rec in group)
        fes = np.asarray(group[0].fes[:length])
        counts = np.stack([np.asarray(rec.n_strong[:length], dtype=float) for rec in group])
        ax.plot(fes, counts.mean(axis=0), label=f"{alg} (M={pop})")
    ax.set_xlabel("function evaluations")
    ax.set_ylabel("average #strong")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_q_matrix_figure(q_matrix: np.ndarray, path: str,
                         fes_axis: np.ndarray | None = None) -> str:
    """Grayscale strong-membership counts: darker = more runs, rows = variables."""
    q_matrix = np.asarray(q_matrix)
    fig, ax = plt.subplots(figsize=(6, 4))
    if fes_axis is not None and len(fes_axis) > 1:
        extent = (float(fes_axis[0]), float(fes_axis[-1]), q_matrix.shape[0] + 0.5, 0.5)
        ax.imshow(q_matrix, aspect="auto", cmap="Greys", extent=extent,
                  interpolation="nearest")
        ax.set_xlabel("function evaluations")
    else:
        ax.imshow(q_matrix, aspect="auto", cmap="Greys", interpolation="nearest")
        ax.set_xlabel("generation")
    ax.set_ylabel("variable index")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_sweep_figure(cells, path: str) -> str:
    """Heatmap of sweep cell means over the theta x c grid."""
    thetas = sorted({cell.theta for cell in cells})
    cs = sorted({cell.c for cell in cells})
    grid = np.full((len(thetas), len(cs)), np.nan)
    for cell in cells:
        grid[thetas.index(cell.theta), cs.index(cell.c)] = cell.mean
    fig, ax = plt.subplots(figsize=(6, 4))
    shown = np.log10(np.maximum(np.abs(grid), _FLOOR))
    image = ax.imshow(shown, aspect="auto", cmap="viridis")
    ax.set_xticks(range(len(cs)), [str(c) for c in cs])
    ax.set_yticks(range(len(thetas)), [f"{t:g}" for t in thetas])
    ax.set_xlabel("c")
    ax.set_ylabel("theta")
    fig.colorbar(image, ax=ax, label="log10 mean final value")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_compare_figure(samples: dict[str, list[float]], path: str) -> str:
    """Box plot of final values for the compared record sets."""
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = list(samples)
    data = [np.maximum(np.abs(samples[label]), _FLOOR) for label in labels]
    ax.boxplot(data, tick_labels=labels)
    ax.set_yscale("log")
    ax.set_ylabel("final F(x) - F(x*)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
