"""Figures for campaign reports: amplitude-ratio histograms, CF/GCF shares, convergence."""

from __future__ import annotations

from pathlib import Path
from typing import Dict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_convergence", "plot_ratio_histogram", "plot_significance", "render_campaign"]

_METRICS = ("alpha_cf", "beta_cf", "theta_cf", "alpha_gcf", "beta_gcf", "theta_gcf")


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_ratio_histogram(hist, title: str, path) -> Path:
    """Two panels: ratio distribution on improving and on non-improving iterations."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4))
    for ax, part, gm, label in (
        (axes[0], hist.improved, hist.geo_mean_improved, "improved"),
        (axes[1], hist.missed, hist.geo_mean_missed, "not improved"),
    ):
        if part is None:
            ax.text(0.5, 0.5, "no iterations", ha="center", va="center", transform=ax.transAxes)
        else:
            probs, edges = part
            ax.bar(edges[:-1], probs, width=np.diff(edges), align="edge", color="tab:blue")
            ax.axvline(gm, color="tab:red", lw=1, label=f"geo mean {gm:.3f}")
            ax.legend(fontsize=8)
        ax.set_xlabel("A(t) / A(t-1)")
        ax.set_ylabel("probability")
        ax.set_title(label, fontsize=9)
    fig.suptitle(title, fontsize=10)
    return _save(fig, Path(path))


def plot_significance(rows, algorithm: str, path) -> Path:
    """Grouped bars of the six CF/GCF shares per function."""
    rows = [r for r in rows if r[0] == algorithm]
    functions = [r[1] for r in rows]
    values = np.array([[float(v) if v != "" else np.nan for v in r[3:]] for r in rows])
    x = np.arange(len(functions))
    width = 0.8 / len(_METRICS)
    fig, ax = plt.subplots(figsize=(max(6, 1.1 * len(functions)) + 1.2, 3.6))
    for k, name in enumerate(_METRICS):
        ax.bar(x + (k - 2.5) * width, values[:, k], width, label=name)
    ax.set_xticks(x)
    ax.set_xticklabels(functions, rotation=30, ha="right", fontsize=8)
    ax.set_ylim(0, 1)
    ax.axhline(0.5, color="grey", lw=0.6, ls="--")
    ax.legend(fontsize=7, loc="upper left", bbox_to_anchor=(1.01, 1.0))
    ax.set_title(algorithm, fontsize=10)
    return _save(fig, Path(path))


def plot_convergence(summaries, function: str, algorithms, path) -> Path:
    """Median best-so-far against evaluations, one line per algorithm, log scale."""
    fig, ax = plt.subplots(figsize=(6, 3.8))
    for a in algorithms:
        traces = [s.trace for s in summaries if s.algorithm == a and s.function == function and s.trace]
        if not traces:
            continue
        e_max = max(t[-1][0] for t in traces)
        grid = np.linspace(0, e_max, 200)
        curves = []
        for t in traces:
            ev = np.array([p[0] for p in t], dtype=float)
            best = np.array([p[1] for p in t], dtype=float)
            idx = np.clip(np.searchsorted(ev, grid, side="right") - 1, 0, len(ev) - 1)
            curves.append(best[idx])
        med = np.median(np.array(curves), axis=0)
        ax.plot(grid, np.where(med > 0, med, np.nan), label=a)  # exact zeros have no log
    ax.set_yscale("log")
    ax.set_xlabel("evaluations")
    ax.set_ylabel("median best fitness")
    ax.set_title(function, fontsize=10)
    ax.legend(fontsize=8)
    return _save(fig, Path(path))


def render_campaign(summaries, hists, metric_rows, fig_dir, algorithms, functions) -> Dict[str, Path]:
    fig_dir = Path(fig_dir)
    out = {}
    for (a, f), h in hists.items():
        out[f"ratio_hist_{a}_{f}"] = plot_ratio_histogram(h, f"{a} on {f}", fig_dir / f"ratio_hist_{a}_{f}.png")
    for a in dict.fromkeys(r[0] for r in metric_rows):
        out[f"significance_{a}"] = plot_significance(metric_rows, a, fig_dir / f"significance_{a}.png")
    for f in functions:
        out[f"convergence_{f}"] = plot_convergence(summaries, f, algorithms, fig_dir / f"convergence_{f}.png")
    return out
