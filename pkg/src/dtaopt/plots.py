"""Figure rendering for the report paths.

Each report command can drop PNG figures next to its JSON/CSV output:
sorted probabilities with the chosen cutoff for the ranking experiment,
grouped utility bars for comparisons, and log-log timing curves for the
scaling benchmark.  The Agg backend is forced so rendering works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["plot_prp_trials", "plot_comparison", "plot_bench"]


def plot_prp_trials(report: dict, path: Path, trial: int = 0) -> Path:
    """One panel per metric: sorted probabilities with the cutoff marked."""
    records = [r for r in report["trials"] if r["trial"] == trial]
    if not records:
        records = report["trials"][:1]
    cols = min(4, max(1, len(records)))
    rows = (len(records) + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(3.2 * cols, 2.8 * rows), squeeze=False)
    for ax in axes.ravel()[len(records):]:
        ax.set_visible(False)
    for ax, rec in zip(axes.ravel(), records):
        etas = np.asarray(rec["etas_sorted"])
        chosen = np.asarray(rec["s_star_sorted"], dtype=bool)
        idx = np.arange(1, etas.size + 1)
        ax.plot(idx[chosen], etas[chosen], "o", color="tab:blue", label="predicted +")
        ax.plot(idx[~chosen], etas[~chosen], "o", mfc="none", color="tab:gray", label="predicted -")
        if 0 < rec["k_star"] < etas.size:
            ax.axvline(rec["k_star"] + 0.5, color="tab:red", ls="--", lw=1)
        ax.set_title(f"{rec['metric']} (trial {rec['trial']})", fontsize=10)
        ax.set_xlabel("rank")
        ax.set_ylabel("P(y=1|x)")
        ax.set_ylim(-0.05, 1.05)
    axes.ravel()[0].legend(fontsize=7, loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_comparison(report: dict, path: Path) -> Path:
    """Grouped bars: optimizer vs fixed-0.5 vs tuned threshold, per metric."""
    rows = report["rows"]
    metrics = [row["metric"] for row in rows]
    x = np.arange(len(metrics))
    width = 0.27
    fig, ax = plt.subplots(figsize=(1.6 * len(metrics) + 2.5, 3.4))
    ax.bar(x - width, [r["utility_dta"] for r in rows], width, label="expected-utility")
    ax.bar(x, [r["utility_baseline"] for r in rows], width, label="threshold 0.5")
    ax.bar(x + width, [r["utility_eum"] for r in rows], width, label="tuned threshold")
    ax.set_xticks(x, metrics)
    ax.set_ylabel("macro-averaged utility")
    ax.set_title(rows[0]["dataset"] if rows else "comparison")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_bench(report: dict, path: Path) -> Path:
    """Log-log wall time vs test-set size for each algorithm."""
    rows = report["rows"]
    fig, ax = plt.subplots(figsize=(4.5, 3.4))
    for name in sorted({r["algorithm"] for r in rows}):
        sub = [r for r in rows if r["algorithm"] == name]
        ax.loglog([r["n"] for r in sub], [r["seconds"] for r in sub], "o-", label=name)
    ax.set_xlabel("n")
    ax.set_ylabel("seconds")
    ax.set_title(f"scaling ({report['config']['metric']})")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
