"""Figure rendering for report paths; every figure lands next to its CSV."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from ..diegraph import Clustering
from ..evalmetrics import DieBenchmarkReport


def save_benchmark_figure(reports: dict[str, DieBenchmarkReport], path) -> Path:
    """Grouped bars of per-die median SRE (x1000, log scale) per method."""
    dies = sorted({die for r in reports.values() for die in r.per_die_median_sre})
    methods = list(reports)
    width = 0.8 / max(1, len(methods))
    x = np.arange(len(dies))

    fig, ax = plt.subplots(figsize=(max(6.0, 0.55 * len(dies) + 2), 4.0))
    any_positive = False
    for k, method in enumerate(methods):
        values = [
            1000.0 * reports[method].per_die_median_sre.get(die, np.nan) for die in dies
        ]
        any_positive = any_positive or np.nanmax(values) > 0
        ax.bar(x + (k - (len(methods) - 1) / 2) * width, values, width, label=method)
    if any_positive:
        ax.set_yscale("log")
    ax.set_xticks(x)
    ax.set_xticklabels(dies, rotation=45, ha="right")
    ax.set_ylabel("median SRE × 1000")
    ax.set_title("Registration error per die")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


def save_probability_figure(probabilities, path, tau: float | None = None) -> Path:
    """Distribution of pair probabilities, with the clustering cut if given."""
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.hist(list(probabilities), bins=40, range=(0.0, 1.0), color="#4878a8")
    if tau is not None:
        ax.axvline(tau, color="#c04040", linestyle="--", label=f"tau = {tau}")
        ax.legend()
    ax.set_xlabel("same-die probability")
    ax.set_ylabel("pairs")
    ax.set_title("Pairwise similarity distribution")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


def save_cluster_size_figure(clustering: Clustering, path) -> Path:
    """Cluster sizes sorted descending; hoards are typically very skewed."""
    sizes = sorted((len(m) for m in clustering.members().values()), reverse=True)
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.bar(np.arange(len(sizes)), sizes, color="#5a9a68")
    ax.set_xlabel("cluster (sorted by size)")
    ax.set_ylabel("scans")
    title = "Cluster sizes"
    if clustering.tau is not None:
        title += f" at tau = {clustering.tau}"
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


def save_tau_sweep_figure(rows, path) -> Path:
    """Cluster count and largest-cluster size across thresholds."""
    taus = [r[0] for r in rows]
    counts = [r[1] for r in rows]
    largest = [r[2] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.plot(taus, counts, marker="o", label="clusters")
    ax.plot(taus, largest, marker="s", label="largest cluster")
    ax.set_xlabel("tau")
    ax.set_ylabel("count")
    ax.set_title("Threshold sweep")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)
