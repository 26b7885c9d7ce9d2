"""Evaluation metrics: scaled registration error and clustering agreement.

The registration error of an estimated motion is measured per point against
the ground-truth motion and normalized by that point's distance to the
transformed centroid, then aggregated per die by the median (pair results
are heavy-tailed: one failed registration would swamp a mean).

Clustering agreement is measured on unordered item pairs: two labelings are
reduced to true/false positive/negative pair counts, from which the
Fowlkes-Mallows index and the adjusted Rand index follow.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
import warnings
from collections import Counter
from dataclasses import dataclass
from math import comb, sqrt

import numpy as np

from .errors import DegenerateCloud, EmptyDie, ItemSetMismatch, LengthMismatch
from .geom3d import PointCloud, RigidTransform

CATEGORY_PREFIXES = (
    ("DB", "obverses_beard"),
    ("D", "obverses_no_beard"),
    ("R", "reverses"),
)


def sre(source: PointCloud, gt: RigidTransform, est: RigidTransform) -> float:
    """Scaled registration error of `est` against `gt` over the source cloud.

    Mean over points of ||gt(x) - est(x)|| / ||gt(x) - gt(centroid)||.
    Points sitting exactly on the centroid are skipped with a warning; a
    cloud collapsed onto its centroid has no defined error.
    """
    if len(source) == 0:
        raise DegenerateCloud("SRE of an empty cloud")
    gt_pts = gt.transform_points(source.points)
    est_pts = est.transform_points(source.points)
    gt_centroid = gt.transform_points(source.points.mean(axis=0)[None, :])[0]
    numer = np.linalg.norm(gt_pts - est_pts, axis=1)
    denom = np.linalg.norm(gt_pts - gt_centroid, axis=1)
    keep = denom > 1e-12
    if not np.any(keep):
        raise DegenerateCloud("all points coincide with the centroid")
    if not np.all(keep):
        warnings.warn(
            f"SRE skipped {int((~keep).sum())} point(s) at the centroid", stacklevel=2
        )
    return float(np.mean(numer[keep] / denom[keep]))


@dataclass(frozen=True)
class DieBenchmarkReport:
    """Per-die medians plus category and overall aggregates of pair SREs."""

    per_die_median_sre: dict[str, float]
    per_category_mean: dict[str, float]
    overall: float


def category_of_die(die_id: str) -> str | None:
    for prefix, category in CATEGORY_PREFIXES:
        if die_id.startswith(prefix):
            return category
    return None


def aggregate_sre(per_pair: dict[str, list[float]]) -> DieBenchmarkReport:
    """Median per die, then unweighted means of die medians.

    The overall value averages every die median; category means cover the
    dies whose id prefix identifies a face category (R / DB / D).
    """
    medians: dict[str, float] = {}
    for die_id, values in per_pair.items():
        if not values:
            raise EmptyDie(f"die {die_id!r} has no pair results")
        medians[die_id] = float(statistics.median(values))

    by_category: dict[str, list[float]] = {}
    for die_id, median in medians.items():
        category = category_of_die(die_id)
        if category is not None:
            by_category.setdefault(category, []).append(median)

    return DieBenchmarkReport(
        per_die_median_sre=medians,
        per_category_mean={c: float(np.mean(v)) for c, v in sorted(by_category.items())},
        overall=float(np.mean(list(medians.values()))),
    )


# --- pairwise clustering agreement ------------------------------------------

@dataclass(frozen=True)
class PairConfusion:
    """Counts over all unordered item pairs of two labelings."""

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def _as_labeling(labels) -> dict:
    if isinstance(labels, dict):
        return labels
    return dict(enumerate(labels))


def pair_confusion(pred, truth) -> PairConfusion:
    """Classify every unordered pair by predicted/true same-cluster status.

    Computed from the contingency table rather than by pair enumeration,
    so it stays cheap for thousands of items.
    """
    pred_map = _as_labeling(pred)
    truth_map = _as_labeling(truth)
    if set(pred_map) != set(truth_map):
        raise ItemSetMismatch("pred and truth label different item sets")

    n = len(pred_map)
    joint = Counter((pred_map[item], truth_map[item]) for item in pred_map)
    pred_sizes = Counter(pred_map.values())
    truth_sizes = Counter(truth_map.values())

    tp = sum(comb(c, 2) for c in joint.values())
    same_pred = sum(comb(c, 2) for c in pred_sizes.values())
    same_truth = sum(comb(c, 2) for c in truth_sizes.values())
    total = comb(n, 2)
    return PairConfusion(
        tp=tp,
        fp=same_pred - tp,
        fn=same_truth - tp,
        tn=total - same_pred - same_truth + tp,
    )


def fmi(pred, truth) -> float:
    """Fowlkes-Mallows index: TP / sqrt((TP+FP)(TP+FN)); 0 on zero denominator."""
    c = pair_confusion(pred, truth)
    denominator = sqrt(float(c.tp + c.fp) * float(c.tp + c.fn))
    if denominator == 0:
        return 0.0
    return c.tp / denominator


def ari(pred, truth) -> float:
    """Adjusted Rand index via the permutation-model contingency form.

    Returns 1.0 in the degenerate zero-denominator case, which only occurs
    when both partitions are identical and trivial (single cluster or all
    singletons).
    """
    c = pair_confusion(pred, truth)
    if c.total == 0:
        return 1.0
    same_pred = float(c.tp + c.fp)
    same_truth = float(c.tp + c.fn)
    expected = same_pred * same_truth / c.total
    maximum = 0.5 * (same_pred + same_truth)
    if maximum == expected:
        return 1.0
    return (c.tp - expected) / (maximum - expected)


def pair_accuracy(probabilities, truth_same_die, cut: float) -> float:
    """Fraction of pairs where (probability >= cut) agrees with the truth."""
    probs = list(probabilities)
    truths = list(truth_same_die)
    if len(probs) != len(truths):
        raise LengthMismatch(f"{len(probs)} probabilities vs {len(truths)} labels")
    if not probs:
        raise LengthMismatch("cannot score zero pairs")
    hits = sum((p >= cut) == bool(t) for p, t in zip(probs, truths))
    return hits / len(probs)


# --- report emission ---------------------------------------------------------

def render_benchmark_table(reports: dict[str, DieBenchmarkReport], scale: float = 1000.0) -> str:
    """Text table with methods as rows and dies as columns (values x scale)."""
    dies = sorted({die for r in reports.values() for die in r.per_die_median_sre})
    header = ["Method"] + dies + ["Average"]
    rows = [header]
    for method, report in reports.items():
        cells = [method]
        for die in dies:
            value = report.per_die_median_sre.get(die)
            cells.append("-" if value is None else f"{value * scale:.1f}")
        cells.append(f"{report.overall * scale:.1f}")
        rows.append(cells)
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
        if i == 0:
            lines.append("-" * len(lines[0]))
    return "\n".join(lines) + "\n"


def benchmark_report_csv(reports: dict[str, DieBenchmarkReport]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["method", "die", "median_sre"])
    for method, report in reports.items():
        for die in sorted(report.per_die_median_sre):
            writer.writerow([method, die, f"{report.per_die_median_sre[die]:.12g}"])
        writer.writerow([method, "__overall__", f"{report.overall:.12g}"])
    return buffer.getvalue()


def benchmark_report_json(reports: dict[str, DieBenchmarkReport]) -> str:
    doc = {
        method: {
            "per_die_median_sre": dict(sorted(report.per_die_median_sre.items())),
            "per_category_mean": report.per_category_mean,
            "overall": report.overall,
        }
        for method, report in reports.items()
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
