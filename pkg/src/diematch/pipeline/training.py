"""Fit the same-die classifier from expert-labeled scan pairs."""

from __future__ import annotations

import csv

import numpy as np

from ..errors import DieMatchError
from ..register import RegistrationParams
from ..simscore import LogisticModel, N_BINS, TrainingConfig, train_logistic
from .manifest import CorpusManifest
from .pairwise import run_pairwise


def read_labeled_pairs(path) -> list[tuple[str, str, str]]:
    """CSV with columns id_a,id_b,label; label is same_die or different_die."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for row in csv.DictReader(handle):
            rows.append((row["id_a"], row["id_b"], row["label"]))
    return rows


def write_labeled_pairs(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["id_a", "id_b", "label"])
        for row in rows:
            writer.writerow(row)


def train_from_labeled_pairs(
    manifest: CorpusManifest,
    labeled_pairs: list[tuple[str, str, str]],
    params: RegistrationParams = RegistrationParams(),
    method: str = "fpfh",
    workers: int = 1,
    hyper: TrainingConfig = TrainingConfig(),
) -> LogisticModel:
    """Register + score the labeled pairs, then fit the logistic model.

    Runs the exact production scoring path (with a placeholder model, whose
    probability output is discarded) so the training features match what
    inference will see.
    """
    placeholder = LogisticModel(np.zeros(N_BINS), 0.0)
    wanted = {tuple(sorted((a, b))): label for a, b, label in labeled_pairs}
    scores, failures = run_pairwise(
        manifest,
        placeholder,
        params=params,
        method=method,
        workers=workers,
        pairs=list(wanted),
    )
    if failures:
        lost = ", ".join(f"{f.pair}" for f in failures[:5])
        raise DieMatchError(f"{len(failures)} labeled pair(s) failed to score: {lost}")
    features = [s.histogram for s in scores]
    labels = [wanted[s.pair] for s in scores]
    return train_logistic(features, labels, hyper)
