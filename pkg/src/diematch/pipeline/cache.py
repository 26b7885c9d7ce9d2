"""Resumable pair-score cache keyed by (pair, pipeline-config fingerprint).

Append-only JSONL: each completed pair lands as one line, so a crashed run
loses at most its in-flight pairs. Entries written under a different
configuration (other parameters or another model) are ignored on load, not
deleted; re-scoring with the old config would find them again.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..geom3d import RigidTransform
from ..register import RegistrationParams
from ..simscore import DistanceHistogram, LogisticModel, PairScore


def model_digest(model: LogisticModel) -> str:
    payload = json.dumps(
        {"bias": model.bias, "weights": model.weights.tolist()}, sort_keys=True
    ).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


def config_fingerprint(params: RegistrationParams, method: str, model: LogisticModel) -> str:
    payload = json.dumps(
        {"method": method, "params": asdict(params), "model": model_digest(model)},
        sort_keys=True,
    ).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


def stable_pair_seed(base_seed: int, id_a: str, id_b: str) -> int:
    """Per-pair RNG seed that is identical however the run is scheduled."""
    digest = hashlib.sha256(f"{base_seed}:{id_a}:{id_b}".encode()).digest()
    return int.from_bytes(digest[:8], "big") % (2**63 - 1)


def score_to_record(score: PairScore, fingerprint: str) -> dict:
    return {
        "a": score.pair[0],
        "b": score.pair[1],
        "fingerprint": fingerprint,
        "probability": score.probability,
        "rmse": score.rmse,
        "stage_timings": score.stage_timings,
        "transform": {
            "rotation": score.transform.rotation.tolist(),
            "translation": score.transform.translation.tolist(),
        },
        "histogram": score.histogram.bins.tolist(),
        "fwd_in_range": score.histogram.fwd_in_range,
        "bwd_in_range": score.histogram.bwd_in_range,
        "source_id": score.source_id,
        "target_id": score.target_id,
    }


def record_to_score(record: dict) -> PairScore:
    return PairScore(
        pair=(record["a"], record["b"]),
        transform=RigidTransform(
            np.asarray(record["transform"]["rotation"]),
            np.asarray(record["transform"]["translation"]),
        ),
        histogram=DistanceHistogram(
            np.asarray(record["histogram"]),
            fwd_in_range=record["fwd_in_range"],
            bwd_in_range=record["bwd_in_range"],
        ),
        probability=record["probability"],
        rmse=record["rmse"],
        stage_timings=dict(record["stage_timings"]),
        source_id=record.get("source_id", ""),
        target_id=record.get("target_id", ""),
    )


class PairCache:
    """JSONL-backed map from canonical pair key to its cached score record."""

    def __init__(self, path, fingerprint: str):
        self.path = Path(path)
        self.fingerprint = fingerprint
        self._entries: dict[tuple[str, str], dict] = {}
        if self.path.exists():
            self._load()
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)

    def _load(self) -> None:
        with open(self.path, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError:
                    continue  # truncated tail from a crashed run
                if record.get("fingerprint") != self.fingerprint:
                    continue
                self._entries[(record["a"], record["b"])] = record

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, pair: tuple[str, str]) -> PairScore | None:
        record = self._entries.get(tuple(pair))
        return None if record is None else record_to_score(record)

    def put(self, score: PairScore) -> None:
        record = score_to_record(score, self.fingerprint)
        self._entries[score.pair] = record
        with open(self.path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, sort_keys=True) + "\n")
            handle.flush()

    def scores(self) -> list[PairScore]:
        return [record_to_score(r) for _, r in sorted(self._entries.items())]
