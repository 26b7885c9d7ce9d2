"""Pair scoring: registered pair -> distance histogram -> probability."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

from ..geom3d import PointCloud, RigidTransform, voxel_downsample
from ..register import RegistrationResult
from .distance import SOURCE_VOXEL, TARGET_VOXEL, cloud_to_cloud
from .histogram import DistanceHistogram, histogram
from .logistic import LogisticModel, predict

SCORE_CSV_HEADER = ("id_a", "id_b", "probability", "rmse", "seconds")


def downsample_for_scoring(
    source: PointCloud,
    target: PointCloud,
    source_voxel: float = SOURCE_VOXEL,
    target_voxel: float = TARGET_VOXEL,
) -> tuple[PointCloud, PointCloud]:
    """Scoring grids: coarser on the source (whose points are measured) and
    finer on the target (which serves as the reference surface)."""
    return voxel_downsample(source, source_voxel), voxel_downsample(target, target_voxel)


def canonical_pair(id_a: str, id_b: str) -> tuple[str, str]:
    """Undirected pair key: ids in lexicographic order."""
    return (id_a, id_b) if id_a <= id_b else (id_b, id_a)


@dataclass(frozen=True)
class PairScore:
    """Everything the similarity graph needs to know about one scan pair."""

    pair: tuple[str, str]
    transform: RigidTransform
    histogram: DistanceHistogram
    probability: float
    rmse: float
    stage_timings: dict = field(default_factory=dict)
    source_id: str = ""
    target_id: str = ""

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability must be in [0, 1], got {self.probability}")
        if self.pair != canonical_pair(*self.pair):
            raise ValueError(f"pair key {self.pair} is not canonical")

    @property
    def seconds(self) -> float:
        return float(sum(self.stage_timings.values()))


def score_pair(
    source: PointCloud,
    target: PointCloud,
    reg: RegistrationResult,
    model: LogisticModel,
) -> PairScore:
    """Chain c2c distances -> histogram -> logistic probability.

    Expects clouds already on the scoring grids (0.1 mm source / 0.05 mm
    target; see `downsample_for_scoring`). Registration stage timings are
    carried over; scoring stages add their own entries.
    """
    timings = dict(reg.stage_seconds)

    start = time.perf_counter()
    samples = cloud_to_cloud(source, target, reg.transform)
    timings["c2c"] = time.perf_counter() - start

    start = time.perf_counter()
    feature = histogram(samples)
    timings["histogram"] = time.perf_counter() - start

    start = time.perf_counter()
    probability = predict(model, feature)
    timings["predict"] = time.perf_counter() - start

    return PairScore(
        pair=canonical_pair(source.id, target.id),
        transform=reg.transform,
        histogram=feature,
        probability=probability,
        rmse=reg.rmse,
        stage_timings=timings,
        source_id=source.id,
        target_id=target.id,
    )


def scores_to_csv(scores) -> str:
    """Deterministic CSV export: canonical pair order, fixed float formats."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SCORE_CSV_HEADER)
    for score in sorted(scores, key=lambda s: s.pair):
        writer.writerow(
            [
                score.pair[0],
                score.pair[1],
                f"{score.probability:.12g}",
                f"{score.rmse:.12g}",
                f"{score.seconds:.6f}",
            ]
        )
    return buffer.getvalue()


def write_scores_csv(scores, path) -> None:
    with open(path, "w", encoding="ascii", newline="") as handle:
        handle.write(scores_to_csv(scores))


def read_scores_csv(path) -> list[dict]:
    """Rows back as dicts (ids and floats); the inverse of scores_to_csv."""
    with open(path, "r", encoding="ascii", newline="") as handle:
        reader = csv.DictReader(handle)
        rows = []
        for row in reader:
            rows.append(
                {
                    "id_a": row["id_a"],
                    "id_b": row["id_b"],
                    "probability": float(row["probability"]),
                    "rmse": float(row["rmse"]),
                    "seconds": float(row["seconds"]),
                }
            )
    return rows
