"""External descriptor ingestion and symmetric descriptor matching."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from ..errors import (
    DimensionMismatch,
    IndexOutOfRange,
    MalformedDescriptorFile,
    NoMutualMatches,
    NonFiniteValue,
)
from ..geom3d import PointCloud
from .types import CorrespondenceSet, DescriptorField


def load_external_descriptors(path, cloud: PointCloud) -> DescriptorField:
    """Read a descriptor export produced outside this package.

    Format: one header line `dim=<d> count=<k>`, then k whitespace-separated
    rows of `<point_index> <d floats>`, where point_index addresses `cloud`.
    """
    path = Path(path)
    with open(path, "r", encoding="ascii") as handle:
        header = handle.readline().split()
        try:
            keys = dict(part.split("=", 1) for part in header)
            dim = int(keys["dim"])
            count = int(keys["count"])
        except (ValueError, KeyError) as exc:
            raise MalformedDescriptorFile(f"{path.name}: bad header {header!r}") from exc
        if dim <= 0 or count <= 0:
            raise MalformedDescriptorFile(f"{path.name}: dim and count must be positive")

        indices = np.empty(count, dtype=np.int64)
        vectors = np.empty((count, dim))
        row = 0
        for line in handle:
            parts = line.split()
            if not parts:
                continue
            if row >= count:
                raise MalformedDescriptorFile(f"{path.name}: more rows than declared count {count}")
            if len(parts) != 1 + dim:
                raise DimensionMismatch(
                    f"{path.name} row {row}: {len(parts) - 1} values, declared dim {dim}"
                )
            try:
                indices[row] = int(parts[0])
                vectors[row] = [float(v) for v in parts[1:]]
            except ValueError as exc:
                raise MalformedDescriptorFile(f"{path.name} row {row}: non-numeric value") from exc
            row += 1
        if row != count:
            raise MalformedDescriptorFile(f"{path.name}: {row} rows, declared count {count}")

    if not np.all(np.isfinite(vectors)):
        raise NonFiniteValue(f"{path.name}: descriptor values must be finite")
    if indices.min() < 0 or indices.max() >= len(cloud):
        raise IndexOutOfRange(
            f"{path.name}: sample index outside cloud of {len(cloud)} points"
        )
    if len(np.unique(indices)) != len(indices):
        raise MalformedDescriptorFile(f"{path.name}: duplicate sample index")
    return DescriptorField(
        descriptors=vectors,
        sample_indices=indices,
        points=cloud.points[indices],
        dimension=dim,
    )


def save_descriptors(field: DescriptorField, path) -> None:
    """Inverse of load_external_descriptors, for fixtures and exports."""
    with open(path, "w", encoding="ascii") as handle:
        handle.write(f"dim={field.dimension} count={len(field)}\n")
        for idx, vec in zip(field.sample_indices, field.descriptors):
            handle.write(str(int(idx)) + " " + " ".join(repr(float(v)) for v in vec) + "\n")


def match_descriptors(
    fa: DescriptorField,
    fb: DescriptorField,
    n: int,
    seed: int = 0,
) -> CorrespondenceSet:
    """Mutual nearest-neighbor pairs between two descriptor fields.

    Samples min(n, available) descriptors per side uniformly without
    replacement (seeded; isolated zero descriptors are excluded first), then
    keeps (i, j) iff j is i's nearest descriptor and i is j's, under
    Euclidean descriptor distance.
    """
    if fa.dimension != fb.dimension:
        raise DimensionMismatch(f"descriptor dims differ: {fa.dimension} vs {fb.dimension}")
    if len(fa) == 0 or len(fb) == 0:
        raise NoMutualMatches("cannot match empty descriptor fields")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")

    rng = np.random.default_rng(seed)
    picks = []
    for field in (fa, fb):
        usable = np.nonzero(~field.isolated)[0]
        if len(usable) == 0:
            raise NoMutualMatches("all descriptors are isolated")
        take = min(n, len(usable))
        picks.append(np.sort(rng.choice(usable, size=take, replace=False)))
    sel_a, sel_b = picks

    desc_a = fa.descriptors[sel_a]
    desc_b = fb.descriptors[sel_b]
    _, ab = cKDTree(desc_b).query(desc_a)
    _, ba = cKDTree(desc_a).query(desc_b)
    i = np.arange(len(sel_a))
    mutual = ba[ab] == i
    if not np.any(mutual):
        raise NoMutualMatches("no symmetric nearest-neighbor descriptor pair")
    pairs = np.stack([i[mutual], ab[mutual]], axis=1)
    return CorrespondenceSet(fa.points[sel_a], fb.points[sel_b], pairs)
