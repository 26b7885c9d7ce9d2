"""Point cloud type, voxel-grid downsampling, and transform application."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..errors import EmptyCloud, NonPositiveVoxel
from .transforms import RigidTransform

_UNIT_NORMAL_TOL = 1e-6


def _as_points(arr, name: str) -> NDArray[np.float64]:
    out = np.ascontiguousarray(np.asarray(arr, dtype=np.float64))
    if out.ndim != 2 or out.shape[1] != 3:
        raise ValueError(f"{name} must have shape (N, 3), got {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite values")
    return out


@dataclass(frozen=True)
class PointCloud:
    """One scanned coin face: positions in mm plus (optionally) unit normals.

    Arrays are frozen after construction so clouds can be shared across
    threads and processes without copies. `normals` is None for files that
    carry no normal channel; operations that need normals say so.
    """

    points: NDArray[np.float64]
    normals: NDArray[np.float64] | None = None
    id: str = ""

    def __post_init__(self):
        pts = _as_points(self.points, "points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.normals is not None:
            nrm = _as_points(self.normals, "normals")
            if len(nrm) != len(pts):
                raise ValueError(f"{len(pts)} points but {len(nrm)} normals")
            lengths = np.linalg.norm(nrm, axis=1)
            if len(nrm) and np.max(np.abs(lengths - 1.0)) > _UNIT_NORMAL_TOL:
                worst = float(np.max(np.abs(lengths - 1.0)))
                raise ValueError(f"normals must be unit length (worst deviation {worst:.2e})")
            nrm.setflags(write=False)
            object.__setattr__(self, "normals", nrm)

    def __len__(self) -> int:
        return len(self.points)

    def centroid(self) -> NDArray[np.float64]:
        if len(self) == 0:
            raise EmptyCloud("centroid of empty cloud")
        return self.points.mean(axis=0)

    def with_id(self, scan_id: str) -> "PointCloud":
        return PointCloud(self.points, self.normals, scan_id)


def renormalize(
    vectors: NDArray[np.float64],
    fallback: NDArray[np.float64] | None = None,
    keep_within: float = 0.0,
):
    """Scale rows to unit length; rows of ~zero length take `fallback` rows.

    Rows whose length is already within `keep_within` of 1 are kept verbatim,
    which lets file round-trips preserve normals bit-for-bit.
    """
    vecs = np.asarray(vectors, dtype=np.float64).copy()
    lengths = np.linalg.norm(vecs, axis=1)
    degenerate = lengths < 1e-12
    scale = lengths.copy()
    scale[degenerate] = 1.0
    if keep_within > 0:
        scale[np.abs(lengths - 1.0) <= keep_within] = 1.0
    vecs /= scale[:, None]
    if np.any(degenerate):
        if fallback is None:
            raise ValueError("cannot renormalize zero-length vector without fallback")
        vecs[degenerate] = fallback[degenerate]
    return vecs


def apply_transform(cloud: PointCloud, transform: RigidTransform) -> PointCloud:
    """New cloud with points moved by the transform and normals rotated."""
    normals = None if cloud.normals is None else transform.rotate_vectors(cloud.normals)
    return PointCloud(transform.transform_points(cloud.points), normals, cloud.id)


def voxel_downsample(cloud: PointCloud, voxel: float) -> PointCloud:
    """Collapse the cloud onto a cubic grid of edge `voxel` (mm).

    Each occupied cell contributes one point, the centroid of its members;
    its normal is the renormalized mean of member normals (falling back to
    the lowest-index member's normal if the mean cancels out). Output order
    follows the lexicographic order of cell coordinates, so it does not
    depend on input point order.
    """
    if voxel <= 0:
        raise NonPositiveVoxel(f"voxel must be > 0, got {voxel}")
    if len(cloud) == 0:
        raise EmptyCloud("cannot downsample an empty cloud")

    keys = np.floor(cloud.points / voxel).astype(np.int64)
    _, first_idx, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    n_cells = len(first_idx)

    counts = np.bincount(inverse, minlength=n_cells).astype(np.float64)
    centroids = np.empty((n_cells, 3))
    for axis in range(3):
        centroids[:, axis] = np.bincount(inverse, weights=cloud.points[:, axis], minlength=n_cells)
    centroids /= counts[:, None]

    normals = None
    if cloud.normals is not None:
        sums = np.empty((n_cells, 3))
        for axis in range(3):
            sums[:, axis] = np.bincount(inverse, weights=cloud.normals[:, axis], minlength=n_cells)
        normals = renormalize(sums, fallback=cloud.normals[first_idx])

    return PointCloud(centroids, normals, cloud.id)
