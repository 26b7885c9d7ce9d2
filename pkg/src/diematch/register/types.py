"""Shared types for the registration stages."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray

from ..geom3d import RigidTransform


@dataclass(frozen=True)
class CorrespondenceSet:
    """Hypothesized point pairings between two sampled point sets.

    `pairs[k] = (i, j)` pairs `source_points[i]` with `target_points[j]`.
    The same source or target point may appear in several pairs, but the
    (i, j) combination itself is unique.
    """

    source_points: NDArray[np.float64]
    target_points: NDArray[np.float64]
    pairs: NDArray[np.int64]

    def __post_init__(self):
        src = np.ascontiguousarray(np.asarray(self.source_points, dtype=np.float64))
        tgt = np.ascontiguousarray(np.asarray(self.target_points, dtype=np.float64))
        prs = np.ascontiguousarray(np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2))
        if src.ndim != 2 or src.shape[1] != 3 or tgt.ndim != 2 or tgt.shape[1] != 3:
            raise ValueError("source/target point sets must be (N, 3)")
        if len(prs):
            if prs[:, 0].min() < 0 or prs[:, 0].max() >= len(src):
                raise ValueError("source index out of range")
            if prs[:, 1].min() < 0 or prs[:, 1].max() >= len(tgt):
                raise ValueError("target index out of range")
            if len(np.unique(prs, axis=0)) != len(prs):
                raise ValueError("duplicate correspondence pair")
        for arr in (src, tgt, prs):
            arr.setflags(write=False)
        object.__setattr__(self, "source_points", src)
        object.__setattr__(self, "target_points", tgt)
        object.__setattr__(self, "pairs", prs)

    def __len__(self) -> int:
        return len(self.pairs)

    def matched_source(self) -> NDArray[np.float64]:
        return self.source_points[self.pairs[:, 0]]

    def matched_target(self) -> NDArray[np.float64]:
        return self.target_points[self.pairs[:, 1]]

    def subset(self, rows) -> "CorrespondenceSet":
        """Correspondences restricted to the given pair rows."""
        return CorrespondenceSet(self.source_points, self.target_points, self.pairs[rows])


@dataclass(frozen=True)
class DescriptorField:
    """Per-sample feature vectors aligned 1:1 with sampled cloud points.

    `sample_indices` address the parent cloud; `points` are those points'
    coordinates so the field is self-contained for matching. `isolated`
    flags samples whose descriptor is a zero vector because the point had no
    neighbors inside the feature radius.
    """

    descriptors: NDArray[np.float64]
    sample_indices: NDArray[np.int64]
    points: NDArray[np.float64]
    dimension: int
    isolated: NDArray[np.bool_] | None = None

    def __post_init__(self):
        desc = np.ascontiguousarray(np.asarray(self.descriptors, dtype=np.float64))
        idx = np.ascontiguousarray(np.asarray(self.sample_indices, dtype=np.int64))
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if desc.ndim != 2 or desc.shape[1] != self.dimension:
            raise ValueError(f"descriptors must be (K, {self.dimension}), got {desc.shape}")
        if len(idx) != len(desc) or len(pts) != len(desc):
            raise ValueError("descriptors, sample_indices and points must align")
        if len(np.unique(idx)) != len(idx):
            raise ValueError("sample_indices must be unique")
        iso = self.isolated
        iso = np.zeros(len(desc), dtype=bool) if iso is None else np.asarray(iso, dtype=bool)
        for arr in (desc, idx, pts, iso):
            arr.setflags(write=False)
        object.__setattr__(self, "descriptors", desc)
        object.__setattr__(self, "sample_indices", idx)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "isolated", iso)

    def __len__(self) -> int:
        return len(self.descriptors)


@dataclass(frozen=True)
class RegistrationParams:
    """Tunable knobs shared by the registration stages.

    Defaults are sized for coin scans on a 0.1 mm downsampling grid:
    the ICP match gate rejects closest-point pairs beyond 1 mm (coin rims
    and cracks otherwise drag the fit), the robust inlier threshold is
    1.5x the grid, and descriptors aggregate a ~10-cell neighborhood.
    """

    max_iterations: int = 100
    convergence_eps: float = 1e-4      # mm, mean per-point motion between iterates
    match_max_distance: float = 1.0    # mm, ICP closest-point gate
    n_descriptor_samples: int = 250    # descriptors kept per side for matching
    ransac_iterations: int = 10_000
    inlier_threshold: float = 0.15     # mm, robust-consensus residual gate
    refinement_radius: float = 1.0     # mm, region kept around positive matches
    voxel: float = 0.1                 # mm, registration downsampling grid
    feature_radius: float = 1.0        # mm, descriptor support radius
    robust_method: str = "clique"      # default robust estimator for register_pair
    n_restarts: int = 32               # multi-start ICP restart budget
    min_inlier_fraction: float = 0.2   # floor for accepting a multi-start run
    seed: int = 0

    def __post_init__(self):
        positive = {
            "max_iterations": self.max_iterations,
            "convergence_eps": self.convergence_eps,
            "match_max_distance": self.match_max_distance,
            "n_descriptor_samples": self.n_descriptor_samples,
            "ransac_iterations": self.ransac_iterations,
            "inlier_threshold": self.inlier_threshold,
            "refinement_radius": self.refinement_radius,
            "voxel": self.voxel,
            "feature_radius": self.feature_radius,
            "n_restarts": self.n_restarts,
            "min_inlier_fraction": self.min_inlier_fraction,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.robust_method not in ("ransac", "clique"):
            raise ValueError(f"robust_method must be 'ransac' or 'clique', got {self.robust_method!r}")


@dataclass(frozen=True)
class RegistrationResult:
    """Estimated motion plus the evidence that produced it."""

    transform: RigidTransform
    inliers: CorrespondenceSet
    rmse: float
    converged: bool
    iterations: int
    stage_seconds: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rmse < 0:
            raise ValueError("rmse must be >= 0")

    def with_timings(self, stage_seconds: dict) -> "RegistrationResult":
        return replace(self, stage_seconds=dict(stage_seconds))
