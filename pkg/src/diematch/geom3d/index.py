"""Exact nearest-neighbor index over a fixed point set."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray
from scipy.spatial import cKDTree


class SpatialIndex:
    """KD-tree over an (N, 3) point set; read-only after construction.

    Queries are exact. `query` breaks exact distance ties by the lowest
    point index, matching a linear argmin scan; the bulk `query_many` skips
    the tie polish since its consumers (closest-point matching, cloud-to-
    cloud distances) only need *a* nearest point and its distance.
    """

    def __init__(self, points: NDArray[np.float64]):
        pts = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"index needs (N, 3) points, got {pts.shape}")
        if len(pts) == 0:
            raise ValueError("cannot index zero points")
        pts.setflags(write=False)
        self.points = pts
        self._tree = cKDTree(pts)

    def __len__(self) -> int:
        return len(self.points)

    def query(self, point) -> tuple[int, float]:
        """Index and distance of the nearest stored point; ties -> lowest index."""
        p = np.asarray(point, dtype=np.float64).reshape(3)
        d, i = self._tree.query(p)
        # Re-rank every candidate within an ulp-padded ball with plain numpy
        # arithmetic so ties resolve identically to a linear scan.
        candidates = self._tree.query_ball_point(p, r=d * (1.0 + 1e-9) + 1e-300)
        cand = np.asarray(sorted(candidates), dtype=np.int64)
        dists = np.linalg.norm(self.points[cand] - p, axis=1)
        best = dists.min()
        winner = int(cand[dists == best][0])
        return winner, float(best)

    def query_many(self, points) -> tuple[NDArray[np.int64], NDArray[np.float64]]:
        """Nearest index and distance per query row (no tie polish)."""
        pts = np.asarray(points, dtype=np.float64)
        d, i = self._tree.query(pts)
        return np.asarray(i, dtype=np.int64), np.asarray(d, dtype=np.float64)

    def within_radius(self, point, radius: float) -> NDArray[np.int64]:
        """Sorted indices of stored points within `radius` of `point`."""
        found = self._tree.query_ball_point(np.asarray(point, dtype=np.float64), r=radius)
        return np.asarray(sorted(found), dtype=np.int64)

    def pairs_within_radius(self, queries, radius: float) -> list[NDArray[np.int64]]:
        """Per-query-row neighbor lists within `radius` (bulk form)."""
        lists = self._tree.query_ball_point(np.asarray(queries, dtype=np.float64), r=radius)
        return [np.asarray(lst, dtype=np.int64) for lst in lists]
