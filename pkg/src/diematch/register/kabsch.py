"""Closed-form least-squares rigid alignment from known correspondences."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateConfiguration, TooFewMatches
from ..geom3d import RigidTransform
from .types import CorrespondenceSet

_RANK_TOL = 1e-12


def kabsch_from_arrays(src: np.ndarray, tgt: np.ndarray) -> RigidTransform:
    """Rigid transform minimizing sum ||R x + t - y||^2 for matched rows.

    SVD of the centered covariance, with the usual sign correction so the
    result is a proper rotation (det +1), never a reflection.
    """
    if len(src) < 3:
        raise TooFewMatches(f"need >= 3 correspondences, got {len(src)}")
    centroid_src = src.mean(axis=0)
    centroid_tgt = tgt.mean(axis=0)
    H = (src - centroid_src).T @ (tgt - centroid_tgt)
    U, S, Vt = np.linalg.svd(H)
    if S[0] <= 0 or S[1] <= _RANK_TOL * S[0]:
        raise DegenerateConfiguration(
            "correspondences do not constrain a rotation (centered covariance rank < 2)"
        )
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    R = Vt.T @ np.diag([1.0, 1.0, d]) @ U.T
    return RigidTransform(R, centroid_tgt - R @ centroid_src)


def kabsch(corr: CorrespondenceSet) -> RigidTransform:
    """Optimal rigid fit over the matched pairs of a correspondence set."""
    if len(corr) < 3:
        raise TooFewMatches(f"need >= 3 correspondences, got {len(corr)}")
    return kabsch_from_arrays(corr.matched_source(), corr.matched_target())
