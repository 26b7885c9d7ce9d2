"""Iterative closest point and its multi-start variant."""

from __future__ import annotations

import math

import numpy as np

from ..errors import (
    AllRestartsFailed,
    DegenerateConfiguration,
    EmptyCloud,
    NoMatchesInRange,
    TooFewMatches,
)
from ..geom3d import (
    BENCHMARK_ANGLE_RANGES,
    PointCloud,
    RigidTransform,
    SpatialIndex,
    compose,
    random_rotation,
    rotation_about_point,
)
from .kabsch import kabsch
from .types import CorrespondenceSet, RegistrationParams, RegistrationResult


def icp(
    source: PointCloud,
    target: PointCloud,
    init: RigidTransform | None = None,
    params: RegistrationParams = RegistrationParams(),
    target_index: SpatialIndex | None = None,
) -> RegistrationResult:
    """Alternate gated closest-point matching with a closed-form rigid refit.

    Matches beyond `params.match_max_distance` are rejected each iteration
    (rims and cracks otherwise dominate the fit). An iteration is accepted
    only if it does not increase the inlier RMSE, so the recorded RMSE
    sequence is non-increasing; the loop stops when the mean per-point
    motion between consecutive transforms drops below `convergence_eps`,
    when an iteration is rejected, or at the iteration cap. `converged` is
    False only in the capped case.
    """
    if len(source) == 0 or len(target) == 0:
        raise EmptyCloud("icp needs non-empty source and target")
    T = RigidTransform.identity() if init is None else init
    index = SpatialIndex(target.points) if target_index is None else target_index

    best: RegistrationResult | None = None
    prev_rmse = math.inf
    for iteration in range(1, params.max_iterations + 1):
        moved = T.transform_points(source.points)
        nn_idx, nn_dist = index.query_many(moved)
        mask = nn_dist <= params.match_max_distance
        if not np.any(mask):
            raise NoMatchesInRange(
                f"no closest-point match within {params.match_max_distance} mm at iteration {iteration}"
            )
        pairs = np.stack([np.nonzero(mask)[0], nn_idx[mask]], axis=1)
        corr = CorrespondenceSet(source.points, target.points, pairs)
        current_rms = float(np.sqrt(np.mean(nn_dist[mask] ** 2)))
        if current_rms == 0.0:
            # matches are already perfect; a refit would only add roundoff
            T_new, rmse = T, 0.0
        else:
            T_new = kabsch(corr)
            residual = T_new.transform_points(corr.matched_source()) - corr.matched_target()
            rmse = float(np.sqrt(np.mean(np.sum(residual * residual, axis=1))))
        if rmse > prev_rmse + 1e-12:
            break  # refit would worsen the accepted matches; keep the previous state
        motion = float(np.mean(np.linalg.norm(T_new.transform_points(source.points) - moved, axis=1)))
        best = RegistrationResult(T_new, corr, rmse, converged=True, iterations=iteration)
        prev_rmse = rmse
        T = T_new
        if motion < params.convergence_eps:
            return best
    if best is None:
        # first refit already worse than nothing can happen only at rmse=inf guard
        raise NoMatchesInRange("icp made no accepted iteration")
    if best.iterations >= params.max_iterations:
        return RegistrationResult(best.transform, best.inliers, best.rmse, False, best.iterations)
    return best


def random_restart_icp(
    source: PointCloud,
    target: PointCloud,
    n_restarts: int,
    params: RegistrationParams = RegistrationParams(),
) -> RegistrationResult:
    """Run ICP from the identity plus `n_restarts` random poses; keep the best.

    Restart poses spin the source about its centroid with Euler angles drawn
    from the benchmark ranges and move it onto the target centroid, since a
    plain far-off rotation would leave nothing inside the match gate. Runs
    whose inlier count falls below `min_inlier_fraction` of the smaller
    cloud are discarded; the survivor with the lowest inlier RMSE wins.
    Deterministic for a fixed `params.seed`.
    """
    if n_restarts < 1:
        raise ValueError(f"n_restarts must be >= 1, got {n_restarts}")
    if len(source) == 0 or len(target) == 0:
        raise EmptyCloud("multi-start icp needs non-empty clouds")

    index = SpatialIndex(target.points)
    centroid_shift = RigidTransform(np.eye(3), target.centroid() - source.centroid())
    rng = np.random.default_rng(params.seed)
    restart_seeds = rng.integers(0, 2**63 - 1, size=n_restarts)

    inits = [RigidTransform.identity()]
    for seed in restart_seeds:
        spin = rotation_about_point(
            random_rotation(*BENCHMARK_ANGLE_RANGES, seed=int(seed)).rotation,
            source.centroid(),
        )
        inits.append(compose(centroid_shift, spin))

    min_inliers = max(3, math.ceil(params.min_inlier_fraction * min(len(source), len(target))))
    best: RegistrationResult | None = None
    failures = 0
    for init in inits:
        try:
            run = icp(source, target, init, params, target_index=index)
        except (NoMatchesInRange, TooFewMatches, DegenerateConfiguration):
            failures += 1
            continue
        if len(run.inliers) < min_inliers:
            failures += 1
            continue
        if best is None or run.rmse < best.rmse:
            best = run
    if best is None:
        raise AllRestartsFailed(f"all {len(inits)} runs failed or fell below {min_inliers} inliers")
    return best
