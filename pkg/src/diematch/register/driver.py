"""Registration refinement and the full pair-registration pipeline."""

from __future__ import annotations

import time

import numpy as np

from ..errors import (
    AllRestartsFailed,
    DegenerateConfiguration,
    DieMatchError,
    NoConsensus,
    NoMatchesInRange,
    NoMutualMatches,
    RegistrationStageError,
    TooFewMatches,
)
from ..geom3d import PointCloud, RigidTransform, SpatialIndex, voxel_downsample
from .descriptors import load_external_descriptors, match_descriptors
from .fpfh import compute_fpfh
from .icp import icp, random_restart_icp
from .robust import robust_estimate
from .types import CorrespondenceSet, DescriptorField, RegistrationParams, RegistrationResult

REGISTRATION_METHODS = ("icp_rand", "fpfh", "external")

# Outcomes meaning "the pair carries no usable alignment signal" (typical for
# scans of unrelated dies); register_pair degrades these to a flagged result
# instead of failing the pair.
_NO_SIGNAL_ERRORS = (
    AllRestartsFailed,
    DegenerateConfiguration,
    NoConsensus,
    NoMatchesInRange,
    NoMutualMatches,
    TooFewMatches,
)


def refine_icp(
    source: PointCloud,
    target: PointCloud,
    coarse: RegistrationResult,
    params: RegistrationParams = RegistrationParams(),
) -> RegistrationResult:
    """Polish a coarse result with ICP restricted to the trusted region.

    The region is everything within `params.refinement_radius` of an inlier
    match midpoint, so rims, cracks and non-overlapping areas stay out of
    the refit. The refined result carries ICP's final closest-point match
    set (re-indexed into the full clouds) and its RMSE; if that RMSE would
    exceed `coarse.rmse + 1e-9` the coarse result is returned unchanged, so
    refinement never degrades the reported fit.
    """
    if len(coarse.inliers) < 3:
        raise TooFewMatches(f"refinement needs >= 3 coarse inliers, got {len(coarse.inliers)}")

    moved_src = coarse.transform.transform_points(coarse.inliers.matched_source())
    midpoints = 0.5 * (moved_src + coarse.inliers.matched_target())
    region = SpatialIndex(midpoints)

    _, src_dist = region.query_many(coarse.transform.transform_points(source.points))
    _, tgt_dist = region.query_many(target.points)
    src_keep = np.nonzero(src_dist <= params.refinement_radius)[0]
    tgt_keep = np.nonzero(tgt_dist <= params.refinement_radius)[0]

    sub_source = PointCloud(source.points[src_keep], None, source.id)
    sub_target = PointCloud(target.points[tgt_keep], None, target.id)
    run = icp(sub_source, sub_target, init=coarse.transform, params=params)

    if run.rmse > coarse.rmse + 1e-9:
        return coarse
    pairs = np.stack(
        [src_keep[run.inliers.pairs[:, 0]], tgt_keep[run.inliers.pairs[:, 1]]], axis=1
    )
    return RegistrationResult(
        transform=run.transform,
        inliers=CorrespondenceSet(source.points, target.points, pairs),
        rmse=run.rmse,
        converged=run.converged,
        iterations=run.iterations,
    )


def _no_signal_fallback(src: PointCloud, tgt: PointCloud) -> RegistrationResult:
    """Best-effort centroid alignment for pairs with no usable matches.

    The RMSE is the ungated closest-point RMS after the shift, which for
    unrelated dies is honestly large; `converged=False` marks the outcome.
    """
    shift = RigidTransform(np.eye(3), tgt.centroid() - src.centroid())
    _, dists = SpatialIndex(tgt.points).query_many(shift.transform_points(src.points))
    empty = CorrespondenceSet(src.points, tgt.points, np.empty((0, 2), dtype=np.int64))
    rmse = float(np.sqrt(np.mean(dists * dists)))
    return RegistrationResult(shift, empty, rmse, converged=False, iterations=0)


def register_pair(
    source: PointCloud,
    target: PointCloud,
    method: str = "fpfh",
    params: RegistrationParams = RegistrationParams(),
    source_descriptors: DescriptorField | str | None = None,
    target_descriptors: DescriptorField | str | None = None,
) -> RegistrationResult:
    """Full registration of one scan pair, with per-stage timings attached.

    Methods: ``icp_rand`` (multi-start ICP), ``fpfh`` (handcrafted
    descriptors -> symmetric matching -> robust estimate -> region ICP) and
    ``external`` (same, with ingested descriptor files computed elsewhere;
    their sample indices address the downsampled cloud).

    Contract failures (unreadable files, missing normals, bad parameters)
    are re-raised as RegistrationStageError tagged with the stage name.
    A pair that simply carries no alignment signal instead returns a
    centroid-shift result flagged `converged=False` with a large RMSE, so
    unrelated coins flow through scoring rather than aborting a run.
    """
    if method not in REGISTRATION_METHODS:
        raise ValueError(f"unknown method {method!r} (expected one of {REGISTRATION_METHODS})")

    timings: dict[str, float] = {}

    def run_stage(stage, fn, *args, **kwargs):
        start = time.perf_counter()
        try:
            out = fn(*args, **kwargs)
        except (*_NO_SIGNAL_ERRORS, RegistrationStageError):
            raise
        except DieMatchError as exc:
            raise RegistrationStageError(stage, exc) from exc
        timings[stage] = time.perf_counter() - start
        return out

    def guard_signal(stage, fn, *args, **kwargs):
        try:
            return run_stage(stage, fn, *args, **kwargs)
        except _NO_SIGNAL_ERRORS:
            return None

    src = run_stage("downsample", voxel_downsample, source, params.voxel)
    tgt = run_stage("downsample_target", voxel_downsample, target, params.voxel)

    if method == "icp_rand":
        result = guard_signal("icp", random_restart_icp, src, tgt, params.n_restarts, params)
        if result is None:
            result = _no_signal_fallback(src, tgt)
        return result.with_timings(timings)

    if method == "fpfh":
        fa = run_stage("descriptors", compute_fpfh, src, params.feature_radius)
        fb = run_stage("descriptors_target", compute_fpfh, tgt, params.feature_radius)
    else:
        def ingest(desc, cloud, which):
            if desc is None:
                raise RegistrationStageError(
                    "descriptors", DieMatchError(f"external method needs {which} descriptors")
                )
            if isinstance(desc, DescriptorField):
                return desc
            return load_external_descriptors(desc, cloud)

        fa = run_stage("descriptors", ingest, source_descriptors, src, "source")
        fb = run_stage("descriptors_target", ingest, target_descriptors, tgt, "target")

    result = None
    corr = guard_signal("match", match_descriptors, fa, fb, params.n_descriptor_samples, params.seed)
    if corr is not None:
        coarse = guard_signal("robust", robust_estimate, corr, params.robust_method, params)
        if coarse is not None:
            result = guard_signal("refine", refine_icp, src, tgt, coarse, params) or coarse
    if result is None:
        result = _no_signal_fallback(src, tgt)
    return result.with_timings(timings)
