"""Outlier-robust rigid estimation from putative correspondences.

Two interchangeable methods:

* ``ransac`` — 3-sample hypotheses solved in closed form, consensus scored
  under the inlier threshold, best model refit on its inliers. When the
  number of 3-subsets fits the iteration budget the subsets are enumerated
  exhaustively (and deterministically) instead of sampled.
* ``clique`` — pairwise-consistency graph exploiting that rigid motions
  preserve distances: correspondences (i, k) are compatible when
  | ||x_i - x_k|| - ||y_i - y_k|| | <= 2 * threshold. A maximal clique is
  grown greedily from the highest-degree vertices and fit in closed form,
  then refit on its consensus set like ransac.
"""

from __future__ import annotations

from math import comb

import numpy as np

from ..errors import NoConsensus, TooFewMatches
from ..geom3d import RigidTransform
from .kabsch import kabsch_from_arrays
from .types import CorrespondenceSet, RegistrationParams, RegistrationResult

_RANK_TOL = 1e-12
_HYPOTHESIS_CHUNK = 1024
_CLIQUE_SEED_TRIES = 16
_MAX_CLIQUE_NODES = 4000


def _batched_kabsch(src: np.ndarray, tgt: np.ndarray):
    """Closed-form fits for (B, 3, 3) stacks of 3-point correspondences.

    Returns rotations (B, 3, 3), translations (B, 3) and a validity mask
    (False where the triple is collinear/degenerate).
    """
    cs = src.mean(axis=1, keepdims=True)
    ct = tgt.mean(axis=1, keepdims=True)
    H = np.einsum("bij,bik->bjk", src - cs, tgt - ct)
    U, S, Vt = np.linalg.svd(H)
    valid = (S[:, 0] > 0) & (S[:, 1] > _RANK_TOL * S[:, 0])
    V = Vt.transpose(0, 2, 1)
    d = np.sign(np.linalg.det(V @ U.transpose(0, 2, 1)))
    V = V.copy()
    V[:, :, 2] *= d[:, None]
    R = V @ U.transpose(0, 2, 1)
    t = ct[:, 0, :] - np.einsum("bij,bj->bi", R, cs[:, 0, :])
    return R, t, valid


def _score_hypotheses(R, t, valid, src, tgt, threshold):
    """Inlier count and inlier RMSE per hypothesis (invalid ones score 0/inf)."""
    residual = np.einsum("bij,kj->bki", R, src) + t[:, None, :] - tgt[None, :, :]
    sq = np.einsum("bki,bki->bk", residual, residual)
    inlier = sq <= threshold * threshold
    counts = inlier.sum(axis=1)
    counts[~valid] = 0
    sums = np.where(inlier, sq, 0.0).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        rmse = np.sqrt(sums / counts)
    rmse[counts == 0] = np.inf
    return counts, rmse


def _consensus_result(corr, src, tgt, seed_rows, threshold, iterations) -> RegistrationResult:
    """Fit on seed rows, take the consensus set, refit, and package the result."""
    transform = kabsch_from_arrays(src[seed_rows], tgt[seed_rows])
    inlier_rows = np.nonzero(
        np.linalg.norm(transform.transform_points(src) - tgt, axis=1) <= threshold
    )[0]
    if len(inlier_rows) < 3:
        raise NoConsensus(f"best consensus has {len(inlier_rows)} inliers")
    transform = kabsch_from_arrays(src[inlier_rows], tgt[inlier_rows])
    residual = np.linalg.norm(transform.transform_points(src) - tgt, axis=1)
    final_rows = np.nonzero(residual <= threshold)[0]
    if len(final_rows) < 3:
        raise NoConsensus(f"refit consensus collapsed to {len(final_rows)} inliers")
    rmse = float(np.sqrt(np.mean(residual[final_rows] ** 2)))
    return RegistrationResult(
        transform=transform,
        inliers=corr.subset(final_rows),
        rmse=rmse,
        converged=True,
        iterations=iterations,
    )


def _ransac(corr: CorrespondenceSet, params: RegistrationParams) -> RegistrationResult:
    src = corr.matched_source()
    tgt = corr.matched_target()
    K = len(corr)

    if comb(K, 3) <= params.ransac_iterations:
        from itertools import combinations

        triples = np.array(list(combinations(range(K), 3)), dtype=np.int64)
    else:
        rng = np.random.default_rng(params.seed)
        rand = rng.random((params.ransac_iterations, K))
        triples = np.argpartition(rand, 3, axis=1)[:, :3].astype(np.int64)

    best_count = 0
    best_rmse = np.inf
    best_triple = None
    for start in range(0, len(triples), _HYPOTHESIS_CHUNK):
        chunk = triples[start : start + _HYPOTHESIS_CHUNK]
        R, t, valid = _batched_kabsch(src[chunk], tgt[chunk])
        counts, rmse = _score_hypotheses(R, t, valid, src, tgt, params.inlier_threshold)
        order = np.lexsort((np.arange(len(chunk)), rmse, -counts))
        top = order[0]
        if counts[top] > best_count or (counts[top] == best_count and rmse[top] < best_rmse):
            best_count = int(counts[top])
            best_rmse = float(rmse[top])
            best_triple = chunk[top]
    if best_triple is None or best_count < 3:
        raise NoConsensus(f"best hypothesis has {best_count} inliers")
    return _consensus_result(corr, src, tgt, best_triple, params.inlier_threshold, len(triples))


def _greedy_clique(adjacency: np.ndarray) -> np.ndarray:
    """Largest clique found by greedy expansion from high-degree seeds."""
    degrees = adjacency.sum(axis=1)
    order = np.lexsort((np.arange(len(degrees)), -degrees))
    best: np.ndarray = order[:1]
    for seed in order[:_CLIQUE_SEED_TRIES]:
        members = [int(seed)]
        compatible = adjacency[seed].copy()
        for v in order:
            if compatible[v]:
                members.append(int(v))
                compatible &= adjacency[v]
        if len(members) > len(best):
            best = np.array(sorted(members), dtype=np.int64)
    return np.asarray(best, dtype=np.int64)


def _clique(corr: CorrespondenceSet, params: RegistrationParams) -> RegistrationResult:
    src = corr.matched_source()
    tgt = corr.matched_target()
    if len(corr) > _MAX_CLIQUE_NODES:
        rng = np.random.default_rng(params.seed)
        keep = np.sort(rng.choice(len(corr), _MAX_CLIQUE_NODES, replace=False))
        corr = corr.subset(keep)
        src, tgt = src[keep], tgt[keep]

    dx = np.linalg.norm(src[:, None, :] - src[None, :, :], axis=2)
    dy = np.linalg.norm(tgt[:, None, :] - tgt[None, :, :], axis=2)
    adjacency = np.abs(dx - dy) <= 2.0 * params.inlier_threshold
    np.fill_diagonal(adjacency, False)

    clique = _greedy_clique(adjacency)
    if len(clique) < 3:
        raise NoConsensus(f"largest consistency clique has {len(clique)} members")
    tries = min(len(corr), _CLIQUE_SEED_TRIES)
    return _consensus_result(corr, src, tgt, clique, params.inlier_threshold, tries)


def robust_estimate(
    corr: CorrespondenceSet,
    method: str = "clique",
    params: RegistrationParams = RegistrationParams(),
) -> RegistrationResult:
    """Estimate a rigid motion from correspondences containing outliers."""
    if len(corr) < 3:
        raise TooFewMatches(f"robust estimation needs >= 3 correspondences, got {len(corr)}")
    if method == "ransac":
        return _ransac(corr, params)
    if method == "clique":
        return _clique(corr, params)
    raise ValueError(f"unknown robust method {method!r} (expected 'ransac' or 'clique')")
