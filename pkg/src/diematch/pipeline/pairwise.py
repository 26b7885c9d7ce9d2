"""Pairwise scoring of a corpus: embarrassingly parallel, share-nothing.

Each worker process loads the two scans itself, registers, and scores;
results stream back to a single collector that appends to the resumable
cache. Per-pair seeds derive from the scan ids, so the output is
byte-identical whatever the worker count or schedule.

Descriptors are per-scan, not per-pair, so on desk-scale corpora they are
precomputed in a parallel prefix phase and the table is inherited read-only
by the forked scoring pool (copy-on-write; nothing is pickled per job). On
corpora too large to hold every descriptor, workers fall back to a local
LRU cache, which amortizes fine there because each scan participates in
n-1 pairs.

Workers pin their BLAS pools to one thread: parallelism comes from the
process pool, and library-level threading would both oversubscribe the
cores and let reduction order vary with the environment.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from threadpoolctl import threadpool_limits

from ..errors import DieMatchError, RegistrationStageError
from ..geom3d import voxel_downsample
from ..register import RegistrationParams, compute_fpfh, register_pair
from ..simscore import LogisticModel, PairScore, downsample_for_scoring, score_pair
from .cache import PairCache, stable_pair_seed
from .manifest import CorpusManifest

_DESCRIPTOR_CACHE_CAP = 256
_PRECOMPUTE_MAX_SCANS = 512  # above this, descriptor tables stop fitting memory

# Per-process state: set once by the pool initializer (or inline for workers=1).
_STATE: dict = {}

# Filled by the parent before the scoring pool forks; read-only afterwards.
_SHARED_DESCRIPTORS: dict = {}


@dataclass(frozen=True)
class PairFailure:
    pair: tuple[str, str]
    stage: str
    message: str


def _init_worker(paths: dict, model: LogisticModel, params: RegistrationParams, method: str):
    _STATE.clear()
    _STATE.update(
        paths=paths,
        model=model,
        params=params,
        method=method,
        descriptors={},
        clouds={},
        blas_limit=threadpool_limits(limits=1),
    )


def _load_cloud(scan_id: str):
    from ..geom3d import load_point_cloud

    cached = _STATE["clouds"].get(scan_id)
    if cached is None:
        cached = load_point_cloud(_STATE["paths"][scan_id], require_normals=True).with_id(scan_id)
        if len(_STATE["clouds"]) >= 8:
            _STATE["clouds"].pop(next(iter(_STATE["clouds"])))
        _STATE["clouds"][scan_id] = cached
    return cached


def _descriptors_for(scan_id: str, cloud, params: RegistrationParams):
    shared = _SHARED_DESCRIPTORS.get(scan_id)
    if shared is not None:
        return shared
    cached = _STATE["descriptors"].get(scan_id)
    if cached is None:
        downsampled = voxel_downsample(cloud, params.voxel)
        cached = compute_fpfh(downsampled, params.feature_radius)
        if len(_STATE["descriptors"]) >= _DESCRIPTOR_CACHE_CAP:
            _STATE["descriptors"].pop(next(iter(_STATE["descriptors"])))
        _STATE["descriptors"][scan_id] = cached
    return cached


def _descriptor_job(scan_id: str):
    params: RegistrationParams = _STATE["params"]
    try:
        cloud = _load_cloud(scan_id)
        downsampled = voxel_downsample(cloud, params.voxel)
        return scan_id, compute_fpfh(downsampled, params.feature_radius)
    except DieMatchError:
        return scan_id, None  # the pair jobs will report the failure per pair


def _score_one(pair: tuple[str, str]):
    id_a, id_b = pair
    params: RegistrationParams = _STATE["params"]
    method: str = _STATE["method"]
    pair_params = replace(params, seed=stable_pair_seed(params.seed, id_a, id_b))
    try:
        source = _load_cloud(id_a)
        target = _load_cloud(id_b)
        if method == "fpfh":
            # descriptors are deterministic per scan; computing them once per
            # worker and feeding them through the ingestion path is identical
            # to recomputing inside register_pair for every pair
            reg = register_pair(
                source,
                target,
                "external",
                pair_params,
                source_descriptors=_descriptors_for(id_a, source, params),
                target_descriptors=_descriptors_for(id_b, target, params),
            )
        else:
            reg = register_pair(source, target, method, pair_params)
        src, tgt = downsample_for_scoring(source, target)
        score = score_pair(src, tgt, reg, _STATE["model"])
        return ("ok", score)
    except RegistrationStageError as exc:
        return ("err", PairFailure(pair, exc.stage, str(exc.cause)))
    except DieMatchError as exc:
        return ("err", PairFailure(pair, "load", str(exc)))


def _spot_check_cache(hits, paths, model, params, method, fraction) -> list[PairFailure]:
    """Recompute a seeded sample of cache hits and compare the stored values.

    Guards against a stale or corrupted cache file slipping silently into a
    run; a mismatch is reported as a failure tagged 'cache'.
    """
    import numpy as np

    if not hits or fraction <= 0:
        return []
    rng = np.random.default_rng(stable_pair_seed(params.seed, "cache", "check"))
    sample_size = max(1, int(len(hits) * fraction))
    picked = [hits[i] for i in sorted(rng.choice(len(hits), size=min(sample_size, len(hits)), replace=False))]
    _init_worker(paths, model, params, method)
    failures = []
    try:
        for cached in picked:
            kind, fresh = _score_one(cached.pair)
            if kind != "ok":
                failures.append(PairFailure(cached.pair, "cache", f"recompute failed: {fresh.message}"))
            elif (
                fresh.probability != cached.probability
                or fresh.rmse != cached.rmse
                or not np.array_equal(fresh.histogram.bins, cached.histogram.bins)
            ):
                failures.append(
                    PairFailure(
                        cached.pair,
                        "cache",
                        f"cached score differs from recomputation "
                        f"(p {cached.probability!r} vs {fresh.probability!r})",
                    )
                )
    finally:
        _STATE.pop("blas_limit").restore_original_limits()
    return failures


def run_pairwise(
    manifest: CorpusManifest,
    model: LogisticModel,
    params: RegistrationParams = RegistrationParams(),
    method: str = "fpfh",
    workers: int = 1,
    cache: PairCache | None = None,
    pairs: list[tuple[str, str]] | None = None,
    on_progress=None,
    cache_check_fraction: float = 0.01,
) -> tuple[list[PairScore], list[PairFailure]]:
    """Score every scan pair of the manifest (or the given subset).

    Cache hits are skipped (a seeded 1% sample of them is re-verified by
    recomputation); failures are collected, never fatal. Scores return in
    canonical pair order regardless of completion order.
    """
    jobs = manifest.all_pairs() if pairs is None else [tuple(sorted(p)) for p in pairs]
    scores: list[PairScore] = []
    pending = []
    hits: list[PairScore] = []
    for pair in jobs:
        cached = None if cache is None else cache.get(pair)
        if cached is not None:
            scores.append(cached)
            hits.append(cached)
        else:
            pending.append(pair)

    paths = {e.id: str(e.path) for e in manifest.entries}
    failures = _spot_check_cache(hits, paths, model, params, method, cache_check_fraction)
    done = len(scores)

    def collect(outcome):
        nonlocal done
        kind, payload = outcome
        if kind == "ok":
            if cache is not None:
                cache.put(payload)
            scores.append(payload)
        else:
            failures.append(payload)
        done += 1
        if on_progress is not None:
            on_progress(done, len(jobs))

    if workers <= 1:
        _init_worker(paths, model, params, method)
        try:
            for pair in pending:
                collect(_score_one(pair))
        finally:
            _STATE.pop("blas_limit").restore_original_limits()
    elif pending:
        referenced = sorted({scan for pair in pending for scan in pair})
        precompute = method == "fpfh" and len(referenced) <= _PRECOMPUTE_MAX_SCANS
        _SHARED_DESCRIPTORS.clear()
        if precompute:
            with ProcessPoolExecutor(
                max_workers=workers,
                initializer=_init_worker,
                initargs=(paths, model, params, method),
            ) as pool:
                for scan_id, field in pool.map(_descriptor_job, referenced):
                    if field is not None:
                        _SHARED_DESCRIPTORS[scan_id] = field
        try:
            # the scoring pool forks after the table is filled, so workers
            # inherit the descriptors copy-on-write
            chunk = max(1, len(pending) // (workers * 8))
            with ProcessPoolExecutor(
                max_workers=workers,
                initializer=_init_worker,
                initargs=(paths, model, params, method),
            ) as pool:
                for outcome in pool.map(_score_one, pending, chunksize=chunk):
                    collect(outcome)
        finally:
            _SHARED_DESCRIPTORS.clear()

    scores.sort(key=lambda s: s.pair)
    failures.sort(key=lambda f: f.pair)
    return scores, failures


def default_workers() -> int:
    return os.cpu_count() or 1
