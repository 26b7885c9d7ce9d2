"""Registration benchmark: per-method, per-die SRE medians on labeled pairs."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

from ..errors import DieMatchError
from ..evalmetrics import DieBenchmarkReport, aggregate_sre, sre
from ..geom3d import RigidTransform, compose, invert, voxel_downsample
from ..register import RegistrationParams, register_pair
from .cache import stable_pair_seed
from .manifest import CorpusManifest

BENCHMARK_METHODS = ("gt", "icp_rand", "fpfh", "external")


@dataclass(frozen=True)
class BenchmarkRun:
    reports: dict[str, DieBenchmarkReport]
    mean_seconds: dict[str, float]
    failures: list[tuple[str, tuple[str, str], str]]  # (method, pair, message)


def run_registration_benchmark(
    manifest: CorpusManifest,
    methods=("fpfh",),
    params: RegistrationParams = RegistrationParams(),
    descriptor_paths: dict[str, str] | None = None,
    on_progress=None,
) -> BenchmarkRun:
    """Register every intra-die pair with every method and aggregate SRE.

    Entries must carry die labels and ground-truth transforms. SRE is
    computed on the downsampled source cloud against the relative ground
    truth. A method failure on a pair scores the identity estimate and is
    flagged; `gt` is a passthrough that scores the ground truth itself
    (a zero-error harness check).
    """
    for method in methods:
        if method not in BENCHMARK_METHODS:
            raise ValueError(f"unknown benchmark method {method!r}")
    by_die = manifest.intra_die_pairs()
    if not by_die:
        raise ValueError("manifest has no die with >= 2 labeled scans")
    total = sum(len(p) for p in by_die.values()) * len(methods)

    reports: dict[str, DieBenchmarkReport] = {}
    mean_seconds: dict[str, float] = {}
    failures: list[tuple[str, tuple[str, str], str]] = []
    done = 0
    for method in methods:
        per_die: dict[str, list[float]] = {}
        elapsed = []
        for die, pairs in by_die.items():
            values = []
            for id_a, id_b in pairs:
                source = manifest.load_cloud(id_a, require_normals=True)
                target = manifest.load_cloud(id_b, require_normals=True)
                gt_a = manifest.by_id(id_a).gt_transform
                gt_b = manifest.by_id(id_b).gt_transform
                if gt_a is None or gt_b is None:
                    raise ValueError(f"pair ({id_a}, {id_b}) lacks ground-truth transforms")
                relative_gt = compose(gt_b, invert(gt_a))
                pair_params = replace(params, seed=stable_pair_seed(params.seed, id_a, id_b))

                start = time.perf_counter()
                if method == "gt":
                    estimate: RigidTransform = relative_gt
                else:
                    kwargs = {}
                    if method == "external":
                        if descriptor_paths is None:
                            raise ValueError("external method needs descriptor_paths")
                        kwargs = {
                            "source_descriptors": descriptor_paths[id_a],
                            "target_descriptors": descriptor_paths[id_b],
                        }
                    try:
                        estimate = register_pair(source, target, method, pair_params, **kwargs).transform
                    except DieMatchError as exc:
                        estimate = RigidTransform.identity()
                        failures.append((method, (id_a, id_b), str(exc)))
                elapsed.append(time.perf_counter() - start)

                values.append(sre(voxel_downsample(source, params.voxel), relative_gt, estimate))
                done += 1
                if on_progress is not None:
                    on_progress(done, total)
            per_die[die] = values
        reports[method] = aggregate_sre(per_die)
        mean_seconds[method] = sum(elapsed) / len(elapsed) if elapsed else 0.0
    return BenchmarkRun(reports, mean_seconds, failures)
