"""Orchestration: corpora, pairwise scoring, benchmarks, CLI, and service."""

from .benchmark import BenchmarkRun, run_registration_benchmark
from .cache import PairCache, config_fingerprint, model_digest, stable_pair_seed
from .manifest import (
    CorpusManifest,
    ManifestEntry,
    ingest_directory,
    load_manifest,
    save_manifest,
)
from .pairwise import PairFailure, default_workers, run_pairwise
from .synthetic import (
    Degradation,
    DiePattern,
    SyntheticDieSpec,
    build_synthetic_corpus,
    generate_synthetic_die,
    strike_coin,
)
from .training import read_labeled_pairs, train_from_labeled_pairs, write_labeled_pairs

__all__ = [
    "BenchmarkRun",
    "CorpusManifest",
    "Degradation",
    "DiePattern",
    "ManifestEntry",
    "PairCache",
    "PairFailure",
    "SyntheticDieSpec",
    "build_synthetic_corpus",
    "config_fingerprint",
    "default_workers",
    "generate_synthetic_die",
    "ingest_directory",
    "load_manifest",
    "model_digest",
    "read_labeled_pairs",
    "run_pairwise",
    "run_registration_benchmark",
    "save_manifest",
    "stable_pair_seed",
    "strike_coin",
    "train_from_labeled_pairs",
    "write_labeled_pairs",
]
