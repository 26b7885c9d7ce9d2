"""Truncated distance histograms used as the pair-similarity feature."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .distance import DistanceSamples

N_BINS = 70
CUTOFF = 0.6  # mm; distances at or above this are discarded


@dataclass(frozen=True)
class DistanceHistogram:
    """Mean of the two per-direction normalized histograms over [0, cutoff).

    `fwd_in_range` / `bwd_in_range` count the samples that survived the
    cutoff on each side; a side with zero support contributes an all-zero
    histogram (so a pair with no overlap at all has an all-zero feature).
    """

    bins: NDArray[np.float64]
    cutoff: float = CUTOFF
    fwd_in_range: int = 0
    bwd_in_range: int = 0

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.bins, dtype=np.float64)).ravel()
        if not np.all(np.isfinite(arr)) or (len(arr) and arr.min() < 0):
            raise ValueError("histogram bins must be finite and >= 0")
        arr.setflags(write=False)
        object.__setattr__(self, "bins", arr)

    @property
    def bin_width(self) -> float:
        return self.cutoff / len(self.bins)

    @property
    def empty(self) -> bool:
        return self.fwd_in_range == 0 and self.bwd_in_range == 0


def _side_histogram(distances: np.ndarray, n_bins: int, cutoff: float):
    kept = distances[distances < cutoff]
    counts, _ = np.histogram(kept, bins=n_bins, range=(0.0, cutoff))
    total = counts.sum()
    if total == 0:
        return np.zeros(n_bins), 0
    return counts / total, int(total)


def histogram(
    samples: DistanceSamples, n_bins: int = N_BINS, cutoff: float = CUTOFF
) -> DistanceHistogram:
    """Histogram each direction over [0, cutoff), normalize, and average.

    Normalizing before the mean makes the feature independent of cloud
    sizes, which vary between scans.
    """
    fwd, n_fwd = _side_histogram(samples.d_fwd, n_bins, cutoff)
    bwd, n_bwd = _side_histogram(samples.d_bwd, n_bins, cutoff)
    return DistanceHistogram(
        bins=0.5 * (fwd + bwd),
        cutoff=cutoff,
        fwd_in_range=n_fwd,
        bwd_in_range=n_bwd,
    )
