"""Fast point feature histograms: 33-dim local descriptors from normals.

For every point pair inside the support radius the three Darboux-frame
angles are computed, with the usual convention that the frame anchors at
the point whose normal leans closer onto the connecting line. That makes
the angle triple independent of pair direction, so each unordered pair is
computed once and credited to both endpoints' simplified histograms
(11 bins per angle). A point's histogram is then re-combined with its
neighbors' histograms weighted by inverse distance, and each 11-bin block
is normalized to sum 1.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.spatial import cKDTree

from ..errors import MissingNormals
from ..geom3d import PointCloud
from .types import DescriptorField

N_BINS = 11
DIMENSION = 3 * N_BINS


def _pair_features(p1, n1, p2, n2):
    """Angles (alpha, phi, theta) per pair plus validity mask and distances."""
    d = p2 - p1
    dist = np.linalg.norm(d, axis=1)
    valid = dist > 1e-12
    d_hat = d / np.where(valid, dist, 1.0)[:, None]
    angle1 = np.einsum("ij,ij->i", n1, d_hat)
    angle2 = np.einsum("ij,ij->i", n2, d_hat)

    # anchor the frame at the normal lying closer onto the line p1 -> p2
    swap = np.abs(angle1) < np.abs(angle2)
    n_anchor = np.where(swap[:, None], n2, n1)
    n_other = np.where(swap[:, None], n1, n2)
    d_hat[swap] = -d_hat[swap]
    phi = np.where(swap, -angle2, angle1)

    v = np.cross(d_hat, n_anchor)
    v_norm = np.linalg.norm(v, axis=1)
    valid &= v_norm > 1e-12
    v /= np.where(valid, v_norm, 1.0)[:, None]
    w = np.cross(n_anchor, v)

    alpha = np.einsum("ij,ij->i", v, n_other)
    theta = np.arctan2(np.einsum("ij,ij->i", w, n_other), np.einsum("ij,ij->i", n_anchor, n_other))
    return alpha, phi, theta, valid, dist


def _bin_index(values, low, high):
    idx = np.floor(N_BINS * (values - low) / (high - low)).astype(np.int64)
    return np.clip(idx, 0, N_BINS - 1)


def _normalize_blocks(hist: np.ndarray) -> np.ndarray:
    out = hist.reshape(len(hist), 3, N_BINS)
    sums = out.sum(axis=2, keepdims=True)
    out = np.divide(out, sums, out=np.zeros_like(out), where=sums > 0)
    return out.reshape(len(hist), DIMENSION)


def compute_fpfh(cloud: PointCloud, feature_radius: float) -> DescriptorField:
    """Descriptor per cloud point; zero vector + isolated flag when a point
    has no neighbor inside `feature_radius`."""
    if cloud.normals is None:
        raise MissingNormals("FPFH needs unit normals")
    if feature_radius <= 0:
        raise ValueError(f"feature_radius must be positive, got {feature_radius}")

    n = len(cloud)
    tree = cKDTree(cloud.points)
    pairs = tree.query_pairs(r=feature_radius, output_type="ndarray")

    spfh = np.zeros((n, DIMENSION))
    pair_count = np.zeros(n, dtype=np.int64)
    if len(pairs):
        i, j = pairs[:, 0], pairs[:, 1]
        alpha, phi, theta, valid, dist = _pair_features(
            cloud.points[i], cloud.normals[i], cloud.points[j], cloud.normals[j]
        )
        i, j, dist = i[valid], j[valid], dist[valid]
        endpoints = np.concatenate([i, j])
        bins = (
            _bin_index(alpha[valid], -1.0, 1.0),
            _bin_index(phi[valid], -1.0, 1.0),
            _bin_index(theta[valid], -np.pi, np.pi),
        )
        for block, b in enumerate(bins):
            both = np.concatenate([b, b])
            flat = endpoints * DIMENSION + block * N_BINS + both
            spfh += np.bincount(flat, minlength=n * DIMENSION).reshape(n, DIMENSION)
        spfh = _normalize_blocks(spfh)
        pair_count = np.bincount(endpoints, minlength=n)

        weights = 1.0 / np.maximum(np.concatenate([dist, dist]), 1e-9)
        spread = csr_matrix(
            (weights, (endpoints, np.concatenate([j, i]))), shape=(n, n)
        )
        neighbor_term = np.asarray(spread @ spfh)
        fpfh = spfh + neighbor_term / np.maximum(pair_count, 1)[:, None]
        fpfh = _normalize_blocks(fpfh)
    else:
        fpfh = spfh

    isolated = pair_count == 0
    fpfh[isolated] = 0.0
    return DescriptorField(
        descriptors=fpfh,
        sample_indices=np.arange(n, dtype=np.int64),
        points=cloud.points,
        dimension=DIMENSION,
        isolated=isolated,
    )
