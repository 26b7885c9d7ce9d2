"""Synthetic dies and coin strikes for desk-scale ground truth.

A die is a band-limited random relief over a disc: a seeded sum of cosine
plane waves whose wavelengths live in a fixed band, so the pattern has
structure at the millimeter scale like a real engraving, and both heights
and normals are analytic. Striking a coin samples that relief on a jittered
grid and then degrades it the way real coins degrade: wear (Gaussian
damping of high frequencies), crack ridges, a ragged rim skirt, and a chord
crop; finally a recorded random rigid pose is applied so every scan pair
carries an exact ground-truth transform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ..geom3d import (
    BENCHMARK_ANGLE_RANGES,
    PointCloud,
    RigidTransform,
    apply_transform,
    random_rotation,
    rotation_about_point,
)

_CRACK_HEIGHT = 0.12     # mm, ridge amplitude
_CRACK_SIGMA = 0.06      # mm, ridge half-width
_RIM_DEPTH = 0.5         # mm, skirt wall height below the face
_RIM_WAVES = 7           # raggedness harmonics along the rim


@dataclass(frozen=True)
class Degradation:
    """Per-coin damage applied at strike time."""

    wear: float = 0.0            # mm, Gaussian smoothing radius of the relief
    crack_count: int = 0
    edge_jitter: float = 0.0     # mm, rim raggedness amplitude (0 = no rim skirt)
    crop_fraction: float = 0.0   # fraction of disc area removed by a chord cut

    def __post_init__(self):
        if self.wear < 0 or self.edge_jitter < 0 or self.crack_count < 0:
            raise ValueError("degradation amounts must be >= 0")
        if not 0.0 <= self.crop_fraction < 1.0:
            raise ValueError(f"crop_fraction must be in [0, 1), got {self.crop_fraction}")


@dataclass(frozen=True)
class SyntheticDieSpec:
    seed: int = 0
    relief_amplitude: float = 0.25   # mm, RMS height of the pattern
    min_wavelength: float = 0.8      # mm, frequency band of the relief
    max_wavelength: float = 3.0      # mm
    coin_radius: float = 4.0         # mm
    n_waves: int = 48
    sample_spacing: float = 0.07     # mm, strike sampling grid
    degradation: Degradation = field(default_factory=Degradation)

    def __post_init__(self):
        if self.relief_amplitude < 0:
            raise ValueError("relief_amplitude must be >= 0")
        for name in ("min_wavelength", "max_wavelength", "coin_radius", "sample_spacing"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.min_wavelength > self.max_wavelength:
            raise ValueError("wavelength band is ill-ordered")
        if self.n_waves < 1:
            raise ValueError("n_waves must be >= 1")


@dataclass(frozen=True)
class DiePattern:
    """Heightfield over a disc; waves are (kx, ky, phase, amplitude) rows."""

    spec: SyntheticDieSpec
    wave_vectors: np.ndarray
    phases: np.ndarray
    amplitudes: np.ndarray

    def _damped(self, wear: float) -> np.ndarray:
        if wear <= 0:
            return self.amplitudes
        k_sq = np.sum(self.wave_vectors**2, axis=1)
        return self.amplitudes * np.exp(-0.5 * wear * wear * k_sq)

    def height(self, xy: np.ndarray, wear: float = 0.0) -> np.ndarray:
        phase = xy @ self.wave_vectors.T + self.phases
        return np.cos(phase) @ self._damped(wear)

    def gradient(self, xy: np.ndarray, wear: float = 0.0) -> np.ndarray:
        phase = xy @ self.wave_vectors.T + self.phases
        slopes = -np.sin(phase) * self._damped(wear)
        return slopes @ self.wave_vectors


def generate_synthetic_die(spec: SyntheticDieSpec) -> DiePattern:
    """Deterministic band-limited relief; RMS height equals relief_amplitude."""
    rng = np.random.default_rng(spec.seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=spec.n_waves)
    wavelengths = rng.uniform(spec.min_wavelength, spec.max_wavelength, size=spec.n_waves)
    magnitudes = 2.0 * np.pi / wavelengths
    wave_vectors = magnitudes[:, None] * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=spec.n_waves)
    raw = rng.uniform(0.5, 1.0, size=spec.n_waves)
    rms = np.sqrt(np.sum(raw * raw) / 2.0)
    amplitudes = raw * (spec.relief_amplitude / rms if rms > 0 else 0.0)
    return DiePattern(spec, wave_vectors, phases, amplitudes)


def _chord_offset(radius: float, crop_fraction: float) -> float:
    """Signed chord distance whose circular segment removes `crop_fraction` of area."""

    def removed(h):
        return (radius * radius * np.arccos(h / radius) - h * np.sqrt(radius * radius - h * h)) / (
            np.pi * radius * radius
        ) - crop_fraction

    return brentq(removed, -radius + 1e-9, radius - 1e-9)


def _crack_field(xy: np.ndarray, lines: np.ndarray):
    """Heights and gradients of Gaussian ridge cracks along chord lines.

    Each line row is (cx, cy, nx, ny): a point on the line and its unit
    normal; ridge height decays with squared perpendicular distance.
    """
    z = np.zeros(len(xy))
    grad = np.zeros((len(xy), 2))
    for cx, cy, nx, ny in lines:
        d = (xy[:, 0] - cx) * nx + (xy[:, 1] - cy) * ny
        bump = _CRACK_HEIGHT * np.exp(-(d * d) / (_CRACK_SIGMA * _CRACK_SIGMA))
        z += bump
        scale = bump * (-2.0 * d / (_CRACK_SIGMA * _CRACK_SIGMA))
        grad[:, 0] += scale * nx
        grad[:, 1] += scale * ny
    return z, grad


def strike_coin(
    die: DiePattern,
    degradation: Degradation | None = None,
    transform_seed: int = 0,
    pose: RigidTransform | None = None,
) -> tuple[PointCloud, RigidTransform]:
    """Sample one coin from the die and return it with its ground-truth pose.

    The pose maps the die-frame strike to the delivered scan frame; by
    default it is a benchmark-range rotation about the strike centroid
    drawn from `transform_seed` (pass `pose` to pin it, e.g. the identity).
    All randomness (sampling jitter, cracks, rim, crop, pose) comes from
    `transform_seed`, so strikes are reproducible.
    """
    spec = die.spec
    deg = spec.degradation if degradation is None else degradation
    rng = np.random.default_rng(transform_seed)

    s = spec.sample_spacing
    half = int(np.ceil(spec.coin_radius / s))
    axis = np.arange(-half, half + 1) * s
    gx, gy = np.meshgrid(axis, axis)
    xy = np.stack([gx.ravel(), gy.ravel()], axis=1)
    xy = xy + rng.uniform(-0.5 * s, 0.5 * s, size=xy.shape)
    xy = xy[np.linalg.norm(xy, axis=1) <= spec.coin_radius]

    z = die.height(xy, wear=deg.wear)
    grad = die.gradient(xy, wear=deg.wear)

    if deg.crack_count > 0:
        angles = rng.uniform(0.0, 2.0 * np.pi, size=deg.crack_count)
        offsets = rng.uniform(-0.7 * spec.coin_radius, 0.7 * spec.coin_radius, size=deg.crack_count)
        lines = np.stack(
            [offsets * np.cos(angles), offsets * np.sin(angles), np.cos(angles), np.sin(angles)],
            axis=1,
        )
        crack_z, crack_grad = _crack_field(xy, lines)
        z = z + crack_z
        grad = grad + crack_grad

    points = np.column_stack([xy, z])
    normals = np.column_stack([-grad, np.ones(len(grad))])
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)

    if deg.edge_jitter > 0:
        phi = np.arange(0.0, 2.0 * np.pi, s / spec.coin_radius)
        harmonics = rng.uniform(-1.0, 1.0, size=(_RIM_WAVES, 2))
        ragged = sum(
            harmonics[k, 0] * np.cos((k + 1) * phi) + harmonics[k, 1] * np.sin((k + 1) * phi)
            for k in range(_RIM_WAVES)
        ) / np.sqrt(_RIM_WAVES)
        rim_radius = spec.coin_radius + deg.edge_jitter * ragged
        rim_xy = np.stack([rim_radius * np.cos(phi), rim_radius * np.sin(phi)], axis=1)
        rim_top = die.height(rim_xy, wear=deg.wear)
        depths = np.arange(0.0, _RIM_DEPTH, s)
        rim_pts = np.concatenate(
            [np.column_stack([rim_xy, rim_top - d]) for d in depths]
        )
        rim_nrm = np.concatenate(
            [np.column_stack([np.cos(phi), np.sin(phi), np.zeros_like(phi)]) for _ in depths]
        )
        points = np.concatenate([points, rim_pts])
        normals = np.concatenate([normals, rim_nrm])

    if deg.crop_fraction > 0:
        cut_dir = rng.uniform(0.0, 2.0 * np.pi)
        v = np.array([np.cos(cut_dir), np.sin(cut_dir)])
        offset = _chord_offset(spec.coin_radius, deg.crop_fraction)
        keep = points[:, :2] @ v <= offset
        points, normals = points[keep], normals[keep]

    cloud = PointCloud(points, normals)
    if pose is None:
        spin = random_rotation(*BENCHMARK_ANGLE_RANGES, seed=int(rng.integers(0, 2**63 - 1)))
        pose = rotation_about_point(spin.rotation, cloud.centroid())
    return apply_transform(cloud, pose), pose


def _draw_degradation(rng) -> Degradation:
    return Degradation(
        wear=float(rng.uniform(0.0, 0.04)),
        crack_count=int(rng.integers(0, 3)),
        edge_jitter=float(rng.uniform(0.02, 0.08)),
        crop_fraction=float(rng.uniform(0.0, 0.10)),
    )


def build_synthetic_corpus(
    out_dir,
    n_dies: int,
    coins_per_die,
    base_seed: int = 0,
    die_prefix: str = "D",
    split: str | None = None,
    **spec_overrides,
):
    """Write a labeled synthetic corpus: PLY scans plus a manifest.

    `coins_per_die` is an int or a per-die list (unbalanced corpora model
    real hoards, where resistant dies struck many more coins). Everything
    derives from `base_seed`. Returns the loaded CorpusManifest; the
    manifest file lands at `<out_dir>/manifest.json`.
    """
    from pathlib import Path

    from ..geom3d import save_point_cloud
    from .manifest import CorpusManifest, ManifestEntry, load_manifest, save_manifest

    out_dir = Path(out_dir)
    scans_dir = out_dir / "scans"
    scans_dir.mkdir(parents=True, exist_ok=True)

    if isinstance(coins_per_die, int):
        counts = [coins_per_die] * n_dies
    else:
        counts = list(coins_per_die)
        if len(counts) != n_dies:
            raise ValueError(f"{n_dies} dies but {len(counts)} coin counts")

    face = {"D": "obverse_no_beard", "DB": "obverse_beard", "R": "reverse"}.get(
        die_prefix, "obverse_no_beard"
    )
    suffix = "R" if face == "reverse" else "D"

    entries = []
    serial = 1
    for die_index in range(n_dies):
        die_seed = 100_000 * base_seed + die_index
        die = generate_synthetic_die(SyntheticDieSpec(seed=die_seed, **spec_overrides))
        die_id = f"{die_prefix}{die_index + 1}"
        for coin_index in range(counts[die_index]):
            strike_seed = 1_000_000 * base_seed + 1000 * die_index + coin_index
            deg = _draw_degradation(np.random.default_rng(strike_seed))
            cloud, gt = strike_coin(die, deg, transform_seed=strike_seed)
            scan_id = f"L{serial:04d}{suffix}"
            serial += 1
            path = scans_dir / f"{scan_id}.ply"
            save_point_cloud(cloud.with_id(scan_id), path)
            entries.append(
                ManifestEntry(
                    id=scan_id, path=path, face=face, die=die_id, split=split,
                    gt_transform=gt,
                )
            )
    manifest = CorpusManifest(tuple(entries))
    save_manifest(manifest, out_dir / "manifest.json")
    return load_manifest(out_dir / "manifest.json")
