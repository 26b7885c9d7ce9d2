"""Rigid transforms on R^3 and seeded random rotations.

All angles are degrees at the API surface, radians internally. Rotations
compose as matrices acting on column vectors: y = R x + t.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from ..errors import InvalidRange

_ORTHONORMALITY_TOL = 1e-9

# Per-axis Euler ranges (degrees) used to generate benchmark poses: tilt is
# bounded, in-plane spin is free.
BENCHMARK_ANGLE_RANGES: tuple[tuple[float, float], ...] = (
    (-25.0, 25.0),
    (-25.0, 25.0),
    (-180.0, 180.0),
)


@dataclass(frozen=True)
class RigidTransform:
    """Proper rigid motion: rotation (3x3, det +1) followed by translation (mm)."""

    rotation: NDArray[np.float64]
    translation: NDArray[np.float64] = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = np.ascontiguousarray(np.asarray(self.rotation, dtype=np.float64))
        t = np.ascontiguousarray(np.asarray(self.translation, dtype=np.float64)).reshape(3)
        if R.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {R.shape}")
        if not np.all(np.isfinite(R)) or not np.all(np.isfinite(t)):
            raise ValueError("transform entries must be finite")
        if np.max(np.abs(R.T @ R - np.eye(3))) > _ORTHONORMALITY_TOL:
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) > _ORTHONORMALITY_TOL:
            raise ValueError("rotation must have determinant +1 (no reflections)")
        R.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform(np.eye(3), np.zeros(3))

    def transform_points(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        """Apply to an (N, 3) array of points."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.T + self.translation

    def rotate_vectors(self, vectors: NDArray[np.float64]) -> NDArray[np.float64]:
        """Apply the rotation only (directions/normals ignore translation)."""
        return np.asarray(vectors, dtype=np.float64) @ self.rotation.T

    def to_matrix(self) -> NDArray[np.float64]:
        """4x4 homogeneous form, mainly for serialization and display."""
        M = np.eye(4)
        M[:3, :3] = self.rotation
        M[:3, 3] = self.translation
        return M


def compose(second: RigidTransform, first: RigidTransform) -> RigidTransform:
    """Transform equal to applying `first`, then `second`."""
    return RigidTransform(
        second.rotation @ first.rotation,
        second.rotation @ first.translation + second.translation,
    )


def invert(transform: RigidTransform) -> RigidTransform:
    """Inverse motion; compose(invert(T), T) is the identity."""
    R_inv = transform.rotation.T
    return RigidTransform(R_inv, -R_inv @ transform.translation)


def rotation_about_point(rotation: NDArray[np.float64], center: NDArray[np.float64]) -> RigidTransform:
    """Rigid motion that rotates by `rotation` about `center` instead of the origin."""
    R = np.asarray(rotation, dtype=np.float64)
    c = np.asarray(center, dtype=np.float64).reshape(3)
    return RigidTransform(R, c - R @ c)


def _axis_rotation(axis: int, radians: float) -> NDArray[np.float64]:
    c, s = np.cos(radians), np.sin(radians)
    R = np.eye(3)
    i, j = [(1, 2), (2, 0), (0, 1)][axis]
    R[i, i] = c
    R[j, j] = c
    R[i, j] = -s
    R[j, i] = s
    return R


def euler_xyz_matrix(x_deg: float, y_deg: float, z_deg: float) -> NDArray[np.float64]:
    """Rotation from intrinsic X -> Y -> Z Euler angles in degrees."""
    rx, ry, rz = np.deg2rad([x_deg, y_deg, z_deg])
    return _axis_rotation(0, rx) @ _axis_rotation(1, ry) @ _axis_rotation(2, rz)


def random_rotation(
    x_range: tuple[float, float] = BENCHMARK_ANGLE_RANGES[0],
    y_range: tuple[float, float] = BENCHMARK_ANGLE_RANGES[1],
    z_range: tuple[float, float] = BENCHMARK_ANGLE_RANGES[2],
    seed: int = 0,
) -> RigidTransform:
    """Rotation with per-axis uniform Euler angles (degrees), zero translation.

    Deterministic for a fixed seed. Ranges are inclusive lower / exclusive
    upper bounds as drawn by numpy's uniform; a (a, a) range pins the axis.
    """
    for name, (lo, hi) in zip("xyz", (x_range, y_range, z_range)):
        if lo > hi:
            raise InvalidRange(f"{name}_range ({lo}, {hi}) is ill-ordered")
    rng = np.random.default_rng(seed)
    angles = [rng.uniform(lo, hi) if hi > lo else float(lo) for lo, hi in (x_range, y_range, z_range)]
    return RigidTransform(euler_xyz_matrix(*angles), np.zeros(3))
