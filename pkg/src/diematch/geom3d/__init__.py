"""Geometric core: clouds, rigid transforms, nearest-neighbor index, PLY I/O."""

from .cloud import PointCloud, apply_transform, voxel_downsample
from .index import SpatialIndex
from .ply import load_point_cloud, save_point_cloud
from .transforms import (
    BENCHMARK_ANGLE_RANGES,
    RigidTransform,
    compose,
    euler_xyz_matrix,
    invert,
    random_rotation,
    rotation_about_point,
)

__all__ = [
    "BENCHMARK_ANGLE_RANGES",
    "PointCloud",
    "RigidTransform",
    "SpatialIndex",
    "apply_transform",
    "compose",
    "euler_xyz_matrix",
    "invert",
    "load_point_cloud",
    "random_rotation",
    "rotation_about_point",
    "save_point_cloud",
    "voxel_downsample",
]
