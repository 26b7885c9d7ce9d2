"""Tests for clouds, transforms, the spatial index, and PLY I/O."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diematch.errors import (
    EmptyCloud,
    InvalidRange,
    MalformedPly,
    MissingNormals,
    NonPositiveVoxel,
)
from diematch.geom3d import (
    PointCloud,
    RigidTransform,
    SpatialIndex,
    apply_transform,
    compose,
    euler_xyz_matrix,
    invert,
    load_point_cloud,
    random_rotation,
    save_point_cloud,
    voxel_downsample,
)


def random_cloud(rng, n=100, with_normals=True, scale=5.0):
    pts = rng.uniform(-scale, scale, size=(n, 3))
    normals = None
    if with_normals:
        normals = rng.normal(size=(n, 3))
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    return PointCloud(pts, normals)


def random_transform(rng):
    return RigidTransform(
        euler_xyz_matrix(*rng.uniform(-180, 180, size=3)),
        rng.uniform(-3, 3, size=3),
    )


# --- PointCloud type -------------------------------------------------------

class TestPointCloud:
    def test_rejects_mismatched_lengths(self):
        with pytest.raises(ValueError, match="normals"):
            PointCloud(np.zeros((3, 3)), np.tile([0.0, 0.0, 1.0], (2, 1)))

    def test_rejects_non_unit_normals(self):
        with pytest.raises(ValueError, match="unit"):
            PointCloud(np.zeros((1, 3)), np.array([[0.0, 0.0, 2.0]]))

    def test_rejects_non_finite_points(self):
        with pytest.raises(ValueError, match="finite"):
            PointCloud(np.array([[np.nan, 0.0, 0.0]]))

    def test_arrays_frozen(self):
        cloud = PointCloud(np.zeros((2, 3)))
        with pytest.raises(ValueError):
            cloud.points[0, 0] = 1.0


# --- PLY I/O ---------------------------------------------------------------

def write_ascii_ply(path, body_lines, n_vertices, with_normals=True, fmt="ascii"):
    props = ["property float x", "property float y", "property float z"]
    if with_normals:
        props += ["property float nx", "property float ny", "property float nz"]
    header = ["ply", f"format {fmt} 1.0", f"element vertex {n_vertices}", *props, "end_header"]
    path.write_text("\n".join(header + body_lines) + "\n")


class TestPly:
    def test_ascii_with_normals(self, tmp_path):
        p = tmp_path / "L0001D.ply"
        write_ascii_ply(p, ["0 0 0 0 0 1", "1 0 0 0 0 1", "0 1 0 0 1 0"], 3)
        cloud = load_point_cloud(p, require_normals=True)
        assert cloud.id == "L0001D"
        assert len(cloud) == 3
        np.testing.assert_allclose(np.linalg.norm(cloud.normals, axis=1), 1.0, atol=1e-12)

    def test_normals_renormalized(self, tmp_path):
        p = tmp_path / "a.ply"
        write_ascii_ply(p, ["0 0 0 0 0 4"], 1)
        cloud = load_point_cloud(p)
        np.testing.assert_allclose(cloud.normals[0], [0, 0, 1], atol=1e-12)

    def test_missing_normals_raises_when_required(self, tmp_path):
        p = tmp_path / "a.ply"
        write_ascii_ply(p, ["0 0 0", "1 1 1"], 2, with_normals=False)
        with pytest.raises(MissingNormals):
            load_point_cloud(p, require_normals=True)
        assert load_point_cloud(p).normals is None

    def test_zero_vertices(self, tmp_path):
        p = tmp_path / "a.ply"
        write_ascii_ply(p, [], 0)
        with pytest.raises(EmptyCloud):
            load_point_cloud(p)

    def test_truncated_payload(self, tmp_path):
        p = tmp_path / "a.ply"
        write_ascii_ply(p, ["0 0 0 0 0 1"], 2)
        with pytest.raises(MalformedPly):
            load_point_cloud(p)

    def test_big_endian_rejected(self, tmp_path):
        p = tmp_path / "a.ply"
        write_ascii_ply(p, [], 1, fmt="binary_big_endian")
        with pytest.raises(MalformedPly, match="big-endian"):
            load_point_cloud(p)

    def test_not_a_ply(self, tmp_path):
        p = tmp_path / "a.ply"
        p.write_bytes(b"OFF\n1 2 3\n")
        with pytest.raises(MalformedPly):
            load_point_cloud(p)

    def test_binary_roundtrip_bit_for_bit(self, tmp_path):
        rng = np.random.default_rng(7)
        cloud = random_cloud(rng, n=1000)
        p = tmp_path / "round.ply"
        save_point_cloud(cloud, p)
        back = load_point_cloud(p, require_normals=True)
        assert np.array_equal(back.points, cloud.points)
        assert np.array_equal(back.normals, cloud.normals)

    def test_extra_scalar_properties_skipped(self, tmp_path):
        p = tmp_path / "c.ply"
        header = [
            "ply", "format ascii 1.0", "element vertex 2",
            "property float x", "property float y", "property float z",
            "property uchar red", "property uchar green", "property uchar blue",
            "end_header",
        ]
        p.write_text("\n".join(header + ["0 0 0 255 0 0", "1 2 3 0 255 0"]) + "\n")
        cloud = load_point_cloud(p)
        np.testing.assert_array_equal(cloud.points[1], [1, 2, 3])

    def test_binary_with_faces_after_vertices(self, tmp_path):
        rng = np.random.default_rng(3)
        cloud = random_cloud(rng, n=5)
        p = tmp_path / "f.ply"
        save_point_cloud(cloud, p)
        blob = p.read_bytes()
        blob = blob.replace(
            b"end_header",
            b"element face 1\nproperty list uchar int vertex_indices\nend_header",
        ) + bytes([3, 0, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0])
        p.write_bytes(blob)
        back = load_point_cloud(p)
        assert np.array_equal(back.points, cloud.points)


# --- voxel downsampling ------------------------------------------------------

class TestVoxelDownsample:
    def test_singleton_unchanged(self):
        cloud = PointCloud([[0.33, 0.1, -2.0]], [[0.0, 0.0, 1.0]])
        out = voxel_downsample(cloud, 0.5)
        np.testing.assert_array_equal(out.points, cloud.points)

    def test_two_points_same_voxel_merge_to_centroid(self):
        cloud = PointCloud([[0, 0, 0], [0.04, 0, 0]])
        out = voxel_downsample(cloud, 0.1)
        assert len(out) == 1
        np.testing.assert_allclose(out.points[0], [0.02, 0, 0], atol=1e-15)

    def test_two_points_distinct_voxels_kept(self):
        cloud = PointCloud([[0, 0, 0], [0.2, 0, 0]])
        out = voxel_downsample(cloud, 0.1)
        assert len(out) == 2
        np.testing.assert_allclose(sorted(out.points[:, 0]), [0.0, 0.2])

    def test_normals_averaged_and_unit(self):
        n = np.array([[1.0, 0, 0], [0.0, 1.0, 0]])
        cloud = PointCloud([[0, 0, 0], [0.01, 0, 0]], n)
        out = voxel_downsample(cloud, 0.1)
        np.testing.assert_allclose(out.normals[0], [1, 1, 0] / np.sqrt(2), atol=1e-12)

    def test_opposed_normals_fall_back_to_first_member(self):
        n = np.array([[1.0, 0, 0], [-1.0, 0, 0]])
        cloud = PointCloud([[0, 0, 0], [0.01, 0, 0]], n)
        out = voxel_downsample(cloud, 0.1)
        np.testing.assert_array_equal(out.normals[0], [1, 0, 0])

    def test_errors(self):
        cloud = PointCloud([[0, 0, 0]])
        with pytest.raises(NonPositiveVoxel):
            voxel_downsample(cloud, 0.0)
        with pytest.raises(EmptyCloud):
            voxel_downsample(PointCloud(np.zeros((0, 3))), 0.1)

    def test_order_independent(self):
        rng = np.random.default_rng(11)
        cloud = random_cloud(rng, n=200)
        perm = rng.permutation(len(cloud))
        shuffled = PointCloud(cloud.points[perm], cloud.normals[perm])
        a = voxel_downsample(cloud, 0.8)
        b = voxel_downsample(shuffled, 0.8)
        np.testing.assert_allclose(a.points, b.points, atol=1e-12)

    @given(st.integers(0, 2**32 - 1), st.floats(0.05, 2.0))
    @settings(max_examples=25, deadline=None)
    def test_idempotent_size(self, seed, voxel):
        rng = np.random.default_rng(seed)
        cloud = random_cloud(rng, n=150, with_normals=False)
        once = voxel_downsample(cloud, voxel)
        twice = voxel_downsample(once, voxel)
        assert len(twice) == len(once)
        # second pass moves each point by at most half the cell diagonal
        if len(twice) == len(once):
            shift = np.linalg.norm(np.sort(twice.points, 0) - np.sort(once.points, 0), axis=1)
            assert shift.max() <= voxel * np.sqrt(3) / 2 + 1e-12


# --- rigid transforms --------------------------------------------------------

class TestTransforms:
    def test_identity_application(self):
        rng = np.random.default_rng(0)
        cloud = random_cloud(rng, 10)
        out = apply_transform(cloud, RigidTransform.identity())
        np.testing.assert_array_equal(out.points, cloud.points)

    def test_quarter_turn_about_z(self):
        T = RigidTransform(euler_xyz_matrix(0, 0, 90))
        out = T.transform_points(np.array([[1.0, 0.0, 0.0]]))
        np.testing.assert_allclose(out[0], [0, 1, 0], atol=1e-12)

    def test_rejects_reflection(self):
        R = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(ValueError, match="determinant"):
            RigidTransform(R)

    def test_compose_matches_sequential_application(self):
        rng = np.random.default_rng(1)
        t1, t2 = random_transform(rng), random_transform(rng)
        pts = rng.uniform(-2, 2, size=(50, 3))
        combined = compose(t2, t1).transform_points(pts)
        sequential = t2.transform_points(t1.transform_points(pts))
        assert np.max(np.linalg.norm(combined - sequential, axis=1)) < 1e-12

    def test_invert_roundtrip(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            T = random_transform(rng)
            pts = rng.uniform(-4, 4, size=(30, 3))
            back = invert(T).transform_points(T.transform_points(pts))
            assert np.max(np.linalg.norm(back - pts, axis=1)) < 1e-12

    def test_compose_with_identity(self):
        rng = np.random.default_rng(3)
        T = random_transform(rng)
        for composed in (compose(T, RigidTransform.identity()), compose(RigidTransform.identity(), T)):
            np.testing.assert_allclose(composed.rotation, T.rotation, atol=1e-15)
            np.testing.assert_allclose(composed.translation, T.translation, atol=1e-15)

    def test_compose_associative(self):
        rng = np.random.default_rng(4)
        a, b, c = (random_transform(rng) for _ in range(3))
        left = compose(compose(a, b), c)
        right = compose(a, compose(b, c))
        np.testing.assert_allclose(left.rotation, right.rotation, atol=1e-12)
        np.testing.assert_allclose(left.translation, right.translation, atol=1e-12)


class TestRandomRotation:
    def test_degenerate_ranges_give_identity(self):
        T = random_rotation((0, 0), (0, 0), (0, 0), seed=5)
        np.testing.assert_allclose(T.rotation, np.eye(3), atol=1e-15)
        np.testing.assert_array_equal(T.translation, np.zeros(3))

    def test_deterministic_for_seed(self):
        a = random_rotation(seed=42)
        b = random_rotation(seed=42)
        np.testing.assert_array_equal(a.rotation, b.rotation)

    def test_invalid_range(self):
        with pytest.raises(InvalidRange):
            random_rotation(x_range=(10, -10), seed=0)

    def test_angle_spans_cover_requested_ranges(self):
        # Recover Euler angles from R = Rx(a) @ Ry(b) @ Rz(c) and check spans.
        xs, ys, zs = [], [], []
        for seed in range(10_000):
            R = random_rotation(seed=seed).rotation
            ys.append(np.degrees(np.arcsin(np.clip(R[0, 2], -1, 1))))
            xs.append(np.degrees(np.arctan2(-R[1, 2], R[2, 2])))
            zs.append(np.degrees(np.arctan2(-R[0, 1], R[0, 0])))
        assert min(xs) < -23 and max(xs) > 23 and min(xs) > -25.01 and max(xs) < 25.01
        assert min(ys) < -23 and max(ys) > 23 and min(ys) > -25.01 and max(ys) < 25.01
        assert min(zs) < -178 and max(zs) > 178


# --- spatial index -----------------------------------------------------------

class TestSpatialIndex:
    def test_matches_linear_scan(self):
        rng = np.random.default_rng(9)
        pts = rng.uniform(-1, 1, size=(500, 3))
        index = SpatialIndex(pts)
        for query in rng.uniform(-1.2, 1.2, size=(100, 3)):
            dists = np.linalg.norm(pts - query, axis=1)
            expected = int(np.argmin(dists))
            got_idx, got_dist = index.query(query)
            assert got_idx == expected
            assert got_dist == float(dists[expected])

    def test_tie_broken_by_lowest_index(self):
        pts = np.array([[1.0, 0, 0], [-1.0, 0, 0], [0, 1.0, 0]])
        index = SpatialIndex(pts)
        idx, dist = index.query([0.0, 0.0, 0.0])
        assert idx == 0 and dist == 1.0

    def test_duplicate_points_tie(self):
        pts = np.array([[0.5, 0.5, 0.5]] * 4)
        idx, dist = SpatialIndex(pts).query([0.5, 0.5, 0.5])
        assert idx == 0 and dist == 0.0

    def test_query_many_distances_match_scan(self):
        rng = np.random.default_rng(10)
        pts = rng.uniform(-1, 1, size=(200, 3))
        queries = rng.uniform(-1, 1, size=(50, 3))
        idx, dists = SpatialIndex(pts).query_many(queries)
        brute = np.min(np.linalg.norm(pts[None] - queries[:, None], axis=2), axis=1)
        np.testing.assert_allclose(dists, brute, rtol=1e-12)

    def test_within_radius(self):
        pts = np.array([[0.0, 0, 0], [1.0, 0, 0], [3.0, 0, 0]])
        got = SpatialIndex(pts).within_radius([0.1, 0, 0], 1.0)
        np.testing.assert_array_equal(got, [0, 1])
