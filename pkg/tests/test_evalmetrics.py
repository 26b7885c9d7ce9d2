"""Metric tests, each checked against an independent brute-force oracle."""

import itertools
from math import sqrt

import numpy as np
import pytest

from diematch.errors import DegenerateCloud, EmptyDie, ItemSetMismatch, LengthMismatch
from diematch.evalmetrics import (
    aggregate_sre,
    ari,
    fmi,
    pair_accuracy,
    pair_confusion,
    render_benchmark_table,
    sre,
)
from diematch.geom3d import PointCloud, RigidTransform, compose, euler_xyz_matrix


def brute_force_confusion(pred, truth):
    """Oracle: classify every unordered pair by direct enumeration."""
    items = sorted(pred)
    tp = fp = fn = tn = 0
    for a, b in itertools.combinations(items, 2):
        same_pred = pred[a] == pred[b]
        same_truth = truth[a] == truth[b]
        if same_pred and same_truth:
            tp += 1
        elif same_pred:
            fp += 1
        elif same_truth:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def random_transform(rng):
    return RigidTransform(
        euler_xyz_matrix(*rng.uniform(-180, 180, size=3)), rng.uniform(-2, 2, size=3)
    )


class TestSre:
    def test_exact_estimate_is_zero(self):
        rng = np.random.default_rng(0)
        cloud = PointCloud(rng.uniform(-2, 2, size=(40, 3)))
        T = random_transform(rng)
        assert sre(cloud, T, T) == 0.0

    def test_pure_translation_closed_form(self):
        rng = np.random.default_rng(1)
        pts = rng.uniform(-3, 3, size=(25, 3))
        cloud = PointCloud(pts)
        gt = random_transform(rng)
        eps = np.array([0.05, -0.02, 0.01])
        est = RigidTransform(gt.rotation, gt.translation + eps)
        radii = np.linalg.norm(pts - pts.mean(axis=0), axis=1)
        expected = float(np.mean(np.linalg.norm(eps) / radii))
        assert sre(cloud, gt, est) == pytest.approx(expected, rel=1e-12)

    def test_invariant_to_common_left_motion(self):
        rng = np.random.default_rng(2)
        cloud = PointCloud(rng.uniform(-2, 2, size=(30, 3)))
        for _ in range(10):
            gt, est, extra = (random_transform(rng) for _ in range(3))
            base = sre(cloud, gt, est)
            moved = sre(cloud, compose(extra, gt), compose(extra, est))
            assert moved == pytest.approx(base, rel=1e-9)

    def test_centroid_point_skipped_with_warning(self):
        pts = np.array([[0.0, 0, 0], [1.0, 0, 0], [-1.0, 0, 0]])
        cloud = PointCloud(pts)
        est = RigidTransform(np.eye(3), np.array([0.1, 0.0, 0.0]))
        with pytest.warns(UserWarning, match="skipped"):
            value = sre(cloud, RigidTransform.identity(), est)
        assert value == pytest.approx(0.1)

    def test_degenerate_cloud(self):
        cloud = PointCloud(np.zeros((4, 3)))
        with pytest.raises(DegenerateCloud):
            sre(cloud, RigidTransform.identity(), RigidTransform.identity())


class TestAggregateSre:
    def test_median_is_robust(self):
        report = aggregate_sre({"R1": [1.0, 2.0, 100.0]})
        assert report.per_die_median_sre["R1"] == 2.0

    def test_overall_is_mean_of_medians(self):
        report = aggregate_sre({"R1": [10.0], "D1": [30.0]})
        assert report.overall == 20.0

    def test_even_count_midpoint_median(self):
        report = aggregate_sre({"D2": [1.0, 3.0]})
        assert report.per_die_median_sre["D2"] == 2.0

    def test_empty_die(self):
        with pytest.raises(EmptyDie):
            aggregate_sre({"R1": []})

    def test_paper_shaped_27_die_report(self):
        dies = [f"R{i}" for i in range(1, 16)] + [f"DB{i}" for i in range(1, 7)] + [
            f"D{i}" for i in range(1, 7)
        ]
        per_pair = {die: [float(k)] for k, die in enumerate(dies)}
        report = aggregate_sre(per_pair)
        assert len(report.per_die_median_sre) == 27
        assert set(report.per_category_mean) == {
            "reverses", "obverses_beard", "obverses_no_beard",
        }
        assert report.per_category_mean["reverses"] == pytest.approx(np.mean(range(15)))
        table = render_benchmark_table({"identity": report})
        assert table.count("DB") == 6 and "Average" in table


class TestPairConfusion:
    def test_hand_case_matching_partitions(self):
        labels = [0, 0, 1, 1]
        c = pair_confusion(labels, labels)
        assert (c.tp, c.fp, c.fn, c.tn) == (2, 0, 0, 4)

    def test_singletons_vs_one_cluster(self):
        c = pair_confusion([0, 1, 2], [7, 7, 7])
        assert (c.tp, c.fp, c.fn, c.tn) == (0, 0, 3, 0)

    def test_counts_partition_all_pairs(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(2, 60))
            pred = dict(enumerate(rng.integers(0, 5, size=n).tolist()))
            truth = dict(enumerate(rng.integers(0, 5, size=n).tolist()))
            c = pair_confusion(pred, truth)
            assert c.total == n * (n - 1) // 2

    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            n = int(rng.integers(2, 100))
            pred = dict(enumerate(rng.integers(0, 6, size=n).tolist()))
            truth = dict(enumerate(rng.integers(0, 6, size=n).tolist()))
            c = pair_confusion(pred, truth)
            assert (c.tp, c.fp, c.fn, c.tn) == brute_force_confusion(pred, truth)

    def test_item_set_mismatch(self):
        with pytest.raises(ItemSetMismatch):
            pair_confusion({"a": 0, "b": 0}, {"a": 0, "c": 0})


class TestClusteringIndices:
    def test_identical_labelings(self):
        labels = [0, 0, 1, 1, 2]
        assert fmi(labels, labels) == 1.0
        assert ari(labels, labels) == 1.0

    def test_worked_example(self):
        truth = [0, 0, 1, 1]
        pred = [0, 0, 0, 1]
        # pairs: TP=1 (ab), FP=2 (ac, bc), FN=1 (cd), TN=2 (ad, bd)
        assert fmi(pred, truth) == pytest.approx(1 / sqrt(6), abs=1e-15)

    def test_ari_against_contingency_oracle(self):
        def oracle(pred, truth):
            tp, fp, fn, tn = brute_force_confusion(
                dict(enumerate(pred)), dict(enumerate(truth))
            )
            total = tp + fp + fn + tn
            expected = (tp + fp) * (tp + fn) / total
            maximum = 0.5 * ((tp + fp) + (tp + fn))
            if maximum == expected:
                return 1.0
            return (tp - expected) / (maximum - expected)

        rng = np.random.default_rng(5)
        for _ in range(50):
            n = int(rng.integers(2, 60))
            pred = rng.integers(0, 5, size=n).tolist()
            truth = rng.integers(0, 5, size=n).tolist()
            assert ari(pred, truth) == pytest.approx(oracle(pred, truth), abs=1e-12)

    def test_all_singletons_degenerate(self):
        pred = list(range(5))
        assert ari(pred, pred) == 1.0
        assert fmi(pred, pred) == 0.0  # zero-denominator convention

    def test_symmetry_and_label_permutation(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            n = int(rng.integers(3, 40))
            pred = rng.integers(0, 4, size=n).tolist()
            truth = rng.integers(0, 4, size=n).tolist()
            assert fmi(pred, truth) == pytest.approx(fmi(truth, pred), abs=1e-15)
            assert ari(pred, truth) == pytest.approx(ari(truth, pred), abs=1e-15)
            relabeled = [{0: 9, 1: 5, 2: 7, 3: 1}[v] for v in pred]
            assert fmi(relabeled, truth) == pytest.approx(fmi(pred, truth), abs=1e-15)
            assert ari(relabeled, truth) == pytest.approx(ari(pred, truth), abs=1e-15)

    def test_ranges(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            n = int(rng.integers(2, 30))
            pred = rng.integers(0, 4, size=n).tolist()
            truth = rng.integers(0, 4, size=n).tolist()
            assert 0.0 <= fmi(pred, truth) <= 1.0
            assert -1.0 <= ari(pred, truth) <= 1.0


class TestPairAccuracy:
    def test_perfect_separation(self):
        assert pair_accuracy([0.9, 0.8, 0.1], [True, True, False], 0.5) == 1.0

    def test_threshold_is_inclusive(self):
        probs = [0.5, 0.5, 0.5, 0.5]
        truth = [True, True, False, False]
        assert pair_accuracy(probs, truth, 0.5) == 0.5

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            pair_accuracy([0.5], [True, False], 0.5)
