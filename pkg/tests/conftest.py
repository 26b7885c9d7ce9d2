"""Shared fixtures: small synthetic coins sized for fast tests."""

import numpy as np
import pytest

from diematch.geom3d import compose, invert, voxel_downsample
from diematch.pipeline import Degradation, SyntheticDieSpec, generate_synthetic_die, strike_coin

SMALL_SPEC = dict(coin_radius=2.5, sample_spacing=0.09)


def small_die(seed):
    return generate_synthetic_die(SyntheticDieSpec(seed=seed, **SMALL_SPEC))


def light_wear():
    return Degradation(wear=0.02, crack_count=1, edge_jitter=0.05, crop_fraction=0.04)


@pytest.fixture(scope="session")
def coin_pair():
    """Two strikes of one die under benchmark poses, with their ground truth."""
    die = small_die(seed=101)
    source, pose_src = strike_coin(die, light_wear(), transform_seed=1)
    target, pose_tgt = strike_coin(die, light_wear(), transform_seed=2)
    relative_gt = compose(pose_tgt, invert(pose_src))
    return source, target, relative_gt


@pytest.fixture(scope="session")
def unrelated_pair():
    """Strikes of two different dies (no common pattern)."""
    a, _ = strike_coin(small_die(seed=102), light_wear(), transform_seed=3)
    b, _ = strike_coin(small_die(seed=103), light_wear(), transform_seed=4)
    return a, b


@pytest.fixture(scope="session")
def downsampled_coin(coin_pair):
    source, _, _ = coin_pair
    return voxel_downsample(source, 0.1)
