import numpy as np
import pytest

from radarodo import (
    ArtifactModel,
    Pose2,
    SensorMeta,
    TrajectorySpec,
    compose,
    make_trajectory,
    random_world,
)


def composite_trajectory(speed=3.0, yaw_rate=0.2, dt=0.25, straight_steps=10, arc_steps=10):
    """Straight leg followed by an arc, stitched into one trajectory."""
    leg_a = make_trajectory("straight", straight_steps, speed, 0.0, dt, seed=0)
    leg_b = make_trajectory("arc", arc_steps, speed, yaw_rate, dt, seed=0)
    last = leg_a.poses[-1]
    poses = list(leg_a.poses) + [compose(last, p) for p in leg_b.poses[1:]]
    t0 = leg_a.timestamps[-1]
    stamps = list(leg_a.timestamps) + [t0 + t for t in leg_b.timestamps[1:]]
    return TrajectorySpec(poses=tuple(poses), timestamps=tuple(stamps))


@pytest.fixture
def bench_meta():
    return SensorMeta(num_azimuths=256, num_range_bins=120, range_resolution=0.5, scan_period=0.25)


def close_world(seed):
    # landmarks kept close enough that arcs subtend useful tangential extent
    return random_world(35, 28.0, seed=seed, min_range=6.0, min_separation=3.0)


NOISY_ARTIFACTS = ArtifactModel(
    speckle_scale=0.3,
    background_noise=0.05,
    false_positive_rate=7.0,
    dropout_prob=0.2,
)


def random_cloud(rng, n, spread=30.0):
    return rng.uniform(-spread, spread, size=(n, 2))


def random_pose(rng, t_scale=5.0):
    return Pose2(
        rng.uniform(-t_scale, t_scale),
        rng.uniform(-t_scale, t_scale),
        rng.uniform(-np.pi, np.pi),
    )
