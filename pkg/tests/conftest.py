import numpy as np
import pytest

from ati.core import (
    InjectorConfig,
    LatentGrid,
    Point2,
    TrackPoint,
    Trajectory,
    TrajectorySet,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def small_set():
    """Two valid tracks over 5 frames on a 64x48 image."""
    a = Trajectory(
        id="a",
        points=tuple(TrackPoint.at(10.0 + t, 20.0, True) for t in range(5)),
    )
    b = Trajectory(
        id="b",
        points=(
            TrackPoint.at(30.0, 30.0, True),
            TrackPoint.at(31.0, 30.5, True),
            TrackPoint(Point2(32.0, 31.0), False),
            TrackPoint.hidden(),
            TrackPoint.at(34.0, 32.0, True),
        ),
    )
    return TrajectorySet(width=64, height=48, frame_count=5, tracks=(a, b))


def random_trajectory_set(
    rng: np.random.Generator,
    width: int = 64,
    height: int = 48,
    frame_count: int = 6,
    n_tracks: int = 3,
) -> TrajectorySet:
    """A valid random set: frame 0 always visible, later frames mixed."""
    tracks = []
    for k in range(n_tracks):
        points = []
        for t in range(frame_count):
            x = float(rng.uniform(0, width))
            y = float(rng.uniform(0, height))
            visible = bool(rng.random() < 0.8) or t == 0
            points.append(TrackPoint(Point2(x, y), visible))
        tracks.append(Trajectory(id=f"t{k:03d}", points=tuple(points)))
    return TrajectorySet(
        width=width, height=height, frame_count=frame_count, tracks=tuple(tracks)
    )


def random_grid(
    rng: np.random.Generator, height: int = 6, width: int = 8, channels: int = 4
) -> LatentGrid:
    return LatentGrid(
        height=height,
        width=width,
        channels=channels,
        values=rng.uniform(-1.0, 1.0, size=(height, width, channels)),
    )


@pytest.fixture
def default_config():
    return InjectorConfig()
