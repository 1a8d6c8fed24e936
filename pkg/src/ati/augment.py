"""Training-time trajectory augmentation: tail dropout and track subsampling.

Randomness comes from counter-based Philox generators seeded through
numpy's SeedSequence, so every draw is reproducible from (seed, track id)
alone and independent of iteration order.  ``draw_dropout_frame`` exposes
the raw Bernoulli branch and dropout-frame draw so statistical tests can
observe them directly.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

import numpy as np

from ati.core import TrackPoint, Trajectory, TrajectorySet


@dataclass(frozen=True)
class AugmentConfig:
    dropout_prob: float = 0.2
    min_tracks: int = 1
    max_tracks: int = 20
    seed: int = 0
    # One shared dropout frame per clip instead of one draw per track.
    per_clip_dropout: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.dropout_prob <= 1.0:
            raise ValueError("dropout_prob must lie in [0, 1]")
        if not 1 <= self.min_tracks <= self.max_tracks:
            raise ValueError("need 1 <= min_tracks <= max_tracks")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def clip_rng(seed: int) -> np.random.Generator:
    """Clip-level stream used for set-wide draws."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def track_rng(seed: int, track_id: str) -> np.random.Generator:
    """Per-track substream derived from (seed, track id).

    The id is folded in via SHA-256 so streams do not depend on the
    track's position in the set.
    """
    digest = hashlib.sha256(track_id.encode("utf-8")).digest()
    words = [
        int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)
    ]
    ss = np.random.SeedSequence([seed, *words])
    return np.random.Generator(np.random.Philox(ss))


def draw_dropout_frame(
    frame_count: int, prob: float, rng: np.random.Generator
) -> int | None:
    """Draw the tail-dropout decision for one trajectory.

    Returns None when the Bernoulli branch does not fire; otherwise the
    dropout frame t_d drawn uniformly from {0, ..., frame_count}.
    """
    if rng.random() >= prob:
        return None
    return int(rng.integers(0, frame_count + 1))


def truncate_after(traj: Trajectory, dropout_frame: int) -> Trajectory:
    """Mark every frame strictly after ``dropout_frame`` invisible.

    Positions are retained; frames up to and including the dropout frame
    are untouched, so visibility never resurrects and ``dropout_frame >=
    len(traj) - 1`` is a no-op.
    """
    if dropout_frame >= len(traj.points) - 1:
        return traj
    points = list(traj.points[: dropout_frame + 1])
    for tp in traj.points[dropout_frame + 1 :]:
        points.append(TrackPoint(tp.pos, False) if tp.visible else tp)
    return replace(traj, points=tuple(points))


def tail_dropout(
    traj: Trajectory, config: AugmentConfig, rng: np.random.Generator
) -> Trajectory:
    """Apply tail dropout to one trajectory using the given stream."""
    t_d = draw_dropout_frame(len(traj.points), config.dropout_prob, rng)
    if t_d is None:
        return traj
    return truncate_after(traj, t_d)


def tail_dropout_set(tset: TrajectorySet, config: AugmentConfig) -> TrajectorySet:
    """Apply tail dropout across a set.

    Per-track mode draws independently from each track's substream, so the
    result is invariant to track order.  Per-clip mode makes a single draw
    shared by every track.
    """
    if config.per_clip_dropout:
        t_d = draw_dropout_frame(
            tset.frame_count, config.dropout_prob, clip_rng(config.seed)
        )
        if t_d is None:
            return tset
        return tset.with_tracks(
            truncate_after(track, t_d) for track in tset.tracks
        )
    return tset.with_tracks(
        tail_dropout(track, config, track_rng(config.seed, track.id))
        for track in tset.tracks
    )


def subsample_tracks(
    tset: TrajectorySet,
    config: AugmentConfig,
    rng: np.random.Generator | None = None,
) -> TrajectorySet:
    """Keep k tracks, k uniform on {min_tracks, ..., min(max_tracks, n)}.

    Selection is uniform without replacement; surviving tracks keep their
    original order.
    """
    n = len(tset.tracks)
    if n == 0:
        raise ValueError("cannot subsample an empty track list")
    if rng is None:
        rng = clip_rng(config.seed)
    hi = min(config.max_tracks, n)
    if config.min_tracks > hi:
        raise ValueError(
            f"min_tracks {config.min_tracks} exceeds available tracks {hi}"
        )
    k = int(rng.integers(config.min_tracks, hi + 1))
    chosen = sorted(rng.choice(n, size=k, replace=False).tolist())
    return tset.with_tracks(tset.tracks[i] for i in chosen)
