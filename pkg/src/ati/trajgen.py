"""Programmatic trajectory authoring.

Seeded point grids, static/linear object paths, constant-speed radial
zooms, dolly-zoom presets, and per-frame 2D similarity camera paths.
Every generator yields sets that pass ``core.validate`` cleanly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ati.core import Point2, TrackPoint, Trajectory, TrajectorySet


@dataclass(frozen=True)
class CameraFrame:
    """One frame of a similarity camera path: scale/rotate about the
    path's pivot, then translate."""

    scale: float = 1.0
    rotation: float = 0.0
    translation: Point2 = Point2(0.0, 0.0)

    def is_identity(self) -> bool:
        return (
            self.scale == 1.0
            and self.rotation == 0.0
            and self.translation.x == 0.0
            and self.translation.y == 0.0
        )


@dataclass(frozen=True)
class CameraPath:
    frames: tuple[CameraFrame, ...]
    pivot: Point2 = Point2(0.0, 0.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "frames", tuple(self.frames))
        for frame in self.frames:
            if frame.scale <= 0:
                raise ValueError("camera scale must be positive")

    def __len__(self) -> int:
        return len(self.frames)

    @staticmethod
    def identity(frame_count: int, pivot: Point2 = Point2(0.0, 0.0)) -> "CameraPath":
        return CameraPath(tuple(CameraFrame() for _ in range(frame_count)), pivot)

    @staticmethod
    def pan(vx: float, vy: float, frame_count: int) -> "CameraPath":
        """Uniform translation: frame t shifted by (vx*t, vy*t)."""
        return CameraPath(
            tuple(
                CameraFrame(translation=Point2(vx * t, vy * t))
                for t in range(frame_count)
            )
        )

    @staticmethod
    def scaling(rate: float, frame_count: int, pivot: Point2) -> "CameraPath":
        """Multiplicative zoom about a pivot: scale_t = 1 + rate*t."""
        return CameraPath(
            tuple(CameraFrame(scale=1.0 + rate * t) for t in range(frame_count)),
            pivot,
        )

    def then(self, second: "CameraPath") -> "CameraPath":
        """Per-frame composition: applying the result equals applying
        self first, then ``second``.  Expressed about ``second``'s pivot."""
        if len(self) != len(second):
            raise ValueError("camera paths must have equal length")
        frames = []
        for a, b in zip(self.frames, second.frames):
            scale = a.scale * b.scale
            rotation = a.rotation + b.rotation
            # affine forms: q = M_a p + c_a, out = M_b q + c_b
            ca = _affine_offset(a, self.pivot)
            cb = _affine_offset(b, second.pivot)
            cos_b = math.cos(b.rotation) * b.scale
            sin_b = math.sin(b.rotation) * b.scale
            cx = cos_b * ca[0] - sin_b * ca[1] + cb[0]
            cy = sin_b * ca[0] + cos_b * ca[1] + cb[1]
            # re-derive the translation for the combined M about pivot_b
            cos_m = math.cos(rotation) * scale
            sin_m = math.sin(rotation) * scale
            tx = cx - second.pivot.x + cos_m * second.pivot.x - sin_m * second.pivot.y
            ty = cy - second.pivot.y + sin_m * second.pivot.x + cos_m * second.pivot.y
            frames.append(
                CameraFrame(scale=scale, rotation=rotation, translation=Point2(tx, ty))
            )
        return CameraPath(tuple(frames), second.pivot)


def _affine_offset(frame: CameraFrame, pivot: Point2) -> tuple[float, float]:
    cos_m = math.cos(frame.rotation) * frame.scale
    sin_m = math.sin(frame.rotation) * frame.scale
    return (
        pivot.x - cos_m * pivot.x + sin_m * pivot.y + frame.translation.x,
        pivot.y - sin_m * pivot.x - cos_m * pivot.y + frame.translation.y,
    )


def _transform_point(p: Point2, frame: CameraFrame, pivot: Point2) -> Point2:
    if frame.is_identity():
        return p
    cos_t = math.cos(frame.rotation)
    sin_t = math.sin(frame.rotation)
    dx = p.x - pivot.x
    dy = p.y - pivot.y
    return Point2(
        pivot.x + frame.scale * (cos_t * dx - sin_t * dy) + frame.translation.x,
        pivot.y + frame.scale * (sin_t * dx + cos_t * dy) + frame.translation.y,
    )


def seed_grid(width: int, height: int, n: int) -> list[Point2]:
    """n points at the centers of an aspect-matched lattice.

    Rows r = round(sqrt(n * H / W)) clamped to >= 1, columns c = ceil(n/r);
    the row-major list of r*c cell centers is truncated to n.  Deterministic,
    with approximately equal pairwise nearest-neighbor distances.
    """
    if width < 1 or height < 1:
        raise ValueError("image dimensions must be positive")
    if n < 1:
        raise ValueError("need at least one point")
    rows = min(max(1, round(math.sqrt(n * height / width))), n)
    cols = -(-n // rows)
    points = []
    for i in range(rows):
        for j in range(cols):
            points.append(
                Point2((j + 0.5) * width / cols, (i + 0.5) * height / rows)
            )
    return points[:n]


def static_track(p: Point2, frame_count: int, track_id: str = "t000") -> Trajectory:
    """A stationary point, visible in every frame."""
    if frame_count < 1:
        raise ValueError("frame_count must be >= 1")
    return Trajectory(
        id=track_id,
        points=tuple(TrackPoint(p, True) for _ in range(frame_count)),
    )


def linear_track(
    start: Point2, end: Point2, frame_count: int, track_id: str = "t000"
) -> Trajectory:
    """Constant-velocity motion from start to end, inclusive."""
    if frame_count < 2:
        raise ValueError("linear_track needs at least 2 frames")
    delta = end - start
    points = tuple(
        TrackPoint(start + delta.scaled(t / (frame_count - 1)), True)
        for t in range(frame_count)
    )
    return Trajectory(id=track_id, points=points)


def radial_zoom(
    points: list[Point2],
    center: Point2,
    speed: float,
    frame_count: int,
    id_prefix: str = "t",
) -> list[Trajectory]:
    """Constant-speed radial displacement away from (or toward) a center.

    Each point moves ``speed`` pixels per frame along its fixed unit
    direction from the center; a point exactly at the center stays put.
    Negative speed zooms out.
    """
    if frame_count < 1:
        raise ValueError("frame_count must be >= 1")
    tracks = []
    for i, p in enumerate(points):
        offset = p - center
        radius = math.hypot(offset.x, offset.y)
        if radius == 0.0:
            unit = Point2(0.0, 0.0)
        else:
            unit = Point2(offset.x / radius, offset.y / radius)
        track_points = tuple(
            TrackPoint(p + unit.scaled(speed * t), True)
            for t in range(frame_count)
        )
        tracks.append(Trajectory(id=f"{id_prefix}{i:03d}", points=track_points))
    return tracks


def apply_camera(tset: TrajectorySet, path: CameraPath) -> TrajectorySet:
    """Apply a per-frame similarity transform to every located point.

    Visibility flags are untouched; occluded-but-located points move with
    the camera as well so retained positions stay coherent.
    """
    if len(path) != tset.frame_count:
        raise ValueError(
            f"camera path length {len(path)} != frame_count {tset.frame_count}"
        )
    tracks = []
    for track in tset.tracks:
        points = []
        for tp, cam in zip(track.points, path.frames):
            if tp.pos is None:
                points.append(tp)
            else:
                points.append(
                    TrackPoint(_transform_point(tp.pos, cam, path.pivot), tp.visible)
                )
        tracks.append(Trajectory(id=track.id, points=tuple(points)))
    return tset.with_tracks(tracks)


def dolly_zoom(
    subject: list[Point2],
    background: list[Point2],
    center: Point2,
    speed: float,
    frame_count: int,
    width: int,
    height: int,
) -> TrajectorySet:
    """Static subject points plus a radially zooming background."""
    tracks = [
        static_track(p, frame_count, track_id=f"t{i:03d}")
        for i, p in enumerate(subject)
    ]
    tracks.extend(
        Trajectory(id=f"t{len(subject) + i:03d}", points=track.points)
        for i, track in enumerate(
            radial_zoom(background, center, speed, frame_count)
        )
    )
    return TrajectorySet(
        width=width, height=height, frame_count=frame_count, tracks=tuple(tracks)
    )
