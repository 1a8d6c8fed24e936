"""Shared domain types, validation, and coordinate conventions.

Coordinates are image pixels with the origin at the top-left corner, x
rightward and y downward.  Latent coordinates are image coordinates divided
by the spatial stride; latent cell centers sit at integer latent positions.
Out-of-frame positions are never clamped here: producers express "out of
frame" through the visibility flag.

All types are immutable value objects.  Construction is permissive for
trajectory data; ``validate`` reports invariant violations as data instead
of raising, so malformed sets can be inspected and round-tripped.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Iterable, Literal

import numpy as np

TRAJECTORY_JSON_VERSION = 1


class SchemaError(ValueError):
    """A trajectory document does not conform to the JSON schema."""


@dataclass(frozen=True)
class Point2:
    """A 2D position in image pixels (x rightward, y downward)."""

    x: float
    y: float

    def __add__(self, other: "Point2") -> "Point2":
        return Point2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Point2") -> "Point2":
        return Point2(self.x - other.x, self.y - other.y)

    def scaled(self, factor: float) -> "Point2":
        return Point2(self.x * factor, self.y * factor)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)


@dataclass(frozen=True)
class TrackPoint:
    """Per-frame sample of a track: optional position plus visibility.

    ``visible=False`` with a position present is allowed (occluded but
    located); ``visible=True`` requires a position.
    """

    pos: Point2 | None
    visible: bool

    @staticmethod
    def at(x: float, y: float, visible: bool = True) -> "TrackPoint":
        return TrackPoint(Point2(x, y), visible)

    @staticmethod
    def hidden() -> "TrackPoint":
        return TrackPoint(None, False)


@dataclass(frozen=True)
class Trajectory:
    """One tracked point over all frames of a clip."""

    id: str
    points: tuple[TrackPoint, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))

    def __len__(self) -> int:
        return len(self.points)

    def first_visible(self) -> tuple[int, Point2] | None:
        """Frame index and position of the earliest visible sample."""
        for t, tp in enumerate(self.points):
            if tp.visible and tp.pos is not None:
                return t, tp.pos
        return None


@dataclass(frozen=True)
class TrajectorySet:
    """A collection of trajectories over an image of known size."""

    width: int
    height: int
    frame_count: int
    tracks: tuple[Trajectory, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tracks", tuple(self.tracks))

    def track_by_id(self, track_id: str) -> Trajectory:
        for track in self.tracks:
            if track.id == track_id:
                return track
        raise KeyError(track_id)

    def track_ids(self) -> list[str]:
        return [track.id for track in self.tracks]

    def with_tracks(self, tracks: Iterable[Trajectory]) -> "TrajectorySet":
        return replace(self, tracks=tuple(tracks))

    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)


@dataclass(frozen=True, eq=False)
class LatentGrid:
    """A single-image latent feature map of shape (height, width, channels).

    ``values`` is a read-only float64 array; any array-like whose element
    count equals height*width*channels is accepted and reshaped.
    """

    height: int
    width: int
    channels: int
    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        expected = self.height * self.width * self.channels
        if arr.size != expected:
            raise ValueError(
                f"latent grid expects {expected} values, got {arr.size}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("latent grid values must be finite")
        arr = arr.reshape(self.height, self.width, self.channels).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)


SigmaMode = Literal["paper_normalized", "grid_derived", "explicit"]
Composition = Literal["normalized_average", "max_weight"]
Blend = Literal["convex", "replace"]


@dataclass(frozen=True)
class InjectorConfig:
    """Knobs of the Gaussian injector.

    ``sigma`` is interpreted per ``sigma_mode``: ignored for grid_derived,
    fixed for paper_normalized (diagonal-normalized distances), and taken
    verbatim in squared-latent-unit scale for explicit.
    """

    sigma_mode: SigmaMode = "grid_derived"
    sigma: float = 1.0
    spatial_stride: int = 8
    temporal_stride: int = 1
    composition: Composition = "normalized_average"
    blend: Blend = "convex"

    def __post_init__(self) -> None:
        if self.sigma_mode not in ("paper_normalized", "grid_derived", "explicit"):
            raise ValueError(f"unknown sigma_mode {self.sigma_mode!r}")
        if self.composition not in ("normalized_average", "max_weight"):
            raise ValueError(f"unknown composition {self.composition!r}")
        if self.blend not in ("convex", "replace"):
            raise ValueError(f"unknown blend {self.blend!r}")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not (isinstance(self.spatial_stride, int) and self.spatial_stride >= 1):
            raise ValueError("spatial_stride must be a positive integer")
        if not (isinstance(self.temporal_stride, int) and self.temporal_stride >= 1):
            raise ValueError("temporal_stride must be a positive integer")


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by ``validate``."""

    message: str
    track_id: str | None = None
    frame: int | None = None


def validate(tset: TrajectorySet) -> list[Violation]:
    """Check every TrajectorySet invariant; return all violations found.

    Violations are data, not failures: an empty list means the set is valid.
    Repeated calls on the same set return identical lists.
    """
    violations: list[Violation] = []
    if tset.width < 1:
        violations.append(Violation(f"width must be >= 1, got {tset.width}"))
    if tset.height < 1:
        violations.append(Violation(f"height must be >= 1, got {tset.height}"))
    if tset.frame_count < 1:
        violations.append(
            Violation(f"frame_count must be >= 1, got {tset.frame_count}")
        )

    seen: set[str] = set()
    for track in tset.tracks:
        if track.id in seen:
            violations.append(
                Violation("duplicate track id", track_id=track.id)
            )
        seen.add(track.id)

        if len(track.points) != tset.frame_count:
            violations.append(
                Violation(
                    f"track has {len(track.points)} points, expected "
                    f"{tset.frame_count}",
                    track_id=track.id,
                )
            )
        if not any(tp.visible for tp in track.points):
            violations.append(
                Violation("track has no visible frame", track_id=track.id)
            )
        for t, tp in enumerate(track.points):
            if tp.visible and tp.pos is None:
                violations.append(
                    Violation(
                        "visible point without position",
                        track_id=track.id,
                        frame=t,
                    )
                )
            if tp.pos is not None and not tp.pos.is_finite():
                violations.append(
                    Violation(
                        "non-finite position", track_id=track.id, frame=t
                    )
                )
    return violations


def to_latent_coords(p: Point2, config: InjectorConfig) -> Point2:
    """Map an image-pixel position to continuous latent coordinates."""
    s = float(config.spatial_stride)
    return Point2(p.x / s, p.y / s)


def frame_to_latent_frame(t: int, config: InjectorConfig) -> int:
    """Map a video frame index to the latent frame that contains it."""
    if t < 0:
        raise ValueError("frame index must be non-negative")
    return t // config.temporal_stride


def latent_frame_count(frame_count: int, config: InjectorConfig) -> int:
    """Latent temporal length: ceil(frame_count / temporal_stride)."""
    r = config.temporal_stride
    return -(-frame_count // r)


# --- trajectory JSON (version 1) ---------------------------------------------


def _reject_constant(token: str) -> float:
    raise SchemaError(f"non-finite number {token!r} not allowed")


def trajectory_set_to_json_dict(tset: TrajectorySet) -> dict:
    tracks = []
    for track in tset.tracks:
        points: list[dict | None] = []
        for tp in track.points:
            if tp.pos is None:
                if tp.visible:
                    raise ValueError(
                        f"track {track.id!r}: visible point without position "
                        "cannot be serialized"
                    )
                points.append(None)
            else:
                # coordinates are floats in the schema; coerce so documents
                # stay canonical even when positions were built from ints
                points.append(
                    {
                        "x": float(tp.pos.x),
                        "y": float(tp.pos.y),
                        "visible": tp.visible,
                    }
                )
        tracks.append({"id": track.id, "points": points})
    return {
        "version": TRAJECTORY_JSON_VERSION,
        "width": tset.width,
        "height": tset.height,
        "frame_count": tset.frame_count,
        "tracks": tracks,
    }


def trajectory_set_from_json_dict(doc: object) -> TrajectorySet:
    if not isinstance(doc, dict):
        raise SchemaError("trajectory document must be a JSON object")
    version = doc.get("version")
    if version != TRAJECTORY_JSON_VERSION:
        raise SchemaError(f"unsupported trajectory version {version!r}")
    dims = {}
    for key in ("width", "height", "frame_count"):
        value = doc.get(key)
        if not isinstance(value, int) or isinstance(value, bool):
            raise SchemaError(f"{key!r} must be an integer")
        dims[key] = value
    raw_tracks = doc.get("tracks")
    if not isinstance(raw_tracks, list):
        raise SchemaError("'tracks' must be a list")

    tracks = []
    for raw in raw_tracks:
        if not isinstance(raw, dict) or not isinstance(raw.get("id"), str):
            raise SchemaError("each track needs a string 'id'")
        raw_points = raw.get("points")
        if not isinstance(raw_points, list):
            raise SchemaError(f"track {raw.get('id')!r}: 'points' must be a list")
        if len(raw_points) != dims["frame_count"]:
            raise SchemaError(
                f"track {raw['id']!r}: {len(raw_points)} points, expected "
                f"{dims['frame_count']}"
            )
        points = []
        for t, entry in enumerate(raw_points):
            if entry is None:
                points.append(TrackPoint.hidden())
                continue
            if not isinstance(entry, dict):
                raise SchemaError(
                    f"track {raw['id']!r} frame {t}: entry must be null or object"
                )
            try:
                x = float(entry["x"])
                y = float(entry["y"])
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(
                    f"track {raw['id']!r} frame {t}: bad coordinates"
                ) from exc
            visible = entry.get("visible")
            if not isinstance(visible, bool):
                raise SchemaError(
                    f"track {raw['id']!r} frame {t}: 'visible' must be boolean"
                )
            points.append(TrackPoint(Point2(x, y), visible))
        tracks.append(Trajectory(id=raw["id"], points=tuple(points)))
    return TrajectorySet(tracks=tuple(tracks), **dims)


def dumps_trajectory_set(tset: TrajectorySet) -> str:
    """Canonical serialization: fixed key order, two-space indent."""
    doc = trajectory_set_to_json_dict(tset)
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def loads_trajectory_set(text: str | bytes) -> TrajectorySet:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return trajectory_set_from_json_dict(doc)


def save_trajectory_set(tset: TrajectorySet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_trajectory_set(tset))


def load_trajectory_set(path) -> TrajectorySet:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_trajectory_set(fh.read())
