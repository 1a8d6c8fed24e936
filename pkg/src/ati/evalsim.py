"""Deterministic stand-ins that close the pipeline without any model.

``pseudo_encode`` turns an RGB image into a latent grid of per-patch
statistics, ``render_dots`` draws trajectories as anti-aliased discs, and
``track_dots`` recovers them by color-signature centroid search, so the
metrics can be exercised end to end with known ground truth.
"""

from __future__ import annotations

import colorsys
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from ati.core import (
    LatentGrid,
    Point2,
    TrackPoint,
    Trajectory,
    TrajectorySet,
)

# Rec. 601 luma weights, used for all derived patch statistics.
_LUMA = np.array([0.299, 0.587, 0.114])

# Subpixel sampling density for coverage anti-aliasing.
_AA = 4


@dataclass(frozen=True, eq=False)
class Image:
    """RGB image with float values in [0, 1], shape (height, width, 3)."""

    width: int
    height: int
    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.shape != (self.height, self.width, 3):
            raise ValueError(
                f"expected shape ({self.height}, {self.width}, 3), "
                f"got {arr.shape}"
            )
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError("image values must lie in [0, 1]")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @staticmethod
    def filled(width: int, height: int, value: float = 0.0) -> "Image":
        return Image(
            width=width,
            height=height,
            values=np.full((height, width, 3), value, dtype=np.float64),
        )


@dataclass(frozen=True, eq=False)
class SyntheticVideo:
    frames: tuple[Image, ...]
    background: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "frames", tuple(self.frames))
        if not self.frames:
            raise ValueError("video needs at least one frame")
        w, h = self.frames[0].width, self.frames[0].height
        for frame in self.frames:
            if (frame.width, frame.height) != (w, h):
                raise ValueError("all frames must share dimensions")

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height


def pseudo_encode(img: Image, stride: int = 8, channels: int = 8) -> LatentGrid:
    """Training-free stand-in encoder: per-patch statistics as channels.

    Channels 0-2 are the patch mean RGB; the next channels, as far as
    ``channels`` allows, are patch luma standard deviation, horizontal
    mean luma gradient, and vertical mean luma gradient; any remainder is
    zero.  Images whose sides are not multiples of the stride are padded
    by edge replication.
    """
    if channels < 3:
        raise ValueError("need at least 3 channels for the RGB means")
    if img.width < 1 or img.height < 1:
        raise ValueError("cannot encode an empty image")
    s = stride
    pad_h = (-img.height) % s
    pad_w = (-img.width) % s
    rgb = np.pad(img.values, ((0, pad_h), (0, pad_w), (0, 0)), mode="edge")
    gh = rgb.shape[0] // s
    gw = rgb.shape[1] // s
    patches = rgb.reshape(gh, s, gw, s, 3)

    out = np.zeros((gh, gw, channels), dtype=np.float64)
    out[..., :3] = patches.mean(axis=(1, 3))

    luma = patches @ _LUMA  # (gh, s, gw, s)
    stats = [luma.std(axis=(1, 3))]
    if s > 1:
        col_means = luma.mean(axis=1)  # (gh, gw, s)
        row_means = luma.mean(axis=3)  # (gh, s, gw)
        stats.append((col_means[..., -1] - col_means[..., 0]) / (s - 1))
        stats.append((row_means[:, -1] - row_means[:, 0]) / (s - 1))
    else:
        stats.extend([np.zeros((gh, gw)), np.zeros((gh, gw))])
    for i, stat in enumerate(stats[: channels - 3]):
        out[..., 3 + i] = stat

    return LatentGrid(height=gh, width=gw, channels=channels, values=out)


def dot_palette(n: int) -> list[tuple[float, float, float]]:
    """n fully saturated colors with maximal pairwise hue separation."""
    return [colorsys.hsv_to_rgb(i / max(n, 1), 1.0, 1.0) for i in range(n)]


def _disc_coverage(
    height: int, width: int, center: Point2, radius: float
) -> tuple[slice, slice, np.ndarray] | None:
    """Coverage of an anti-aliased disc over its clipped bounding box."""
    r0 = max(int(math.floor(center.y - radius - 1)), 0)
    r1 = min(int(math.ceil(center.y + radius + 1)), height)
    c0 = max(int(math.floor(center.x - radius - 1)), 0)
    c1 = min(int(math.ceil(center.x + radius + 1)), width)
    if r0 >= r1 or c0 >= c1:
        return None
    sub = (np.arange(_AA) + 0.5) / _AA
    ys = (np.arange(r0, r1)[:, None] + sub[None, :]).reshape(-1)
    xs = (np.arange(c0, c1)[:, None] + sub[None, :]).reshape(-1)
    d2 = (ys[:, None] - center.y) ** 2 + (xs[None, :] - center.x) ** 2
    inside = d2 <= radius * radius
    coverage = (
        inside.reshape(r1 - r0, _AA, c1 - c0, _AA)
        .mean(axis=(1, 3))
        .astype(np.float64)
    )
    return slice(r0, r1), slice(c0, c1), coverage


def render_dots(
    tset: TrajectorySet,
    dims: tuple[int, int] | None = None,
    radius: float = 3.0,
    colors: list[tuple[float, float, float]] | None = None,
    background: float = 0.0,
) -> SyntheticVideo:
    """Render every visible point as an anti-aliased colored disc.

    ``dims`` is an optional (width, height) canvas override; positions stay
    in the set's pixel space either way.  Tracks are colored from
    ``dot_palette`` by default; invisible points are simply not drawn.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    width, height = dims if dims is not None else (tset.width, tset.height)
    if colors is None:
        colors = dot_palette(len(tset.tracks))
    if len(colors) < len(tset.tracks):
        raise ValueError("need one color per track")
    frames = []
    for t in range(tset.frame_count):
        canvas = np.full((height, width, 3), background, dtype=np.float64)
        for track, color in zip(tset.tracks, colors):
            tp = track.points[t]
            if not tp.visible or tp.pos is None:
                continue
            patch = _disc_coverage(height, width, tp.pos, radius)
            if patch is None:
                continue
            rows, cols, cov = patch
            region = canvas[rows, cols]
            canvas[rows, cols] = region + cov[..., None] * (
                np.asarray(color) - region
            )
        frames.append(
            Image(width=width, height=height, values=np.clip(canvas, 0.0, 1.0))
        )
    return SyntheticVideo(frames=tuple(frames), background=background)


def _signature_weights(
    region: np.ndarray, signature: np.ndarray, bg: float
) -> np.ndarray:
    """Per-pixel coverage estimate of the signature color over background.

    Projects each pixel onto the background-to-signature direction; pixels
    with a large off-axis residual (other colors) are rejected.
    """
    direction = signature - bg
    norm_sq = float(direction @ direction)
    if norm_sq == 0.0:
        return np.zeros(region.shape[:2])
    v = region - bg
    alpha = np.clip((v @ direction) / norm_sq, 0.0, 1.0)
    residual = v - alpha[..., None] * direction
    ok = (alpha > 0.2) & (np.linalg.norm(residual, axis=-1) < 0.2)
    return np.where(ok, alpha, 0.0)


def track_dots(
    video: SyntheticVideo,
    starts: list[Point2],
    radius: float = 3.0,
    ids: list[str] | None = None,
    min_mass: float = 0.5,
) -> TrajectorySet:
    """Analytic tracker: follow each start point's color signature.

    Each frame is searched in a window of 3 * radius around the previous
    position for the intensity-weighted centroid of pixels matching the
    point's first-frame color.  Frames with insufficient matching mass are
    marked invisible.
    """
    if ids is None:
        ids = [f"t{i:03d}" for i in range(len(starts))]
    if len(ids) != len(starts):
        raise ValueError("need one id per start point")
    h, w = video.height, video.width
    for p in starts:
        if not (0 <= p.x < w and 0 <= p.y < h):
            raise ValueError(f"start point ({p.x}, {p.y}) outside frame bounds")

    first = video.frames[0].values
    window = 3.0 * radius
    tracks = []
    for track_id, start in zip(ids, starts):
        row = min(int(start.y), h - 1)
        col = min(int(start.x), w - 1)
        signature = first[row, col].copy()
        prev = start
        points = []
        for frame in video.frames:
            r0 = max(int(math.floor(prev.y - window)), 0)
            r1 = min(int(math.ceil(prev.y + window)) + 1, h)
            c0 = max(int(math.floor(prev.x - window)), 0)
            c1 = min(int(math.ceil(prev.x + window)) + 1, w)
            weights = _signature_weights(
                frame.values[r0:r1, c0:c1], signature, video.background
            )
            mass = weights.sum()
            if mass < min_mass:
                points.append(TrackPoint.hidden())
                continue
            ys = np.arange(r0, r1, dtype=np.float64) + 0.5
            xs = np.arange(c0, c1, dtype=np.float64) + 0.5
            cy = float((weights.sum(axis=1) @ ys) / mass)
            cx = float((weights.sum(axis=0) @ xs) / mass)
            prev = Point2(cx, cy)
            points.append(TrackPoint(prev, True))
        tracks.append(Trajectory(id=track_id, points=tuple(points)))
    return TrajectorySet(
        width=w, height=h, frame_count=len(video.frames), tracks=tuple(tracks)
    )


# --- PNG serialization --------------------------------------------------------


def save_image(img: Image, path) -> None:
    data = np.round(img.values * 255.0).astype(np.uint8)
    PILImage.fromarray(data, mode="RGB").save(path, format="PNG")


def load_image(path) -> Image:
    with PILImage.open(path) as pil:
        rgb = pil.convert("RGB")
        arr = np.asarray(rgb, dtype=np.float64) / 255.0
    return Image(width=arr.shape[1], height=arr.shape[0], values=arr)


def image_to_png_bytes(img: Image) -> bytes:
    import io

    data = np.round(img.values * 255.0).astype(np.uint8)
    buf = io.BytesIO()
    PILImage.fromarray(data, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def save_video(video: SyntheticVideo, directory) -> None:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(video.frames):
        save_image(frame, out / f"frame_{i:05d}.png")


def load_video(directory, background: float = 0.0) -> SyntheticVideo:
    out = Path(directory)
    paths = sorted(
        p for p in out.iterdir() if re.fullmatch(r"frame_\d{5}\.png", p.name)
    )
    if not paths:
        raise ValueError(f"no frame PNGs found in {out}")
    return SyntheticVideo(
        frames=tuple(load_image(p) for p in paths), background=background
    )
