"""Gaussian motion injection into latent feature grids.

Each trajectory contributes the feature sampled at its first visible
position, spread over latent cells with per-frame Gaussian weights
``exp(-d^2 / (2 * sigma))`` (note: the denominator carries sigma, not
sigma squared).  Multi-track fields are composed into a condition tensor
of C feature channels plus one aggregate-weight channel.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from ati.core import (
    InjectorConfig,
    LatentGrid,
    Point2,
    TrackPoint,
    TrajectorySet,
    latent_frame_count,
    to_latent_coords,
    validate,
)

# Weights below this are truncated to exactly zero, keeping the
# zero-weight => zero-feature invariant crisp and tensors sparse-friendly.
WEIGHT_FLOOR = 1e-6

# Sigma for diagonal-normalized distances: chosen so the weight halves at
# the nearest diagonal neighbor once distances are divided by the diagonal.
DIAGONAL_NORMALIZED_SIGMA = 1.0 / 440.0

ATIC_MAGIC = b"ATIC"
ATIC_VERSION = 1


class DimensionMismatchError(ValueError):
    """Grid, set, or tensor dimensions are inconsistent."""


class AticFormatError(ValueError):
    """An ATIC payload is malformed (bad magic, truncation, bad values)."""


@dataclass(frozen=True)
class ResolvedSigma:
    """Effective sigma plus how distances must be scaled before use.

    ``value`` is sigma in the mode's native units.  ``latent_sigma`` is the
    equivalent sigma for raw latent-unit distances (identical to ``value``
    unless ``normalize_by_diagonal`` is set, in which case dividing
    distances by the grid diagonal is folded into the sigma instead).
    """

    value: float
    normalize_by_diagonal: bool
    latent_sigma: float


def resolve_sigma(
    config: InjectorConfig, grid_height: int, grid_width: int
) -> ResolvedSigma:
    """Turn the configured sigma mode into an effective sigma.

    grid_derived places the half-decay exactly at the nearest diagonal
    latent neighbor (distance sqrt(2)); explicit passes sigma through;
    paper_normalized keeps the fixed constant but flags that distances are
    measured in units of the image diagonal.
    """
    if grid_height < 1 or grid_width < 1:
        raise ValueError("grid dimensions must be >= 1")
    if config.sigma_mode == "grid_derived":
        d2_diag = 2.0  # squared distance to the nearest diagonal neighbor
        sigma = d2_diag / (2.0 * math.log(2.0))
        return ResolvedSigma(sigma, False, sigma)
    if config.sigma_mode == "explicit":
        if config.sigma <= 0:
            raise ValueError("explicit sigma must be positive")
        return ResolvedSigma(config.sigma, False, config.sigma)
    # paper_normalized: weight formula applies to diagonal-normalized
    # distances; equivalently scale sigma by the squared grid diagonal.
    diag_sq = float(grid_width) ** 2 + float(grid_height) ** 2
    sigma = DIAGONAL_NORMALIZED_SIGMA
    return ResolvedSigma(sigma, True, sigma * diag_sq)


def _latent_sigma(sigma: float | ResolvedSigma) -> float:
    if isinstance(sigma, ResolvedSigma):
        return sigma.latent_sigma
    return float(sigma)


def gaussian_weight(
    phi: Point2, cell: tuple[float, float], sigma: float | ResolvedSigma
) -> float:
    """Weight of a latent cell for a point at ``phi`` (latent units).

    ``cell`` is the (x, y) center of the cell; both in latent units.
    """
    s = _latent_sigma(sigma)
    if s <= 0:
        raise ValueError("sigma must be positive")
    dx = phi.x - cell[0]
    dy = phi.y - cell[1]
    return float(np.exp(-(dx * dx + dy * dy) / (2.0 * s)))


def sample_feature(grid: LatentGrid, p: Point2) -> np.ndarray:
    """Bilinearly sample a feature vector at continuous latent coords.

    Out-of-domain positions are clamped to the grid boundary (boundary
    extension); exact lattice points return the stored values exactly.
    """
    if grid.height < 1 or grid.width < 1:
        raise ValueError("cannot sample an empty grid")
    x = min(max(p.x, 0.0), float(grid.width - 1))
    y = min(max(p.y, 0.0), float(grid.height - 1))
    x0 = min(int(math.floor(x)), max(grid.width - 2, 0))
    y0 = min(int(math.floor(y)), max(grid.height - 2, 0))
    x1 = min(x0 + 1, grid.width - 1)
    y1 = min(y0 + 1, grid.height - 1)
    fx = x - x0
    fy = y - y0
    v = grid.values
    top = (1.0 - fx) * v[y0, x0] + fx * v[y0, x1]
    bottom = (1.0 - fx) * v[y1, x0] + fx * v[y1, x1]
    return (1.0 - fy) * top + fy * bottom


def frame_mask(
    track_point: TrackPoint,
    grid_height: int,
    grid_width: int,
    sigma: float | ResolvedSigma,
    config: InjectorConfig,
) -> np.ndarray:
    """Per-cell Gaussian weight plane for one track at one frame.

    Invisible or position-less points yield an all-zero plane.  Weights
    below WEIGHT_FLOOR are truncated to exactly zero.
    """
    plane = np.zeros((grid_height, grid_width), dtype=np.float64)
    if not track_point.visible or track_point.pos is None:
        return plane
    s = _latent_sigma(sigma)
    phi = to_latent_coords(track_point.pos, config)
    xs = np.arange(grid_width, dtype=np.float64)
    ys = np.arange(grid_height, dtype=np.float64)
    d2 = (xs[None, :] - phi.x) ** 2 + (ys[:, None] - phi.y) ** 2
    plane = np.exp(-d2 / (2.0 * s))
    plane[plane < WEIGHT_FLOOR] = 0.0
    return plane


@dataclass(frozen=True, eq=False)
class ConditionTensor:
    """Per-latent-frame condition: feature channels plus a weight channel.

    ``channels`` counts all stored channels (C features + 1 weight);
    ``values`` has shape (latent_frames, height, width, channels), float32.
    """

    latent_frames: int
    height: int
    width: int
    channels: int
    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float32)
        shape = (self.latent_frames, self.height, self.width, self.channels)
        if arr.size != math.prod(shape):
            raise ValueError(
                f"condition tensor expects {math.prod(shape)} values, "
                f"got {arr.size}"
            )
        arr = arr.reshape(shape).copy()
        if not np.all(np.isfinite(arr)):
            raise ValueError("condition tensor values must be finite")
        weight = arr[..., -1]
        if weight.size and (weight.min() < 0.0 or weight.max() > 1.0):
            raise ValueError("weight channel must lie in [0, 1]")
        features = arr[..., :-1]
        if np.any(features[weight == 0.0] != 0.0):
            raise ValueError("zero-weight pixels must have zero features")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def feature_channels(self) -> np.ndarray:
        return self.values[..., :-1]

    @property
    def weight_channel(self) -> np.ndarray:
        return self.values[..., -1]


def _check_grid_matches_set(tset: TrajectorySet, grid: LatentGrid, s: int) -> None:
    for name, image_dim, grid_dim in (
        ("width", tset.width, grid.width),
        ("height", tset.height, grid.height),
    ):
        exact = image_dim / s
        if grid_dim not in (math.floor(exact), math.ceil(exact)):
            raise DimensionMismatchError(
                f"grid {name} {grid_dim} inconsistent with image {name} "
                f"{image_dim} at stride {s}"
            )


def compose_condition(
    tset: TrajectorySet, grid: LatentGrid, config: InjectorConfig
) -> ConditionTensor:
    """Build the multi-track condition tensor for a trajectory set.

    Each track's feature is sampled once at its first visible position.
    Per latent frame tau the source video frame is tau * temporal_stride.
    Tracks accumulate in track-id order so the result is bit-identical
    under any permutation of the input track list.
    """
    violations = validate(tset)
    if violations:
        raise ValueError(
            "trajectory set fails validation: "
            + "; ".join(v.message for v in violations[:5])
        )
    _check_grid_matches_set(tset, grid, config.spatial_stride)

    n_feat = grid.channels
    frames = latent_frame_count(tset.frame_count, config)
    out = np.zeros(
        (frames, grid.height, grid.width, n_feat + 1), dtype=np.float64
    )
    tracks = sorted(tset.tracks, key=lambda tr: tr.id)
    features = []
    for track in tracks:
        first = track.first_visible()
        assert first is not None  # guaranteed by validation
        _, pos = first
        features.append(sample_feature(grid, to_latent_coords(pos, config)))

    sigma = resolve_sigma(config, grid.height, grid.width)
    r = config.temporal_stride
    for tau in range(frames):
        t = tau * r
        if config.composition == "normalized_average":
            wsum = np.zeros((grid.height, grid.width), dtype=np.float64)
            fsum = np.zeros((grid.height, grid.width, n_feat), dtype=np.float64)
            for track, feat in zip(tracks, features):
                w = frame_mask(
                    track.points[t], grid.height, grid.width, sigma, config
                )
                if not w.any():
                    continue
                wsum += w
                fsum += w[..., None] * feat
            covered = wsum > 0.0
            np.divide(fsum, wsum[..., None], out=fsum, where=covered[..., None])
            out[tau, ..., :n_feat] = fsum
            out[tau, ..., n_feat] = np.minimum(1.0, wsum)
        else:  # max_weight: strongest track wins; ties go to lowest id
            best_w = np.zeros((grid.height, grid.width), dtype=np.float64)
            best_f = np.zeros((grid.height, grid.width, n_feat), dtype=np.float64)
            for track, feat in zip(tracks, features):
                w = frame_mask(
                    track.points[t], grid.height, grid.width, sigma, config
                )
                winner = w > best_w
                if not winner.any():
                    continue
                best_w = np.where(winner, w, best_w)
                best_f = np.where(winner[..., None], feat, best_f)
            out[tau, ..., :n_feat] = best_f
            out[tau, ..., n_feat] = best_w

    return ConditionTensor(
        latent_frames=frames,
        height=grid.height,
        width=grid.width,
        channels=n_feat + 1,
        values=out.astype(np.float32),
    )


def blend_with_base(
    cond: ConditionTensor,
    base: "list[LatentGrid] | tuple[LatentGrid, ...]",
    mode: str = "convex",
) -> list[LatentGrid]:
    """Blend condition features into a per-latent-frame base stream.

    convex: out = w * feature + (1 - w) * base, per pixel and channel.
    replace: feature wherever the weight exceeds 0.5, base elsewhere.
    An all-zero condition returns the base values unchanged.
    """
    if mode not in ("convex", "replace"):
        raise ValueError(f"unknown blend mode {mode!r}")
    if len(base) != cond.latent_frames:
        raise DimensionMismatchError(
            f"base has {len(base)} frames, condition has {cond.latent_frames}"
        )
    n_feat = cond.channels - 1
    out = []
    for tau, grid in enumerate(base):
        if (grid.height, grid.width, grid.channels) != (
            cond.height,
            cond.width,
            n_feat,
        ):
            raise DimensionMismatchError(
                f"base frame {tau} dims ({grid.height}, {grid.width}, "
                f"{grid.channels}) do not match condition "
                f"({cond.height}, {cond.width}, {n_feat})"
            )
        feat = cond.values[tau, ..., :n_feat].astype(np.float64)
        w = cond.values[tau, ..., n_feat].astype(np.float64)[..., None]
        if np.all(w == 0.0):
            blended = grid.values
        elif mode == "convex":
            blended = w * feat + (1.0 - w) * grid.values
        else:
            blended = np.where(w > 0.5, feat, grid.values)
        out.append(
            LatentGrid(
                height=grid.height,
                width=grid.width,
                channels=grid.channels,
                values=blended,
            )
        )
    return out


# --- ATIC v1 binary format ----------------------------------------------------

_HEADER = struct.Struct("<4sIIIII")


def condition_to_bytes(cond: ConditionTensor) -> bytes:
    header = _HEADER.pack(
        ATIC_MAGIC,
        ATIC_VERSION,
        cond.latent_frames,
        cond.height,
        cond.width,
        cond.channels,
    )
    payload = np.ascontiguousarray(cond.values, dtype="<f4").tobytes()
    return header + payload


def condition_from_bytes(blob: bytes) -> ConditionTensor:
    if len(blob) < _HEADER.size:
        raise AticFormatError("payload shorter than the ATIC header")
    magic, version, frames, height, width, channels = _HEADER.unpack_from(blob)
    if magic != ATIC_MAGIC:
        raise AticFormatError(f"bad magic {magic!r}")
    if version != ATIC_VERSION:
        raise AticFormatError(f"unsupported ATIC version {version}")
    count = frames * height * width * channels
    expected = _HEADER.size + 4 * count
    if len(blob) != expected:
        raise AticFormatError(
            f"expected {expected} bytes for {count} values, got {len(blob)}"
        )
    values = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size, count=count)
    try:
        return ConditionTensor(
            latent_frames=frames,
            height=height,
            width=width,
            channels=channels,
            values=values,
        )
    except ValueError as exc:
        raise AticFormatError(str(exc)) from exc


def write_condition(cond: ConditionTensor, path) -> None:
    with open(path, "wb") as fh:
        fh.write(condition_to_bytes(cond))


def read_condition(path) -> ConditionTensor:
    with open(path, "rb") as fh:
        return condition_from_bytes(fh.read())
