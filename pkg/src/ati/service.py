"""HTTP service backing the interactive trajectory editor.

One project per directory (project.json + image.png + trajectories.json).
Reads are pure functions of the persisted files; mutations are serialized
through a per-project lock and written atomically (temp file + rename),
so a crash mid-write never corrupts the project.
"""

from __future__ import annotations

import io
import json
import math
import os
import tempfile
import threading
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse

from ati import augment as aug
from ati import core, evalsim, injector, trajgen

PROJECT_FILE = "project.json"
IMAGE_FILE = "image.png"
TRAJECTORY_FILE = "trajectories.json"

DEFAULT_LATENT_CHANNELS = 8


def atomic_write_bytes(path: Path, payload: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def injector_config_to_dict(config: core.InjectorConfig) -> dict:
    return {
        "sigma_mode": config.sigma_mode,
        "sigma": config.sigma,
        "spatial_stride": config.spatial_stride,
        "temporal_stride": config.temporal_stride,
        "composition": config.composition,
        "blend": config.blend,
    }


def injector_config_from_dict(doc: dict) -> core.InjectorConfig:
    return core.InjectorConfig(**doc)


def create_project(
    directory: Path,
    image: evalsim.Image,
    frame_count: int,
    config: core.InjectorConfig | None = None,
    project_id: str | None = None,
    latent_channels: int = DEFAULT_LATENT_CHANNELS,
) -> None:
    """Write a fresh project: metadata, PNG image, empty trajectory set."""
    directory.mkdir(parents=True, exist_ok=True)
    config = config or core.InjectorConfig()
    meta = {
        "id": project_id or uuid.uuid4().hex[:12],
        "image": IMAGE_FILE,
        "frame_count": frame_count,
        "latent_channels": latent_channels,
        "injector": injector_config_to_dict(config),
    }
    evalsim.save_image(image, directory / IMAGE_FILE)
    atomic_write_text(
        directory / PROJECT_FILE, json.dumps(meta, indent=2) + "\n"
    )
    empty = core.TrajectorySet(
        width=image.width,
        height=image.height,
        frame_count=frame_count,
        tracks=(),
    )
    atomic_write_text(
        directory / TRAJECTORY_FILE, core.dumps_trajectory_set(empty)
    )


class ProjectStore:
    """Disk-backed single project with serialized mutations."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.lock = threading.Lock()
        if not (self.directory / PROJECT_FILE).exists():
            raise FileNotFoundError(
                f"no {PROJECT_FILE} in {self.directory}; create a project first"
            )

    def meta(self) -> dict:
        with open(self.directory / PROJECT_FILE, "r", encoding="utf-8") as fh:
            return json.load(fh)

    def config(self) -> core.InjectorConfig:
        return injector_config_from_dict(self.meta()["injector"])

    def image(self) -> evalsim.Image:
        return evalsim.load_image(self.directory / IMAGE_FILE)

    def image_bytes(self) -> bytes:
        return (self.directory / IMAGE_FILE).read_bytes()

    def trajectory_bytes(self) -> bytes:
        return (self.directory / TRAJECTORY_FILE).read_bytes()

    def trajectories(self) -> core.TrajectorySet:
        return core.loads_trajectory_set(self.trajectory_bytes())

    def save_trajectories(self, tset: core.TrajectorySet) -> None:
        atomic_write_text(
            self.directory / TRAJECTORY_FILE, core.dumps_trajectory_set(tset)
        )


def _violations_json(violations: list[core.Violation]) -> list[dict]:
    return [
        {"message": v.message, "track_id": v.track_id, "frame": v.frame}
        for v in violations
    ]


def _error(status: int, message: str, **extra) -> JSONResponse:
    return JSONResponse({"error": message, **extra}, status_code=status)


def _latent_dims(width: int, height: int, stride: int) -> tuple[int, int]:
    return -(-height // stride), -(-width // stride)


def create_app(project_dir: Path, ui_dir: Path | None = None) -> FastAPI:
    store = ProjectStore(Path(project_dir))
    app = FastAPI(title="trajectory editor service")

    @app.get("/api/project")
    def get_project() -> dict:
        meta = store.meta()
        tset = store.trajectories()
        return {
            "id": meta["id"],
            "image": meta["image"],
            "width": tset.width,
            "height": tset.height,
            "frame_count": tset.frame_count,
            "latent_channels": meta.get(
                "latent_channels", DEFAULT_LATENT_CHANNELS
            ),
            "injector": meta["injector"],
        }

    @app.get("/api/image")
    def get_image() -> Response:
        return Response(content=store.image_bytes(), media_type="image/png")

    @app.get("/api/trajectories")
    def get_trajectories() -> Response:
        return Response(
            content=store.trajectory_bytes(), media_type="application/json"
        )

    @app.put("/api/trajectories")
    async def put_trajectories(request: Request) -> Response:
        try:
            doc = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error(400, f"malformed JSON: {exc}")
        try:
            tset = core.trajectory_set_from_json_dict(doc)
        except core.SchemaError as exc:
            return _error(400, str(exc))
        violations = core.validate(tset)
        meta_img = store.image()
        if (tset.width, tset.height) != (meta_img.width, meta_img.height):
            violations.append(
                core.Violation(
                    f"set dims {tset.width}x{tset.height} do not match "
                    f"project image {meta_img.width}x{meta_img.height}"
                )
            )
        if violations:
            return JSONResponse(
                {"violations": _violations_json(violations)}, status_code=422
            )
        with store.lock:
            store.save_trajectories(tset)
            payload = store.trajectory_bytes()
        return Response(content=payload, media_type="application/json")

    @app.post("/api/transform")
    async def post_transform(request: Request) -> Response:
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error(400, f"malformed JSON: {exc}")
        kind = body.get("type")
        params = body.get("params", {})
        if kind not in ("pan", "zoom", "custom"):
            return _error(400, f"unknown transform type {kind!r}")
        if not isinstance(params, dict):
            return _error(400, "'params' must be an object")

        with store.lock:
            tset = store.trajectories()
            ids = body.get("track_ids")
            if ids is None:
                ids = tset.track_ids()
            if not isinstance(ids, list) or not all(
                isinstance(i, str) for i in ids
            ):
                return _error(400, "'track_ids' must be a list of strings")
            known = set(tset.track_ids())
            missing = [i for i in ids if i not in known]
            if missing:
                return _error(404, f"unknown track ids {missing}")
            try:
                new_set = _apply_transform(tset, kind, params, set(ids))
            except (ValueError, TypeError) as exc:
                return _error(400, f"bad transform params: {exc}")
            store.save_trajectories(new_set)
            payload = store.trajectory_bytes()
        return Response(content=payload, media_type="application/json")

    @app.post("/api/augment/tail_dropout")
    async def post_tail_dropout(request: Request) -> Response:
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error(400, f"malformed JSON: {exc}")
        try:
            config = aug.AugmentConfig(
                dropout_prob=float(body.get("prob", 0.2)),
                seed=int(body.get("seed", 0)),
                per_clip_dropout=bool(body.get("per_clip", False)),
            )
        except (TypeError, ValueError) as exc:
            return _error(400, f"bad augment params: {exc}")
        with store.lock:
            tset = store.trajectories()
            store.save_trajectories(aug.tail_dropout_set(tset, config))
            payload = store.trajectory_bytes()
        return Response(content=payload, media_type="application/json")

    @app.get("/api/preview/mask")
    def get_mask_preview(frame: int = Query(...)) -> Response:
        tset = store.trajectories()
        config = store.config()
        frames = core.latent_frame_count(tset.frame_count, config)
        if not 0 <= frame < frames:
            return _error(400, f"frame must lie in [0, {frames})")
        gh, gw = _latent_dims(tset.width, tset.height, config.spatial_stride)
        sigma = injector.resolve_sigma(config, gh, gw)
        t = frame * config.temporal_stride
        weight = np.zeros((gh, gw), dtype=np.float64)
        for track in sorted(tset.tracks, key=lambda tr: tr.id):
            weight += injector.frame_mask(track.points[t], gh, gw, sigma, config)
        weight = np.minimum(1.0, weight)
        png = _gray_png(weight)
        return Response(content=png, media_type="image/png")

    @app.get("/api/preview/condition")
    def get_condition_preview(frame: int = Query(...)) -> Response:
        tset = store.trajectories()
        config = store.config()
        meta = store.meta()
        frames = core.latent_frame_count(tset.frame_count, config)
        if not 0 <= frame < frames:
            return _error(400, f"frame must lie in [0, {frames})")
        violations = core.validate(tset)
        if violations:
            return JSONResponse(
                {"violations": _violations_json(violations)}, status_code=422
            )
        grid = evalsim.pseudo_encode(
            store.image(),
            stride=config.spatial_stride,
            channels=meta.get("latent_channels", DEFAULT_LATENT_CHANNELS),
        )
        cond = injector.compose_condition(tset, grid, config)
        plane = cond.values[frame]
        return JSONResponse(
            {
                "frame": frame,
                "height": cond.height,
                "width": cond.width,
                "channels": cond.channels,
                "values": [float(v) for v in plane.reshape(-1)],
            }
        )

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _gray_png(plane: np.ndarray) -> bytes:
    from PIL import Image as PILImage

    data = np.round(np.clip(plane, 0.0, 1.0) * 255.0).astype(np.uint8)
    buf = io.BytesIO()
    PILImage.fromarray(data, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def _apply_transform(
    tset: core.TrajectorySet, kind: str, params: dict, selected: set[str]
) -> core.TrajectorySet:
    if kind == "pan":
        vx = float(params.get("vx", 0.0))
        vy = float(params.get("vy", 0.0))
        path = trajgen.CameraPath.pan(vx, vy, tset.frame_count)
        return _apply_camera_to_selection(tset, path, selected)
    if kind == "custom":
        frame_count = tset.frame_count
        scales = params.get("scales", [1.0] * frame_count)
        rotations = params.get("rotations", [0.0] * frame_count)
        translations = params.get("translations", [[0.0, 0.0]] * frame_count)
        pivot_xy = params.get("pivot", [tset.width / 2.0, tset.height / 2.0])
        if not (
            len(scales) == len(rotations) == len(translations) == frame_count
        ):
            raise ValueError("per-frame lists must match frame_count")
        path = trajgen.CameraPath(
            frames=tuple(
                trajgen.CameraFrame(
                    scale=float(s),
                    rotation=float(r),
                    translation=core.Point2(float(t[0]), float(t[1])),
                )
                for s, r, t in zip(scales, rotations, translations)
            ),
            pivot=core.Point2(float(pivot_xy[0]), float(pivot_xy[1])),
        )
        return _apply_camera_to_selection(tset, path, selected)
    # zoom: constant-speed radial displacement away from a center, composed
    # with whatever motion the track already carries.
    speed = float(params.get("speed", 0.0))
    center_xy = params.get("center", [tset.width / 2.0, tset.height / 2.0])
    center = core.Point2(float(center_xy[0]), float(center_xy[1]))
    tracks = []
    for track in tset.tracks:
        if track.id not in selected:
            tracks.append(track)
            continue
        points = []
        for t, tp in enumerate(track.points):
            if tp.pos is None:
                points.append(tp)
                continue
            offset = tp.pos - center
            radius = math.hypot(offset.x, offset.y)
            if radius == 0.0 or speed == 0.0:
                points.append(tp)
                continue
            unit = core.Point2(offset.x / radius, offset.y / radius)
            points.append(
                core.TrackPoint(tp.pos + unit.scaled(speed * t), tp.visible)
            )
        tracks.append(core.Trajectory(id=track.id, points=tuple(points)))
    return tset.with_tracks(tracks)


def _apply_camera_to_selection(
    tset: core.TrajectorySet, path: trajgen.CameraPath, selected: set[str]
) -> core.TrajectorySet:
    sub = tset.with_tracks(tr for tr in tset.tracks if tr.id in selected)
    moved = {tr.id: tr for tr in trajgen.apply_camera(sub, path).tracks}
    return tset.with_tracks(
        moved.get(tr.id, tr) for tr in tset.tracks
    )
