"""Command-line entry points: gen, inject, augment, eval, serve.

Exit codes: 0 success, 2 bad flags or schema/id mismatches, 3 dimension
or binary-format failures.  Every command is deterministic given its
inputs, flags, and seed.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from ati import augment as aug
from ati import core, evalsim, injector, metrics, trajgen

EXIT_SCHEMA = 2
EXIT_FORMAT = 3


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _parse_size(value: str) -> tuple[int, int]:
    try:
        w, h = value.lower().split("x")
        width, height = int(w), int(h)
    except ValueError:
        raise click.BadParameter("expected WxH, e.g. 832x480")
    if width < 1 or height < 1:
        raise click.BadParameter("dimensions must be positive")
    return width, height


def _parse_center(value: str | None, width: int, height: int) -> core.Point2:
    if value is None:
        return core.Point2(width / 2.0, height / 2.0)
    try:
        x, y = (float(part) for part in value.split(","))
    except ValueError:
        raise click.BadParameter("expected x,y")
    return core.Point2(x, y)


@click.group()
def main() -> None:
    """Trajectory conditioning tools."""


@main.command("gen")
@click.option("--preset", type=click.Choice(["grid", "pan", "zoom", "dolly"]), required=True)
@click.option("--size", "size_str", required=True, help="image size WxH")
@click.option("--frames", type=int, default=81, show_default=True)
@click.option("--n", "n_points", type=int, default=120, show_default=True)
@click.option("--speed", type=float, default=2.0, show_default=True,
              help="radial speed in pixels/frame (zoom, dolly)")
@click.option("--vx", type=float, default=2.0, show_default=True,
              help="pan velocity x (pixels/frame)")
@click.option("--vy", type=float, default=0.0, show_default=True,
              help="pan velocity y (pixels/frame)")
@click.option("--center", "center_str", default=None, help="zoom center x,y")
@click.option("--subject-radius", type=float, default=None,
              help="dolly: points within this radius of center stay static")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path),
              default=Path("trajectories.json"), show_default=True)
def cmd_gen(preset, size_str, frames, n_points, speed, vx, vy, center_str,
            subject_radius, out) -> None:
    """Write a trajectory file from a preset."""
    width, height = _parse_size(size_str)
    if frames < 1:
        raise click.BadParameter("--frames must be >= 1")
    if n_points < 1:
        raise click.BadParameter("--n must be >= 1")
    center = _parse_center(center_str, width, height)
    points = trajgen.seed_grid(width, height, n_points)

    if preset == "grid":
        tracks = [
            trajgen.static_track(p, frames, track_id=f"t{i:03d}")
            for i, p in enumerate(points)
        ]
    elif preset == "pan":
        static = [
            trajgen.static_track(p, frames, track_id=f"t{i:03d}")
            for i, p in enumerate(points)
        ]
        base = core.TrajectorySet(
            width=width, height=height, frame_count=frames, tracks=tuple(static)
        )
        tracks = list(
            trajgen.apply_camera(base, trajgen.CameraPath.pan(vx, vy, frames)).tracks
        )
    elif preset == "zoom":
        tracks = trajgen.radial_zoom(points, center, speed, frames)
    else:  # dolly
        if subject_radius is None:
            subject_radius = min(width, height) / 5.0
        subject = [p for p in points if
                   (p.x - center.x) ** 2 + (p.y - center.y) ** 2 <= subject_radius ** 2]
        background = [p for p in points if p not in subject]
        tracks = list(
            trajgen.dolly_zoom(
                subject, background, center, speed, frames, width, height
            ).tracks
        )

    tset = core.TrajectorySet(
        width=width, height=height, frame_count=frames, tracks=tuple(tracks)
    )
    core.save_trajectory_set(tset, out)
    click.echo(f"wrote {len(tset.tracks)} tracks to {out}")


@main.command("inject")
@click.argument("image_file", required=False,
                type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("trajectory_file", required=False,
                type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--stride", type=int, default=8, show_default=True)
@click.option("--temporal-stride", type=int, default=1, show_default=True)
@click.option("--sigma-mode",
              type=click.Choice(["grid_derived", "paper_normalized", "explicit"]),
              default="grid_derived", show_default=True)
@click.option("--sigma", type=float, default=1.0, show_default=True)
@click.option("--composition",
              type=click.Choice(["normalized_average", "max_weight"]),
              default="normalized_average", show_default=True)
@click.option("--channels", type=int, default=8, show_default=True,
              help="pseudo-encoder channel count")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path),
              default=Path("condition.atic"), show_default=True)
@click.option("--check", "check_file", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="verify an existing ATIC file and exit")
def cmd_inject(image_file, trajectory_file, stride, temporal_stride, sigma_mode,
               sigma, composition, channels, out, check_file) -> None:
    """Encode an image, compose the condition tensor, write ATIC v1."""
    if check_file is not None:
        try:
            cond = injector.read_condition(check_file)
        except injector.AticFormatError as exc:
            _fail(EXIT_FORMAT, f"invalid ATIC file: {exc}")
        click.echo(
            f"{check_file}: {cond.latent_frames} frames, "
            f"{cond.height}x{cond.width}, {cond.channels} channels"
        )
        return
    if image_file is None or trajectory_file is None:
        raise click.UsageError("IMAGE_FILE and TRAJECTORY_FILE are required")

    try:
        tset = core.load_trajectory_set(trajectory_file)
    except core.SchemaError as exc:
        _fail(EXIT_SCHEMA, f"bad trajectory file: {exc}")
    violations = core.validate(tset)
    if violations:
        _fail(EXIT_SCHEMA, "; ".join(v.message for v in violations[:5]))

    img = evalsim.load_image(image_file)
    if (img.width, img.height) != (tset.width, tset.height):
        _fail(
            EXIT_FORMAT,
            f"image is {img.width}x{img.height} but trajectories expect "
            f"{tset.width}x{tset.height}",
        )
    config = core.InjectorConfig(
        sigma_mode=sigma_mode,
        sigma=sigma,
        spatial_stride=stride,
        temporal_stride=temporal_stride,
        composition=composition,
    )
    grid = evalsim.pseudo_encode(img, stride=stride, channels=channels)
    try:
        cond = injector.compose_condition(tset, grid, config)
    except injector.DimensionMismatchError as exc:
        _fail(EXIT_FORMAT, str(exc))
    injector.write_condition(cond, out)
    click.echo(
        f"wrote {out}: {cond.latent_frames} frames, "
        f"{cond.height}x{cond.width}, {cond.channels} channels"
    )


@main.command("augment")
@click.argument("trajectory_file",
                type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--dropout-prob", type=float, default=0.2, show_default=True)
@click.option("--min-tracks", type=int, default=1, show_default=True)
@click.option("--max-tracks", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--per-clip", is_flag=True, default=False,
              help="share one dropout frame across all tracks")
@click.option("--no-subsample", is_flag=True, default=False,
              help="skip track subsampling, apply tail dropout only")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path),
              default=Path("augmented.json"), show_default=True)
def cmd_augment(trajectory_file, dropout_prob, min_tracks, max_tracks, seed,
                per_clip, no_subsample, out) -> None:
    """Subsample tracks and apply tail dropout."""
    try:
        tset = core.load_trajectory_set(trajectory_file)
    except core.SchemaError as exc:
        _fail(EXIT_SCHEMA, f"bad trajectory file: {exc}")
    try:
        config = aug.AugmentConfig(
            dropout_prob=dropout_prob,
            min_tracks=min_tracks,
            max_tracks=max_tracks,
            seed=seed,
            per_clip_dropout=per_clip,
        )
        if not no_subsample:
            tset = aug.subsample_tracks(tset, config)
        tset = aug.tail_dropout_set(tset, config)
    except ValueError as exc:
        _fail(EXIT_SCHEMA, str(exc))
    core.save_trajectory_set(tset, out)
    click.echo(f"wrote {len(tset.tracks)} tracks to {out}")


@main.command("eval")
@click.option("--pred", "pred_file", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--gt", "gt_file", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--json", "json_out", default=None,
              type=click.Path(dir_okay=False, path_type=Path))
def cmd_eval(pred_file, gt_file, json_out) -> None:
    """Print the accuracy table for a prediction/ground-truth pair."""
    try:
        pred = core.load_trajectory_set(pred_file)
        gt = core.load_trajectory_set(gt_file)
    except core.SchemaError as exc:
        _fail(EXIT_SCHEMA, f"bad trajectory file: {exc}")
    try:
        rep = metrics.report(pred, gt)
    except (metrics.MismatchError, ValueError) as exc:
        _fail(EXIT_SCHEMA, str(exc))
    click.echo(metrics.format_table(rep))
    if json_out is not None:
        with open(json_out, "w", encoding="utf-8") as fh:
            fh.write(metrics.dumps_report(rep))


@main.command("serve")
@click.option("--port", type=int, default=8008, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--project-dir", required=True,
              type=click.Path(file_okay=False, path_type=Path))
@click.option("--image", "image_file", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="bootstrap a new project from this image if none exists")
@click.option("--frames", type=int, default=81, show_default=True,
              help="frame count when bootstrapping")
@click.option("--ui-dir", default=None,
              type=click.Path(file_okay=False, exists=True, path_type=Path),
              help="serve this static directory at /")
def cmd_serve(port, host, project_dir, image_file, frames, ui_dir) -> None:
    """Run the trajectory editor HTTP service."""
    import uvicorn

    from ati import service

    project_dir.mkdir(parents=True, exist_ok=True)
    if not (project_dir / service.PROJECT_FILE).exists():
        if image_file is None:
            _fail(
                EXIT_SCHEMA,
                f"{project_dir} has no project; pass --image to bootstrap one",
            )
        service.create_project(project_dir, evalsim.load_image(image_file), frames)
    app = service.create_app(project_dir, ui_dir=ui_dir)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except (OSError, SystemExit) as exc:
        _fail(1, f"server failed to start: {exc}")


if __name__ == "__main__":
    main()
