import math

import numpy as np
import pytest

from ati.core import Point2, TrajectorySet, validate
from ati.trajgen import (
    CameraFrame,
    CameraPath,
    apply_camera,
    dolly_zoom,
    linear_track,
    radial_zoom,
    seed_grid,
    static_track,
)
from tests.conftest import random_trajectory_set


def positions(track):
    return [(tp.pos.x, tp.pos.y) for tp in track.points]


class TestSeedGrid:
    def test_single_point_at_center(self):
        for w, h in ((100, 100), (832, 480), (7, 31)):
            points = seed_grid(w, h, 1)
            assert points == [Point2(w / 2, h / 2)]

    def test_four_points_on_square(self):
        points = seed_grid(100, 100, 4)
        expect = {(25, 25), (75, 25), (25, 75), (75, 75)}
        assert {(p.x, p.y) for p in points} == expect

    def test_120_points_roughly_equidistant(self):
        points = seed_grid(832, 480, 120)
        assert len(points) == 120
        xy = np.array([(p.x, p.y) for p in points])
        d2 = ((xy[:, None, :] - xy[None, :, :]) ** 2).sum(-1)
        np.fill_diagonal(d2, np.inf)
        nearest = np.sqrt(d2.min(axis=1))
        assert nearest.min() >= 0.75 * nearest.mean()

    def test_points_inside_image(self):
        for n in (1, 7, 37, 120):
            for p in seed_grid(640, 360, n):
                assert 0 < p.x < 640 and 0 < p.y < 360

    def test_deterministic_and_scale_covariant(self):
        a = seed_grid(320, 240, 17)
        b = seed_grid(320, 240, 17)
        assert a == b
        doubled = seed_grid(640, 480, 17)
        for p, q in zip(a, doubled):
            assert (q.x, q.y) == (2 * p.x, 2 * p.y)

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            seed_grid(0, 100, 5)
        with pytest.raises(ValueError):
            seed_grid(100, 100, 0)


class TestTrackBuilders:
    def test_static_track(self):
        track = static_track(Point2(10, 10), 5)
        assert len(track.points) == 5
        assert all(tp.visible and tp.pos == Point2(10, 10) for tp in track.points)

    def test_static_single_frame(self):
        assert len(static_track(Point2(1, 2), 1).points) == 1

    def test_linear_track_progression(self):
        track = linear_track(Point2(0, 0), Point2(10, 0), 11)
        assert [tp.pos.x for tp in track.points] == list(range(11))

    def test_linear_equals_static_when_endpoints_coincide(self):
        p = Point2(4.0, 9.0)
        assert positions(linear_track(p, p, 6)) == positions(static_track(p, 6))

    def test_linear_midpoint(self):
        track = linear_track(Point2(0, 0), Point2(8, 4), 5)
        assert (track.points[2].pos.x, track.points[2].pos.y) == (4.0, 2.0)

    def test_linear_needs_two_frames(self):
        with pytest.raises(ValueError):
            linear_track(Point2(0, 0), Point2(1, 1), 1)


class TestRadialZoom:
    def test_center_point_stays(self):
        center = Point2(50, 50)
        (track,) = radial_zoom([center], center, 3.0, 4)
        assert positions(track) == [(50, 50)] * 4

    def test_constant_speed_along_ray(self):
        center = Point2(50, 50)
        (track,) = radial_zoom([Point2(60, 50)], center, 2.0, 4)
        assert track.points[3].pos == Point2(66.0, 50.0)

    def test_zero_speed_is_static(self):
        points = [Point2(10, 10), Point2(30, 40)]
        tracks = radial_zoom(points, Point2(20, 20), 0.0, 5)
        for p, track in zip(points, tracks):
            assert positions(track) == [(p.x, p.y)] * 5

    def test_direction_constant_radius_affine(self):
        center = Point2(32, 32)
        tracks = radial_zoom(
            [Point2(40, 50), Point2(10, 12), Point2(60, 20)], center, 1.5, 8
        )
        for track in tracks:
            offsets = [
                (tp.pos.x - center.x, tp.pos.y - center.y) for tp in track.points
            ]
            angles = [math.atan2(dy, dx) for dx, dy in offsets]
            radii = [math.hypot(dx, dy) for dx, dy in offsets]
            for angle in angles[1:]:
                assert abs(angle - angles[0]) < 1e-9
            increments = [b - a for a, b in zip(radii, radii[1:])]
            for inc in increments:
                assert inc == pytest.approx(1.5, abs=1e-9)

    def test_negative_speed_zooms_out(self):
        center = Point2(0, 0)
        (track,) = radial_zoom([Point2(10, 0)], center, -1.0, 3)
        assert track.points[2].pos.x == pytest.approx(8.0)


class TestApplyCamera:
    def test_identity_is_exact(self, rng):
        tset = random_trajectory_set(rng, n_tracks=4)
        out = apply_camera(tset, CameraPath.identity(tset.frame_count))
        assert out == tset

    def test_pan_turns_static_into_linear(self):
        tset = TrajectorySet(
            width=100, height=100, frame_count=6,
            tracks=(static_track(Point2(10, 20), 6),),
        )
        out = apply_camera(tset, CameraPath.pan(3.0, 0.0, 6))
        expect = linear_track(Point2(10, 20), Point2(25, 20), 6)
        assert positions(out.tracks[0]) == positions(expect)

    def test_scaling_about_center(self):
        center = Point2(50, 50)
        tset = TrajectorySet(
            width=100, height=100, frame_count=3,
            tracks=(static_track(Point2(60, 50), 3),),
        )
        out = apply_camera(tset, CameraPath.scaling(0.1, 3, center))
        assert out.tracks[0].points[2].pos.x == pytest.approx(62.0)

    def test_rotation_quarter_turn(self):
        pivot = Point2(0, 0)
        path = CameraPath(
            frames=(CameraFrame(rotation=math.pi / 2),), pivot=pivot
        )
        tset = TrajectorySet(
            width=10, height=10, frame_count=1,
            tracks=(static_track(Point2(1, 0), 1),),
        )
        out = apply_camera(tset, path)
        p = out.tracks[0].points[0].pos
        assert p.x == pytest.approx(0.0, abs=1e-12)
        assert p.y == pytest.approx(1.0, abs=1e-12)

    def test_visibility_untouched(self, rng):
        tset = random_trajectory_set(rng, n_tracks=3)
        out = apply_camera(tset, CameraPath.pan(1.0, -1.0, tset.frame_count))
        for before, after in zip(tset.tracks, out.tracks):
            assert [tp.visible for tp in before.points] == [
                tp.visible for tp in after.points
            ]

    def test_length_mismatch_rejected(self, rng):
        tset = random_trajectory_set(rng)
        with pytest.raises(ValueError):
            apply_camera(tset, CameraPath.identity(tset.frame_count + 1))

    def test_composition_matches_sequential_application(self, rng):
        for _ in range(50):
            tset = random_trajectory_set(rng, n_tracks=2, frame_count=4)
            pivot = Point2(rng.uniform(0, 64), rng.uniform(0, 48))
            a = _random_path(rng, 4, pivot)
            b = _random_path(rng, 4, pivot)
            sequential = apply_camera(apply_camera(tset, a), b)
            composed = apply_camera(tset, a.then(b))
            _assert_sets_close(sequential, composed, atol=1e-9)

    def test_composition_with_distinct_pivots(self, rng):
        tset = random_trajectory_set(rng, n_tracks=2, frame_count=3)
        a = _random_path(rng, 3, Point2(5.0, 7.0))
        b = _random_path(rng, 3, Point2(40.0, 20.0))
        sequential = apply_camera(apply_camera(tset, a), b)
        composed = apply_camera(tset, a.then(b))
        _assert_sets_close(sequential, composed, atol=1e-9)

    def test_scale_must_be_positive(self):
        with pytest.raises(ValueError):
            CameraPath(frames=(CameraFrame(scale=0.0),))


def _random_path(rng, frame_count, pivot):
    frames = tuple(
        CameraFrame(
            scale=float(rng.uniform(0.5, 1.5)),
            rotation=float(rng.uniform(-math.pi, math.pi)),
            translation=Point2(
                float(rng.uniform(-10, 10)), float(rng.uniform(-10, 10))
            ),
        )
        for _ in range(frame_count)
    )
    return CameraPath(frames=frames, pivot=pivot)


def _assert_sets_close(a: TrajectorySet, b: TrajectorySet, atol: float):
    for ta, tb in zip(a.tracks, b.tracks):
        for pa, pb in zip(ta.points, tb.points):
            assert (pa.pos is None) == (pb.pos is None)
            if pa.pos is not None:
                assert pa.pos.x == pytest.approx(pb.pos.x, abs=atol)
                assert pa.pos.y == pytest.approx(pb.pos.y, abs=atol)


class TestDollyZoom:
    def test_empty_background_all_static(self):
        out = dolly_zoom(
            [Point2(10, 10), Point2(20, 20)], [], Point2(50, 50), 2.0, 4, 100, 100
        )
        for track in out.tracks:
            first = track.points[0].pos
            assert positions(track) == [(first.x, first.y)] * 4

    def test_empty_subject_equals_radial_zoom(self):
        points = [Point2(10, 10), Point2(70, 20)]
        center = Point2(50, 50)
        out = dolly_zoom([], points, center, 2.0, 5, 100, 100)
        expect = radial_zoom(points, center, 2.0, 5)
        assert [tr.id for tr in out.tracks] == [tr.id for tr in expect]
        for a, b in zip(out.tracks, expect):
            assert positions(a) == positions(b)

    def test_one_subject_one_background(self):
        out = dolly_zoom(
            [Point2(50, 50)], [Point2(80, 50)], Point2(50, 50), 2.0, 3, 100, 100
        )
        assert len(out.tracks) == 2
        static_positions = positions(out.tracks[0])
        assert static_positions == [(50, 50)] * 3
        moving = positions(out.tracks[1])
        assert moving[0] == (80, 50) and moving[2] == (84, 50)

    def test_generators_validate_cleanly(self):
        out = dolly_zoom(
            seed_grid(64, 64, 3), seed_grid(64, 64, 5), Point2(32, 32),
            1.0, 6, 64, 64,
        )
        # note: ids deliberately continue across subject/background
        assert len(out.tracks) == 8
        assert validate(out) == []
