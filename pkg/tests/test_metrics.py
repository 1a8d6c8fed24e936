import math

import pytest

from ati.core import Point2, TrackPoint, Trajectory, TrajectorySet
from ati.metrics import (
    MismatchError,
    acc_at,
    appearance_rate,
    format_table,
    frame_distance,
    report,
    report_to_json_dict,
)
from tests.conftest import random_trajectory_set


def set_from_positions(positions_by_id, width=100, height=100, visible=None):
    """positions_by_id: {id: [(x, y) or None, ...]}; None means hidden."""
    tracks = []
    frame_count = None
    for tid, plist in positions_by_id.items():
        frame_count = len(plist)
        points = []
        for t, entry in enumerate(plist):
            if entry is None:
                points.append(TrackPoint.hidden())
            else:
                vis = True if visible is None else visible[tid][t]
                points.append(TrackPoint(Point2(*entry), vis))
        tracks.append(Trajectory(id=tid, points=tuple(points)))
    return TrajectorySet(
        width=width, height=height, frame_count=frame_count, tracks=tuple(tracks)
    )


class TestFrameDistance:
    def test_identical_points(self):
        tp = TrackPoint.at(5.0, 5.0)
        assert frame_distance(tp, tp) == 0.0

    def test_345_triangle(self):
        assert frame_distance(TrackPoint.at(0, 0), TrackPoint.at(3, 4)) == 5.0

    def test_gt_invisible_excluded(self):
        pred = TrackPoint.at(0, 0)
        gt = TrackPoint(Point2(1, 1), False)
        assert frame_distance(pred, gt) is None
        assert frame_distance(pred, TrackPoint.hidden()) is None

    def test_pred_missing_position(self):
        assert frame_distance(TrackPoint.hidden(), TrackPoint.at(1, 1)) is None


class TestAccAt:
    def make_pair(self):
        # one track, 4 visible gt frames, distances 0/.02/.04/.06 of diagonal
        diag = math.hypot(100, 100)
        gt = set_from_positions({"a": [(50, 50)] * 4})
        pred = set_from_positions(
            {"a": [(50 + f * diag, 50) for f in (0.0, 0.02, 0.04, 0.06)]}
        )
        return pred, gt

    def test_exact_match_everywhere(self):
        gt = set_from_positions({"a": [(1, 2), (3, 4), (5, 6)]})
        assert acc_at(gt, gt, 0.05) == 1.0
        assert acc_at(gt, gt, 1e-9) == 1.0

    def test_hand_counted_thresholds(self):
        pred, gt = self.make_pair()
        assert acc_at(pred, gt, 0.05) == 0.75
        assert acc_at(pred, gt, 0.01) == 0.25

    def test_strict_inequality_at_boundary(self):
        diag = math.hypot(100, 100)
        gt = set_from_positions({"a": [(50, 50)]})
        pred = set_from_positions({"a": [(50 + 0.05 * diag, 50)]})
        assert acc_at(pred, gt, 0.05) == 0.0

    def test_pred_invisible_counts_as_failure(self):
        gt = set_from_positions({"a": [(10, 10), (10, 10)]})
        pred = set_from_positions(
            {"a": [(10, 10), (10, 10)]},
            visible={"a": [True, False]},
        )
        assert acc_at(pred, gt, 0.05) == 0.5

    def test_monotone_in_tau(self, rng):
        gt = random_trajectory_set(rng, n_tracks=4, frame_count=8)
        pred = _jitter(gt, rng, scale=6.0)
        taus = [0.001, 0.01, 0.03, 0.05, 0.2]
        values = [acc_at(pred, gt, tau) for tau in taus]
        assert all(a <= b for a, b in zip(values, values[1:]))

    def test_rescaling_invariance(self, rng):
        gt = random_trajectory_set(rng, n_tracks=3, frame_count=6)
        pred = _jitter(gt, rng, scale=4.0)
        gt2 = _rescale(gt, 2.0)
        pred2 = _rescale(pred, 2.0)
        for tau in (0.01, 0.05):
            assert acc_at(pred, gt, tau) == acc_at(pred2, gt2, tau)

    def test_permutation_invariance(self, rng):
        gt = random_trajectory_set(rng, n_tracks=4)
        pred = _jitter(gt, rng, scale=3.0)
        shuffled = pred.with_tracks(reversed(pred.tracks))
        assert acc_at(pred, gt, 0.05) == acc_at(shuffled, gt, 0.05)

    def test_id_mismatch_rejected(self, rng):
        gt = random_trajectory_set(rng, n_tracks=2)
        renamed = gt.with_tracks(
            Trajectory(id=f"x{tr.id}", points=tr.points) for tr in gt.tracks
        )
        with pytest.raises(MismatchError):
            acc_at(renamed, gt, 0.05)

    def test_dim_mismatch_rejected(self, rng):
        gt = random_trajectory_set(rng)
        import dataclasses

        other = dataclasses.replace(gt, width=gt.width + 1)
        with pytest.raises(MismatchError):
            acc_at(other, gt, 0.05)


class TestAppearanceRate:
    def test_identical_visibility(self, rng):
        gt = random_trajectory_set(rng)
        assert appearance_rate(gt, gt) == 1.0

    def test_three_of_four(self):
        gt = set_from_positions({"a": [(1, 1)] * 4})
        pred = set_from_positions(
            {"a": [(1, 1)] * 4},
            visible={"a": [True, True, True, False]},
        )
        assert appearance_rate(pred, gt) == 0.75

    def test_gt_invisible_frames_excluded(self):
        gt = set_from_positions(
            {"a": [(1, 1), None, (1, 1), None]},
        )
        pred = set_from_positions({"a": [(1, 1)] * 4})
        assert appearance_rate(pred, gt) == 1.0


class TestReport:
    def test_perfect_prediction(self, rng):
        gt = random_trajectory_set(rng, n_tracks=3)
        rep = report(gt, gt)
        assert rep.aggregate.acc_005 == 1.0
        assert rep.aggregate.acc_001 == 1.0
        assert rep.aggregate.appearance_rate == 1.0
        assert "100.0" in format_table(rep)

    def test_frame_weighted_aggregate(self):
        # two equal-length tracks with per-track acc .05 of 1.0 and 0.5
        diag = math.hypot(100, 100)
        gt = set_from_positions({"a": [(50, 50)] * 2, "b": [(50, 50)] * 2})
        pred = set_from_positions(
            {
                "a": [(50, 50), (50, 50)],
                "b": [(50, 50), (50 + 0.2 * diag, 50)],
            }
        )
        rep = report(pred, gt)
        assert rep.aggregate.acc_005 == 0.75
        by_id = {tm.track_id: tm for tm in rep.per_track}
        assert by_id["a"].acc_005 == 1.0
        assert by_id["b"].acc_005 == 0.5

    def test_track_without_gt_visible_frames_absent(self):
        gt = set_from_positions({"a": [(1, 1), (2, 2)], "b": [None, None]})
        # make gt track b valid-ish: it has no visible frames at all, which
        # is an invalid trajectory for producers but the metrics must still
        # report it as absent rather than crash
        pred = set_from_positions({"a": [(1, 1), (2, 2)], "b": [(0, 0), (0, 0)]})
        rep = report(pred, gt)
        by_id = {tm.track_id: tm for tm in rep.per_track}
        assert by_id["b"].acc_005 is None
        assert by_id["b"].appearance_rate is None
        assert by_id["a"].acc_005 == 1.0

    def test_aggregate_matches_brute_force(self, rng):
        gt = random_trajectory_set(rng, n_tracks=5, frame_count=9)
        pred = _jitter(gt, rng, scale=5.0)
        rep = report(pred, gt)
        # brute force over the flattened (track, frame) list
        diag = math.hypot(gt.width, gt.height)
        rows = []
        for gt_track in gt.tracks:
            pred_track = pred.track_by_id(gt_track.id)
            for ptp, gtp in zip(pred_track.points, gt_track.points):
                if not gtp.visible:
                    continue
                ok5 = ok1 = False
                if ptp.visible and ptp.pos is not None:
                    d = math.hypot(
                        ptp.pos.x - gtp.pos.x, ptp.pos.y - gtp.pos.y
                    )
                    ok5 = d < 0.05 * diag
                    ok1 = d < 0.01 * diag
                rows.append((ok5, ok1, ptp.visible))
        assert rep.aggregate.acc_005 == sum(r[0] for r in rows) / len(rows)
        assert rep.aggregate.acc_001 == sum(r[1] for r in rows) / len(rows)
        assert rep.aggregate.appearance_rate == sum(r[2] for r in rows) / len(rows)

    def test_false_positive_rate_supplementary(self):
        gt = set_from_positions({"a": [(1, 1), None, None, (1, 1)]})
        pred = set_from_positions({"a": [(1, 1)] * 4})
        rep = report(pred, gt)
        assert rep.false_positive_rate == 1.0

    def test_json_shape(self, rng):
        gt = random_trajectory_set(rng)
        doc = report_to_json_dict(report(gt, gt))
        assert set(doc) == {
            "aggregate", "aggregate_macro", "false_positive_rate", "per_track"
        }
        assert doc["aggregate"]["acc_005"] == 1.0


class TestFormatTable:
    def test_layout(self):
        gt = set_from_positions({"a": [(50, 50)] * 10})
        diag = math.hypot(100, 100)
        offsets = [0.0] * 3 + [0.02 * diag] * 4 + [0.2 * diag] * 3
        pred = set_from_positions({"a": [(50 + off, 50) for off in offsets]})
        table = format_table(report(pred, gt))
        header, row = table.splitlines()
        assert header.split() == ["Acc@0.05", "Acc@0.01", "App.", "Rate"]
        assert row.split() == ["70.0", "30.0", "100.0"]


def _jitter(tset, rng, scale):
    tracks = []
    for track in tset.tracks:
        points = []
        for tp in track.points:
            if tp.pos is None:
                points.append(tp)
            else:
                points.append(
                    TrackPoint(
                        Point2(
                            tp.pos.x + rng.uniform(-scale, scale),
                            tp.pos.y + rng.uniform(-scale, scale),
                        ),
                        tp.visible,
                    )
                )
        tracks.append(Trajectory(id=track.id, points=tuple(points)))
    return tset.with_tracks(tracks)


def _rescale(tset, factor):
    import dataclasses

    tracks = []
    for track in tset.tracks:
        points = []
        for tp in track.points:
            pos = None if tp.pos is None else Point2(
                tp.pos.x * factor, tp.pos.y * factor
            )
            points.append(TrackPoint(pos, tp.visible))
        tracks.append(Trajectory(id=track.id, points=tuple(points)))
    return dataclasses.replace(
        tset,
        width=int(tset.width * factor),
        height=int(tset.height * factor),
        tracks=tuple(tracks),
    )
