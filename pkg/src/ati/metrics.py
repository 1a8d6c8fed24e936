"""Tracking-accuracy evaluation against ground-truth trajectories.

Acc@tau counts ground-truth-visible frames whose predicted point lies
strictly within tau times the image diagonal; Appearance Rate counts
those frames where the prediction is marked visible at all.  Frames whose
ground truth is invisible are excluded everywhere.  Aggregates are
frame-weighted over the whole set; per-track macro averages and the
false-positive rate are emitted as supplementary values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from ati.core import TrackPoint, TrajectorySet


class MismatchError(ValueError):
    """Prediction and ground truth disagree on ids, dims, or length."""


@dataclass(frozen=True)
class TrackMetrics:
    track_id: str
    acc_005: float | None
    acc_001: float | None
    appearance_rate: float | None
    gt_visible_frames: int


@dataclass(frozen=True)
class Aggregate:
    acc_005: float
    acc_001: float
    appearance_rate: float


@dataclass(frozen=True)
class MetricsReport:
    per_track: tuple[TrackMetrics, ...]
    aggregate: Aggregate
    macro: Aggregate | None
    false_positive_rate: float | None


def frame_distance(pred: TrackPoint, gt: TrackPoint) -> float | None:
    """Euclidean pixel distance, or None when the frame carries no ground
    truth (gt invisible) or either side lacks a position."""
    if not gt.visible or gt.pos is None or pred.pos is None:
        return None
    return math.hypot(pred.pos.x - gt.pos.x, pred.pos.y - gt.pos.y)


def _check_pairing(pred: TrajectorySet, gt: TrajectorySet) -> None:
    if (pred.width, pred.height) != (gt.width, gt.height):
        raise MismatchError(
            f"image dims differ: pred {pred.width}x{pred.height}, "
            f"gt {gt.width}x{gt.height}"
        )
    if pred.frame_count != gt.frame_count:
        raise MismatchError(
            f"frame counts differ: pred {pred.frame_count}, gt {gt.frame_count}"
        )
    pred_ids = sorted(pred.track_ids())
    gt_ids = sorted(gt.track_ids())
    if pred_ids != gt_ids:
        raise MismatchError(
            f"track ids differ: pred {pred_ids}, gt {gt_ids}"
        )


def _frame_hit(pred: TrackPoint, gt: TrackPoint, threshold: float) -> bool:
    # A tracker that loses the point (invisible prediction) has not
    # followed it, so such frames count as misses.
    if not pred.visible:
        return False
    d = frame_distance(pred, gt)
    return d is not None and d < threshold


def acc_at(pred: TrajectorySet, gt: TrajectorySet, tau: float) -> float:
    """Fraction of gt-visible frames predicted within tau * diagonal."""
    _check_pairing(pred, gt)
    threshold = tau * gt.diagonal()
    hits = 0
    total = 0
    for gt_track in gt.tracks:
        pred_track = pred.track_by_id(gt_track.id)
        for pred_tp, gt_tp in zip(pred_track.points, gt_track.points):
            if not gt_tp.visible:
                continue
            total += 1
            if _frame_hit(pred_tp, gt_tp, threshold):
                hits += 1
    if total == 0:
        raise ValueError("ground truth has no visible frames")
    return hits / total


def appearance_rate(pred: TrajectorySet, gt: TrajectorySet) -> float:
    """Fraction of gt-visible frames where the prediction is visible."""
    _check_pairing(pred, gt)
    present = 0
    total = 0
    for gt_track in gt.tracks:
        pred_track = pred.track_by_id(gt_track.id)
        for pred_tp, gt_tp in zip(pred_track.points, gt_track.points):
            if not gt_tp.visible:
                continue
            total += 1
            if pred_tp.visible:
                present += 1
    if total == 0:
        raise ValueError("ground truth has no visible frames")
    return present / total


def report(pred: TrajectorySet, gt: TrajectorySet) -> MetricsReport:
    """Per-track and frame-weighted aggregate metrics for a pair of sets."""
    _check_pairing(pred, gt)
    diag = gt.diagonal()
    thr_005 = 0.05 * diag
    thr_001 = 0.01 * diag

    per_track = []
    totals = {"n": 0, "acc5": 0, "acc1": 0, "app": 0, "fp": 0, "gt_hidden": 0}
    for gt_track in sorted(gt.tracks, key=lambda tr: tr.id):
        pred_track = pred.track_by_id(gt_track.id)
        n = acc5 = acc1 = app = 0
        for pred_tp, gt_tp in zip(pred_track.points, gt_track.points):
            if not gt_tp.visible:
                totals["gt_hidden"] += 1
                if pred_tp.visible:
                    totals["fp"] += 1
                continue
            n += 1
            acc5 += _frame_hit(pred_tp, gt_tp, thr_005)
            acc1 += _frame_hit(pred_tp, gt_tp, thr_001)
            app += pred_tp.visible
        per_track.append(
            TrackMetrics(
                track_id=gt_track.id,
                acc_005=acc5 / n if n else None,
                acc_001=acc1 / n if n else None,
                appearance_rate=app / n if n else None,
                gt_visible_frames=n,
            )
        )
        totals["n"] += n
        totals["acc5"] += acc5
        totals["acc1"] += acc1
        totals["app"] += app

    if totals["n"] == 0:
        raise ValueError("ground truth has no visible frames")
    aggregate = Aggregate(
        acc_005=totals["acc5"] / totals["n"],
        acc_001=totals["acc1"] / totals["n"],
        appearance_rate=totals["app"] / totals["n"],
    )
    defined = [tm for tm in per_track if tm.gt_visible_frames > 0]
    macro = None
    if defined:
        macro = Aggregate(
            acc_005=sum(tm.acc_005 for tm in defined) / len(defined),
            acc_001=sum(tm.acc_001 for tm in defined) / len(defined),
            appearance_rate=sum(tm.appearance_rate for tm in defined)
            / len(defined),
        )
    fp_rate = (
        totals["fp"] / totals["gt_hidden"] if totals["gt_hidden"] else None
    )
    return MetricsReport(
        per_track=tuple(per_track),
        aggregate=aggregate,
        macro=macro,
        false_positive_rate=fp_rate,
    )


def report_to_json_dict(rep: MetricsReport) -> dict:
    def agg(a: Aggregate | None) -> dict | None:
        if a is None:
            return None
        return {
            "acc_005": a.acc_005,
            "acc_001": a.acc_001,
            "appearance_rate": a.appearance_rate,
        }

    return {
        "aggregate": agg(rep.aggregate),
        "aggregate_macro": agg(rep.macro),
        "false_positive_rate": rep.false_positive_rate,
        "per_track": [
            {
                "id": tm.track_id,
                "acc_005": tm.acc_005,
                "acc_001": tm.acc_001,
                "appearance_rate": tm.appearance_rate,
                "gt_visible_frames": tm.gt_visible_frames,
            }
            for tm in rep.per_track
        ],
    }


def dumps_report(rep: MetricsReport) -> str:
    return json.dumps(report_to_json_dict(rep), indent=2) + "\n"


def format_table(rep: MetricsReport) -> str:
    """Aligned text table of aggregate percentages, one decimal place."""
    header = f"{'Acc@0.05':>9}  {'Acc@0.01':>9}  {'App. Rate':>9}"
    a = rep.aggregate
    row = (
        f"{100.0 * a.acc_005:>9.1f}  "
        f"{100.0 * a.acc_001:>9.1f}  "
        f"{100.0 * a.appearance_rate:>9.1f}"
    )
    return header + "\n" + row
