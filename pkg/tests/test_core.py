import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ati.core import (
    InjectorConfig,
    Point2,
    SchemaError,
    TrackPoint,
    Trajectory,
    TrajectorySet,
    dumps_trajectory_set,
    frame_to_latent_frame,
    latent_frame_count,
    load_trajectory_set,
    loads_trajectory_set,
    save_trajectory_set,
    to_latent_coords,
    validate,
)


class TestCoords:
    def test_exact_division(self):
        cfg = InjectorConfig(spatial_stride=8)
        assert to_latent_coords(Point2(16, 8), cfg) == Point2(2.0, 1.0)

    def test_origin_fixed_point(self):
        for s in (1, 3, 8):
            cfg = InjectorConfig(spatial_stride=s)
            assert to_latent_coords(Point2(0, 0), cfg) == Point2(0.0, 0.0)

    def test_fractional(self):
        cfg = InjectorConfig(spatial_stride=8)
        assert to_latent_coords(Point2(12, 6), cfg) == Point2(1.5, 0.75)

    @given(
        ax=st.floats(-1e4, 1e4), ay=st.floats(-1e4, 1e4),
        bx=st.floats(-1e4, 1e4), by=st.floats(-1e4, 1e4),
    )
    def test_linearity_power_of_two_stride(self, ax, ay, bx, by):
        cfg = InjectorConfig(spatial_stride=8)
        a, b = Point2(ax, ay), Point2(bx, by)
        lhs = to_latent_coords(a + b, cfg)
        rhs = to_latent_coords(a, cfg) + to_latent_coords(b, cfg)
        # division by a power of two is exact, so this holds bit-for-bit
        assert lhs == rhs

    @given(
        ax=st.floats(-1e4, 1e4), ay=st.floats(-1e4, 1e4),
        bx=st.floats(-1e4, 1e4), by=st.floats(-1e4, 1e4),
        s=st.integers(1, 16),
    )
    def test_linearity_general_stride(self, ax, ay, bx, by, s):
        cfg = InjectorConfig(spatial_stride=s)
        a, b = Point2(ax, ay), Point2(bx, by)
        lhs = to_latent_coords(a + b, cfg)
        rhs = to_latent_coords(a, cfg) + to_latent_coords(b, cfg)
        assert math.isclose(lhs.x, rhs.x, rel_tol=1e-12, abs_tol=1e-12)
        assert math.isclose(lhs.y, rhs.y, rel_tol=1e-12, abs_tol=1e-12)

    @given(i=st.integers(-500, 500), j=st.integers(-500, 500), s=st.integers(1, 16))
    def test_round_trip_on_stride_lattice(self, i, j, s):
        cfg = InjectorConfig(spatial_stride=s)
        p = Point2(float(i * s), float(j * s))
        latent = to_latent_coords(p, cfg)
        assert Point2(latent.x * s, latent.y * s) == p

    def test_frame_to_latent_frame(self):
        assert frame_to_latent_frame(0, InjectorConfig(temporal_stride=4)) == 0
        assert frame_to_latent_frame(7, InjectorConfig(temporal_stride=4)) == 1
        assert frame_to_latent_frame(5, InjectorConfig(temporal_stride=1)) == 5

    def test_latent_frame_count(self):
        assert latent_frame_count(7, InjectorConfig(temporal_stride=4)) == 2
        assert latent_frame_count(8, InjectorConfig(temporal_stride=4)) == 2
        assert latent_frame_count(9, InjectorConfig(temporal_stride=4)) == 3
        assert latent_frame_count(5, InjectorConfig(temporal_stride=1)) == 5

    def test_negative_frame_rejected(self):
        with pytest.raises(ValueError):
            frame_to_latent_frame(-1, InjectorConfig())


class TestValidate:
    def test_well_formed(self, small_set):
        assert validate(small_set) == []

    def test_length_mismatch_names_track(self, small_set):
        short = Trajectory(
            id="short", points=tuple(TrackPoint.at(1, 1) for _ in range(4))
        )
        bad = small_set.with_tracks(list(small_set.tracks) + [short])
        violations = validate(bad)
        assert len(violations) == 1
        assert violations[0].track_id == "short"

    def test_visible_without_pos_names_frame(self):
        points = [TrackPoint.at(1, 1), TrackPoint.at(2, 2), TrackPoint(None, True)]
        tset = TrajectorySet(
            width=10, height=10, frame_count=3,
            tracks=(Trajectory(id="x", points=tuple(points)),),
        )
        violations = validate(tset)
        assert len(violations) == 1
        assert violations[0].frame == 2
        assert violations[0].track_id == "x"

    def test_no_visible_frame(self):
        tset = TrajectorySet(
            width=10, height=10, frame_count=2,
            tracks=(Trajectory(id="x", points=(TrackPoint.hidden(),) * 2),),
        )
        assert any("no visible" in v.message for v in validate(tset))

    def test_duplicate_ids(self):
        track = Trajectory(id="dup", points=(TrackPoint.at(1, 1),))
        tset = TrajectorySet(width=4, height=4, frame_count=1, tracks=(track, track))
        assert any("duplicate" in v.message for v in validate(tset))

    def test_non_finite_position(self):
        tset = TrajectorySet(
            width=4, height=4, frame_count=1,
            tracks=(Trajectory(id="x", points=(TrackPoint.at(float("nan"), 0),)),),
        )
        assert any("non-finite" in v.message for v in validate(tset))

    def test_bad_dims(self):
        tset = TrajectorySet(width=0, height=-1, frame_count=0, tracks=())
        messages = [v.message for v in validate(tset)]
        assert len(messages) == 3

    def test_idempotent(self, small_set):
        assert validate(small_set) == validate(small_set)

    def test_out_of_frame_positions_allowed(self):
        tset = TrajectorySet(
            width=10, height=10, frame_count=1,
            tracks=(Trajectory(id="x", points=(TrackPoint.at(-5.0, 200.0),)),),
        )
        assert validate(tset) == []


class TestJson:
    def test_round_trip_bytes_identical(self, small_set, tmp_path):
        path = tmp_path / "t.json"
        save_trajectory_set(small_set, path)
        first = path.read_bytes()
        loaded = load_trajectory_set(path)
        save_trajectory_set(loaded, path)
        assert path.read_bytes() == first

    def test_null_means_hidden_without_pos(self, small_set):
        text = dumps_trajectory_set(small_set)
        doc = json.loads(text)
        # track "b" frame 3 is hidden with no position
        assert doc["tracks"][1]["points"][3] is None
        # frame 2 is occluded but located
        entry = doc["tracks"][1]["points"][2]
        assert entry["visible"] is False and entry["x"] == 32.0

    def test_reject_unknown_version(self, small_set):
        doc = json.loads(dumps_trajectory_set(small_set))
        doc["version"] = 2
        with pytest.raises(SchemaError, match="version"):
            loads_trajectory_set(json.dumps(doc))

    def test_reject_length_mismatch(self, small_set):
        doc = json.loads(dumps_trajectory_set(small_set))
        doc["tracks"][0]["points"].pop()
        with pytest.raises(SchemaError, match="expected 5"):
            loads_trajectory_set(json.dumps(doc))

    def test_reject_malformed(self):
        with pytest.raises(SchemaError):
            loads_trajectory_set("{not json")
        with pytest.raises(SchemaError):
            loads_trajectory_set('{"version": 1}')
        with pytest.raises(SchemaError):
            loads_trajectory_set('[]')

    def test_reject_nan_token(self, small_set):
        doc = dumps_trajectory_set(small_set).replace("10.0", "NaN", 1)
        with pytest.raises(SchemaError):
            loads_trajectory_set(doc)

    def test_reject_non_bool_visible(self, small_set):
        doc = json.loads(dumps_trajectory_set(small_set))
        doc["tracks"][0]["points"][0]["visible"] = 1
        with pytest.raises(SchemaError, match="boolean"):
            loads_trajectory_set(json.dumps(doc))

    def test_visible_without_pos_not_serializable(self):
        tset = TrajectorySet(
            width=4, height=4, frame_count=1,
            tracks=(Trajectory(id="x", points=(TrackPoint(None, True),)),),
        )
        with pytest.raises(ValueError):
            dumps_trajectory_set(tset)


# strategies for whole documents
_coord = st.floats(
    min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False
)


@st.composite
def trajectory_sets(draw):
    frame_count = draw(st.integers(1, 6))
    n_tracks = draw(st.integers(0, 4))
    tracks = []
    for k in range(n_tracks):
        points = []
        for t in range(frame_count):
            kind = draw(st.sampled_from(["visible", "occluded", "gone"]))
            if t == 0 or kind == "visible":
                points.append(TrackPoint(Point2(draw(_coord), draw(_coord)), True))
            elif kind == "occluded":
                points.append(TrackPoint(Point2(draw(_coord), draw(_coord)), False))
            else:
                points.append(TrackPoint.hidden())
        tracks.append(Trajectory(id=f"trk{k}", points=tuple(points)))
    return TrajectorySet(
        width=draw(st.integers(1, 2000)),
        height=draw(st.integers(1, 2000)),
        frame_count=frame_count,
        tracks=tuple(tracks),
    )


@settings(deadline=None)
@given(tset=trajectory_sets())
def test_json_round_trip_preserves_value(tset):
    assert loads_trajectory_set(dumps_trajectory_set(tset)) == tset
