import pytest

from roadchar.annotations import (
    format_annotation,
    parse_annotation,
    parse_annotation_file,
    write_annotation_file,
)
from roadchar.errors import MalformedLine, OutOfRangeCoordinate
from roadchar.metrics import Detection, GroundTruth
from roadchar.raster import Polygon

from conftest import random_convex_polygon


def test_parse_gt_triangle():
    obj = parse_annotation("0 0.1 0.1 0.9 0.1 0.5 0.9", "gt", frame_id="f")
    assert isinstance(obj, GroundTruth)
    assert obj.class_id == 0
    assert obj.polygon.vertices.shape == (3, 2)
    assert obj.frame_id == "f"


def test_parse_pred_with_confidence():
    obj = parse_annotation("0 0.1 0.1 0.9 0.1 0.5 0.9 0.87", "pred")
    assert isinstance(obj, Detection)
    assert obj.confidence == 0.87
    assert obj.polygon.vertices.shape == (3, 2)


def test_parse_insufficient_coordinates():
    with pytest.raises(MalformedLine):
        parse_annotation("0 0.1 0.1 0.9", "gt", line_no=4)
    try:
        parse_annotation("0 0.1 0.1 0.9", "gt", line_no=4)
    except MalformedLine as exc:
        assert exc.line_no == 4


def test_parse_pred_needs_odd_field_count():
    # even coordinate count means there is no room for the confidence
    with pytest.raises(MalformedLine):
        parse_annotation("0 0.1 0.1 0.9 0.1 0.5 0.9", "pred")


def test_parse_out_of_range_coordinate_positioned():
    with pytest.raises(OutOfRangeCoordinate) as exc:
        parse_annotation("0 0.1 0.1 1.5 0.1 0.5 0.9", "gt", line_no=7)
    assert exc.value.line_no == 7
    assert exc.value.field == 3


def test_parse_out_of_range_confidence():
    with pytest.raises(OutOfRangeCoordinate):
        parse_annotation("0 0.1 0.1 0.9 0.1 0.5 0.9 1.2", "pred")


def test_parse_bad_class_and_bad_number():
    with pytest.raises(MalformedLine):
        parse_annotation("pothole 0.1 0.1 0.9 0.1 0.5 0.9", "gt")
    with pytest.raises(MalformedLine):
        parse_annotation("-1 0.1 0.1 0.9 0.1 0.5 0.9", "gt")
    with pytest.raises(MalformedLine):
        parse_annotation("0 0.1 x 0.9 0.1 0.5 0.9", "gt")
    with pytest.raises(MalformedLine):
        parse_annotation("", "gt")


def test_round_trip_property(rng):
    for _ in range(30):
        verts = random_convex_polygon(rng)
        gt = GroundTruth(frame_id="f", class_id=0, polygon=Polygon(verts))
        assert parse_annotation(format_annotation(gt), "gt", "f") == gt
        det = Detection(
            frame_id="f",
            class_id=0,
            polygon=Polygon(verts),
            confidence=float(rng.uniform(0, 1)),
        )
        assert parse_annotation(format_annotation(det), "pred", "f") == det


def test_file_round_trip(tmp_path, rng):
    objs = [
        Detection("frame7", 0, Polygon(random_convex_polygon(rng)), 0.5),
        Detection("frame7", 0, Polygon(random_convex_polygon(rng)), 0.25),
    ]
    path = tmp_path / "frame7.txt"
    write_annotation_file(path, objs)
    parsed = parse_annotation_file(path, "pred")
    assert parsed == objs  # frame_id derives from the file stem


def test_file_parse_reports_line_number(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0 0.1 0.1 0.9 0.1 0.5 0.9\n\n0 0.1 0.1 0.9\n")
    with pytest.raises(MalformedLine) as exc:
        parse_annotation_file(path, "gt")
    assert exc.value.line_no == 3
