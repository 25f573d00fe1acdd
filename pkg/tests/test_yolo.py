"""Detector label parsing and serialization."""
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shadowheight.dataset import BoundingBox, parse_yolo_labels, serialize_yolo_labels


class TestParse:

    def test_single_line(self):
        boxes, errors = parse_yolo_labels("0 0.5 0.5 0.1 0.2")
        assert errors == []
        assert boxes == [BoundingBox(0, 0.5, 0.5, 0.1, 0.2)]

    def test_empty_text(self):
        boxes, errors = parse_yolo_labels("")
        assert boxes == [] and errors == []

    def test_blank_lines_skipped(self):
        boxes, errors = parse_yolo_labels("\n\n0 0.5 0.5 0.1 0.1\n\n")
        assert len(boxes) == 1 and errors == []

    def test_wrong_field_count(self):
        boxes, errors = parse_yolo_labels("0 0.5 0.5 0.1")
        assert boxes == []
        assert len(errors) == 1
        assert errors[0].line_no == 1
        assert "5 fields" in errors[0].reason

    def test_non_numeric(self):
        boxes, errors = parse_yolo_labels("0 a 0.5 0.1 0.1")
        assert boxes == [] and errors[0].reason == "non-numeric field"

    def test_out_of_range(self):
        _, errors = parse_yolo_labels("0 1.5 0.5 0.1 0.1")
        assert errors[0].reason == "value outside [0, 1]"

    def test_parse_continues_past_bad_line(self):
        text = "0 0.5 0.5 0.1 0.1\nbogus line here\n1 0.2 0.2 0.05 0.05\n"
        boxes, errors = parse_yolo_labels(text)
        assert len(boxes) == 2
        assert [e.line_no for e in errors] == [2]

    def test_overhanging_box_clamped(self):
        boxes, _ = parse_yolo_labels("0 0.02 0.5 0.1 0.1")
        (box,) = boxes
        x0, y0, x1, y1 = box.corners()
        assert x0 == pytest.approx(0.0)
        assert x1 == pytest.approx(0.07)
        assert box.w == pytest.approx(0.07)

    def test_interior_box_preserved_exactly(self):
        boxes, _ = parse_yolo_labels("3 0.43721 0.51101 0.12345 0.2")
        (box,) = boxes
        assert (box.cx, box.cy, box.w, box.h) == (0.43721, 0.51101, 0.12345, 0.2)
        assert box.class_id == 3

    def test_sub_pixel_box_rejected_with_image_size(self):
        _, errors = parse_yolo_labels("0 0.5 0.5 0.001 0.5", image_size=(400, 400))
        assert errors and "sub-pixel" in errors[0].reason
        boxes, errors = parse_yolo_labels("0 0.5 0.5 0.01 0.5", image_size=(400, 400))
        assert boxes and not errors


class TestBoundingBox:

    def test_invariants(self):
        with pytest.raises(ValueError):
            BoundingBox(-1, 0.5, 0.5, 0.1, 0.1)
        with pytest.raises(ValueError):
            BoundingBox(0, 0.5, 0.5, 0.0, 0.1)
        with pytest.raises(ValueError):
            BoundingBox(0, 1.5, 0.5, 0.1, 0.1)

    def test_to_pixels(self):
        box = BoundingBox(0, 0.5, 0.5, 0.5, 0.25)
        assert box.to_pixels((400, 400)) == (100.0, 150.0, 300.0, 250.0)


class TestRoundTrip:

    @given(st.lists(st.tuples(
        st.integers(0, 20),
        st.floats(0.2, 0.8), st.floats(0.2, 0.8),
        st.floats(0.01, 0.2), st.floats(0.01, 0.2)), max_size=20))
    def test_serialize_parse_identity_at_six_decimals(self, raw):
        boxes = [BoundingBox(c, round(cx, 6), round(cy, 6), round(w, 6), round(h, 6))
                 for c, cx, cy, w, h in raw]
        text = serialize_yolo_labels(boxes)
        parsed, errors = parse_yolo_labels(text)
        assert errors == []
        assert len(parsed) == len(boxes)
        for a, b in zip(parsed, boxes):
            assert a.class_id == b.class_id
            for f in ("cx", "cy", "w", "h"):
                assert getattr(a, f) == pytest.approx(getattr(b, f), abs=5e-7)

    def test_empty_serializes_to_empty(self):
        assert serialize_yolo_labels([]) == ""
