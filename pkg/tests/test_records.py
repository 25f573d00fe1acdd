"""Annotation record serialization and the append-only store."""
import json
from datetime import date, datetime, timezone

import pytest

from shadowheight.dataset import (
    AnnotationRecord,
    BoundingBox,
    RecordStore,
    read_records,
    record_from_line,
    record_to_line,
    write_records,
)
from shadowheight.dataset.records import FIELD_ORDER
from shadowheight.errors import StoreLocked
from shadowheight.solar import GeoLocation


def make_record(**overrides):
    base = dict(
        image_id="img_001",
        bbox=BoundingBox(0, 0.5, 0.5, 0.2, 0.2),
        loc=GeoLocation(31.23, 121.47),
        capture_date=date(2015, 6, 1),
        shadow_start_px=(100.0, 110.0),
        shadow_end_px=(112.0, 119.5),
        vertical_edge_px=4.2,
        capture_time=datetime(2015, 6, 1, 2, 30, 0, tzinfo=timezone.utc),
        gt_height_m=21.0,
        gt_floors=7,
    )
    base.update(overrides)
    return AnnotationRecord(**base)


class TestRecord:

    def test_endpoints_both_or_neither(self):
        with pytest.raises(ValueError):
            make_record(shadow_start_px=(1.0, 2.0), shadow_end_px=None)
        make_record(shadow_start_px=None, shadow_end_px=None)

    def test_ground_truth_flags(self):
        assert make_record().has_ground_truth
        assert make_record(gt_height_m=None, gt_floors=3).has_ground_truth
        assert not make_record(gt_height_m=None, gt_floors=None).has_ground_truth

    def test_shadow_length(self):
        from shadowheight.geometry import DEFAULT_GSD
        rec = make_record(shadow_start_px=(0, 0), shadow_end_px=(3, 4))
        assert rec.shadow_length_m(DEFAULT_GSD) == pytest.approx(12.5)
        assert make_record(shadow_start_px=None, shadow_end_px=None).shadow_length_m(DEFAULT_GSD) is None


class TestLineFormat:

    def test_round_trip_full(self):
        rec = make_record()
        assert record_from_line(record_to_line(rec)) == rec

    def test_round_trip_with_nulls(self):
        rec = make_record(shadow_start_px=None, shadow_end_px=None,
                          vertical_edge_px=None, capture_time=None,
                          gt_height_m=None, gt_floors=None)
        line = record_to_line(rec)
        assert record_from_line(line) == rec
        payload = json.loads(line)
        assert payload["shadow_start_px"] is None  # explicit null tokens
        assert payload["gt_height_m"] is None

    def test_fixed_field_order(self):
        payload = json.loads(record_to_line(make_record()))
        assert tuple(payload.keys()) == FIELD_ORDER

    def test_one_record_per_line(self, tmp_path):
        records = [make_record(image_id=f"img_{i}") for i in range(3)]
        path = tmp_path / "r.ndrec"
        write_records(records, path)
        text = path.read_text()
        assert text.count("\n") == 3
        assert read_records(path) == records


class TestStore:

    def test_append_and_replay(self, tmp_path):
        path = tmp_path / "store.ndrec"
        records = [make_record(image_id=f"img_{i}") for i in range(5)]
        with RecordStore(path) as store:
            for rec in records:
                store.append(rec)
        # Fresh handle replays the identical record set.
        assert RecordStore(path).records() == records

    def test_single_writer_lock(self, tmp_path):
        path = tmp_path / "store.ndrec"
        with RecordStore(path):
            with pytest.raises(StoreLocked):
                RecordStore(path).open_writer()
        # Released on close.
        with RecordStore(path):
            pass

    def test_append_requires_writer(self, tmp_path):
        store = RecordStore(tmp_path / "store.ndrec")
        with pytest.raises(StoreLocked):
            store.append(make_record())

    def test_compaction_keeps_latest_per_key(self, tmp_path):
        path = tmp_path / "store.ndrec"
        first = make_record(gt_height_m=10.0)
        second = make_record(gt_height_m=20.0)  # same image and box: supersedes
        other = make_record(image_id="img_002")
        with RecordStore(path) as store:
            store.append(first)
            store.append(other)
            store.append(second)
            dropped = store.compact()
            assert dropped == 1
            # Store remains appendable after compaction.
            store.append(make_record(image_id="img_003"))
        remaining = RecordStore(path).records()
        assert second in remaining and first not in remaining
        assert len(remaining) == 3

    def test_reader_does_not_need_lock(self, tmp_path):
        path = tmp_path / "store.ndrec"
        with RecordStore(path) as store:
            store.append(make_record())
            assert len(RecordStore(path).records()) == 1

    def test_missing_file_reads_empty(self, tmp_path):
        assert RecordStore(tmp_path / "absent.ndrec").records() == []
