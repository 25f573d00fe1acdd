"""Annotation records and their newline-delimited on-disk store.

One record describes one building: its detector box, optional shadow
endpoints marked by an annotator, geolocation, capture date, and whatever
ground truth is known. Records persist as one JSON object per line in a
``*.ndrec`` file with a fixed key order and explicit nulls, so files are
diff-able, corruption stays confined to single lines, and any language can
read them. The store is append-only with an explicit compaction step;
a lock file enforces the single-writer rule.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, replace
from datetime import date, datetime, timezone
from pathlib import Path

from ..errors import StoreLocked
from ..geometry import GroundSampling, shadow_length_from_endpoints
from ..solar import GeoLocation, as_utc
from .yolo import BoundingBox

FIELD_ORDER = (
    "image_id", "bbox", "shadow_start_px", "shadow_end_px", "vertical_edge_px",
    "lat_deg", "lon_deg", "capture_date", "capture_time", "gt_height_m", "gt_floors",
)


@dataclass(frozen=True)
class AnnotationRecord:
    """One annotated building."""

    image_id: str
    bbox: BoundingBox
    loc: GeoLocation
    capture_date: date
    shadow_start_px: tuple[float, float] | None = None
    shadow_end_px: tuple[float, float] | None = None
    vertical_edge_px: float | None = None
    capture_time: datetime | None = None
    gt_height_m: float | None = None
    gt_floors: int | None = None

    def __post_init__(self):
        if (self.shadow_start_px is None) != (self.shadow_end_px is None):
            raise ValueError("shadow endpoints must be both present or both absent")
        if self.gt_height_m is not None and not (
                math.isfinite(self.gt_height_m) and self.gt_height_m >= 0):
            raise ValueError(f"gt_height_m must be >= 0, got {self.gt_height_m!r}")
        if self.gt_floors is not None and self.gt_floors < 1:
            raise ValueError(f"gt_floors must be >= 1, got {self.gt_floors!r}")

    @property
    def has_ground_truth(self) -> bool:
        return self.gt_height_m is not None or self.gt_floors is not None

    @property
    def has_shadow(self) -> bool:
        return self.shadow_start_px is not None

    def shadow_length_m(self, gsd: GroundSampling) -> float | None:
        if not self.has_shadow:
            return None
        return shadow_length_from_endpoints(self.shadow_start_px, self.shadow_end_px, gsd)

    def with_height(self, height_m: float) -> "AnnotationRecord":
        return replace(self, gt_height_m=height_m)


def _xy(value):
    return None if value is None else [float(value[0]), float(value[1])]


def record_to_line(record: AnnotationRecord) -> str:
    b = record.bbox
    payload = {
        "image_id": record.image_id,
        "bbox": [b.class_id, b.cx, b.cy, b.w, b.h],
        "shadow_start_px": _xy(record.shadow_start_px),
        "shadow_end_px": _xy(record.shadow_end_px),
        "vertical_edge_px": record.vertical_edge_px,
        "lat_deg": record.loc.lat_deg,
        "lon_deg": record.loc.lon_deg,
        "capture_date": record.capture_date.isoformat(),
        "capture_time": (as_utc(record.capture_time).strftime("%Y-%m-%dT%H:%M:%SZ")
                         if record.capture_time is not None else None),
        "gt_height_m": record.gt_height_m,
        "gt_floors": record.gt_floors,
    }
    assert tuple(payload) == FIELD_ORDER
    return json.dumps(payload, separators=(", ", ": "))


def record_from_line(line: str) -> AnnotationRecord:
    raw = json.loads(line)
    cls, cx, cy, w, h = raw["bbox"]
    capture_time = raw.get("capture_time")
    return AnnotationRecord(
        image_id=raw["image_id"],
        bbox=BoundingBox(int(cls), cx, cy, w, h),
        loc=GeoLocation(raw["lat_deg"], raw["lon_deg"]),
        capture_date=date.fromisoformat(raw["capture_date"]),
        shadow_start_px=tuple(raw["shadow_start_px"]) if raw.get("shadow_start_px") else None,
        shadow_end_px=tuple(raw["shadow_end_px"]) if raw.get("shadow_end_px") else None,
        vertical_edge_px=raw.get("vertical_edge_px"),
        capture_time=(datetime.strptime(capture_time, "%Y-%m-%dT%H:%M:%SZ")
                      .replace(tzinfo=timezone.utc) if capture_time else None),
        gt_height_m=raw.get("gt_height_m"),
        gt_floors=raw.get("gt_floors"),
    )


def write_records(records, path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record_to_line(record) + "\n")


def read_records(path) -> list[AnnotationRecord]:
    path = Path(path)
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(record_from_line(line))
    return records


def _record_key(record: AnnotationRecord):
    return (record.image_id, record.bbox)


class RecordStore:
    """Append-only record store: one writer, durable appends, replay on open.

    Appends are flushed and fsynced per record, each a single write of one
    full line, so a reopened store replays to the identical record set.
    """

    def __init__(self, path):
        self.path = Path(path)
        self._fh = None
        self._lock_path = self.path.with_suffix(self.path.suffix + ".lock")

    def open_writer(self) -> "RecordStore":
        try:
            fd = os.open(self._lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise StoreLocked(f"{self.path} already has a writer "
                              f"(remove {self._lock_path} if it is stale)") from None
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        self._fh = open(self.path, "a", encoding="utf-8")
        return self

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None
            self._lock_path.unlink(missing_ok=True)

    def __enter__(self):
        return self.open_writer()

    def __exit__(self, *exc):
        self.close()

    def append(self, record: AnnotationRecord) -> None:
        if self._fh is None:
            raise StoreLocked("store is not open for writing; call open_writer()")
        self._fh.write(record_to_line(record) + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def records(self) -> list[AnnotationRecord]:
        if not self.path.exists():
            return []
        return read_records(self.path)

    def compact(self) -> int:
        """Rewrite keeping only the latest record per (image, box); returns dropped count."""
        records = self.records()
        latest: dict = {}
        for record in records:
            latest[_record_key(record)] = record
        kept = list(latest.values())
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        write_records(kept, tmp)
        os.replace(tmp, self.path)
        if self._fh is not None:  # reopen the append handle onto the new file
            self._fh.close()
            self._fh = open(self.path, "a", encoding="utf-8")
        return len(records) - len(kept)
