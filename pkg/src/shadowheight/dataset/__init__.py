"""Dataset ingestion, cleaning, persistence, and synthetic-scene generation."""
from .cleaning import (
    CAP_LABEL_M,
    HEIGHT_CAP_M,
    METERS_PER_FLOOR,
    CleaningStats,
    clean_records,
    floors_to_height,
    height_bin_label,
    select_test_subset,
)
from .records import (
    AnnotationRecord,
    RecordStore,
    read_records,
    record_from_line,
    record_to_line,
    write_records,
)
from .raster import crop_and_resize, load_png, resample_rect, save_png
from .synth import BuildingSpec, random_scene, shadow_direction, synthesize_scene
from .yolo import BoundingBox, MalformedLine, parse_yolo_labels, serialize_yolo_labels

__all__ = [
    "AnnotationRecord", "BoundingBox", "BuildingSpec", "CAP_LABEL_M",
    "CleaningStats", "HEIGHT_CAP_M", "METERS_PER_FLOOR", "MalformedLine",
    "RecordStore", "clean_records", "crop_and_resize", "floors_to_height",
    "height_bin_label", "load_png", "parse_yolo_labels", "random_scene",
    "read_records", "record_from_line", "record_to_line", "resample_rect",
    "save_png", "select_test_subset", "serialize_yolo_labels",
    "shadow_direction", "synthesize_scene", "write_records",
]
