"""Ground-truth unit conversion, noise rules, and analytic test-subset selection.

Floor counts convert to meters at 3 m per floor. Two noise rules then apply:
heights above the 30 m cap collapse to the single 33 m label (tall buildings
carry disproportionate label error), and low buildings (<= 9 m) whose marked
shadow is implausibly long (>= 50 m by default) are dropped as annotation
mistakes. The outlier threshold is configurable because its unit is a
judgment call; this artifact treats it as meters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from ..errors import MissingFields, NonPositiveFloors
from ..geometry import DEFAULT_GSD, GroundSampling, height_from_shadow
from ..solar import solar_position
from .records import AnnotationRecord

METERS_PER_FLOOR = 3.0
HEIGHT_CAP_M = 30.0
CAP_LABEL_M = 33.0  # next floor label above the cap: 3 * (10 + 1)
LOW_HEIGHT_MAX_M = 9.0
SHADOW_OUTLIER_M = 50.0


def floors_to_height(floors: int) -> float:
    """Floor count to height in meters (3 m per floor)."""
    if floors < 1:
        raise NonPositiveFloors(f"floor count must be >= 1, got {floors}")
    return METERS_PER_FLOOR * float(floors)


@dataclass
class CleaningStats:
    """Per-rule accounting for one cleaning pass; input = kept + dropped."""

    n_input: int = 0
    n_kept: int = 0
    n_capped: int = 0
    n_dropped_shadow_outlier: int = 0
    n_heights_from_floors: int = 0
    n_without_ground_truth: int = 0
    height_histogram: dict[float, int] = field(default_factory=dict)

    @property
    def n_dropped(self) -> int:
        return self.n_dropped_shadow_outlier


def _effective_height(record: AnnotationRecord) -> float | None:
    if record.gt_height_m is not None:
        return record.gt_height_m
    if record.gt_floors is not None:
        return floors_to_height(record.gt_floors)
    return None


def height_bin_label(height_m: float) -> float:
    """Snap a height to its 3 m label bin (3, 6, ..., 30) or the 33 cap label."""
    if height_m > HEIGHT_CAP_M:
        return CAP_LABEL_M
    return min(HEIGHT_CAP_M, max(METERS_PER_FLOOR,
               METERS_PER_FLOOR * math.floor(height_m / METERS_PER_FLOOR + 0.5)))


def clean_records(records, *, gsd: GroundSampling = DEFAULT_GSD,
                  shadow_outlier_m: float = SHADOW_OUTLIER_M):
    """Apply the noise rules; returns (cleaned_records, stats). Idempotent."""
    stats = CleaningStats(n_input=len(records))
    cleaned: list[AnnotationRecord] = []
    for record in records:
        height = _effective_height(record)
        if height is None:
            stats.n_without_ground_truth += 1
            stats.n_kept += 1
            cleaned.append(record)
            continue
        if record.gt_height_m is None:
            stats.n_heights_from_floors += 1
            record = record.with_height(height)

        shadow = record.shadow_length_m(gsd)
        if (height <= LOW_HEIGHT_MAX_M and shadow is not None
                and shadow >= shadow_outlier_m):
            stats.n_dropped_shadow_outlier += 1
            continue

        if height > HEIGHT_CAP_M and height != CAP_LABEL_M:
            record = record.with_height(CAP_LABEL_M)
            stats.n_capped += 1
        stats.n_kept += 1
        label = height_bin_label(record.gt_height_m)
        stats.height_histogram[label] = stats.height_histogram.get(label, 0) + 1
        cleaned.append(record)
    return cleaned, stats


def select_test_subset(records, *, threshold_m: float = 2.5,
                       gsd: GroundSampling = DEFAULT_GSD) -> list[AnnotationRecord]:
    """Keep records whose annotated shadow reproduces the true height analytically.

    A record passes when |shadow * tan(elevation) - gt_height| <= threshold_m,
    with elevation taken at the record's capture time. Requires shadow
    endpoints, capture time, and ground truth on every record.
    """
    kept = []
    for i, record in enumerate(records):
        missing = [name for name, ok in (
            ("shadow endpoints", record.has_shadow),
            ("capture_time", record.capture_time is not None),
            ("ground truth", record.has_ground_truth),
        ) if not ok]
        if missing:
            raise MissingFields(f"record {i} ({record.image_id}) lacks: {', '.join(missing)}")
        height = _effective_height(record)
        sigma = solar_position(record.loc, record.capture_time)
        estimate = height_from_shadow(record.shadow_length_m(gsd), sigma)
        if abs(estimate - height) <= threshold_m:
            kept.append(record)
    return kept
