"""Detector-output label files: one `class cx cy w h` line per box, normalized."""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class BoundingBox:
    """Normalized center/extent box (detector convention, values in [0, 1])."""

    class_id: int
    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        if self.class_id < 0:
            raise ValueError(f"class_id must be >= 0, got {self.class_id}")
        for name in ("cx", "cy", "w", "h"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {v!r}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError("box extent must be positive")

    def corners(self) -> tuple[float, float, float, float]:
        """(x0, y0, x1, y1), normalized."""
        return (self.cx - self.w / 2.0, self.cy - self.h / 2.0,
                self.cx + self.w / 2.0, self.cy + self.h / 2.0)

    def to_pixels(self, image_size) -> tuple[float, float, float, float]:
        """(x0, y0, x1, y1) in pixels for an image of (width, height)."""
        width, height = image_size
        x0, y0, x1, y1 = self.corners()
        return (x0 * width, y0 * height, x1 * width, y1 * height)


@dataclass(frozen=True)
class MalformedLine:
    """A label line that could not be parsed; parsing continues past it."""

    line_no: int
    content: str
    reason: str


def _clamped(class_id: int, cx: float, cy: float, w: float, h: float) -> BoundingBox:
    # Boxes may legitimately overhang the image edge; clamp the corners and
    # recompute center/extent so the stored box satisfies its invariants.
    # Interior boxes keep their parsed values bit-exactly.
    if cx - w / 2.0 >= 0.0 and cy - h / 2.0 >= 0.0 and cx + w / 2.0 <= 1.0 and cy + h / 2.0 <= 1.0:
        return BoundingBox(class_id, cx, cy, w, h)
    x0 = max(0.0, cx - w / 2.0)
    y0 = max(0.0, cy - h / 2.0)
    x1 = min(1.0, cx + w / 2.0)
    y1 = min(1.0, cy + h / 2.0)
    return BoundingBox(class_id, (x0 + x1) / 2.0, (y0 + y1) / 2.0, x1 - x0, y1 - y0)


def parse_yolo_labels(text: str, image_size=None):
    """Parse a label file body into boxes, collecting per-line errors.

    Returns (boxes, errors); malformed lines are reported with their 1-based
    line number and skipped. When image_size=(width, height) is given, boxes
    whose pixel extent falls below one pixel are rejected as malformed.
    Values are kept exactly as parsed except that boxes overhanging the
    image edge are clamped back to [0, 1].
    """
    boxes: list[BoundingBox] = []
    errors: list[MalformedLine] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 5:
            errors.append(MalformedLine(line_no, raw, f"expected 5 fields, got {len(fields)}"))
            continue
        try:
            class_id = int(fields[0])
            cx, cy, w, h = (float(f) for f in fields[1:])
        except ValueError:
            errors.append(MalformedLine(line_no, raw, "non-numeric field"))
            continue
        if class_id < 0:
            errors.append(MalformedLine(line_no, raw, f"negative class id {class_id}"))
            continue
        if not all(math.isfinite(v) and 0.0 <= v <= 1.0 for v in (cx, cy, w, h)):
            errors.append(MalformedLine(line_no, raw, "value outside [0, 1]"))
            continue
        if w <= 0 or h <= 0:
            errors.append(MalformedLine(line_no, raw, "non-positive extent"))
            continue
        box = _clamped(class_id, cx, cy, w, h)
        if image_size is not None:
            width, height = image_size
            if box.w * width < 1.0 or box.h * height < 1.0:
                errors.append(MalformedLine(line_no, raw, "sub-pixel box for image size"))
                continue
        boxes.append(box)
    return boxes, errors


def serialize_yolo_labels(boxes) -> str:
    """Boxes back to label-file text, floats at 6 decimals, one box per line."""
    lines = [f"{b.class_id} {b.cx:.6f} {b.cy:.6f} {b.w:.6f} {b.h:.6f}" for b in boxes]
    return "\n".join(lines) + ("\n" if lines else "")
