"""Synthetic nadir scenes with geometrically exact ground truth.

Buildings are opaque rectangular prisms on flat ground viewed straight down,
which is exactly the regime where height = shadow * tan(elevation) holds.
Each prism casts a hard shadow along the sun's anti-azimuth; the cast region
of an axis-aligned footprint is the convex hull of the footprint and its
translated copy. Because annotation endpoints are emitted as exact floats,
every record satisfies the height formula to floating-point precision
regardless of raster quantization; renders exist so the crop/feature path
has real pixels to chew on.

Image coordinates: origin top-left, x right (east), y down (south),
so north is -y and a sun azimuth A (clockwise from north) shines along
(sin A, -cos A); shadows run opposite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime

import numpy as np
from PIL import Image, ImageDraw

from ..errors import SunBelowHorizon
from ..geometry import DEFAULT_GSD, GroundSampling, shadow_from_height
from ..solar import GeoLocation, SolarPosition, solar_position
from .records import AnnotationRecord
from .yolo import BoundingBox

GROUND_RGB = (168, 168, 160)
SHADOW_RGB = (52, 52, 56)
ROOF_RGB = (203, 131, 95)


@dataclass(frozen=True)
class BuildingSpec:
    """Axis-aligned footprint (pixels) plus prism height (meters)."""

    x0_px: float
    y0_px: float
    w_px: float
    h_px: float
    height_m: float

    def corners(self):
        return ((self.x0_px, self.y0_px),
                (self.x0_px + self.w_px, self.y0_px),
                (self.x0_px + self.w_px, self.y0_px + self.h_px),
                (self.x0_px, self.y0_px + self.h_px))

    def center(self):
        return (self.x0_px + self.w_px / 2.0, self.y0_px + self.h_px / 2.0)

    def edge_point(self, direction) -> tuple[float, float]:
        """Boundary point where a ray from the center along direction exits."""
        dx, dy = direction
        tx = (self.w_px / 2.0) / abs(dx) if dx != 0 else math.inf
        ty = (self.h_px / 2.0) / abs(dy) if dy != 0 else math.inf
        t = min(tx, ty)
        cx, cy = self.center()
        return (cx + dx * t, cy + dy * t)


def shadow_direction(azimuth_deg: float) -> tuple[float, float]:
    """Unit (dx, dy) of shadow travel in image coords for a sun azimuth."""
    a = math.radians(azimuth_deg)
    return (-math.sin(a), math.cos(a))


def _convex_hull(points):
    """Monotone-chain hull; input is a handful of corner points."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _footprints_overlap(a: BuildingSpec, b: BuildingSpec) -> bool:
    return not (a.x0_px + a.w_px <= b.x0_px or b.x0_px + b.w_px <= a.x0_px
                or a.y0_px + a.h_px <= b.y0_px or b.y0_px + b.h_px <= a.y0_px)


def synthesize_scene(buildings, loc: GeoLocation, t: datetime, *,
                     gsd: GroundSampling = DEFAULT_GSD, image_size=(400, 400),
                     image_id: str = "synthetic"):
    """Render a scene and emit exact ground-truth records.

    Returns (image (H, W, 3) uint8, records). Requires the sun above the
    horizon at (loc, t) and pairwise non-overlapping footprints.
    """
    sun = solar_position(loc, t)
    if sun.elevation_deg <= 0:
        raise SunBelowHorizon(f"sun elevation {sun.elevation_deg:.2f} deg at {t}")
    buildings = list(buildings)
    for i, a in enumerate(buildings):
        if a.w_px <= 0 or a.h_px <= 0 or a.height_m < 0:
            raise ValueError(f"building {i} has non-positive extent or negative height")
        for b in buildings[i + 1:]:
            if _footprints_overlap(a, b):
                raise ValueError("building footprints must not overlap")

    width, height = image_size
    dx, dy = shadow_direction(sun.azimuth_deg)
    img = Image.new("RGB", (width, height), GROUND_RGB)
    draw = ImageDraw.Draw(img)

    hulls = []
    for spec in buildings:
        length_px = shadow_from_height(spec.height_m, sun) / gsd.meters_per_pixel
        shifted = [(x + dx * length_px, y + dy * length_px) for x, y in spec.corners()]
        hulls.append(_convex_hull(list(spec.corners()) + shifted))
    for hull in hulls:
        draw.polygon(hull, fill=SHADOW_RGB)
    for spec in buildings:
        x0, y0 = spec.x0_px, spec.y0_px
        draw.rectangle((x0, y0, x0 + spec.w_px, y0 + spec.h_px), fill=ROOF_RGB)

    records = []
    for spec, hull in zip(buildings, hulls):
        length_px = shadow_from_height(spec.height_m, sun) / gsd.meters_per_pixel
        # Annotator convention: start on the building's shadow-side edge,
        # end at the shadow tip. The distance is exactly the shadow length.
        start = spec.edge_point((dx, dy))
        end = (start[0] + dx * length_px, start[1] + dy * length_px)
        xs = [p[0] for p in hull]
        ys = [p[1] for p in hull]
        x0n = max(0.0, min(xs) / width)
        y0n = max(0.0, min(ys) / height)
        x1n = min(1.0, max(xs) / width)
        y1n = min(1.0, max(ys) / height)
        bbox = BoundingBox(0, (x0n + x1n) / 2.0, (y0n + y1n) / 2.0, x1n - x0n, y1n - y0n)
        records.append(AnnotationRecord(
            image_id=image_id,
            bbox=bbox,
            loc=loc,
            capture_date=t.date(),
            shadow_start_px=start,
            shadow_end_px=end,
            capture_time=t,
            gt_height_m=spec.height_m,
        ))
    return np.asarray(img), records


def random_scene(rng: np.random.Generator, n_buildings: int, loc: GeoLocation,
                 t: datetime, *, gsd: GroundSampling = DEFAULT_GSD,
                 image_size=(400, 400), image_id: str = "synthetic",
                 footprint_px=(8.0, 22.0), height_m=(3.0, 33.0),
                 max_tries: int = 4000):
    """Rejection-sample non-overlapping buildings whose shadows stay in frame."""
    sun = solar_position(loc, t)
    if sun.elevation_deg <= 0:
        raise SunBelowHorizon(f"sun elevation {sun.elevation_deg:.2f} deg at {t}")
    dx, dy = shadow_direction(sun.azimuth_deg)
    width, height = image_size

    placed: list[BuildingSpec] = []
    tries = 0
    while len(placed) < n_buildings:
        tries += 1
        if tries > max_tries:
            raise RuntimeError(f"could not place {n_buildings} buildings in "
                               f"{max_tries} tries; scene too crowded")
        w = float(rng.uniform(*footprint_px))
        h = float(rng.uniform(*footprint_px))
        hm = float(rng.uniform(*height_m))
        length_px = shadow_from_height(hm, sun) / gsd.meters_per_pixel
        pad = 2.0
        lo_x = pad + max(0.0, -dx * length_px)
        hi_x = width - pad - w - max(0.0, dx * length_px)
        lo_y = pad + max(0.0, -dy * length_px)
        hi_y = height - pad - h - max(0.0, dy * length_px)
        if hi_x <= lo_x or hi_y <= lo_y:
            continue
        spec = BuildingSpec(float(rng.uniform(lo_x, hi_x)), float(rng.uniform(lo_y, hi_y)),
                            w, h, hm)
        if any(_footprints_overlap(spec, other) for other in placed):
            continue
        placed.append(spec)
    return synthesize_scene(placed, loc, t, gsd=gsd, image_size=image_size,
                            image_id=image_id)
