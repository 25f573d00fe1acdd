"""Shadow/height trigonometry and pixel-to-meter conversion.

The whole analytic core is one right triangle: a building of height H under
sun elevation sigma casts a ground shadow of length S, with H = S * tan(sigma).
Everything else in the package feeds or consumes this relation.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import SunAtZenith, SunBelowHorizon
from .solar import SolarPosition

# Elevation band (deg) where the height formula is practically reliable;
# outside it results are still computed but carry a GrazingSunWarning.
USABLE_ELEVATION_DEG = (5.0, 85.0)


class GrazingSunWarning(UserWarning):
    """Sun elevation outside the reliable band: grazing shadow or near-zenith."""


@dataclass(frozen=True)
class GroundSampling:
    """Real-world meters represented by one image pixel."""

    meters_per_pixel: float

    def __post_init__(self):
        if not (math.isfinite(self.meters_per_pixel) and self.meters_per_pixel > 0):
            raise ValueError(f"meters_per_pixel must be positive, got {self.meters_per_pixel!r}")


# 400 px patches spanning 1000 m ground regions.
DEFAULT_GSD = GroundSampling(2.5)


def _elevation_of(sigma) -> float:
    if isinstance(sigma, SolarPosition):
        return sigma.elevation_deg
    return float(sigma)


def _check_elevation(elevation_deg: float) -> float:
    if not math.isfinite(elevation_deg):
        raise ValueError(f"elevation must be finite, got {elevation_deg!r}")
    if elevation_deg <= 0.0:
        raise SunBelowHorizon(f"elevation {elevation_deg:.3f} deg: shadow geometry undefined")
    if elevation_deg >= 90.0:
        raise SunAtZenith(f"elevation {elevation_deg:.3f} deg: no shadow cast")
    lo, hi = USABLE_ELEVATION_DEG
    if not (lo <= elevation_deg <= hi):
        warnings.warn(f"sun elevation {elevation_deg:.2f} deg outside the reliable "
                      f"[{lo:g}, {hi:g}] deg band", GrazingSunWarning, stacklevel=3)
    return elevation_deg


def height_from_shadow(shadow_m: float, sigma) -> float:
    """Building height in meters from shadow length and sun elevation.

    ``sigma`` may be a SolarPosition or a bare elevation in degrees, strictly
    inside (0, 90). Raises SunBelowHorizon / SunAtZenith outside that range;
    warns (GrazingSunWarning) outside the [5, 85] deg band.
    """
    elevation = _check_elevation(_elevation_of(sigma))
    if not (math.isfinite(shadow_m) and shadow_m >= 0):
        raise ValueError(f"shadow length must be a non-negative finite number, got {shadow_m!r}")
    return shadow_m * math.tan(math.radians(elevation))


def shadow_from_height(height_m: float, sigma) -> float:
    """Exact inverse of height_from_shadow: shadow length a building would cast."""
    elevation = _check_elevation(_elevation_of(sigma))
    if not (math.isfinite(height_m) and height_m >= 0):
        raise ValueError(f"height must be a non-negative finite number, got {height_m!r}")
    return height_m / math.tan(math.radians(elevation))


def shadow_length_from_endpoints(start_px, end_px, gsd: GroundSampling = DEFAULT_GSD) -> float:
    """Euclidean pixel distance between the marked endpoints, scaled to meters."""
    x0, y0 = float(start_px[0]), float(start_px[1])
    x1, y1 = float(end_px[0]), float(end_px[1])
    for v in (x0, y0, x1, y1):
        if not math.isfinite(v):
            raise ValueError("shadow endpoints must have finite coordinates")
    if not isinstance(gsd, GroundSampling):
        gsd = GroundSampling(float(gsd))
    return math.hypot(x1 - x0, y1 - y0) * gsd.meters_per_pixel
