"""Building-height estimation from single overhead images via shadow geometry.

Core: a building of height H under sun elevation sigma casts a shadow of
length H / tan(sigma); annotate the shadow, compute the sun from place and
time, and the height falls out. The package adds the supporting machinery:
a high-accuracy solar ephemeris, capture-time inference, dataset cleaning
and synthesis, a trainable shadow-length regressor with a height-space
loss, evaluation tooling, and an annotation-service backend.
"""
from .errors import ShadowHeightError
from .geometry import (
    DEFAULT_GSD,
    GroundSampling,
    height_from_shadow,
    shadow_from_height,
    shadow_length_from_endpoints,
)
from .solar import GeoLocation, SolarPosition, daylight_window, solar_noon, solar_position
from .timefit import TimeFit, infer_capture_time

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_GSD", "GeoLocation", "GroundSampling", "ShadowHeightError",
    "SolarPosition", "TimeFit", "daylight_window", "height_from_shadow",
    "infer_capture_time", "shadow_from_height", "shadow_length_from_endpoints",
    "solar_noon", "solar_position", "__version__",
]
