"""Hand-crafted features for the shadow-length regressor.

A 50x50x3 patch is reduced to 12 numbers chosen so the annotated quantity,
shadow extent along the sun's anti-azimuth, is nearly linearly recoverable:
channel statistics, a luminance profile along the shadow direction, and
dark-pixel extent measures projected onto that direction. The sun azimuth
orients the directional features. The spec below is hashed into serialized
models so stale weights cannot silently run against changed features.
"""
from __future__ import annotations

import hashlib
import json

import numpy as np

from ..errors import ShapeMismatch
from ..dataset.synth import shadow_direction

FEATURE_SPEC = {
    "version": 1,
    "patch_shape": [50, 50, 3],
    "names": [
        "mean_r", "mean_g", "mean_b",
        "var_r", "var_g", "var_b",
        "profile_min", "profile_std", "profile_argmin",
        "dark_fraction", "dark_longest_span", "dark_total_extent",
    ],
    "dark_threshold": 0.28,
    "profile_bins": 16,
    # Must stay below the 50 px sampling density along any projection,
    # otherwise axis-aligned directions leave empty bins inside solid runs.
    "span_bins": 40,
}

N_FEATURES = len(FEATURE_SPEC["names"])


def feature_spec_hash() -> str:
    canonical = json.dumps(FEATURE_SPEC, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _projection(sun_azimuth_deg: float, size: int = 50):
    dx, dy = shadow_direction(sun_azimuth_deg)
    xs = np.arange(size) + 0.5
    ys = np.arange(size) + 0.5
    s = xs[None, :] * dx + ys[:, None] * dy
    s = s - s.min()
    extent = s.max()
    if extent > 0:
        s = s / extent
    return s  # position along the shadow direction, normalized to [0, 1]


def extract_features(patch: np.ndarray, sun_azimuth_deg: float) -> np.ndarray:
    """Feature vector (12,) float64; deterministic in (patch, azimuth)."""
    patch = np.asarray(patch)
    if patch.shape != tuple(FEATURE_SPEC["patch_shape"]):
        raise ShapeMismatch(f"expected patch shape (50, 50, 3), got {patch.shape}")
    img = patch.astype(np.float64) / 255.0
    lum = img.mean(axis=2)
    s = _projection(sun_azimuth_deg, patch.shape[0])

    means = img.mean(axis=(0, 1))
    variances = img.var(axis=(0, 1))

    n_profile = FEATURE_SPEC["profile_bins"]
    bins = np.minimum((s * n_profile).astype(np.int64), n_profile - 1)
    sums = np.bincount(bins.ravel(), weights=lum.ravel(), minlength=n_profile)
    counts = np.bincount(bins.ravel(), minlength=n_profile)
    profile = np.where(counts > 0, sums / np.maximum(counts, 1), lum.mean())
    profile_min = profile.min()
    profile_std = profile.std()
    profile_argmin = float(np.argmin(profile)) / (n_profile - 1)

    dark = lum < FEATURE_SPEC["dark_threshold"]
    dark_fraction = dark.mean()
    n_span = FEATURE_SPEC["span_bins"]
    span_bins = np.minimum((s * n_span).astype(np.int64), n_span - 1)
    occupied = np.bincount(span_bins[dark].ravel(), minlength=n_span) > 0
    longest = run = 0
    for flag in occupied:
        run = run + 1 if flag else 0
        longest = max(longest, run)
    dark_longest_span = longest / n_span
    dark_total_extent = occupied.mean()

    return np.array([
        means[0], means[1], means[2],
        variances[0], variances[1], variances[2],
        profile_min, profile_std, profile_argmin,
        dark_fraction, dark_longest_span, dark_total_extent,
    ])
