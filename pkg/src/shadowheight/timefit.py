"""Recover the unknown time-of-day of image capture from shadow annotations.

Freely available overhead imagery usually carries a capture date but no
time, and the sun elevation needed by the height formula depends on both.
Given buildings with known heights and annotated shadow lengths, the capture
time is the instant whose implied heights best match the ground truth:

    best_time = argmin_t RMSE_i( shadow_i * tan(elevation(t)) - height_i )

The search is a uniform 60 s grid over the daylight window followed by
golden-section refinement to 1 s inside the winning bracket. Elevation alone
cannot distinguish the two sun-symmetric times of day; ties break toward the
earliest candidate and all grid-level local minima are reported so callers
can see the morning/afternoon ambiguity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, datetime, timedelta

import numpy as np

from .errors import EmptyInput, PolarNight
from .solar import GeoLocation, daylight_window, delta_t_seconds, julian_day, position_batch


@dataclass(frozen=True)
class TimeFit:
    """Result of a capture-time search."""

    best_time: datetime
    residual_rmse_m: float
    n_buildings: int
    search_step_s: float
    # Grid-level local minima as (time, rmse), best first; with sun-symmetric
    # geometry this typically holds the morning and afternoon candidates.
    local_minima: tuple[tuple[datetime, float], ...] = ()


def _rmse_profile(elev_deg: np.ndarray, shadows_m: np.ndarray,
                  heights_m: np.ndarray) -> np.ndarray:
    """Height-error RMSE for each candidate elevation (vectorized)."""
    tans = np.tan(np.deg2rad(elev_deg))[:, None]
    err = shadows_m[None, :] * tans - heights_m[None, :]
    return np.sqrt(np.mean(err * err, axis=1))


def infer_capture_time(capture_date: date, loc: GeoLocation,
                       buildings, *, search_step_s: float = 60.0) -> TimeFit:
    """Fit the capture time for a set of (shadow_length_m, gt_height_m) pairs.

    Raises EmptyInput for an empty building list and PolarNight when the
    location has no daylight on the given date. Deterministic: identical
    inputs always produce the identical TimeFit.
    """
    pairs = [(float(s), float(h)) for s, h in buildings]
    if not pairs:
        raise EmptyInput("need at least one (shadow, height) pair")
    for s, h in pairs:
        if not (math.isfinite(s) and s >= 0 and math.isfinite(h) and h >= 0):
            raise ValueError(f"invalid (shadow, height) pair ({s!r}, {h!r})")
    if search_step_s <= 0:
        raise ValueError("search_step_s must be positive")

    window = daylight_window(loc, capture_date)
    if window is None:
        raise PolarNight(f"no daylight at {loc} on {capture_date}")
    sunrise, sunset = window

    shadows = np.array([s for s, _ in pairs])
    heights = np.array([h for _, h in pairs])

    span_s = (sunset - sunrise).total_seconds()
    offsets = np.arange(0.0, span_s + search_step_s / 2, search_step_s)
    offsets = offsets[offsets <= span_s]
    jd0 = julian_day(sunrise)
    dts = delta_t_seconds(sunrise)
    elev, _ = position_batch(loc, jd0 + offsets / 86400.0, dts)
    rmse = _rmse_profile(elev, shadows, heights)

    best_i = int(np.argmin(rmse))  # first occurrence: earliest-time tie-break

    minima = []
    for i in range(offsets.size):
        left = rmse[i - 1] if i > 0 else np.inf
        right = rmse[i + 1] if i < offsets.size - 1 else np.inf
        if rmse[i] <= left and rmse[i] <= right and not (i > 0 and rmse[i] == rmse[i - 1]):
            minima.append((i, float(rmse[i])))
    minima.sort(key=lambda m: (m[1], m[0]))
    local_minima = tuple(
        (sunrise + timedelta(seconds=float(offsets[i])), r) for i, r in minima)

    def objective(offset_s: float) -> float:
        e, _ = position_batch(loc, np.array([jd0 + offset_s / 86400.0]), dts)
        return float(_rmse_profile(e, shadows, heights)[0])

    # Golden-section to a 1 s interval inside each local-minimum bracket,
    # then snap to whole seconds. Refining every bracket matters: near
    # sun-symmetric days the 60 s grid's quantization noise can exceed the
    # morning/afternoon asymmetry, so the deepest grid point may sit on the
    # wrong side of solar noon. The grid winner stays in the candidate set,
    # so the result can never be worse than any grid point.
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0

    def refine(center_i: int) -> float:
        a = float(offsets[max(center_i - 1, 0)])
        b = float(offsets[min(center_i + 1, offsets.size - 1)])
        c = b - inv_phi * (b - a)
        d = a + inv_phi * (b - a)
        fc, fd = objective(c), objective(d)
        while b - a > 1.0:
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - inv_phi * (b - a)
                fc = objective(c)
            else:
                a, c, fc = c, d, fd
                d = a + inv_phi * (b - a)
                fd = objective(d)
        return c if fc < fd else d

    candidates = {float(offsets[best_i])}
    for i, _ in minima:
        center = refine(i)
        candidates.add(float(math.floor(center)))
        candidates.add(float(math.ceil(center)))
    best_off, best_val = None, math.inf
    for off in sorted(candidates):
        val = objective(off)
        if val < best_val:
            best_off, best_val = off, val
    best_time = sunrise + timedelta(seconds=best_off)

    return TimeFit(
        best_time=best_time,
        residual_rmse_m=best_val,
        n_buildings=len(pairs),
        search_step_s=float(search_step_s),
        local_minima=local_minima,
    )
