"""Topocentric solar position and daylight-window utilities.

The position kernel implements the high-accuracy NREL solar position
algorithm (Reda & Andreas, Solar Energy 76(5), 2004): VSOP87-derived Earth
heliocentric position, IAU 1980 nutation, apparent sidereal time, and
equatorial-horizontal parallax. Stated accuracy of the algorithm is
0.0003 deg over years -2000..6000; this module targets (and is tested to)
0.05 deg over 1990-2050.

Results are geometric (no atmospheric refraction): shadow geometry is set
by the straight-line ray, and refraction only matters at grazing elevations
where the height formula is rejected anyway.

All inputs are UTC. Naive datetimes are interpreted as UTC; aware datetimes
are converted. The kernel is written array-agnostically so the same source
runs jitted on scalars (numba path) and vectorized on ndarrays (fallback).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone

import numpy as np

from ._accel import JIT_ENABLED, maybe_jit
from ._spa_tables import (
    HELIO_LAT_B0,
    HELIO_LAT_B1,
    HELIO_LON_L0,
    HELIO_LON_L1,
    HELIO_LON_L2,
    HELIO_LON_L3,
    HELIO_LON_L4,
    HELIO_LON_L5,
    HELIO_RAD_R0,
    HELIO_RAD_R1,
    HELIO_RAD_R2,
    HELIO_RAD_R3,
    HELIO_RAD_R4,
    NUTATION_ARG_MULT,
    NUTATION_EPS_CD,
    NUTATION_PSI_AB,
)


@dataclass(frozen=True)
class GeoLocation:
    """Geodetic coordinates in degrees; east longitudes positive."""

    lat_deg: float
    lon_deg: float

    def __post_init__(self):
        if not (math.isfinite(self.lat_deg) and -90.0 <= self.lat_deg <= 90.0):
            raise ValueError(f"lat_deg must be in [-90, 90], got {self.lat_deg!r}")
        if not (math.isfinite(self.lon_deg) and -180.0 <= self.lon_deg <= 180.0):
            raise ValueError(f"lon_deg must be in [-180, 180], got {self.lon_deg!r}")


@dataclass(frozen=True)
class SolarPosition:
    """Sun direction: elevation above the horizontal, azimuth clockwise from true north."""

    elevation_deg: float
    azimuth_deg: float

    def __post_init__(self):
        if not (math.isfinite(self.elevation_deg) and -90.0 <= self.elevation_deg <= 90.0):
            raise ValueError(f"elevation_deg must be in [-90, 90], got {self.elevation_deg!r}")
        if not (math.isfinite(self.azimuth_deg) and 0.0 <= self.azimuth_deg < 360.0):
            raise ValueError(f"azimuth_deg must be in [0, 360), got {self.azimuth_deg!r}")


def as_utc(t: datetime) -> datetime:
    """Interpret naive datetimes as UTC; convert aware ones."""
    if t.tzinfo is None:
        return t.replace(tzinfo=timezone.utc)
    return t.astimezone(timezone.utc)


def julian_day(t: datetime) -> float:
    """Proleptic-Gregorian UTC datetime to fractional Julian day."""
    t = as_utc(t)
    year, month = t.year, t.month
    day = t.day + (t.hour + (t.minute + (t.second + t.microsecond / 1e6) / 60.0) / 60.0) / 24.0
    if month <= 2:
        year -= 1
        month += 12
    century = year // 100
    b = 2 - century + century // 4
    return int(365.25 * (year + 4716)) + int(30.6001 * (month + 1)) + day + b - 1524.5


# Observed/projected TT-UT1 offsets, seconds, piecewise-linear by epoch year.
# Sub-minute accuracy is ample: 60 s of delta-T moves the sun < 0.001 deg.
_DELTA_T_YEARS = np.array(
    [1990.0, 1995.0, 2000.0, 2005.0, 2010.0, 2015.0, 2020.0, 2025.0,
     2030.0, 2035.0, 2040.0, 2045.0, 2050.0])
_DELTA_T_SECONDS = np.array(
    [56.86, 60.78, 63.83, 64.69, 66.07, 67.64, 69.36, 69.1,
     70.0, 71.5, 73.5, 76.0, 79.0])


def delta_t_seconds(t: datetime) -> float:
    """TT-UT offset at the given instant, linearly interpolated, clamped at ends."""
    t = as_utc(t)
    year = t.year + (t.month - 0.5) / 12.0
    return float(np.interp(year, _DELTA_T_YEARS, _DELTA_T_SECONDS))


@maybe_jit
def _series_sum(table, x):
    """Sum A*cos(B + C*x) over table rows; x may be scalar or ndarray."""
    total = x * 0.0
    for i in range(table.shape[0]):
        total = total + table[i, 0] * np.cos(table[i, 1] + table[i, 2] * x)
    return total


def _sun_position_kernel(jd, jde, lat_deg, lon_deg):
    """Geometric topocentric solar (elevation_deg, azimuth_deg[0..360 from north])."""
    jce = (jde - 2451545.0) / 36525.0
    jme = jce / 10.0
    jc = (jd - 2451545.0) / 36525.0

    # Earth heliocentric longitude/latitude (deg) and radius vector (AU).
    lon_sum = (_series_sum(HELIO_LON_L0, jme)
               + jme * (_series_sum(HELIO_LON_L1, jme)
               + jme * (_series_sum(HELIO_LON_L2, jme)
               + jme * (_series_sum(HELIO_LON_L3, jme)
               + jme * (_series_sum(HELIO_LON_L4, jme)
               + jme * _series_sum(HELIO_LON_L5, jme))))))
    helio_lon = np.rad2deg(lon_sum / 1e8) % 360.0
    lat_sum = _series_sum(HELIO_LAT_B0, jme) + jme * _series_sum(HELIO_LAT_B1, jme)
    helio_lat = np.rad2deg(lat_sum / 1e8)
    rad_sum = (_series_sum(HELIO_RAD_R0, jme)
               + jme * (_series_sum(HELIO_RAD_R1, jme)
               + jme * (_series_sum(HELIO_RAD_R2, jme)
               + jme * (_series_sum(HELIO_RAD_R3, jme)
               + jme * _series_sum(HELIO_RAD_R4, jme)))))
    radius_au = rad_sum / 1e8

    # Geocentric sun position.
    geo_lon = (helio_lon + 180.0) % 360.0
    geo_lat = -helio_lat

    # Nutation in longitude and obliquity (deg).
    x0 = 297.85036 + 445267.111480 * jce - 0.0019142 * jce * jce + jce ** 3 / 189474.0
    x1 = 357.52772 + 35999.050340 * jce - 0.0001603 * jce * jce - jce ** 3 / 300000.0
    x2 = 134.96298 + 477198.867398 * jce + 0.0086972 * jce * jce + jce ** 3 / 56250.0
    x3 = 93.27191 + 483202.017538 * jce - 0.0036825 * jce * jce + jce ** 3 / 327270.0
    x4 = 125.04452 - 1934.136261 * jce + 0.0020708 * jce * jce + jce ** 3 / 450000.0
    dpsi = jce * 0.0
    deps = jce * 0.0
    for i in range(NUTATION_ARG_MULT.shape[0]):
        arg = np.deg2rad(NUTATION_ARG_MULT[i, 0] * x0 + NUTATION_ARG_MULT[i, 1] * x1
                         + NUTATION_ARG_MULT[i, 2] * x2 + NUTATION_ARG_MULT[i, 3] * x3
                         + NUTATION_ARG_MULT[i, 4] * x4)
        dpsi = dpsi + (NUTATION_PSI_AB[i, 0] + NUTATION_PSI_AB[i, 1] * jce) * np.sin(arg)
        deps = deps + (NUTATION_EPS_CD[i, 0] + NUTATION_EPS_CD[i, 1] * jce) * np.cos(arg)
    dpsi = dpsi / 36000000.0
    deps = deps / 36000000.0

    # True obliquity of the ecliptic (deg).
    u = jme / 10.0
    eps0 = (84381.448 + u * (-4680.93 + u * (-1.55 + u * (1999.25 + u * (-51.38
            + u * (-249.67 + u * (-39.05 + u * (7.12 + u * (27.87 + u * (5.79
            + u * 2.45))))))))))
    eps = eps0 / 3600.0 + deps

    # Apparent sun longitude: nutation + annual aberration.
    aberration = -20.4898 / (3600.0 * radius_au)
    app_lon = geo_lon + dpsi + aberration

    # Apparent sidereal time at Greenwich (deg).
    gmst = (280.46061837 + 360.98564736629 * (jd - 2451545.0)
            + 0.000387933 * jc * jc - jc ** 3 / 38710000.0) % 360.0
    gast = gmst + dpsi * np.cos(np.deg2rad(eps))

    # Geocentric right ascension / declination (deg).
    lam = np.deg2rad(app_lon)
    beta = np.deg2rad(geo_lat)
    eps_r = np.deg2rad(eps)
    alpha = np.rad2deg(np.arctan2(np.sin(lam) * np.cos(eps_r)
                                  - np.tan(beta) * np.sin(eps_r), np.cos(lam))) % 360.0
    delta = np.arcsin(np.sin(beta) * np.cos(eps_r) + np.cos(beta) * np.sin(eps_r) * np.sin(lam))

    # Observer hour angle (deg) and equatorial-horizontal parallax correction
    # (sea-level observer; altitude shifts parallax by < 0.1 arcsec).
    hour_angle = (gast + lon_deg - alpha) % 360.0
    xi = np.deg2rad(8.794 / (3600.0 * radius_au))
    phi = np.deg2rad(lat_deg)
    flat_u = np.arctan(0.99664719 * np.tan(phi))
    term_x = np.cos(flat_u)
    term_y = 0.99664719 * np.sin(flat_u)
    h_r = np.deg2rad(hour_angle)
    dalpha = np.arctan2(-term_x * np.sin(xi) * np.sin(h_r),
                        np.cos(delta) - term_x * np.sin(xi) * np.cos(h_r))
    delta_topo = np.arctan2((np.sin(delta) - term_y * np.sin(xi)) * np.cos(dalpha),
                            np.cos(delta) - term_x * np.sin(xi) * np.cos(h_r))
    h_topo = h_r - dalpha

    sin_elev = (np.sin(phi) * np.sin(delta_topo)
                + np.cos(phi) * np.cos(delta_topo) * np.cos(h_topo))
    sin_elev = np.minimum(1.0, np.maximum(-1.0, sin_elev))
    elevation = np.rad2deg(np.arcsin(sin_elev))

    gamma = np.rad2deg(np.arctan2(np.sin(h_topo),
                                  np.cos(h_topo) * np.sin(phi)
                                  - np.tan(delta_topo) * np.cos(phi)))
    azimuth = (gamma + 180.0) % 360.0
    return elevation, azimuth


_kernel = maybe_jit(_sun_position_kernel)


def _batch_loop(jds, jdes, lat_deg, lon_deg, out_elev, out_az):
    for i in range(jds.shape[0]):
        e, a = _kernel(jds[i], jdes[i], lat_deg, lon_deg)
        out_elev[i] = e
        out_az[i] = a


_batch_loop_jit = maybe_jit(_batch_loop)


def position_batch(loc: GeoLocation, jds: np.ndarray, delta_t_s: float):
    """Elevation/azimuth arrays (deg) for an array of UT Julian days."""
    jds = np.asarray(jds, dtype=np.float64)
    jdes = jds + delta_t_s / 86400.0
    if JIT_ENABLED:
        elev = np.empty_like(jds)
        az = np.empty_like(jds)
        _batch_loop_jit(jds, jdes, loc.lat_deg, loc.lon_deg, elev, az)
        return elev, az
    return _kernel(jds, jdes, loc.lat_deg, loc.lon_deg)


def solar_position(loc: GeoLocation, t: datetime) -> SolarPosition:
    """Geometric topocentric solar position at a UTC instant."""
    jd = julian_day(t)
    jde = jd + delta_t_seconds(t) / 86400.0
    elevation, azimuth = _kernel(jd, jde, loc.lat_deg, loc.lon_deg)
    return SolarPosition(float(elevation), float(azimuth) % 360.0)


def _elevation_at_offset(loc: GeoLocation, center_jd: float, delta_t_s: float,
                         offset_s: float) -> float:
    jd = center_jd + offset_s / 86400.0
    e, _ = _kernel(jd, jd + delta_t_s / 86400.0, loc.lat_deg, loc.lon_deg)
    return float(e)


def _approx_noon(loc: GeoLocation, day: date) -> datetime:
    """Mean local solar noon in UTC (ignores the equation of time).

    Rounded to a whole second so every instant derived from it stays at the
    1 s resolution of the time types.
    """
    base = datetime(day.year, day.month, day.day, 12, 0, 0, tzinfo=timezone.utc)
    return base - timedelta(seconds=round(loc.lon_deg * 240.0))


def solar_noon(loc: GeoLocation, day: date) -> datetime:
    """Instant of maximum solar elevation for the local solar day, to 1 s."""
    center = _approx_noon(loc, day)
    center_jd = julian_day(center)
    dts = delta_t_seconds(center)
    lo, hi = -3600.0, 3600.0  # equation of time stays well within +/-20 min
    while hi - lo > 1.0:
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if _elevation_at_offset(loc, center_jd, dts, m1) < _elevation_at_offset(loc, center_jd, dts, m2):
            lo = m1
        else:
            hi = m2
    return center + timedelta(seconds=round((lo + hi) / 2.0))


def _bisect_horizon(loc: GeoLocation, center_jd: float, delta_t_s: float,
                    lo_s: float, hi_s: float, rising: bool) -> float:
    """Offset (s from center) where elevation crosses 0; keeps the sun-up side.

    For a rising crossing elevation(lo) <= 0 < elevation(hi); for a setting
    crossing elevation(lo) > 0 >= elevation(hi). Returns the sun-up endpoint
    of the final <=1 s bracket.
    """
    while hi_s - lo_s > 1.0:
        mid = (lo_s + hi_s) / 2.0
        up = _elevation_at_offset(loc, center_jd, delta_t_s, mid) > 0.0
        if up == rising:
            hi_s = mid
        else:
            lo_s = mid
    return hi_s if rising else lo_s


def daylight_window(loc: GeoLocation, day: date):
    """Sun-up interval (sunrise, sunset) of the local solar day, or None.

    The window is the contiguous elevation > 0 interval containing local
    solar noon of the given date, so it is well defined at all longitudes
    (for far-east/-west longitudes it may start or end on the neighbouring
    UTC date). Polar night returns None; polar day returns the full 24 h
    around solar noon. Crossings are bisected to <= 1 s; the returned
    endpoints lie on the sun-up side of each crossing.
    """
    center = _approx_noon(loc, day)
    center_jd = julian_day(center)
    dts = delta_t_seconds(center)

    step = 120.0
    offsets = np.arange(-43200.0, 43200.0 + step, step)
    elev, _ = position_batch(loc, center_jd + offsets / 86400.0, dts)
    i_max = int(np.argmax(elev))

    # Refine the daily maximum so sub-step polar-dawn slivers are not missed.
    lo = offsets[max(i_max - 1, 0)]
    hi = offsets[min(i_max + 1, offsets.size - 1)]
    while hi - lo > 1.0:
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if _elevation_at_offset(loc, center_jd, dts, m1) < _elevation_at_offset(loc, center_jd, dts, m2):
            lo = m1
        else:
            hi = m2
    peak_off = (lo + hi) / 2.0
    if _elevation_at_offset(loc, center_jd, dts, peak_off) <= 0.0:
        return None

    up = elev > 0.0
    # Sunrise: last non-positive sample before the peak.
    rise_idx = None
    for i in range(i_max, -1, -1):
        if not up[i]:
            rise_idx = i
            break
    if rise_idx is None:
        rise_off = peak_off - 43200.0
    else:
        rise_off = _bisect_horizon(loc, center_jd, dts,
                                   float(offsets[rise_idx]), float(offsets[rise_idx + 1]),
                                   rising=True)
    set_idx = None
    for i in range(i_max, offsets.size):
        if not up[i]:
            set_idx = i
            break
    if set_idx is None:
        set_off = peak_off + 43200.0
    else:
        set_off = _bisect_horizon(loc, center_jd, dts,
                                  float(offsets[set_idx - 1]), float(offsets[set_idx]),
                                  rising=False)

    sunrise = center + timedelta(seconds=math.ceil(rise_off))
    sunset = center + timedelta(seconds=math.floor(set_off))
    return sunrise, sunset
