"""Shared test helpers."""
from datetime import date, datetime, timedelta, timezone

import pytest

from shadowheight.solar import GeoLocation, solar_noon, solar_position


def find_time_at_elevation(loc: GeoLocation, day: date, target_deg: float,
                           tol_deg: float = 0.005) -> datetime:
    """Afternoon instant (1 s resolution) where the sun sits at target_deg.

    Bisects between local solar noon and noon+10h; the target must lie below
    the day's maximum elevation.
    """
    noon = solar_noon(loc, day)
    lo, hi = 0.0, 36000.0

    def elev(offset_s: float) -> float:
        return solar_position(loc, noon + timedelta(seconds=offset_s)).elevation_deg

    if elev(lo) < target_deg:
        raise ValueError(f"sun never reaches {target_deg} deg at {loc} on {day}")
    while hi - lo > 0.5:
        mid = (lo + hi) / 2.0
        if elev(mid) > target_deg:
            lo = mid
        else:
            hi = mid
    best = noon + timedelta(seconds=round((lo + hi) / 2.0))
    if abs(solar_position(loc, best).elevation_deg - target_deg) > tol_deg:
        raise ValueError("bisection failed to reach the target elevation")
    return best


@pytest.fixture
def equator_loc():
    return GeoLocation(0.0, 0.0)


@pytest.fixture
def midlat_loc():
    return GeoLocation(31.23, 121.47)


@pytest.fixture
def midlat_time():
    return datetime(2015, 6, 1, 2, 30, 0, tzinfo=timezone.utc)
