"""Shadow/height trigonometry tests."""
import math
import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shadowheight.errors import SunAtZenith, SunBelowHorizon
from shadowheight.geometry import (
    DEFAULT_GSD,
    GrazingSunWarning,
    GroundSampling,
    height_from_shadow,
    shadow_from_height,
    shadow_length_from_endpoints,
)
from shadowheight.solar import SolarPosition


class TestHeightFromShadow:

    def test_forty_five_degrees_identity(self):
        assert height_from_shadow(10.0, 45.0) == pytest.approx(10.0, rel=1e-12)

    def test_zero_shadow_zero_height(self):
        assert height_from_shadow(0.0, 30.0) == 0.0

    def test_sixty_degrees_sqrt3(self):
        assert height_from_shadow(20.0, 60.0) == pytest.approx(20.0 * math.sqrt(3.0), rel=1e-12)

    def test_accepts_solar_position(self):
        pos = SolarPosition(45.0, 180.0)
        assert height_from_shadow(10.0, pos) == pytest.approx(10.0, rel=1e-12)

    def test_sun_below_horizon(self):
        with pytest.raises(SunBelowHorizon):
            height_from_shadow(10.0, 0.0)
        with pytest.raises(SunBelowHorizon):
            height_from_shadow(10.0, -12.0)

    def test_sun_at_zenith(self):
        with pytest.raises(SunAtZenith):
            height_from_shadow(10.0, 90.0)

    def test_grazing_band_warns(self):
        with pytest.warns(GrazingSunWarning):
            height_from_shadow(10.0, 3.0)
        with pytest.warns(GrazingSunWarning):
            height_from_shadow(10.0, 87.0)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            height_from_shadow(10.0, 45.0)  # in-band: no warning

    def test_rejects_bad_shadow(self):
        with pytest.raises(ValueError):
            height_from_shadow(-1.0, 45.0)
        with pytest.raises(ValueError):
            height_from_shadow(float("nan"), 45.0)

    def test_monotone_in_shadow_and_elevation(self):
        assert height_from_shadow(11.0, 40.0) > height_from_shadow(10.0, 40.0)
        assert height_from_shadow(10.0, 41.0) > height_from_shadow(10.0, 40.0)


class TestShadowFromHeight:

    def test_forty_five_degrees(self):
        assert shadow_from_height(10.0, 45.0) == pytest.approx(10.0, rel=1e-12)

    def test_zero_height(self):
        assert shadow_from_height(0.0, 30.0) == 0.0

    @settings(max_examples=300)
    @given(height=st.floats(0.0, 500.0), elevation=st.floats(5.0, 85.0))
    def test_round_trip_identity(self, height, elevation):
        shadow = shadow_from_height(height, elevation)
        back = height_from_shadow(shadow, elevation)
        assert back == pytest.approx(height, rel=1e-12, abs=1e-12)


class TestEndpointLength:

    def test_three_four_five(self):
        assert shadow_length_from_endpoints((0, 0), (3, 4), DEFAULT_GSD) == pytest.approx(12.5)

    def test_coincident_points(self):
        assert shadow_length_from_endpoints((10, 10), (10, 10), DEFAULT_GSD) == 0.0

    def test_patch_width_spans_kilometer(self):
        # 400 px at 2.5 m/px covers the full 1000 m patch extent.
        assert shadow_length_from_endpoints((0, 0), (400, 0), DEFAULT_GSD) == pytest.approx(1000.0)

    def test_accepts_bare_float_gsd(self):
        assert shadow_length_from_endpoints((0, 0), (3, 4), 2.0) == pytest.approx(10.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            shadow_length_from_endpoints((float("inf"), 0), (0, 0), DEFAULT_GSD)

    @given(
        x0=st.floats(-1e4, 1e4), y0=st.floats(-1e4, 1e4),
        x1=st.floats(-1e4, 1e4), y1=st.floats(-1e4, 1e4),
        dx=st.floats(-1e3, 1e3), dy=st.floats(-1e3, 1e3),
    )
    def test_symmetric_and_translation_invariant(self, x0, y0, x1, y1, dx, dy):
        a = shadow_length_from_endpoints((x0, y0), (x1, y1), DEFAULT_GSD)
        b = shadow_length_from_endpoints((x1, y1), (x0, y0), DEFAULT_GSD)
        assert a == b
        shifted = shadow_length_from_endpoints((x0 + dx, y0 + dy), (x1 + dx, y1 + dy), DEFAULT_GSD)
        assert shifted == pytest.approx(a, rel=1e-9, abs=1e-7)


class TestGroundSampling:

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            GroundSampling(0.0)
        with pytest.raises(ValueError):
            GroundSampling(-2.5)

    def test_default_matches_patch_geometry(self):
        assert DEFAULT_GSD.meters_per_pixel == 2.5
