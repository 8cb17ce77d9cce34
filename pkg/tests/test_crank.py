import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sehasel.errors import RangeError, ValidationError
from sehasel.harness.crank import CrankSlider, crank_angle, default_geometry, solve_crank_radius


def test_zero_displacement_is_zero_angle():
    geom = CrankSlider(0.01, 0.04, 1.2)
    assert crank_angle(geom, 0.0) == 1.2


def test_default_geometry_spans_target_angle():
    geom = default_geometry()
    span = math.degrees(crank_angle(geom, 0.008) - crank_angle(geom, 0.0))
    assert span == pytest.approx(48.1, abs=0.1)
    assert geom.rod_length == 0.04 and geom.rod_length > geom.crank_radius > 0


def test_angle_monotone_over_stroke():
    geom = default_geometry()
    angles = [crank_angle(geom, h) for h in np.linspace(0, geom.max_displacement, 500)]
    assert all(b > a for a, b in zip(angles, angles[1:]))


@settings(max_examples=100, deadline=None)
@given(r=st.floats(0.002, 0.02), theta=st.floats(0.0, math.pi / 2))
def test_inverse_of_forward_kinematics(r, theta):
    geom = CrankSlider(r, 0.04)
    h = geom.displacement(theta)
    angle = crank_angle(geom, h)
    assert geom.displacement(angle - geom.zero_angle) == pytest.approx(h, abs=1e-15)
    # the travel is flat at inner dead centre, so the angle itself is only
    # well determined away from it
    if theta < math.pi / 2 - 1e-3:
        assert angle == pytest.approx(geom.zero_angle + theta, abs=1e-9)


def test_unreachable_and_invalid():
    geom = default_geometry()
    with pytest.raises(RangeError):
        crank_angle(geom, geom.max_displacement * 1.01)
    with pytest.raises(RangeError):
        crank_angle(geom, -1e-3)
    with pytest.raises(ValidationError):
        CrankSlider(0.05, 0.04)
    with pytest.raises(RangeError):
        solve_crank_radius(0.01, 0.5, math.radians(48.1))
