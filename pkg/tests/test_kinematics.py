import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from leodoppler import kinematics as kin
from leodoppler.constants import make_constants

K = make_constants()


def test_reference_instant():
    pg = kin.PassGeometry(0.042, t_ref=10.0)
    assert kin.ups_from_time(pg, 10.0, K) == pytest.approx(0.042, abs=1e-15)


def test_ground_track_pass_is_linear():
    pg = kin.PassGeometry(0.0)
    t = np.array([-30.0, -1.0, 2.0, 45.0])
    assert np.allclose(kin.ups_from_time(pg, t, K), np.abs(K.omega_F * t), rtol=1e-12)


def test_time_round_trip():
    pg = kin.PassGeometry(0.042, t_ref=5.0)
    half = kin.visibility_half_arc(0.042, K) / K.omega_F
    t = np.linspace(5.0 - 0.999 * half, 5.0 + 0.999 * half, 2001)
    ups = kin.ups_from_time(pg, t, K)
    side = np.where(t < 5.0, -1, 1)
    back = np.array([kin.time_from_ups(pg, u, K, s) for u, s in zip(ups, side)])
    assert np.max(np.abs(back - t)) < 1e-9


def test_below_horizon():
    pg = kin.PassGeometry(0.1)
    with pytest.raises(kin.BelowHorizonError):
        kin.ups_from_time(pg, 1e5, K)
    with pytest.raises(kin.BelowHorizonError):
        kin.time_from_ups(pg, K.phi_max + 0.01, K)


def test_elevation_limits():
    assert kin.elevation_from_ups(0.0, K) == pytest.approx(math.pi / 2)
    assert kin.elevation_from_ups(K.phi_max, K) == pytest.approx(0.0, abs=1e-12)
    assert kin.ups_min_from_max_elevation(math.pi / 2, K) == pytest.approx(0.0, abs=1e-12)


@given(st.floats(0.0, 0.99 * K.phi_max))
def test_elevation_inverse(ups):
    alpha = kin.elevation_from_ups(ups, K)
    assert kin.ups_min_from_max_elevation(alpha, K) == pytest.approx(ups, abs=1e-10)


def test_slant_range():
    assert kin.slant_range(0.0, K) == pytest.approx(K.h)
    assert kin.slant_range(K.phi_max, K) == pytest.approx(K.horizon_range)
    r = kin.slant_range(np.linspace(0, K.phi_max, 1000), K)
    assert np.all(np.diff(r) > 0)


def test_common_visibility_angle():
    assert kin.common_visibility_angle(0.0, K) == K.phi_max
    assert kin.common_visibility_angle(0.0071, K) == pytest.approx(math.acos(6371 / 6971) - 0.0071)
    with pytest.raises(kin.BelowHorizonError):
        kin.common_visibility_angle(K.phi_max, K)
