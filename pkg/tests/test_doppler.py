import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from leodoppler import doppler as d
from leodoppler.constants import make_constants

K = make_constants()
frac = st.floats(0.0, 1.0)


def test_zero_at_closest_approach():
    assert d.doppler_magnitude(0.042, 0.042, K) == 0.0
    assert d.doppler_small_angle(0.042, 0.042, K) == 0.0
    assert d.doppler_ground_track(0.0, K) == 0.0


def test_horizon_ceiling():
    assert d.doppler_magnitude(K.phi_max, 0.0, K) == pytest.approx(K.rho, rel=1e-12)
    assert d.doppler_ground_track(K.phi_max, K) == pytest.approx(K.rho, rel=1e-12)


def test_cell_edge_value():
    # 7.1 mrad from the subsatellite point at 600 km and 2 GHz
    assert d.doppler_magnitude(0.0071, 0.0, K) == pytest.approx(3.7e3, rel=0.05)


def test_domain_error():
    with pytest.raises(d.DopplerDomainError):
        d.doppler_magnitude(0.01, 0.02, K)
    # round-off below the tolerance is absorbed
    assert d.doppler_magnitude(0.02 - 1e-17, 0.02, K) == 0.0


def test_small_angle_accuracy():
    g = np.linspace(1e-6, K.phi_max, 10_000)
    for um in (0.0, 0.042, 0.1):
        gg = g[g > um]
        rel = np.abs(d.doppler_small_angle(gg, um, K) / d.doppler_magnitude(gg, um, K) - 1)
        assert rel[gg <= 0.35].max() < 0.02
        assert rel.max() < 0.025


def test_small_angle_ground_track_identity():
    g = np.linspace(0, 0.3, 100)
    assert np.allclose(d.doppler_small_angle(g, 0.0, K), d.doppler_ground_track_small_angle(g, K), rtol=1e-13)


def test_small_angle_converges():
    errs = []
    for scale in (1e-1, 1e-2, 1e-3):
        ex = d.doppler_magnitude(2 * scale, scale, K)
        errs.append(abs(d.doppler_small_angle(2 * scale, scale, K) / ex - 1))
    assert errs[0] > errs[1] > errs[2]


def test_inverse_of_small_angle_ground_track():
    s = np.linspace(0, 0.9 * K.rho, 50)
    g = d.ground_track_small_angle_inverse(s, K)
    assert np.allclose(d.doppler_ground_track_small_angle(g, K), s, rtol=1e-9)
    assert d.ground_track_small_angle_inverse(1.2 * K.rho, K) == np.inf


@given(frac, frac)
def test_ordering_and_ceiling(a, b):
    ups_min = a * K.phi_max
    ups = ups_min + b * (K.phi_max - ups_min)
    mag = d.doppler_magnitude(ups, ups_min, K)
    gt = d.doppler_ground_track(ups, K)
    assert 0 <= mag <= gt * (1 + 1e-12)
    assert gt <= K.rho * (1 + 1e-12)


def test_monotone_in_central_angle():
    for um in (0.0, 0.05, 0.2):
        g = np.linspace(um, K.phi_max, 5000)
        assert np.all(np.diff(d.doppler_magnitude(g, um, K)) > 0)


def test_sign_convention():
    assert d.doppler_signed(0.05, 0.02, -3.0, K).value > 0
    assert d.doppler_signed(0.05, 0.02, 3.0, K).value < 0
    assert d.doppler_signed(0.02, 0.02, 0.0, K).value == 0
