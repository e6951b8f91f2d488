import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from leodoppler import doppler as d
from leodoppler import doppler_dist as dd
from leodoppler import geometry
from leodoppler.angle_dist import CellGeometry, Diagnostics
from leodoppler.constants import make_constants

K = make_constants()
CELL = CellGeometry(0.0078, 0.1, 0.042)


def test_threshold_limits():
    assert dd.cos_ups_threshold(0.0, 0.042, K) == pytest.approx(math.cos(0.042), rel=1e-15)
    assert dd.cos_ups_threshold(K.rho, 0.0, K) == pytest.approx(K.k, rel=1e-12)


@settings(max_examples=50)
@given(st.floats(0.0, 0.3), st.floats(0.001, 0.99))
def test_threshold_inverts_doppler(ups_min, frac):
    ups = ups_min + frac * (K.phi_max - ups_min)
    s = d.doppler_magnitude(ups, ups_min, K)
    x = dd.cos_ups_threshold(s, ups_min, K)
    assert d.doppler_magnitude(math.acos(x), ups_min, K) == pytest.approx(s, rel=1e-9, abs=1e-6)
    assert math.acos(x) == pytest.approx(ups, abs=1e-7)


def test_threshold_rejects_unreachable():
    with pytest.raises(dd.UnattainableDopplerError):
        dd.cos_ups_threshold(0.999 * K.rho, 0.3, K)
    with pytest.raises(dd.UnattainableDopplerError):
        dd.cos_ups_threshold(1.5 * K.rho, 0.0, K)


def test_cdf_endpoints():
    for fn in (dd.doppler_cdf_approx, dd.doppler_cdf_exact):
        assert fn(0.0, CELL, K) == 0.0
        assert fn(K.rho, CELL, K) == 1.0
        assert fn(2 * K.rho, CELL, K) == 1.0
    with pytest.raises(ValueError):
        dd.doppler_cdf_approx(-1.0, CELL, K)


@pytest.mark.parametrize("fn", [dd.doppler_cdf_approx, dd.doppler_cdf_exact, dd.doppler_cdf_upper_bound])
def test_cdfs_monotone_in_unit_interval(fn):
    s = np.linspace(0, K.rho, 3001)
    f = fn(s, CELL, K)
    assert np.all(np.diff(f) >= 0) and f.min() >= 0 and f.max() <= 1


def test_averaged_cdf_matches_independent_sampling():
    # the average treats Ups_min as independent of Ups_t, each with its cell law
    rng = np.random.default_rng(17)
    n = 400_000
    pole = geometry.EZ
    cap_t = geometry.SphericalCap(geometry.from_colatitude(CELL.theta_v), CELL.theta_c)
    cap_m = geometry.SphericalCap(geometry.from_colatitude(CELL.mu_ups_min), CELL.theta_c)
    ups_t = geometry.central_angle(geometry.sample_uniform_cap(cap_t, rng, n), pole)
    ups_min = geometry.central_angle(geometry.sample_uniform_cap(cap_m, rng, n), pole)
    s_emp = np.sort(d.doppler_magnitude(ups_t, ups_min, K))
    s = np.linspace(s_emp[0], s_emp[-1], 200)
    emp = np.searchsorted(s_emp, s, side="right") / n
    assert np.max(np.abs(emp - dd.doppler_cdf_exact(s, CELL, K))) < 0.005


def test_averaged_cdf_converged():
    diag = Diagnostics()
    dd.doppler_cdf_exact(np.linspace(2.9e4, 3.3e4, 50), CELL, K, diag=diag)
    assert diag.notes == []


def test_average_and_fixed_angle_agree_for_tiny_cells():
    cell = CellGeometry(1e-4, 0.1, 0.042)
    lo, hi = dd.doppler_range(cell, K)
    s = np.linspace(0.99 * lo, 1.01 * hi, 400)
    gap = np.max(np.abs(dd.doppler_cdf_exact(s, cell, K) - dd.doppler_cdf_approx(s, cell, K)))
    assert gap < 0.08
    big = CellGeometry(0.0078, 0.1, 0.042)
    lo, hi = dd.doppler_range(big, K)
    s = np.linspace(0.99 * lo, 1.01 * hi, 400)
    assert gap <= np.max(np.abs(dd.doppler_cdf_exact(s, big, K) - dd.doppler_cdf_approx(s, big, K)))


def test_pdf_matches_cdf():
    lo, hi = dd.doppler_range(CELL, K)
    s = np.linspace(lo, hi, 60)[1:-1]
    h = 1e-3
    fd = (dd.doppler_cdf_approx(s + h, CELL, K) - dd.doppler_cdf_approx(s - h, CELL, K)) / (2 * h)
    pdf = dd.doppler_pdf(s, CELL, K)
    assert np.max(np.abs(fd - pdf)) < 1e-4 * pdf.max()
    total, _ = integrate.quad(lambda x: dd.doppler_pdf(x, CELL, K), lo, hi, limit=400,
                              points=np.linspace(lo, hi, 30)[1:-1])
    assert total == pytest.approx(1.0, abs=1e-3)
    grid = np.linspace(0, 1.2 * K.rho, 5000)
    assert np.all(dd.doppler_pdf(grid, CELL, K) >= 0)
    assert dd.doppler_pdf(1.1 * K.rho, CELL, K) == 0.0


def test_cdf_shifts_right_with_theta_v():
    s = np.linspace(0, K.rho, 2001)
    prev = None
    for tv in (0.06, 0.08, 0.1, 0.15, 0.2):
        f = dd.doppler_cdf_approx(s, CellGeometry(0.0078, tv, 0.042), K)
        if prev is not None:
            assert np.all(f <= prev + 1e-12)
        prev = f


def test_cdf_nondecreasing_in_altitude():
    s = np.linspace(0, K.rho, 2001)
    curves = [dd.doppler_cdf_approx(s, CELL, K.with_altitude(h)) for h in (600e3, 1200e3, 2000e3)]
    assert np.all(curves[1] >= curves[0]) and np.all(curves[2] >= curves[1])


def test_bound_inverse_and_edges():
    assert dd.doppler_cdf_upper_bound(0.0, CELL, K) == 0.0
    assert dd.doppler_cdf_upper_bound(1.2 * K.rho, CELL, K) == 1.0
    s = 3.0e4
    g = d.ground_track_small_angle_inverse(s, K)
    assert d.doppler_ground_track_small_angle(g, K) == pytest.approx(s, rel=1e-9)


def test_bound_sits_below_fixed_angle_cdf():
    # the ground-track small-angle Doppler overestimates the true one, so its
    # inverse angle is smaller and the resulting CDF can only be lower
    s = np.linspace(0, K.rho, 4001)
    for cell in (CELL, CellGeometry(0.0078, 0.0078, 0.0), CellGeometry(0.0314, 0.2, 0.1)):
        assert np.all(dd.doppler_cdf_upper_bound(s, cell, K) <= dd.doppler_cdf_approx(s, cell, K) + 1e-12)


@pytest.mark.parametrize("s", [11.05, 100.0, 1e3, 1e4, 3e4, 4.4e4])
def test_threshold_angle_full_precision_near_subsatellite(s):
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 40
    rho, kk = mpmath.mpf(K.rho), mpmath.mpf(K.k)
    exact = mpmath.findroot(lambda u: rho * mpmath.sin(u) / mpmath.sqrt(1 + kk**2 - 2 * kk * mpmath.cos(u)) - s,
                            (mpmath.mpf(0), mpmath.mpf(K.phi_max)), solver="anderson")
    assert float(dd._angle_for(np.array([s]), 0.0, K)[0]) == pytest.approx(float(exact), rel=1e-12)
