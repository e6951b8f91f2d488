import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from leodoppler import angle_dist as ad
from leodoppler import geometry

QUAD = ad.NumericOptions(v_method="quadrature")


def test_concentric_case():
    cell = ad.CellGeometry(0.0078, 0.0)
    g = np.linspace(0, 0.0078, 50)
    assert all(ad.select_case(x, cell).case == ad.Case.CASE1 for x in g)
    assert np.allclose(ad.central_angle_cdf(g, cell), (1 - np.cos(g)) / (1 - math.cos(0.0078)))
    assert np.allclose(ad.central_angle_pdf(g, cell), np.sin(g) / (1 - math.cos(0.0078)))


def test_case_selection():
    outside = ad.CellGeometry(0.0078, 0.05)
    g = math.acos(math.cos(0.0078) * math.cos(0.05)) - 1e-6
    assert ad.select_case(g + 2e-6, outside).case == ad.Case.CASE3
    assert ad.select_case(g, outside).case == ad.Case.CASE4
    assert ad.select_case(0.04, outside).case == ad.Case.DISJOINT
    assert ad.central_angle_cdf(0.04, outside) == 0.0
    assert ad.central_angle_cdf(0.0578, outside) == 1.0
    inside = ad.CellGeometry(0.0078, 0.003)
    assert ad.select_case(0.0049, inside).case == ad.Case.CASE2
    assert ad.select_case(0.004, inside) == ad.CaseTag(ad.Case.CASE1, ad.Scenario.PROJ_INSIDE)


def test_theta_min_branches():
    tc, tv = 0.0078, 0.05
    cell = ad.CellGeometry(tc, tv)
    g = 0.051
    assert ad.theta_min_branch(g, cell, ad.Case.CASE4) == pytest.approx(-ad.theta_min_branch(g, cell, ad.Case.CASE3))
    with pytest.raises(ad.BranchNotApplicable):
        ad.theta_min_branch(g, cell, ad.Case.CASE1)
    with pytest.raises(ad.BranchNotApplicable):
        ad.theta_min_branch(0.001, ad.CellGeometry(tc, 0.0), ad.Case.CASE2)
    edge = ad.CellGeometry(tc, tc)
    assert np.isfinite(ad.theta_min_branch(tc, edge, ad.select_case(tc, edge)))


def test_branch_continuity_at_shared_boundary():
    # Case 2 and Case 3 boundary: cos(g) = cos(tc) cos(tv), reachable when tc > tv
    tc, tv = 0.3, 0.1
    cell = ad.CellGeometry(tc, tv)
    g = math.acos(math.cos(tc) * math.cos(tv))
    # Case 2 measures theta_min from P, Case 3 from C; they meet at the same great circle
    t2 = ad.theta_min_branch(g, cell, ad.Case.CASE2)
    t3 = ad.theta_min_branch(g, cell, ad.Case.CASE3)
    assert t2 == pytest.approx(0.0, abs=1e-9) or abs(t3) < 1e-9 or abs(t2 + tv - (tv + t3)) < 1e-9
    assert t3 == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("tc, tv", [(0.0078, 0.05), (0.0078, 0.003), (0.3, 0.1), (0.05, 0.03)])
def test_matches_point_counting(tc, tv):
    rng = np.random.default_rng(5)
    cap = geometry.SphericalCap(geometry.from_colatitude(tv, 0.3), tc)
    ang = np.sort(geometry.central_angle(geometry.sample_uniform_cap(cap, rng, 1_000_000), geometry.EZ))
    cell = ad.CellGeometry(tc, tv)
    g = np.linspace(*cell.support, 300)
    emp = np.searchsorted(ang, g, side="right") / ang.size
    assert np.max(np.abs(emp - ad.central_angle_cdf(g, cell))) < 0.005


CELLS = [(0.0078, 0.003), (0.0078, 0.0078), (0.0078, 0.05), (0.05, 0.03), (0.3, 0.1), (0.1, 0.6)]


@pytest.mark.parametrize("tc, tv", CELLS)
def test_kernel_routes_agree(tc, tv):
    cell = ad.CellGeometry(tc, tv)
    g = np.linspace(*cell.support, 25)
    exact = ad.central_angle_cdf(g, cell)
    assert np.allclose(ad.central_angle_cdf(g, cell, QUAD), exact, atol=1e-8)


def test_series_route_converges_to_closed_form():
    cell = ad.CellGeometry(0.0078, 0.003)
    g = np.linspace(*cell.support, 25)
    exact = ad.central_angle_cdf(g, cell)
    errs = [np.max(np.abs(ad.central_angle_cdf(g, cell, ad.NumericOptions("series", n)) - exact))
            for n in (2, 10, 60)]
    assert errs[0] > errs[1] > errs[2]
    # small u/v terms converge slowly, so the gain per extra term is modest
    assert errs[2] < 0.025


@pytest.mark.parametrize("tc, tv", CELLS)
def test_pdf_normalized_and_matches_cdf(tc, tv):
    cell = ad.CellGeometry(tc, tv)
    lo, hi = cell.support
    cuts = ad.case_breakpoints(tc, tv)
    total = sum(integrate.quad(lambda x: ad.central_angle_pdf(x, cell), a, b, limit=200)[0]
                for a, b in zip(cuts[:-1], cuts[1:]))
    assert total == pytest.approx(1.0, abs=1e-3)
    g = np.linspace(lo, hi, 103)[1:-1]
    g = g[np.min(np.abs(g[:, None] - cuts[None, :]), axis=1) > 1e-3 * tc]
    h = 1e-6 * tc
    fd = (ad.central_angle_cdf(g + h, cell) - ad.central_angle_cdf(g - h, cell)) / (2 * h)
    pdf = ad.central_angle_pdf(g, cell)
    assert np.max(np.abs(fd - pdf)) < 1e-4 * np.max(pdf)
    assert np.all(pdf >= 0)


@pytest.mark.parametrize("tc, tv", CELLS)
def test_continuity_at_case_boundaries(tc, tv):
    cell = ad.CellGeometry(tc, tv)
    for c in ad.case_breakpoints(tc, tv):
        if c > 1e-9:
            jump = abs(ad.central_angle_cdf(c + 1e-9, cell) - ad.central_angle_cdf(c - 1e-9, cell))
            assert jump < 1e-6


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-4, 0.5), st.floats(0.0, 1.0))
def test_cdf_monotone_and_bounded(tc, frac):
    tv = frac * (math.pi / 2 - tc - 1e-3)
    cell = ad.CellGeometry(tc, tv)
    lo, hi = cell.support
    g = np.linspace(0, min(math.pi, hi + 0.1), 10_000)
    diag = ad.Diagnostics()
    f = ad.central_angle_cdf(g, cell, diag=diag)
    assert np.all(np.diff(f) >= 0)
    assert f[0] >= 0 and f[-1] == 1.0
    assert np.all(f[g <= lo] == 0) and np.all(f[g >= hi] == 1)
    assert diag.clamp_events == 0


def test_ups_min_distribution_delegates():
    assert ad.ups_min_cdf(0.004, 0.0078, 0.0) == pytest.approx((1 - math.cos(0.004)) / (1 - math.cos(0.0078)))
    g = np.linspace(0, 0.1, 400)
    f = ad.ups_min_cdf(g, 0.0078, 0.042)
    assert np.all(f[g <= 0.042 - 0.0078] == 0) and np.all(f[g >= 0.042 + 0.0078] == 1)
    assert ad.ups_min_pdf(0.042, 0.0078, 0.042) == ad.central_angle_pdf(0.042, ad.CellGeometry(0.0078, 0.042))


def test_cell_validation():
    with pytest.raises(ValueError):
        ad.CellGeometry(0.0, 0.1)
    with pytest.raises(ValueError):
        ad.CellGeometry(0.01, 0.05, 0.06)
    with pytest.raises(ValueError):
        ad.NumericOptions(v_method="simpson")
