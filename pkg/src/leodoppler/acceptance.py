"""Reproduction and invariant checks run by ``leodoppler validate`` and the test suite.

Each check returns a :class:`CriterionResult`; ``info`` lines carry context
that does not affect the verdict (alternative conventions, larger cells).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import geometry, mc_sim
from .angle_dist import (
    CellGeometry,
    Diagnostics,
    NumericOptions,
    case_breakpoints,
    central_angle_cdf,
    central_angle_pdf,
    select_case,
    ups_min_cdf,
)
from .config import RunConfig
from .constants import cell_angle_from_radius, make_constants
from .differential import common_doppler, diff_doppler_cdf, max_diff_doppler, plan_clusters
from .doppler_dist import doppler_cdf_approx, doppler_cdf_exact, doppler_cdf_upper_bound, doppler_range
from .kernel import v_kernel_quadrature, v_kernel_series


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool = True
    details: list = field(default_factory=list)
    info: list = field(default_factory=list)
    runtime: float = 0.0
    budget: float = math.inf

    def check(self, ok: bool, message: str):
        self.passed = self.passed and bool(ok)
        self.details.append(("ok  " if ok else "FAIL") + " " + message)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number} [{verdict}] {self.name} ({self.runtime:.2f} s)"


def _within(x, ref, rel):
    return abs(x - ref) <= rel * abs(ref)


def _timed(fn):
    def run(cfg: RunConfig) -> CriterionResult:
        t0 = time.perf_counter()
        res = fn(cfg)
        res.runtime = time.perf_counter() - t0
        res.check(res.runtime < res.budget, f"runtime {res.runtime:.2f} s < {res.budget:g} s")
        return res

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


@_timed
def check_cluster_example(cfg: RunConfig) -> CriterionResult:
    """Worst-case spread of a 0.0071 rad cell and its split for a 950 Hz budget."""
    tol = cfg.tolerances.rel_example
    r = CriterionResult(1, "cell split for a 950 Hz spread budget", budget=5.0)
    for frame in ("ecf", "inertial"):
        k = replace(cfg.constants, h=600e3, f_o=2e9)
        k = make_constants(r_e=k.r_e, h=k.h, f_o=k.f_o, c=k.c, mu_grav=k.mu_grav, omega_E=k.omega_E,
                           inclination_i=k.inclination_i, rate_frame=frame)
        d0 = max_diff_doppler(0.0, 0.0071, k)
        plan = plan_clusters(0.0071, 950.0, k, rounding="floor")
        lines = [
            f"max spread at theta_v=0: {d0:.1f} Hz (target 3760 +/- {tol:.0%})",
            f"sub-cell half-angle {plan.sub_theta_c:.4e} rad (target 8.83e-4 +/- {tol:.0%})",
            f"cluster count {plan.cluster_count_reported} (ratio {plan.cluster_count_exact:.3f}, target 64)",
            f"residual {plan.residual_max:.1f} Hz at theta_v={plan.residual_argmax_theta_v:.4e} (target 945 Hz)",
        ]
        if frame != cfg.constants.rate_frame:
            r.info.extend(f"[{frame} rate] {s}" for s in lines)
            continue
        r.check(_within(d0, 3760.0, tol), lines[0])
        r.check(_within(plan.sub_theta_c, 8.83e-4, tol), lines[1])
        r.check(plan.cluster_count_reported == 64, lines[2])
        r.check(_within(plan.residual_max, 945.0, tol), lines[3])
        r.check(abs(plan.residual_argmax_theta_v - plan.sub_theta_c) <= 1e-6 * plan.sub_theta_c,
                "residual peak sits at theta_v = sub-cell half-angle")
    return r


@_timed
def check_phi_max(cfg: RunConfig) -> CriterionResult:
    r = CriterionResult(2, "horizon central angle at 1000 km", budget=1.0)
    k = cfg.constants.with_altitude(1000e3)
    r.check(abs(k.phi_max - 0.527) <= cfg.tolerances.phi_max_abs, f"phi_max = {k.phi_max:.5f} rad (target 0.527)")
    return r


def series_grid(n_v: int = 40, n_ratio: int = 25):
    v = np.linspace(0.05 / n_v, 0.05, n_v)
    ratio = np.linspace(1.0 / n_ratio, 1.0, n_ratio)
    vv, rr = np.meshgrid(v, ratio, indexing="ij")
    return (rr * vv).ravel(), vv.ravel()


@_timed
def check_series_accuracy(cfg: RunConfig) -> CriterionResult:
    """Two-term series against quadrature on a 1000-point grid with v <= 0.05."""
    r = CriterionResult(3, "kernel series accuracy (n=2) for v <= 0.05", budget=60.0)
    us, vs = series_grid()
    err = np.array([abs(v_kernel_series(u, v, 2) - v_kernel_quadrature(u, v)) for u, v in zip(us, vs)])
    i = int(np.argmax(err))
    r.check(err[i] < cfg.tolerances.series_abs,
            f"max |series - quadrature| = {err[i]:.3e} at u={us[i]:.4g}, v={vs[i]:.4g} over {err.size} points")
    small = vs <= 0.0078
    r.info.append(f"max error restricted to v <= 0.0078: {err[small].max():.3e}")
    return r


CAP_PAIRS = (
    (0.0078, 0.0), (0.0078, 0.002), (0.0078, 0.005), (0.0078, 0.0078), (0.0078, 0.05), (0.0078, 0.1),
    (0.0157, 0.01), (0.0314, 0.2), (0.05, 0.03), (0.1, 0.3), (0.3, 0.1), (0.2, 0.6),
)


@_timed
def check_cap_oracle(cfg: RunConfig) -> CriterionResult:
    """Central-angle CDF against counting 1e6 uniform points per cell."""
    r = CriterionResult(4, "central-angle CDF vs point counting", budget=120.0)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.simulation.seed, 4]))
    seen = set()
    pole = np.array([0.0, 0.0, 1.0])
    for tc, tv in CAP_PAIRS:
        cell = CellGeometry(tc, tv)
        cap = geometry.SphericalCap(geometry.from_colatitude(tv), tc)
        ang = geometry.central_angle(geometry.sample_uniform_cap(cap, rng, 1_000_000), pole)
        emp = mc_sim.EmpiricalCdf(ang)
        d = mc_sim.ks_distance(emp, lambda g: central_angle_cdf(g, cell, cfg.numerics))
        seen.update(select_case(g, cell).case.name for g in np.linspace(*cell.support, 400))
        r.check(d < cfg.tolerances.cap_sup, f"theta_c={tc}, theta_v={tv}: sup distance {d:.4f}")
    r.check({"CASE1", "CASE2", "CASE3", "CASE4"} <= seen, f"cases exercised: {sorted(seen)}")
    return r


UPS_MIN_VARIANTS = tuple((mu, h) for h in (600e3, 1200e3) for mu in (0.042, 0.1, 0.2))


@_timed
def check_ups_min(cfg: RunConfig) -> CriterionResult:
    """Per-user minimum central angle: analytical surrogate vs simulated constellation."""
    r = CriterionResult(5, "minimum central angle distribution vs simulation", budget=120.0)
    for mu, h in UPS_MIN_VARIANTS:
        d = _ups_min_distance(cfg, 0.0078, mu, h)
        r.check(d < cfg.tolerances.ups_min_sup, f"h={h / 1e3:.0f} km, mu={mu}: sup distance {d:.4f}")
    for radius in (100e3, 200e3):
        tc = cell_angle_from_radius(radius, cfg.constants.r_e)
        d = _ups_min_distance(cfg, tc, 0.1, 600e3)
        r.info.append(f"R_cell={radius / 1e3:.0f} km, mu=0.1: sup distance {d:.4f}")
    return r


def simulate_geometry(cfg: RunConfig, k, theta_c, theta_v, mu, seed_offset=0):
    sim = cfg.simulation
    walker = mc_sim.WalkerStarConfig(sim.num_planes, sim.sats_per_plane, k.inclination_i, k.h, sim.phase_offset)
    scn = mc_sim.scenario_for_geometry(
        k, theta_c, theta_v, mu, approaching=cfg.cell.approaching, walker=walker, sat_index=sim.sat_index,
        t=sim.t, num_ues=sim.samples, seed=sim.seed + seed_offset, chunk_size=sim.chunk_size,
        workers=sim.workers,
    )
    return scn, mc_sim.simulate_doppler_samples(scn)


def _ups_min_distance(cfg, theta_c, mu, h):
    k = cfg.constants.with_altitude(h)
    _, res = simulate_geometry(cfg, k, theta_c, mu, mu)
    return mc_sim.ks_distance(res.ups_min, lambda g: ups_min_cdf(g, theta_c, res.cell.mu_ups_min, cfg.numerics))


@_timed
def check_doppler_cdf(cfg: RunConfig) -> CriterionResult:
    """Doppler-magnitude CDF: constant-angle form, upper bound and exact average vs simulation."""
    r = CriterionResult(6, "Doppler CDF vs simulation, bound and exact average", budget=180.0)
    k = cfg.constants
    tol = cfg.tolerances
    for tv in cfg.grid.theta_v_list:
        scn, res = simulate_geometry(cfg, k, cfg.cell.theta_c, tv, cfg.cell.mu_ups_min)
        cell = res.cell
        emp = res.doppler
        ks = mc_sim.ks_distance(emp, lambda s: doppler_cdf_approx(s, cell, k, cfg.numerics))
        margin = float(np.min(doppler_cdf_upper_bound(emp.values, cell, k, cfg.numerics) - emp(emp.values)))
        lo, hi = doppler_range(cell, k)
        s = np.linspace(0.9 * lo, min(1.1 * hi, k.rho), cfg.grid.s_points)
        gap = float(np.max(np.abs(doppler_cdf_exact(s, cell, k, cfg.numerics)
                                  - doppler_cdf_approx(s, cell, k, cfg.numerics))))
        r.check(ks < tol.ks, f"theta_v={tv}: KS(approx, empirical) = {ks:.4f}")
        r.check(margin >= -tol.bound_slack, f"theta_v={tv}: min(bound - empirical) = {margin:.4f}")
        r.check(gap < tol.exact_vs_approx, f"theta_v={tv}: sup|exact - approx| = {gap:.4f}")
        ks_exact = mc_sim.ks_distance(emp, lambda s: doppler_cdf_exact(s, cell, k, cfg.numerics))
        r.info.append(f"theta_v={tv}: KS(exact average, empirical) = {ks_exact:.4f}")
    return r


@_timed
def check_altitude_order(cfg: RunConfig) -> CriterionResult:
    r = CriterionResult(7, "Doppler CDF nondecreasing in altitude", budget=10.0)
    cell = CellGeometry(cfg.cell.theta_c, cfg.cell.theta_v, cfg.cell.mu_ups_min)
    ks = [cfg.constants.with_altitude(h) for h in sorted(cfg.grid.altitudes)]
    s = np.linspace(0.0, max(k.rho for k in ks), 4001)
    curves = [doppler_cdf_approx(s, cell, k, cfg.numerics) for k in ks]
    for (h1, c1), (h2, c2) in zip(zip(sorted(cfg.grid.altitudes), curves), zip(sorted(cfg.grid.altitudes)[1:], curves[1:])):
        worst = float(np.min(c2 - c1))
        r.check(worst >= -1e-12, f"F(h={h2 / 1e3:.0f} km) - F(h={h1 / 1e3:.0f} km) >= 0 (min {worst:.2e})")
    return r


def _quantile(cdf, q, lo, hi, tol=1e-6):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cdf(mid) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def diff_spread(cell: CellGeometry, k, opts: NumericOptions):
    """Analytical ``q90 - q10`` of the residual Doppler."""
    d_t = common_doppler(cell, k)
    lo, hi = doppler_range(cell, k)

    def f(z):
        return diff_doppler_cdf(z, cell, k, opts)

    return _quantile(f, 0.9, lo - d_t, hi - d_t) - _quantile(f, 0.1, lo - d_t, hi - d_t)


@_timed
def check_diff_spread(cfg: RunConfig) -> CriterionResult:
    """Residual-Doppler spread trends in cell size and satellite offset, plus KS to simulation."""
    r = CriterionResult(8, "residual Doppler spread trends and KS", budget=180.0)
    k = cfg.constants
    mu = cfg.cell.mu_ups_min

    def block(tc, tv):
        _, res = simulate_geometry(cfg, k, tc, tv, mu)
        cell = res.cell
        ks = mc_sim.ks_distance(res.diff_doppler, lambda z: diff_doppler_cdf(z, cell, k, cfg.numerics))
        q10, q90 = res.diff_doppler.quantile([0.1, 0.9])
        return diff_spread(cell, k, cfg.numerics), float(q90 - q10), ks

    radii = sorted(cfg.grid.cell_radii)
    by_size = [block(cell_angle_from_radius(R, k.r_e), cfg.cell.theta_v) for R in radii]
    by_offset = [block(cfg.cell.theta_c, tv) for tv in sorted(cfg.grid.theta_v_list)]
    for label, rows, sign in (("cell radius", by_size, 1), ("theta_v", by_offset, -1)):
        for col, name in ((0, "analytical"), (1, "empirical")):
            w = np.array([row[col] for row in rows])
            ok = bool(np.all(sign * np.diff(w) > 0))
            trend = "increasing" if sign > 0 else "decreasing"
            r.check(ok, f"{name} q90-q10 strictly {trend} in {label}: " + ", ".join(f"{x:.1f}" for x in w))
    for R, row in zip(radii, by_size):
        r.check(row[2] < cfg.tolerances.ks, f"R_cell={R / 1e3:.0f} km: KS = {row[2]:.4f}")
    for tv, row in zip(sorted(cfg.grid.theta_v_list), by_offset):
        r.check(row[2] < cfg.tolerances.ks, f"theta_v={tv}: KS = {row[2]:.4f}")
    return r


INVARIANT_CELLS = ((0.0078, 0.003), (0.0078, 0.05), (0.05, 0.03), (0.3, 0.1), (0.1, 0.6))


@_timed
def check_invariants(cfg: RunConfig) -> CriterionResult:
    r = CriterionResult(9, "structural invariants", budget=120.0)
    tol = cfg.tolerances
    opts = cfg.numerics
    k = cfg.constants
    diag = Diagnostics()
    for tc, tv in INVARIANT_CELLS:
        cell = CellGeometry(tc, tv)
        lo, hi = cell.support
        g = np.linspace(0.0, min(math.pi, hi * 1.2), 10_000)
        f = central_angle_cdf(g, cell, opts, diag)
        r.check(np.all(np.diff(f) >= 0) and f[0] >= 0 and abs(f[-1] - 1.0) < 1e-12,
                f"({tc}, {tv}): CDF monotone on 1e4 points and reaches 1")
        cuts = case_breakpoints(tc, tv)
        inner = np.linspace(lo, hi, 203)[1:-1]
        inner = inner[np.min(np.abs(inner[:, None] - cuts[None, :]), axis=1) > 1e-3 * tc]
        h = 1e-6 * tc
        fd = (central_angle_cdf(inner + h, cell, opts) - central_angle_cdf(inner - h, cell, opts)) / (2 * h)
        pdf = central_angle_pdf(inner, cell, opts)
        rel = float(np.max(np.abs(fd - pdf)) / np.max(pdf))
        r.check(rel < tol.fd_rel, f"({tc}, {tv}): PDF vs finite differences, rel {rel:.2e}")
        jumps = [abs(central_angle_cdf(c + 1e-9, cell, opts) - central_angle_cdf(c - 1e-9, cell, opts))
                 for c in cuts if c > 1e-9]
        r.check(max(jumps) < tol.continuity, f"({tc}, {tv}): CDF jump at case boundaries {max(jumps):.2e}")
    r.check(diag.clamp_events == 0, f"probability clamps above 1e-9: {diag.clamp_events}")

    cell = CellGeometry(cfg.cell.theta_c, cfg.cell.theta_v, cfg.cell.mu_ups_min)
    d_t = common_doppler(cell, k)
    z = np.linspace(-d_t, k.rho - d_t, 501)
    shift = float(np.max(np.abs(diff_doppler_cdf(z, cell, k, opts) - doppler_cdf_approx(z + d_t, cell, k, opts))))
    r.check(shift == 0.0, f"residual CDF equals shifted Doppler CDF (max diff {shift:.1e})")

    tc = 0.0071
    jump = abs(max_diff_doppler(tc * (1 + 1e-12), tc, k) - max_diff_doppler(tc * (1 - 1e-12), tc, k))
    r.check(jump < tol.continuity, f"max spread continuous at theta_v = theta_c (jump {jump:.2e} Hz)")

    base = replace(cfg.simulation, samples=50_000, chunk_size=4096)
    outs = []
    for workers in (1, 3):
        c2 = replace(cfg, simulation=replace(base, workers=workers))
        outs.append(simulate_geometry(c2, k, cfg.cell.theta_c, cfg.cell.theta_v, cfg.cell.mu_ups_min)[1].doppler.values)
    r.check(np.array_equal(outs[0], outs[1]), "simulation identical for 1 and 3 workers")
    return r


CRITERIA = (
    check_cluster_example, check_phi_max, check_series_accuracy, check_cap_oracle, check_ups_min,
    check_doppler_cdf, check_altitude_order, check_diff_spread, check_invariants,
)


def run_all(cfg: RunConfig | None = None, only=None) -> list:
    cfg = cfg or RunConfig()
    return [fn(cfg) for i, fn in enumerate(CRITERIA, start=1) if only is None or i in only]
