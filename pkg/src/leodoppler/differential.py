"""Differential Doppler after compensating the Doppler at the cell center.

Also holds the worst-case instantaneous spread across a cell and a planner
that splits a cell into sub-cells whose spread stays below a threshold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .angle_dist import DEFAULT_OPTIONS, CellGeometry, NumericOptions
from .constants import SystemConstants
from .doppler import doppler_ground_track, doppler_magnitude
from .doppler_dist import doppler_cdf_approx, doppler_pdf
from .kinematics import BelowHorizonError

ROUNDING_MODES = ("floor", "ceil", "nearest")


def common_doppler(cell: CellGeometry, k: SystemConstants) -> float:
    """Doppler magnitude at the cell center, removed from every user by compensation."""
    if cell.theta_v > k.phi_max + 1e-12:
        raise BelowHorizonError("cell center is below the horizon")
    return float(doppler_magnitude(cell.theta_v, cell.mu_ups_min, k))


def diff_doppler_cdf(zeta, cell: CellGeometry, k: SystemConstants,
                     opts: NumericOptions = DEFAULT_OPTIONS):
    """CDF of the residual Doppler ``delta - D_t``; zero below ``-D_t``."""
    z = np.atleast_1d(np.asarray(zeta, dtype=float))
    s = z + common_doppler(cell, k)
    out = np.zeros(z.shape)
    ok = s >= 0
    if np.any(ok):
        out[ok] = doppler_cdf_approx(s[ok], cell, k, opts)
    return float(out[0]) if np.ndim(zeta) == 0 else out


def diff_doppler_pdf(zeta, cell: CellGeometry, k: SystemConstants,
                     opts: NumericOptions = DEFAULT_OPTIONS):
    z = np.atleast_1d(np.asarray(zeta, dtype=float))
    s = z + common_doppler(cell, k)
    out = np.zeros(z.shape)
    ok = s >= 0
    if np.any(ok):
        out[ok] = doppler_pdf(s[ok], cell, k, opts)
    return float(out[0]) if np.ndim(zeta) == 0 else out


def extreme_angles(theta_v, theta_c, approaching: bool = True):
    """Region and the two ground-track central angles of the extreme users.

    Region 2 (projection inside the cell) pairs the subsatellite point with the
    far edge; regions 1 and 3 pair the near and far edges.
    """
    tv = np.asarray(theta_v, dtype=float)
    inside = tv <= theta_c
    region = np.where(inside, 2, 1 if approaching else 3)
    near = np.where(inside, 0.0, tv - theta_c)
    far = tv + theta_c
    if approaching:
        return region, near, far
    return region, far, near


def max_diff_doppler(theta_v, theta_c: float, k: SystemConstants, approaching: bool = True):
    """Largest Doppler difference between two users of the cell at one instant (Hz).

    Worst case: both extreme users sit on the ground track (``Ups_min = 0``).
    """
    tv = np.asarray(theta_v, dtype=float)
    if np.any(tv < 0) or theta_c <= 0:
        raise ValueError("theta_v must be >= 0 and theta_c > 0")
    if np.any(tv + theta_c > k.phi_max + 1e-12):
        raise BelowHorizonError("cell extends beyond the horizon at this instant")
    _, u1, u2 = extreme_angles(tv, theta_c, approaching)
    out = np.abs(doppler_ground_track(u2, k) - doppler_ground_track(u1, k))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class PeakSearch:
    grid_points: int = 2001
    xtol: float = 1e-12


def peak_diff_doppler(theta_c: float, k: SystemConstants, search: PeakSearch = PeakSearch()):
    """Maximum of :func:`max_diff_doppler` over the common-visibility range of ``theta_v``.

    Grid scan followed by a bounded scalar refinement around the best grid node.
    Returns ``(peak_hz, argmax_theta_v)``.
    """
    hi = k.phi_max - theta_c
    if hi <= 0:
        raise BelowHorizonError("cell does not fit inside the visibility region")
    grid = np.unique(np.concatenate([np.linspace(0.0, hi, search.grid_points), [min(theta_c, hi)]]))
    vals = max_diff_doppler(grid, theta_c, k)
    i = int(np.argmax(vals))
    best_x, best_v = float(grid[i]), float(vals[i])
    a, b = float(grid[max(i - 1, 0)]), float(grid[min(i + 1, len(grid) - 1)])
    if b > a:
        res = optimize.minimize_scalar(
            lambda x: -max_diff_doppler(x, theta_c, k), bounds=(a, b), method="bounded",
            options={"xatol": search.xtol},
        )
        if -res.fun > best_v:
            best_x, best_v = float(res.x), float(-res.fun)
    return best_v, best_x


@dataclass(frozen=True)
class ClusterPlan:
    threshold: float
    parent_theta_c: float
    sub_theta_c: float
    cluster_count_exact: float
    cluster_count_reported: int
    residual_max: float
    residual_argmax_theta_v: float
    parent_peak: float
    rounding: str

    @property
    def feasible(self) -> bool:
        return self.residual_max <= self.threshold


def round_count(x: float, mode: str) -> int:
    if mode == "floor":
        return max(1, math.floor(x))
    if mode == "ceil":
        return max(1, math.ceil(x))
    if mode == "nearest":
        return max(1, math.floor(x + 0.5))
    raise ValueError(f"rounding must be one of {ROUNDING_MODES}, got {mode!r}")


def plan_clusters(parent_theta_c: float, threshold: float, k: SystemConstants,
                  rounding: str = "floor", tol: float = 1e-12,
                  search: PeakSearch = PeakSearch()) -> ClusterPlan:
    """Largest sub-cell half-angle whose worst-case spread stays within ``threshold``.

    The sub-cell half-angle is found by bisection on the peak spread; the count
    is the area ratio of parent to sub-cell, rounded per ``rounding``.
    """
    if not threshold > 0:
        raise ValueError("threshold must be > 0")
    if rounding not in ROUNDING_MODES:
        raise ValueError(f"rounding must be one of {ROUNDING_MODES}, got {rounding!r}")
    parent_peak, parent_arg = peak_diff_doppler(parent_theta_c, k, search)
    if threshold >= parent_peak:
        return ClusterPlan(threshold, parent_theta_c, parent_theta_c, 1.0, 1,
                           parent_peak, parent_arg, parent_peak, rounding)

    def excess(tc):
        return peak_diff_doppler(tc, k, search)[0] - threshold

    lo = parent_theta_c * 1e-9
    sub = optimize.bisect(excess, lo, parent_theta_c, xtol=tol, maxiter=500)
    peak, arg = peak_diff_doppler(sub, k, search)
    if peak > threshold:
        # keep the feasible side of the bracket
        sub = sub - tol
        peak, arg = peak_diff_doppler(sub, k, search)
    ratio = float((math.sin(parent_theta_c / 2) / math.sin(sub / 2)) ** 2)
    return ClusterPlan(threshold, parent_theta_c, float(sub), ratio, round_count(ratio, rounding),
                       peak, arg, parent_peak, rounding)
