"""Distribution of the Doppler magnitude seen by a user placed uniformly in a cell.

The Doppler magnitude grows with the central angle ``Ups_t``, so
``Pr(delta <= s) = Pr(Ups_t <= arccos(cos_ups_threshold(s, Ups_min)))``. The
exact form averages this over the per-user ``Ups_min``; the approximate form
pins ``Ups_min`` to its value at the cell center.
"""
from __future__ import annotations

import math

import numpy as np

from .angle_dist import (
    DEFAULT_OPTIONS,
    CellGeometry,
    Diagnostics,
    NumericOptions,
    case_breakpoints,
    central_angle_cdf,
    central_angle_pdf,
    ups_min_pdf,
)
from .constants import SystemConstants
from .doppler import doppler_magnitude, ground_track_small_angle_inverse

CONVERGENCE_TOL = 1e-6


class UnattainableDopplerError(ValueError):
    """``s`` exceeds the largest Doppler magnitude reachable for this ``Ups_min``."""


def _discriminant(s, ups_min, k: SystemConstants):
    rho2 = k.rho**2
    return s**4 * k.k**2 - rho2 * (s**2 * (1.0 + k.k**2) - rho2 * np.cos(ups_min) ** 2)


def _threshold(s, ups_min, k: SystemConstants):
    """``1 - cos`` of the threshold angle for the larger root; NaN where no real root exists.

    In ``y = 1 - x`` the quadratic reads ``rho^2 y^2 - 2 (rho^2 - k s^2) y + c = 0``
    with ``c = rho^2 sin^2(ups_min) + (1-k)^2 s^2``; the small root in product form
    keeps full relative precision near the subsatellite point. Beyond ``rho`` the
    discriminant turns positive again with roots above 1, so ``s > rho`` is
    reported as a negative discriminant too.
    """
    s = np.asarray(s, dtype=float)
    disc = np.where(s > k.rho, -1.0, _discriminant(s, ups_min, k))
    c = (k.rho * np.sin(ups_min)) ** 2 + ((1.0 - k.k) * s) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        y = c / (k.rho**2 - k.k * s**2 + np.sqrt(disc))
    return y, disc


def cos_ups_threshold(s, ups_min, k: SystemConstants, diag: Diagnostics | None = None):
    """``cos`` of the central angle at which the Doppler magnitude equals ``s``.

    Solves ``rho^2 x^2 - 2 s^2 k x + s^2 (1+k^2) - rho^2 cos^2(ups_min) = 0`` and
    keeps the ``+`` root; the other root lies behind the horizon.
    """
    s = np.asarray(s, dtype=float)
    ups_min = np.asarray(ups_min, dtype=float)
    y, disc = _threshold(s, ups_min, k)
    if np.any(disc < 0):
        raise UnattainableDopplerError("s exceeds attainable Doppler for this ups_min")
    root = 1.0 - y
    clipped = np.clip(root, -1.0, 1.0)
    if diag is not None and np.size(root):
        diag.record_clamp(float(np.max(np.abs(root - clipped))))
    return float(clipped) if np.ndim(clipped) == 0 else clipped


def _angle_for(s, ups_min, k: SystemConstants):
    """Threshold central angle; ``pi`` where ``s`` is out of reach (every user qualifies)."""
    y, disc = _threshold(s, ups_min, k)
    y = np.where(disc < 0, 2.0, y)
    return 2.0 * np.arcsin(np.sqrt(np.clip(y, 0.0, 2.0) / 2.0))


def doppler_cdf_approx(s, cell: CellGeometry, k: SystemConstants,
                       opts: NumericOptions = DEFAULT_OPTIONS, diag: Diagnostics | None = None):
    """CDF of the Doppler magnitude with ``Ups_min`` fixed at the cell-center value."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr < 0):
        raise ValueError("Doppler magnitude argument must be >= 0")
    gamma = _angle_for(s_arr, cell.mu_ups_min, k)
    out = np.asarray(central_angle_cdf(gamma, cell, opts, diag))
    return float(out[0]) if np.ndim(s) == 0 else out


def _gauss_legendre_pieces(cell: CellGeometry, nodes: int):
    """Nodes and weights for the ``Ups_min`` density, split where its formula changes."""
    edges = case_breakpoints(cell.theta_c, cell.mu_ups_min)
    x, w = np.polynomial.legendre.leggauss(nodes)
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 0:
            continue
        xs.append(0.5 * (b - a) * x + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * w)
    return np.concatenate(xs), np.concatenate(ws)


def _expectation(s_arr, cell, k, opts, nodes):
    g_min, w = _gauss_legendre_pieces(cell, nodes)
    dens = ups_min_pdf(g_min, cell.theta_c, cell.mu_ups_min, opts)
    weights = w * dens
    gamma = _angle_for(s_arr[:, None], g_min[None, :], k)
    f = np.asarray(central_angle_cdf(gamma.ravel(), cell, opts)).reshape(gamma.shape)
    return (f @ weights) / weights.sum()


def doppler_cdf_exact(s, cell: CellGeometry, k: SystemConstants,
                      opts: NumericOptions = DEFAULT_OPTIONS, diag: Diagnostics | None = None):
    """CDF of the Doppler magnitude averaged over the per-user ``Ups_min``.

    The average is a Gauss-Legendre rule with ``opts.gl_nodes`` nodes on each
    smooth piece of the ``Ups_min`` density. The rule is repeated with twice as
    many nodes; a disagreement above ``1e-6`` is noted in ``diag``.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr < 0):
        raise ValueError("Doppler magnitude argument must be >= 0")
    out = _expectation(s_arr, cell, k, opts, opts.gl_nodes)
    if diag is not None:
        check = _expectation(s_arr, cell, k, opts, 2 * opts.gl_nodes)
        gap = float(np.max(np.abs(check - out)))
        if gap > CONVERGENCE_TOL:
            diag.notes.append(f"Gauss-Legendre not converged: {gap:.3g}")
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if np.ndim(s) == 0 else out


def doppler_pdf(s, cell: CellGeometry, k: SystemConstants, opts: NumericOptions = DEFAULT_OPTIONS):
    """Density of :func:`doppler_cdf_approx` by the chain rule; 0 outside the attainable range."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    y, disc = _threshold(s_arr, cell.mu_ups_min, k)
    ok = (disc > 0) & (s_arr > 0) & (y > 0.0) & (y < 2.0)
    out = np.zeros(s_arr.shape)
    if np.any(ok):
        sv, yv, dsc = s_arr[ok], y[ok], disc[ok]
        dx = (2.0 * sv * k.k + sv * (2.0 * sv**2 * k.k**2 - k.rho**2 * (1.0 + k.k**2)) / np.sqrt(dsc)) / k.rho**2
        gamma = 2.0 * np.arcsin(np.sqrt(yv / 2.0))
        f_gamma = np.asarray(central_angle_pdf(gamma, cell, opts))
        out[ok] = -f_gamma * dx / np.sqrt(yv * (2.0 - yv))
    out = np.maximum(out, 0.0)
    return float(out[0]) if np.ndim(s) == 0 else out


def doppler_cdf_upper_bound(s, cell: CellGeometry, k: SystemConstants,
                            opts: NumericOptions = DEFAULT_OPTIONS):
    """Cell CDF of the central angle evaluated at the small-angle ground-track inverse of ``s``."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr < 0):
        raise ValueError("Doppler magnitude argument must be >= 0")
    gamma = np.atleast_1d(ground_track_small_angle_inverse(s_arr, k))
    out = np.ones(s_arr.shape)
    finite = np.isfinite(gamma)
    if np.any(finite):
        out[finite] = central_angle_cdf(np.minimum(gamma[finite], math.pi), cell, opts)
    return float(out[0]) if np.ndim(s) == 0 else out


def doppler_range(cell: CellGeometry, k: SystemConstants) -> tuple[float, float]:
    """Smallest and largest Doppler magnitude under the fixed-``Ups_min`` model."""
    lo_g, hi_g = cell.support
    lo_g = max(lo_g, cell.mu_ups_min)
    return float(doppler_magnitude(lo_g, cell.mu_ups_min, k)), float(doppler_magnitude(hi_g, cell.mu_ups_min, k))
