"""Pass geometry under the great-circle / constant-rate model.

Angles follow the usual LEO conventions: ``ups`` is the central angle between
the user and the subsatellite point, ``ups_min`` its minimum over a pass.
Half-angle (haversine) forms are used throughout so that arcs of a few
microradians round-trip to the precision the tests demand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import SystemConstants

EDGE_CLAMP = 1e-12


class BelowHorizonError(ValueError):
    """The requested instant or angle lies outside the visibility window."""


@dataclass(frozen=True)
class PassGeometry:
    ups_min: float
    t_ref: float = 0.0

    def __post_init__(self):
        if self.ups_min < 0:
            raise ValueError("ups_min must be >= 0")


@dataclass(frozen=True)
class SatUeGeometry:
    ups_t: float
    alpha_t: float
    slant_range: float
    visible: bool = True


def _sin2_half(x):
    return np.sin(np.asarray(x, dtype=float) / 2.0) ** 2


def visibility_half_arc(ups_min: float, k: SystemConstants) -> float:
    """Largest ``|omega_F (t - t_ref)|`` for which the satellite is above the horizon."""
    if ups_min > k.phi_max + EDGE_CLAMP:
        raise BelowHorizonError(f"ups_min={ups_min} exceeds phi_max={k.phi_max}")
    ratio = min(1.0, math.cos(k.phi_max) / math.cos(ups_min))
    return math.acos(ratio)


def ups_from_time(pg: PassGeometry, t, k: SystemConstants):
    """Central angle at time ``t``: ``cos(ups) = cos(ups_min) cos(omega_F (t - t_ref))``."""
    x = k.omega_F * (np.asarray(t, dtype=float) - pg.t_ref)
    limit = visibility_half_arc(pg.ups_min, k)
    if np.any(np.abs(x) > limit + EDGE_CLAMP):
        raise BelowHorizonError("satellite is below the horizon at the requested time")
    x = np.clip(x, -limit, limit)
    s2 = _sin2_half(pg.ups_min) + math.cos(pg.ups_min) * _sin2_half(x)
    out = 2.0 * np.arcsin(np.sqrt(np.minimum(s2, 1.0)))
    return float(out) if np.ndim(out) == 0 else out


def time_from_ups(pg: PassGeometry, ups, k: SystemConstants, side: int = 1):
    """Inverse of :func:`ups_from_time`; ``side=-1`` picks the approaching branch."""
    ups = np.asarray(ups, dtype=float)
    if np.any(ups < pg.ups_min - EDGE_CLAMP) or np.any(ups > k.phi_max + EDGE_CLAMP):
        raise BelowHorizonError("ups outside [ups_min, phi_max]")
    ups = np.clip(ups, pg.ups_min, k.phi_max)
    # sin^2(a/2) - sin^2(b/2) = sin((a-b)/2) sin((a+b)/2)
    num = np.sin((ups - pg.ups_min) / 2.0) * np.sin((ups + pg.ups_min) / 2.0)
    x = 2.0 * np.arcsin(np.sqrt(np.maximum(num, 0.0) / math.cos(pg.ups_min)))
    out = pg.t_ref + np.sign(side) * x / k.omega_F
    return float(out) if np.ndim(out) == 0 else out


def elevation_from_ups(ups_t, k: SystemConstants):
    """Elevation angle for central angle ``ups_t``; ``tan(alpha) = (cos ups - k)/sin ups``."""
    ups_t = np.asarray(ups_t, dtype=float)
    out = np.arctan2(np.cos(ups_t) - k.k, np.sin(ups_t))
    return float(out) if np.ndim(out) == 0 else out


def ups_min_from_max_elevation(alpha_max, k: SystemConstants):
    alpha_max = np.asarray(alpha_max, dtype=float)
    out = np.arccos(k.k * np.cos(alpha_max)) - alpha_max
    return float(out) if np.ndim(out) == 0 else out


def slant_range(ups_t, k: SystemConstants):
    """Law of cosines, written as ``(1-k)^2 + 4k sin^2(ups/2)`` to avoid cancellation."""
    ups_t = np.asarray(ups_t, dtype=float)
    out = k.orbit_radius * np.sqrt((1.0 - k.k) ** 2 + 4.0 * k.k * _sin2_half(ups_t))
    return float(out) if np.ndim(out) == 0 else out


def common_visibility_angle(theta_c: float, k: SystemConstants) -> float:
    """Angular region around the cell center in which every user sees the satellite."""
    if theta_c < 0:
        raise ValueError("theta_c must be >= 0")
    if theta_c >= k.phi_max:
        raise BelowHorizonError(
            f"cell half-angle {theta_c} is not smaller than phi_max={k.phi_max}"
        )
    return k.phi_max - theta_c
