"""Doppler shift of a LEO downlink as a function of central angles.

All magnitudes are in Hz. Functions accept scalars or numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import SystemConstants

RADICAND_TOL = 1e-14


class DopplerDomainError(ValueError):
    """The central-angle pair does not correspond to a real Doppler value."""


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _denominator(ups_t, k: SystemConstants):
    # 1 + k^2 - 2k cos(ups) == (1-k)^2 + 4k sin^2(ups/2)
    return (1.0 - k.k) ** 2 + 4.0 * k.k * np.sin(ups_t / 2.0) ** 2


def _radicand(ups_t, ups_min):
    # cos^2(ups_min) - cos^2(ups_t) == sin(ups_t - ups_min) sin(ups_t + ups_min)
    r = np.sin(ups_t - ups_min) * np.sin(ups_t + ups_min)
    if np.any(r < -RADICAND_TOL):
        raise DopplerDomainError("ups_t must not be smaller than ups_min")
    return np.maximum(r, 0.0)


def doppler_magnitude(ups_t, ups_min, k: SystemConstants):
    """Exact Doppler magnitude for a user with minimum central angle ``ups_min``."""
    ups_t = np.asarray(ups_t, dtype=float)
    ups_min = np.asarray(ups_min, dtype=float)
    out = k.rho * np.sqrt(_radicand(ups_t, ups_min) / _denominator(ups_t, k))
    return _out(out)


def doppler_ground_track(ups_t, k: SystemConstants):
    """Doppler magnitude for a user on the ground track (``ups_min = 0``)."""
    ups_t = np.asarray(ups_t, dtype=float)
    return _out(k.rho * np.sin(ups_t) / np.sqrt(_denominator(ups_t, k)))


def doppler_small_angle(ups_t, ups_min, k: SystemConstants):
    """Small-angle form of :func:`doppler_magnitude`."""
    ups_t = np.asarray(ups_t, dtype=float)
    ups_min = np.asarray(ups_min, dtype=float)
    num = (ups_t - ups_min) * (ups_t + ups_min)
    if np.any(num < -RADICAND_TOL):
        raise DopplerDomainError("ups_t must not be smaller than ups_min")
    num = np.maximum(num, 0.0)
    den = (k.h / k.orbit_radius) ** 2 + k.k * ups_t**2
    return _out(k.rho * np.sqrt(num / den))


def doppler_ground_track_small_angle(ups_t, k: SystemConstants):
    """Small-angle ground-track form ``rho (r_e+h) ups / sqrt(h^2 + r_e (r_e+h) ups^2)``."""
    ups_t = np.asarray(ups_t, dtype=float)
    a = k.orbit_radius
    return _out(k.rho * a * ups_t / np.sqrt(k.h**2 + k.r_e * a * ups_t**2))


def ground_track_small_angle_inverse(s, k: SystemConstants):
    """Central angle at which the small-angle ground-track Doppler equals ``s``.

    Returns ``inf`` where ``rho^2 - k s^2 <= 0`` (no finite angle reaches ``s``).
    """
    s = np.asarray(s, dtype=float)
    rad = k.rho**2 - k.k * s**2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(rad > 0, (k.h / k.orbit_radius) * s / np.sqrt(np.where(rad > 0, rad, 1.0)), np.inf)
    return _out(out)


@dataclass(frozen=True)
class DopplerSample:
    magnitude: float
    sign: int

    @property
    def value(self) -> float:
        return self.sign * self.magnitude


def doppler_signed(ups_t, ups_min, t_minus_tref: float, k: SystemConstants) -> DopplerSample:
    """Signed Doppler: positive while the satellite approaches the closest-approach point.

    ``t_minus_tref`` is the time relative to closest approach; only its sign is used.
    """
    mag = doppler_magnitude(ups_t, ups_min, k)
    if t_minus_tref < 0:
        sign = 1
    elif t_minus_tref > 0:
        sign = -1
    else:
        sign = 0
    return DopplerSample(magnitude=float(mag), sign=sign)
