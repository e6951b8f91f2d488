"""Unit-sphere primitives: directions, central angles, caps and cap sampling.

Directions are plain numpy unit vectors of shape ``(3,)`` or ``(n, 3)``.
Latitude/longitude only appear at the CLI boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-12
EZ = np.array([0.0, 0.0, 1.0])


def as_direction(v) -> np.ndarray:
    """Validate that ``v`` is a unit vector (or a stack of them)."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != 3:
        raise ValueError(f"direction must have 3 components, got shape {v.shape}")
    norm = np.linalg.norm(v, axis=-1)
    if np.any(np.abs(norm - 1.0) > NORM_TOL):
        raise ValueError("direction is not a unit vector")
    return v


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def from_lat_lon(lat, lon) -> np.ndarray:
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    cl = np.cos(lat)
    return np.stack([cl * np.cos(lon), cl * np.sin(lon), np.sin(lat)], axis=-1)


def to_lat_lon(v) -> tuple[np.ndarray, np.ndarray]:
    v = np.asarray(v, dtype=float)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    return np.arctan2(z, np.hypot(x, y)), np.arctan2(y, x)


def from_colatitude(colat, azimuth=0.0) -> np.ndarray:
    """Direction at polar angle ``colat`` from +z and the given azimuth."""
    colat = np.asarray(colat, dtype=float)
    azimuth = np.asarray(azimuth, dtype=float)
    s = np.sin(colat)
    return np.stack([s * np.cos(azimuth), s * np.sin(azimuth), np.cos(colat)], axis=-1)


def central_angle(a, b) -> np.ndarray:
    """Angle subtended at the sphere's center, in [0, pi].

    Uses ``atan2(|a x b|, a . b)``, which stays accurate for the sub-milliradian
    separations that small cells produce (``arccos`` of the dot product does not).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cross = np.linalg.norm(np.cross(a, b), axis=-1)
    dot = np.sum(a * b, axis=-1)
    return np.arctan2(cross, dot)


@dataclass(frozen=True)
class SphericalCap:
    center: np.ndarray
    theta_c: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_direction(self.center))
        if self.center.shape != (3,):
            raise ValueError("cap center must be a single direction")
        if not 0.0 < self.theta_c < math.pi / 2:
            raise ValueError(f"theta_c must lie in (0, pi/2), got {self.theta_c!r}")

    def contains(self, points, slack: float = 1e-12) -> np.ndarray:
        return central_angle(points, self.center) <= self.theta_c + slack


def versine(x):
    """1 - cos(x) without cancellation for small x."""
    return 2.0 * np.sin(np.asarray(x, dtype=float) / 2.0) ** 2


def cap_area(cap: SphericalCap, r_e: float) -> float:
    return float(2.0 * math.pi * r_e**2 * versine(cap.theta_c))


def rotation_to_pole(new_pole) -> np.ndarray:
    """Proper rotation matrix ``R`` with ``R @ ez == new_pole``.

    This is the minimal rotation about ``ez x new_pole``; the antipodal pole is
    reached by a half turn about the x axis.
    """
    p = as_direction(new_pole)
    c = float(p[2])
    axis = np.cross(EZ, p)
    s = float(np.linalg.norm(axis))
    if s < 1e-15:
        if c > 0:
            return np.eye(3)
        return np.diag([1.0, -1.0, -1.0])
    axis /= s
    kx = np.array(
        [[0.0, -axis[2], axis[1]], [axis[2], 0.0, -axis[0]], [-axis[1], axis[0], 0.0]]
    )
    return np.eye(3) + s * kx + (1.0 - c) * (kx @ kx)


def rotate_to_frame(point, new_pole, inverse: bool = False) -> np.ndarray:
    """Map local coordinates (pole = +z) into the frame whose pole is ``new_pole``.

    With ``inverse=True`` the mapping goes the other way, so the two calls
    compose to the identity.
    """
    r = rotation_to_pole(new_pole)
    if inverse:
        r = r.T
    return np.asarray(point, dtype=float) @ r.T


def sample_uniform_cap(cap: SphericalCap, rng: np.random.Generator, n: int | None = None):
    """Draw points uniformly by area inside ``cap``.

    ``1 - cos(phi)`` is uniform on ``[0, 1 - cos(theta_c)]`` and the azimuth is
    uniform, so no rejection is needed. Returns shape ``(3,)`` when ``n`` is None.
    """
    size = 1 if n is None else int(n)
    w = rng.random(size) * versine(cap.theta_c)
    az = rng.random(size) * (2.0 * np.pi)
    sin_phi = np.sqrt(w * (2.0 - w))
    local = np.stack([sin_phi * np.cos(az), sin_phi * np.sin(az), 1.0 - w], axis=-1)
    pts = rotate_to_frame(local, cap.center)
    return pts[0] if n is None else pts
