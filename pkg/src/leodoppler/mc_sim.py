"""Monte-Carlo engine: Walker-star propagation, per-user geometry and Doppler samples.

Frames: ECI positions are rotated into the Earth-fixed frame by ``-omega_E t``
about z (Greenwich aligned at ``t = 0``). Each user's ``Ups_min`` is its
cross-track angle to the serving satellite's instantaneous ground-track great
circle, whose pole is ``r x v`` with ``v`` the Earth-fixed velocity.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from . import geometry
from .angle_dist import CellGeometry
from .constants import SystemConstants
from .doppler import doppler_magnitude
from .doppler_dist import doppler_cdf_approx, doppler_cdf_upper_bound
from .kinematics import SatUeGeometry, elevation_from_ups, slant_range, visibility_half_arc

DEFAULT_CHUNK = 16384


@dataclass(frozen=True)
class WalkerStarConfig:
    num_planes: int = 12
    sats_per_plane: int = 20
    inclination_i: float = math.radians(53.0)
    h: float = 600e3
    phase_offset: float = 0.0
    raan_span: float = math.pi

    def __post_init__(self):
        if self.num_planes < 1 or self.sats_per_plane < 1:
            raise ValueError("plane and satellite counts must be >= 1")
        if self.h <= 0:
            raise ValueError("altitude must be > 0")

    @property
    def size(self) -> int:
        return self.num_planes * self.sats_per_plane


@dataclass(frozen=True)
class SatelliteStates:
    """Earth-fixed positions and velocities, shape ``(n_sats, 3)``."""

    t: float
    position: np.ndarray
    velocity: np.ndarray

    @property
    def subsatellite(self) -> np.ndarray:
        return geometry.normalize(self.position)

    @property
    def track_pole(self) -> np.ndarray:
        """Pole of each instantaneous ground-track great circle."""
        return geometry.normalize(np.cross(self.position, self.velocity))


def _rz(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _inertial_states(cfg: WalkerStarConfig, t: float, k: SystemConstants):
    a = k.r_e + cfg.h
    n_s = math.sqrt(k.mu_grav / a**3)
    plane = np.repeat(np.arange(cfg.num_planes), cfg.sats_per_plane)
    slot = np.tile(np.arange(cfg.sats_per_plane), cfg.num_planes)
    raan = plane * cfg.raan_span / cfg.num_planes
    u = 2.0 * np.pi * slot / cfg.sats_per_plane + plane * cfg.phase_offset + n_s * t
    ci, si = math.cos(cfg.inclination_i), math.sin(cfg.inclination_i)
    cO, sO = np.cos(raan), np.sin(raan)
    cu, su = np.cos(u), np.sin(u)
    # R_z(raan) R_x(i) [cos u, sin u, 0]
    r = a * np.stack([cO * cu - sO * ci * su, sO * cu + cO * ci * su, si * su], axis=-1)
    v = a * n_s * np.stack([-cO * su - sO * ci * cu, -sO * su + cO * ci * cu, si * cu], axis=-1)
    return r, v


def propagate_walker_star(cfg: WalkerStarConfig, t: float, k: SystemConstants) -> np.ndarray:
    """Earth-fixed satellite positions at time ``t`` (m), shape ``(num_planes * sats_per_plane, 3)``."""
    return propagate_states(cfg, t, k).position


def propagate_states(cfg: WalkerStarConfig, t: float, k: SystemConstants) -> SatelliteStates:
    r, v = _inertial_states(cfg, t, k)
    rot = _rz(-k.omega_E * t)
    r_f = r @ rot.T
    v_f = v @ rot.T - np.cross(np.array([0.0, 0.0, k.omega_E]), r_f)
    return SatelliteStates(t=t, position=r_f, velocity=v_f)


def serving_geometry(ue, sat_position, k: SystemConstants) -> SatUeGeometry:
    """Central angle, elevation and slant range from a surface direction to a satellite."""
    ups = float(geometry.central_angle(geometry.as_direction(ue), geometry.normalize(sat_position)))
    visible = ups <= k.phi_max
    return SatUeGeometry(
        ups_t=ups,
        alpha_t=float(elevation_from_ups(ups, k)),
        slant_range=float(slant_range(ups, k)),
        visible=bool(visible),
    )


def ups_min_cross_track(ue, pole) -> np.ndarray:
    """Minimum central angle from ``ue`` to the great circle with pole ``pole``."""
    d = np.abs(np.asarray(ue) @ np.asarray(pole))
    return np.arcsin(np.minimum(d, 1.0))


def place_cell(states: SatelliteStates, index: int, mu_ups_min: float, theta_v: float,
               approaching: bool = True) -> np.ndarray:
    """Cell center with the given ``Ups_min`` and current central angle to satellite ``index``.

    The center lies ahead of the satellite along its track when ``approaching``.
    """
    if mu_ups_min > theta_v:
        raise ValueError("mu_ups_min cannot exceed theta_v")
    p = states.subsatellite[index]
    n = states.track_pole[index]
    d = np.cross(n, p)
    x = math.acos(min(1.0, math.cos(theta_v) / math.cos(mu_ups_min)))
    if not approaching:
        x = -x
    c = math.cos(mu_ups_min) * (math.cos(x) * p + math.sin(x) * d) + math.sin(mu_ups_min) * n
    return geometry.normalize(c)


def select_serving(states: SatelliteStates, center, theta_c: float, k: SystemConstants) -> int:
    """Satellite closest to the cell center, restricted to the common-visibility region."""
    ups = geometry.central_angle(states.subsatellite, center)
    ok = ups <= k.phi_max - theta_c
    if not np.any(ok):
        raise OutsideVisibilityError("no satellite serves the whole cell at this instant")
    ups = np.where(ok, ups, np.inf)
    return int(np.argmin(ups))  # argmin breaks ties by lowest index


class OutsideVisibilityError(ValueError):
    pass


@dataclass(frozen=True)
class SimScenario:
    constants: SystemConstants
    center: np.ndarray
    theta_c: float
    walker: WalkerStarConfig = field(default_factory=WalkerStarConfig)
    t: float = 0.0
    num_ues: int = 100_000
    seed: int = 0
    sat_index: int | None = None
    chunk_size: int = DEFAULT_CHUNK
    workers: int = 1
    scenario_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "center", geometry.as_direction(self.center))
        if self.num_ues < 1:
            raise ValueError("num_ues must be >= 1")
        if self.chunk_size < 1 or self.workers < 1:
            raise ValueError("chunk_size and workers must be >= 1")


def scenario_for_geometry(k: SystemConstants, theta_c: float, theta_v: float, mu_ups_min: float,
                          approaching: bool = True, walker: WalkerStarConfig | None = None,
                          sat_index: int = 0, t: float = 0.0, **kwargs) -> SimScenario:
    """Scenario whose cell center sees satellite ``sat_index`` at the requested geometry."""
    walker = walker or WalkerStarConfig(inclination_i=k.inclination_i, h=k.h)
    states = propagate_states(walker, t, k)
    center = place_cell(states, sat_index, mu_ups_min, theta_v, approaching)
    return SimScenario(constants=k, center=center, theta_c=theta_c, walker=walker, t=t,
                       sat_index=sat_index, **kwargs)


@dataclass(frozen=True)
class EmpiricalCdf:
    values: np.ndarray
    seed: int = 0
    scenario_id: str = ""

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float))
        if v.size == 0:
            raise ValueError("empirical CDF needs at least one sample")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __call__(self, x):
        out = np.searchsorted(self.values, np.asarray(x, dtype=float), side="right") / self.n
        return float(out) if np.ndim(out) == 0 else out

    def quantile(self, q):
        return np.quantile(self.values, q)


@dataclass(frozen=True)
class SimResult:
    doppler: EmpiricalCdf
    ups_min: EmpiricalCdf
    diff_doppler: EmpiricalCdf
    cell: CellGeometry
    common_doppler: float
    sat_index: int


def _chunk(scn: SimScenario, seed_seq, n, p, pole, k):
    rng = np.random.default_rng(seed_seq)
    cap = geometry.SphericalCap(scn.center, scn.theta_c)
    ue = geometry.sample_uniform_cap(cap, rng, n)
    ups_t = geometry.central_angle(ue, p)
    ups_min = np.minimum(ups_min_cross_track(ue, pole), ups_t)
    return ups_min, doppler_magnitude(ups_t, ups_min, k)


def simulate_doppler_samples(scn: SimScenario) -> SimResult:
    """Sample users uniformly in the cell and record ``Ups_min``, Doppler and residual Doppler.

    Users are drawn in fixed-size chunks, each from its own spawned stream; the
    merge follows chunk order, so the output does not depend on ``workers``.
    """
    k = scn.constants
    states = propagate_states(scn.walker, scn.t, k)
    idx = scn.sat_index if scn.sat_index is not None else select_serving(states, scn.center, scn.theta_c, k)
    p = states.subsatellite[idx]
    pole = states.track_pole[idx]
    theta_v = float(geometry.central_angle(scn.center, p))
    if theta_v > k.phi_max - scn.theta_c + 1e-12:
        raise OutsideVisibilityError("scenario instant lies outside the common visibility window")
    mu = float(min(ups_min_cross_track(scn.center, pole), theta_v))

    sizes = [scn.chunk_size] * (scn.num_ues // scn.chunk_size)
    if scn.num_ues % scn.chunk_size:
        sizes.append(scn.num_ues % scn.chunk_size)
    seqs = np.random.SeedSequence(scn.seed).spawn(len(sizes))
    jobs = list(zip(seqs, sizes))
    if scn.workers == 1:
        parts = [_chunk(scn, s, n, p, pole, k) for s, n in jobs]
    else:
        with ThreadPoolExecutor(max_workers=scn.workers) as ex:
            parts = list(ex.map(lambda job: _chunk(scn, job[0], job[1], p, pole, k), jobs))
    ups_min = np.concatenate([a for a, _ in parts])
    dop = np.concatenate([b for _, b in parts])

    d_center = float(doppler_magnitude(theta_v, mu, k))
    meta = dict(seed=scn.seed, scenario_id=scn.scenario_id)
    return SimResult(
        doppler=EmpiricalCdf(dop, **meta),
        ups_min=EmpiricalCdf(ups_min, **meta),
        diff_doppler=EmpiricalCdf(dop - d_center, **meta),
        cell=CellGeometry(scn.theta_c, theta_v, mu),
        common_doppler=d_center,
        sat_index=idx,
    )


def ks_distance(empirical: EmpiricalCdf, cdf) -> float:
    """Sup distance between the empirical step function and ``cdf``.

    Both one-sided gaps are checked at every distinct sample, using the left
    limit of ``cdf`` just below it, so a step-function ``cdf`` is handled too.
    """
    x, counts = np.unique(empirical.values, return_counts=True)
    n = empirical.n
    upper = np.cumsum(counts) / n
    lower = upper - counts / n
    f_at = np.asarray(cdf(x), dtype=float)
    f_left = np.asarray(cdf(np.nextafter(x, -np.inf)), dtype=float)
    return float(max(np.max(np.abs(upper - f_at)), np.max(np.abs(lower - f_left))))


def trajectory_ups_min(scn: SimScenario, ue, sat_index: int, grid_points: int = 2001) -> float:
    """Per-user ``Ups_min`` from the full rotating-Earth trajectory.

    Coarse time-grid search over the visibility window around ``scn.t``,
    polished by a bounded scalar minimization.
    """
    k = scn.constants
    ue = geometry.as_direction(ue)
    span = visibility_half_arc(0.0, k) / k.omega_F
    ts = scn.t + np.linspace(-span, span, grid_points)

    def ang(t):
        pos = propagate_states(scn.walker, float(t), k).position[sat_index]
        return float(geometry.central_angle(ue, geometry.normalize(pos)))

    vals = np.array([ang(t) for t in ts])
    i = int(np.argmin(vals))
    a, b = ts[max(i - 1, 0)], ts[min(i + 1, len(ts) - 1)]
    res = optimize.minimize_scalar(ang, bounds=(a, b), method="bounded", options={"xatol": 1e-6})
    return float(min(res.fun, vals[i]))


@dataclass(frozen=True)
class FlatEarthReport:
    sup_approx: float
    sup_upper_bound: float
    sup_ignore_ups_min: float
    min_bound_margin: float

    @property
    def approx_beats_reference(self) -> bool:
        return self.sup_approx < self.sup_ignore_ups_min


def validate_flat_earth_comparison(scn: SimScenario, result: SimResult | None = None) -> FlatEarthReport:
    """Compare the constant-``Ups_min`` CDF, the upper bound and the ``Ups_min = 0`` curve to MC."""
    k = scn.constants
    res = result or simulate_doppler_samples(scn)
    cell = res.cell
    ground = replace(cell, mu_ups_min=0.0)
    emp = res.doppler

    def approx(s):
        return doppler_cdf_approx(s, cell, k)

    def bound(s):
        return doppler_cdf_upper_bound(s, cell, k)

    def ignore(s):
        return doppler_cdf_approx(s, ground, k)

    margin = float(np.min(bound(emp.values) - emp(emp.values)))
    return FlatEarthReport(
        sup_approx=ks_distance(emp, approx),
        sup_upper_bound=ks_distance(emp, bound),
        sup_ignore_ups_min=ks_distance(emp, ignore),
        min_bound_margin=margin,
    )
