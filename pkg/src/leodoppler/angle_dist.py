"""Distribution of the central angle between the satellite and a uniform user.

``F(gamma) = Pr(Ups_t <= gamma)`` is the area of ``S(P, gamma) ∩ S(C, theta_c)``
over the cell area. The intersection is split by the great circle through the
two points where the cap boundaries meet; ``theta_min`` locates that great
circle and each piece is a cap segment evaluated by the kernel in
:mod:`leodoppler.kernel`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernel

V_METHODS = ("exact", "quadrature", "series")
CLAMP_WARN = 1e-9


@dataclass(frozen=True)
class NumericOptions:
    """Evaluation knobs shared by the distribution modules.

    ``v_method`` picks the kernel route: ``"exact"`` (closed form, default),
    ``"quadrature"`` or ``"series"`` (truncated after ``series_terms``).
    """

    v_method: str = "exact"
    series_terms: int = 2
    quad_tol: float = 1e-10
    gl_nodes: int = 64

    def __post_init__(self):
        if self.v_method not in V_METHODS:
            raise ValueError(f"v_method must be one of {V_METHODS}, got {self.v_method!r}")
        if self.series_terms < 0 or self.gl_nodes < 2 or self.quad_tol <= 0:
            raise ValueError("invalid numeric options")


DEFAULT_OPTIONS = NumericOptions()


@dataclass
class Diagnostics:
    """Per-call-context counters; pass one in to collect them."""

    clamp_events: int = 0
    max_clamp: float = 0.0
    notes: list = field(default_factory=list)

    def record_clamp(self, excess: float):
        if excess > CLAMP_WARN:
            self.clamp_events += 1
            self.max_clamp = max(self.max_clamp, excess)


@dataclass(frozen=True)
class CellGeometry:
    theta_c: float
    theta_v: float
    mu_ups_min: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.theta_c < math.pi / 2:
            raise ValueError(f"theta_c must lie in (0, pi/2), got {self.theta_c}")
        if self.theta_v < 0 or self.mu_ups_min < 0:
            raise ValueError("theta_v and mu_ups_min must be >= 0")
        if self.mu_ups_min > self.theta_v + 1e-12:
            raise ValueError("mu_ups_min cannot exceed theta_v")
        if self.theta_v + self.theta_c >= math.pi / 2:
            raise ValueError("theta_v + theta_c must stay below pi/2")

    @property
    def support(self) -> tuple[float, float]:
        return max(0.0, self.theta_v - self.theta_c), self.theta_v + self.theta_c


class Case(enum.IntEnum):
    DISJOINT = 0  # S(P, gamma) does not reach the cell
    CASE1 = 1
    CASE2 = 2
    CASE3 = 3
    CASE4 = 4
    CONTAINED = 5  # the whole cell lies within S(P, gamma)


class Scenario(enum.Enum):
    PROJ_INSIDE = "inside"
    PROJ_OUTSIDE = "outside"


class CaseTag(NamedTuple):
    case: Case
    scenario: Scenario


class BranchNotApplicable(ValueError):
    pass


def _ver(x):
    return 2.0 * np.sin(np.asarray(x, dtype=float) / 2.0) ** 2


def _case_codes(gamma, tc, tv):
    """Vectorized case selection; predicates are tried in order, Case 4 is residual."""
    g = np.asarray(gamma, dtype=float)
    codes = np.full(g.shape, int(Case.CASE4), dtype=int)
    vg, vc, vv = _ver(g), _ver(tc), _ver(tv)
    # cos(g)cos(tv) - cos(tc) and cos(tc)cos(tv) - cos(g), written with versines
    d2 = vc - vg - vv + vg * vv
    d3 = vg - vc - vv + vc * vv
    undecided = np.ones(g.shape, dtype=bool)

    def assign(mask, case):
        nonlocal undecided
        m = mask & undecided
        codes[m] = int(case)
        undecided = undecided & ~m

    assign(g <= tv - tc, Case.DISJOINT)
    assign(g <= tc - tv, Case.CASE1)
    assign(g >= tc + tv, Case.CONTAINED)
    assign((tc > tv) & (d2 >= 0), Case.CASE2)
    assign((g > tv) & (d3 >= 0), Case.CASE3)
    return codes


def select_case(gamma_t: float, cell: CellGeometry) -> CaseTag:
    code = int(_case_codes(gamma_t, cell.theta_c, cell.theta_v))
    scenario = Scenario.PROJ_INSIDE if cell.theta_v < cell.theta_c else Scenario.PROJ_OUTSIDE
    return CaseTag(Case(code), scenario)


def _theta_min_parts(g, tc, tv, case):
    """Numerator and denominator of the tangent of ``theta_min`` for one case."""
    vg, vc, vv = _ver(g), _ver(tc), _ver(tv)
    sv = np.sin(tv)
    if case == Case.CASE2:
        return vc - vg - vv + vg * vv, np.cos(g) * sv
    if case == Case.CASE3:
        return vg - vc - vv + vc * vv, np.cos(tc) * sv
    if case == Case.CASE4:
        return -(vg - vc - vv + vc * vv), np.cos(tc) * sv
    raise BranchNotApplicable(f"no theta_min branch for {case!r}")


def theta_min_branch(gamma_t, cell: CellGeometry, tag: CaseTag | Case):
    """Angular offset of the splitting great circle (Case 2: from P; Cases 3/4: from C)."""
    case = tag.case if isinstance(tag, CaseTag) else Case(tag)
    if cell.theta_v == 0:
        raise BranchNotApplicable("theta_v = 0 always resolves to Case 1")
    num, den = _theta_min_parts(gamma_t, cell.theta_c, cell.theta_v, case)
    out = np.arctan2(num, den)
    return float(out) if np.ndim(out) == 0 else out


def theta_min_derivative(gamma_t, cell: CellGeometry, tag: CaseTag | Case):
    """d theta_min / d gamma for Cases 2-4."""
    case = tag.case if isinstance(tag, CaseTag) else Case(tag)
    if cell.theta_v == 0:
        raise BranchNotApplicable("theta_v = 0 always resolves to Case 1")
    g = np.asarray(gamma_t, dtype=float)
    tc, tv = cell.theta_c, cell.theta_v
    num, den = _theta_min_parts(g, tc, tv, case)
    arg = num / den
    if case == Case.CASE2:
        dg = -math.cos(tc) / math.sin(tv) * np.sin(g) / np.cos(g) ** 2
    elif case == Case.CASE3:
        dg = np.sin(g) / (math.cos(tc) * math.sin(tv))
    else:
        dg = -np.sin(g) / (math.cos(tc) * math.sin(tv))
    out = dg / (1.0 + arg**2)
    return float(out) if np.ndim(out) == 0 else out


def _kernel(u, v, opts: NumericOptions):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(u < -1e-12) or np.any(u > v + 1e-12):
        raise kernel.KernelDomainError(
            f"kernel limits out of order at extreme geometry (u={u}, v={v})"
        )
    u = np.clip(u, 0.0, v)
    if opts.v_method == "exact":
        return kernel.v_kernel_exact(u, v)
    if opts.v_method == "quadrature":
        f = np.vectorize(lambda a, b: kernel.v_kernel_quadrature(a, b, opts.quad_tol))
    else:
        f = np.vectorize(lambda a, b: kernel.v_kernel_series(a, b, opts.series_terms, opts.quad_tol))
    return f(u, v)


def _kernel_derivative(u, v, du, dv, opts: NumericOptions):
    u = np.clip(np.asarray(u, dtype=float), 0.0, v)
    if opts.v_method == "series":
        f = np.vectorize(lambda a, b, c, d: kernel.v_kernel_derivative(a, b, c, d, opts.series_terms))
        return f(u, v, du, dv)
    return kernel.v_kernel_exact_derivative(u, v, du, dv)


def _finish(values, diag: Diagnostics | None):
    clipped = np.clip(values, 0.0, 1.0)
    if diag is not None and values.size:
        diag.record_clamp(float(np.max(np.abs(values - clipped))))
    return clipped


def central_angle_cdf(gamma_t, cell: CellGeometry, opts: NumericOptions = DEFAULT_OPTIONS,
                      diag: Diagnostics | None = None):
    """CDF of the satellite-user central angle for users uniform in the cell."""
    g = np.atleast_1d(np.asarray(gamma_t, dtype=float))
    tc, tv = cell.theta_c, cell.theta_v
    out = np.zeros(g.shape)
    codes = _case_codes(g, tc, tv)
    den = 2.0 * _ver(tc)

    m = codes == Case.CASE1
    out[m] = _ver(g[m]) / _ver(tc)
    out[codes == Case.CONTAINED] = 1.0

    for case in (Case.CASE2, Case.CASE3, Case.CASE4):
        m = codes == case
        if not np.any(m):
            continue
        gm = g[m]
        num, dd = _theta_min_parts(gm, tc, tv, case)
        tmin = np.arctan2(num, dd)
        vc = np.full(gm.shape, tc)
        if case == Case.CASE2:
            val = _ver(gm) / _ver(tc) + (_kernel(tv + tmin, vc, opts) - _kernel(tmin, gm, opts)) / den
        elif case == Case.CASE3:
            val = 1.0 + (_kernel(tv + tmin, gm, opts) - _kernel(tmin, vc, opts)) / den
        else:
            val = (_kernel(tmin, vc, opts) + _kernel(tv - tmin, gm, opts)) / den
        out[m] = val

    out = _finish(out, diag)
    return float(out[0]) if np.ndim(gamma_t) == 0 else out


def central_angle_pdf(gamma_t, cell: CellGeometry, opts: NumericOptions = DEFAULT_OPTIONS):
    """Density of the central angle (derivative of :func:`central_angle_cdf`)."""
    g = np.atleast_1d(np.asarray(gamma_t, dtype=float))
    tc, tv = cell.theta_c, cell.theta_v
    out = np.zeros(g.shape)
    codes = _case_codes(g, tc, tv)
    den = 2.0 * _ver(tc)

    m = codes == Case.CASE1
    out[m] = np.sin(g[m]) / _ver(tc)

    for case in (Case.CASE2, Case.CASE3, Case.CASE4):
        m = codes == case
        if not np.any(m):
            continue
        gm = g[m]
        num, dd = _theta_min_parts(gm, tc, tv, case)
        tmin = np.arctan2(num, dd)
        dtmin = theta_min_derivative(gm, cell, case)
        vc = np.full(gm.shape, tc)
        zero, one = np.zeros(gm.shape), np.ones(gm.shape)
        if case == Case.CASE2:
            val = np.sin(gm) / _ver(tc) + (
                _kernel_derivative(tv + tmin, vc, dtmin, zero, opts)
                - _kernel_derivative(tmin, gm, dtmin, one, opts)
            ) / den
        elif case == Case.CASE3:
            val = (
                _kernel_derivative(tv + tmin, gm, dtmin, one, opts)
                - _kernel_derivative(tmin, vc, dtmin, zero, opts)
            ) / den
        else:
            val = (
                _kernel_derivative(tmin, vc, dtmin, zero, opts)
                + _kernel_derivative(tv - tmin, gm, -dtmin, one, opts)
            ) / den
        out[m] = val

    out = np.maximum(out, 0.0)
    return float(out[0]) if np.ndim(gamma_t) == 0 else out


def case_breakpoints(theta_c: float, theta_v: float) -> np.ndarray:
    """Sorted gamma values where the case (and hence the density's formula) changes."""
    tc, tv = theta_c, theta_v
    pts = [max(0.0, tv - tc), abs(tc - tv), tc + tv, tv]
    if tc > tv:
        pts.append(math.acos(min(1.0, math.cos(tc) / math.cos(tv))))
    pts.append(math.acos(math.cos(tc) * math.cos(tv)))
    lo, hi = max(0.0, tv - tc), tc + tv
    return np.unique(np.clip(pts, lo, hi))


def ups_min_cdf(gamma_min, theta_c: float, mu_ups_min: float,
                opts: NumericOptions = DEFAULT_OPTIONS, diag: Diagnostics | None = None):
    """Approximate CDF of the per-user minimum central angle (cell center at ``mu``)."""
    return central_angle_cdf(gamma_min, CellGeometry(theta_c, mu_ups_min, 0.0), opts, diag)


def ups_min_pdf(gamma_min, theta_c: float, mu_ups_min: float,
                opts: NumericOptions = DEFAULT_OPTIONS):
    return central_angle_pdf(gamma_min, CellGeometry(theta_c, mu_ups_min, 0.0), opts)
