r"""The cap-segment kernel ``V_{u,v}`` and its derivatives.

``V_{u,v} = \int_u^v sin(phi) I_{1-(tan u / tan phi)^2}(1/2, 1/2) dphi``.

``pi * V_{u,v}`` is the area of the part of a cap of angular radius ``v``
lying beyond a great circle at angular distance ``u`` from the cap center, so
three evaluation routes exist:

* :func:`v_kernel_exact` -- closed form of that segment area (Gauss-Bonnet),
  rearranged so no two O(1) terms cancel.
* :func:`v_kernel_quadrature` -- adaptive quadrature of the defining integral,
  with ``I_x(1/2,1/2) = (2/pi) arcsin(sqrt(x))``, evaluated as an arccos.
* :func:`v_kernel_series` -- truncated elementary-function series built from
  the incomplete-beta expansion under ``sin(phi) ~ phi``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

EULER_GAMMA = float(np.euler_gamma)
SERIES_FALLBACK_Z = 0.99
HYP_RTOL = 1e-16
HYP_MAX_TERMS = 200_000


class KernelDomainError(ValueError):
    pass


def _check(u, v):
    if u < 0 or v < 0:
        raise KernelDomainError(f"kernel limits must be >= 0, got u={u}, v={v}")
    if u > v:
        raise KernelDomainError(f"kernel needs u <= v, got u={u}, v={v}")
    if v > math.pi / 2:
        raise KernelDomainError(f"kernel needs v <= pi/2, got v={v}")


def _exact_array(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    p = np.maximum(np.sin(v - u) * np.sin(v + u), 0.0)
    sp = np.sqrt(p)
    su, cv = np.sin(u), np.cos(v)
    ver_v = 2.0 * np.sin(v / 2.0) ** 2
    # arccos(tan u / tan v) and arccos(tan u/tan v) - arccos(sin u/sin v)
    a = np.arctan2(sp, su * cv)
    d = np.arctan2(su * sp * ver_v, su * su * cv + p)
    return (2.0 / np.pi) * (ver_v * a - d)


def v_kernel_exact(u, v):
    """Closed-form kernel; accepts arrays (callers guarantee ``0 <= u <= v``)."""
    out = _exact_array(u, v)
    return float(out) if np.ndim(out) == 0 else out


def v_kernel_exact_partials(u, v):
    """``(dV/du, dV/dv)`` of the closed form.

    ``dV/du = -(2/pi) sqrt(sin^2 v - sin^2 u) / cos u`` and
    ``dV/dv = (2/pi) sin v arccos(tan u / tan v)``.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    p = np.maximum(np.sin(v - u) * np.sin(v + u), 0.0)
    sp = np.sqrt(p)
    du = -(2.0 / np.pi) * sp / np.cos(u)
    dv = (2.0 / np.pi) * np.sin(v) * np.arctan2(sp, np.sin(u) * np.cos(v))
    return du, dv


def _integrand(phi, tan_u):
    # arcsin(sqrt(1 - r^2)) == arccos(r) on [0, 1]; the latter keeps r ~ 1e-9
    r = tan_u / math.tan(phi)
    if r >= 1.0:
        return 0.0
    return math.sin(phi) * (2.0 / math.pi) * math.acos(r)


def v_kernel_quadrature(u: float, v: float, tol: float = 1e-10) -> float:
    """Adaptive quadrature of the defining integral to absolute tolerance ``tol``."""
    u, v = float(u), float(v)
    _check(u, v)
    if u == v:
        return 0.0
    if u == 0.0:
        return float(2.0 * math.sin(v / 2.0) ** 2)
    tan_u = math.tan(u)
    # the integrand increases on [u, v]; width times its end value bounds the integral
    bound = (v - u) * _integrand(v, tan_u)
    if bound <= tol:
        return 0.5 * bound
    # square-root onset at phi = u: split geometrically so each piece is smooth
    edges = [u]
    step = max(u, 1e-300)
    while edges[-1] + step < v:
        edges.append(edges[-1] + step)
        step *= 2.0
    edges.append(v)
    pieces = len(edges) - 1
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(
            _integrand, a, b, args=(tan_u,), epsabs=tol / pieces, epsrel=0.0, limit=200
        )
        total += val
    return float(total)


def hyp3f2_series(a3: float, z: float) -> tuple[float, float]:
    """``3F2(1, 1, a3; 2, 3; z)`` and its z-derivative by direct power series.

    Terms obey ``t_{k+1} = t_k (k+1)(k+a3) z / ((k+2)(k+3))``; the derivative is
    the term-wise differentiated series. Summation stops once a term falls
    below ``HYP_RTOL`` relative to the running sum.
    """
    if not 0.0 <= z <= 1.0:
        raise KernelDomainError(f"3F2 series needs 0 <= z <= 1, got {z}")
    total, dtotal = 1.0, 0.0
    c = 1.0  # coefficient of z^k
    zk_1 = 1.0  # z^(k-1)
    for k in range(HYP_MAX_TERMS):
        c *= (k + 1.0) * (k + a3) / ((k + 2.0) * (k + 3.0))
        if c == 0.0:
            break
        dterm = (k + 1.0) * c * zk_1
        term = c * zk_1 * z
        total += term
        dtotal += dterm
        zk_1 *= z
        if abs(term) <= HYP_RTOL * abs(total) and abs(dterm) <= HYP_RTOL * abs(dtotal):
            break
    return total, dtotal


def _series_coeff(n: int) -> float:
    # (1/2)_n / (n! B(1/2, 1/2)), with B(1/2, 1/2) = pi; log-gamma keeps large n finite
    return math.exp(special.gammaln(n + 0.5) - special.gammaln(0.5) - special.gammaln(n + 1.0)) / math.pi


def _series_terms(u: float, v: float, n_max: int):
    """Series value and its partials in u and v."""
    z = (u / v) ** 2
    lg = 2.0 * math.log(u) - 2.0 * math.log(v)
    val = du = dv = 0.0
    for n in range(n_max + 1):
        c = _series_coeff(n)
        f, fz = hyp3f2_series(1.5 - n, z)
        g = -1.0 + EULER_GAMMA + lg + float(special.digamma(n + 0.5))
        a = -(n - 0.5) * u**4 / (4.0 * v**2)
        val += c * (a * f + 0.5 * (v * v / (n + 0.5) + u * u * g))
        dz_du = 2.0 * u / v**2
        dz_dv = -2.0 * u * u / v**3
        da_du = -(n - 0.5) * u**3 / v**2
        da_dv = (n - 0.5) * u**4 / (2.0 * v**3)
        du += c * (da_du * f + a * fz * dz_du + u * g + u)
        dv += c * (da_dv * f + a * fz * dz_dv + v / (n + 0.5) - u * u / v)
    return val, du, dv


def v_kernel_series(u: float, v: float, n_max: int = 2, quad_tol: float = 1e-10) -> float:
    """Truncated series approximation of the kernel (terms ``n = 0..n_max``).

    ``u == 0`` uses the closed form ``1 - cos v``; ``u^2/v^2 > 0.99`` falls back
    to quadrature because the 3F2 series converges slowly there.
    """
    u, v = float(u), float(v)
    _check(u, v)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if u == v:
        return 0.0
    if u == 0.0:
        return float(2.0 * math.sin(v / 2.0) ** 2)
    if (u / v) ** 2 > SERIES_FALLBACK_Z:
        return v_kernel_quadrature(u, v, quad_tol)
    return _series_terms(u, v, n_max)[0]


def v_kernel_series_partials(u: float, v: float, n_max: int = 2) -> tuple[float, float]:
    u, v = float(u), float(v)
    _check(u, v)
    if u == v:
        return 0.0, 0.0
    if u == 0.0 or (u / v) ** 2 > SERIES_FALLBACK_Z:
        du, dv = v_kernel_exact_partials(u, v)
        return float(du), float(dv)
    _, du, dv = _series_terms(u, v, n_max)
    return du, dv


def v_kernel_derivative(u, v, du_dgamma, dv_dgamma, n_max: int = 2) -> float:
    """Derivative of the series kernel along ``gamma`` by the chain rule.

    ``du_dgamma`` and ``dv_dgamma`` are the derivatives of the limits; for the
    upper limit these are 0 (fixed cap edge) or 1 (``v = gamma``).
    """
    if du_dgamma == 0 and dv_dgamma == 0:
        return 0.0
    pu, pv = v_kernel_series_partials(u, v, n_max)
    return pu * du_dgamma + pv * dv_dgamma


def v_kernel_exact_derivative(u, v, du_dgamma, dv_dgamma):
    pu, pv = v_kernel_exact_partials(u, v)
    out = pu * du_dgamma + pv * dv_dgamma
    return float(out) if np.ndim(out) == 0 else out
