"""Physical constants and the per-scenario scalars derived from them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

# Baseline parameter set (LEO shell at 600 km, S-band carrier).
BASELINE = {
    "r_e": 6.371e6,
    "h": 600e3,
    "f_o": 2e9,
    "c": 3e8,
    "mu_grav": 3.986e14,
    "omega_E": 7.27e-5,
    "inclination_i": math.radians(53.0),
}

BASELINE_ALTITUDES = (600e3, 1200e3, 2000e3)

RATE_FRAMES = ("ecf", "inertial")


@dataclass(frozen=True)
class SystemConstants:
    """Validated constants; derived fields are filled in ``__post_init__``.

    ``rate_frame`` selects the angular rate used in the Doppler scale ``rho``:
    ``"ecf"`` uses ``omega_F = omega_s - omega_E cos(i)`` (Earth-fixed rate),
    ``"inertial"`` uses ``omega_s``.
    """

    r_e: float
    h: float
    f_o: float
    c: float
    mu_grav: float
    omega_E: float
    inclination_i: float
    rate_frame: str = "ecf"

    k: float = field(init=False)
    omega_s: float = field(init=False)
    omega_F: float = field(init=False)
    rho: float = field(init=False)
    phi_max: float = field(init=False)

    def __post_init__(self):
        for name in ("r_e", "h", "f_o", "c", "mu_grav", "omega_E"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        if not 0.0 <= self.inclination_i <= math.pi:
            raise ValueError(f"inclination_i must lie in [0, pi], got {self.inclination_i!r}")
        if self.rate_frame not in RATE_FRAMES:
            raise ValueError(f"rate_frame must be one of {RATE_FRAMES}, got {self.rate_frame!r}")

        a = self.r_e + self.h
        k = self.r_e / a
        omega_s = math.sqrt(self.mu_grav / a**3)
        omega_F = omega_s - self.omega_E * math.cos(self.inclination_i)
        if omega_F <= 0:
            raise ValueError("Earth-fixed angular rate omega_F is not positive for this orbit")
        rate = omega_F if self.rate_frame == "ecf" else omega_s

        object.__setattr__(self, "k", k)
        object.__setattr__(self, "omega_s", omega_s)
        object.__setattr__(self, "omega_F", omega_F)
        object.__setattr__(self, "rho", self.f_o * self.r_e * rate / self.c)
        object.__setattr__(self, "phi_max", math.acos(k))

    @property
    def orbit_radius(self) -> float:
        return self.r_e + self.h

    @property
    def horizon_range(self) -> float:
        """Slant range to a satellite on the horizon."""
        a = self.r_e + self.h
        return math.sqrt(a * a - self.r_e * self.r_e)

    def with_altitude(self, h: float) -> "SystemConstants":
        return replace(self, h=h)

    def with_carrier(self, f_o: float) -> "SystemConstants":
        return replace(self, f_o=f_o)


def make_constants(
    r_e: float = BASELINE["r_e"],
    h: float = BASELINE["h"],
    f_o: float = BASELINE["f_o"],
    c: float = BASELINE["c"],
    mu_grav: float = BASELINE["mu_grav"],
    omega_E: float = BASELINE["omega_E"],
    inclination_i: float = BASELINE["inclination_i"],
    rate_frame: str = "ecf",
) -> SystemConstants:
    """Build constants; every argument defaults to the baseline parameter set."""
    return SystemConstants(
        r_e=float(r_e),
        h=float(h),
        f_o=float(f_o),
        c=float(c),
        mu_grav=float(mu_grav),
        omega_E=float(omega_E),
        inclination_i=float(inclination_i),
        rate_frame=rate_frame,
    )


def cell_angle_from_radius(radius: float, r_e: float = BASELINE["r_e"]) -> float:
    """Angular radius of a cell whose ground (arc) radius is ``radius`` meters."""
    return radius / r_e
