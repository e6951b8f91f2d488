"""INI run configuration with unit suffixes.

Every key is optional; omitted keys take the baseline defaults below. Values
may carry a unit suffix: angles ``rad``/``deg``, lengths ``m``/``km``,
frequencies ``Hz``/``kHz``/``MHz``/``GHz``. Lists are comma separated.
Unknown sections or keys are rejected with the offending line number.

Example::

    [constants]
    h = 1200 km
    f_o = 2 GHz

    [cell]
    radius = 50 km
    theta_v = 0.1 rad
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .angle_dist import V_METHODS, NumericOptions
from .constants import BASELINE_ALTITUDES, SystemConstants, make_constants
from .differential import ROUNDING_MODES


class ConfigError(ValueError):
    pass


_UNITS = {
    "angle": {"rad": 1.0, "deg": math.pi / 180.0},
    "length": {"m": 1.0, "km": 1e3},
    "frequency": {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9},
}
_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]*)\s*$")


@dataclass(frozen=True)
class CellSection:
    theta_c: float = 0.0078
    theta_v: float = 0.1
    mu_ups_min: float = 0.042
    approaching: bool = True


@dataclass(frozen=True)
class GridSection:
    altitudes: tuple = BASELINE_ALTITUDES
    theta_v_list: tuple = (0.06, 0.08, 0.1, 0.12, 0.15, 0.2)
    cell_radii: tuple = (50e3, 100e3, 200e3)
    s_points: int = 401
    zeta_points: int = 401
    theta_v_points: int = 201


@dataclass(frozen=True)
class PlannerSection:
    parent_theta_c: float = 0.0071
    threshold: float = 950.0
    rounding: str = "floor"
    tol: float = 1e-12


@dataclass(frozen=True)
class SimulationSection:
    samples: int = 100_000
    seed: int = 0
    workers: int = 1
    chunk_size: int = 16384
    num_planes: int = 12
    sats_per_plane: int = 20
    phase_offset: float = 0.0
    sat_index: int = 0
    t: float = 0.0


@dataclass(frozen=True)
class Tolerances:
    rel_example: float = 0.05
    phi_max_abs: float = 5e-4
    series_abs: float = 1e-5
    cap_sup: float = 0.005
    ups_min_sup: float = 0.03
    ks: float = 0.02
    bound_slack: float = 1e-3
    exact_vs_approx: float = 0.015
    fd_rel: float = 1e-4
    continuity: float = 1e-6


@dataclass(frozen=True)
class RunConfig:
    constants: SystemConstants = field(default_factory=make_constants)
    cell: CellSection = field(default_factory=CellSection)
    grid: GridSection = field(default_factory=GridSection)
    planner: PlannerSection = field(default_factory=PlannerSection)
    simulation: SimulationSection = field(default_factory=SimulationSection)
    numerics: NumericOptions = field(default_factory=NumericOptions)
    output_dir: Path = Path("out")
    tolerances: Tolerances = field(default_factory=Tolerances)


# key -> (kind, unit family or None)
_SCHEMA = {
    "constants": {
        "r_e": ("float", "length"), "h": ("float", "length"), "f_o": ("float", "frequency"),
        "c": ("float", None), "mu_grav": ("float", None), "omega_e": ("float", None),
        "inclination_i": ("float", "angle"), "rate_frame": ("str", None),
    },
    "cell": {
        "theta_c": ("float", "angle"), "radius": ("float", "length"),
        "theta_v": ("float", "angle"), "mu_ups_min": ("float", "angle"),
        "approaching": ("bool", None),
    },
    "grid": {
        "altitudes": ("list", "length"), "theta_v_list": ("list", "angle"),
        "cell_radii": ("list", "length"), "s_points": ("int", None),
        "zeta_points": ("int", None), "theta_v_points": ("int", None),
    },
    "planner": {
        "parent_theta_c": ("float", "angle"), "threshold": ("float", "frequency"),
        "rounding": ("str", None), "tol": ("float", "angle"),
    },
    "simulation": {
        "samples": ("int", None), "seed": ("int", None), "workers": ("int", None),
        "chunk_size": ("int", None), "num_planes": ("int", None),
        "sats_per_plane": ("int", None), "phase_offset": ("float", "angle"),
        "sat_index": ("int", None), "t": ("float", None),
    },
    "numerics": {
        "v_method": ("str", None), "series_terms": ("int", None),
        "quad_tol": ("float", None), "gl_nodes": ("int", None),
    },
    "output": {"dir": ("str", None)},
    "tolerances": {name: ("float", None) for name in Tolerances.__dataclass_fields__},
}


def _line_index(text: str) -> dict:
    """``(section, key) -> line number`` by a plain scan of the file."""
    where, section = {}, None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.match(r"^\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip().lower()
            where.setdefault((section, None), no)
            continue
        key = re.split(r"[=:]", line, maxsplit=1)[0].strip().lower()
        where.setdefault((section, key), no)
    return where


def _number(text: str, family: str | None, where: str) -> float:
    m = _NUMBER.match(text)
    if not m:
        raise ConfigError(f"{where}: cannot parse number from {text!r}")
    value, unit = float(m.group(1)), m.group(2).lower()
    if not unit:
        return value
    table = _UNITS.get(family or "", {})
    if unit not in table:
        allowed = ", ".join(table) or "none"
        raise ConfigError(f"{where}: unit {m.group(2)!r} not allowed (allowed: {allowed})")
    return value * table[unit]


def _convert(text: str, kind: str, family: str | None, where: str):
    if kind == "str":
        return text.strip()
    if kind == "bool":
        low = text.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{where}: expected a boolean, got {text!r}")
    if kind == "int":
        try:
            return int(text.strip())
        except ValueError:
            raise ConfigError(f"{where}: expected an integer, got {text!r}") from None
    if kind == "list":
        items = [t for t in text.split(",") if t.strip()]
        if not items:
            raise ConfigError(f"{where}: empty list")
        return tuple(_number(t, family, where) for t in items)
    return _number(text, family, where)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse INI text into a :class:`RunConfig`, raising :class:`ConfigError` on any problem."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    lines = _line_index(text)
    values: dict = {}
    for section in parser.sections():
        sec = section.lower()
        if sec not in _SCHEMA:
            raise ConfigError(f"{source}:{lines.get((sec, None), '?')}: unknown section [{section}]")
        for key, raw in parser.items(section):
            where = f"{source}:{lines.get((sec, key), '?')}: [{section}] {key}"
            if key not in _SCHEMA[sec]:
                raise ConfigError(f"{where}: unknown key")
            kind, family = _SCHEMA[sec][key]
            values[(sec, key)] = (_convert(raw, kind, family, where), where)
    try:
        return _build(values)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{p}: cannot read config ({exc.strerror})") from None
    return parse_config(text, source=str(p))


def _pick(values, sec):
    return {key: v for (s, key), (v, _) in values.items() if s == sec}


def _build(values) -> RunConfig:
    const = _pick(values, "constants")
    if "omega_e" in const:
        const["omega_E"] = const.pop("omega_e")
    constants = make_constants(**const)

    cell_vals = _pick(values, "cell")
    if "radius" in cell_vals:
        if "theta_c" in cell_vals:
            raise ConfigError(values[("cell", "radius")][1] + ": give either radius or theta_c, not both")
        cell_vals["theta_c"] = cell_vals.pop("radius") / constants.r_e
    cell = replace(CellSection(), **cell_vals)
    if not 0 < cell.theta_c < math.pi / 2:
        raise ConfigError("[cell] theta_c must lie in (0, pi/2)")
    if cell.mu_ups_min > cell.theta_v:
        raise ConfigError("[cell] mu_ups_min cannot exceed theta_v")

    grid = replace(GridSection(), **_pick(values, "grid"))
    for name in ("s_points", "zeta_points", "theta_v_points"):
        if getattr(grid, name) < 2:
            raise ConfigError(f"[grid] {name} must be >= 2")

    planner = replace(PlannerSection(), **_pick(values, "planner"))
    if planner.rounding not in ROUNDING_MODES:
        raise ConfigError(f"[planner] rounding must be one of {ROUNDING_MODES}")
    if planner.threshold <= 0:
        raise ConfigError("[planner] threshold must be > 0")

    sim = replace(SimulationSection(), **_pick(values, "simulation"))
    if sim.samples < 1 or sim.workers < 1 or sim.chunk_size < 1 or sim.seed < 0:
        raise ConfigError("[simulation] samples, workers, chunk_size must be >= 1 and seed >= 0")

    num = _pick(values, "numerics")
    if "v_method" in num and num["v_method"] not in V_METHODS:
        raise ConfigError(f"[numerics] v_method must be one of {V_METHODS}")
    numerics = replace(NumericOptions(), **num)

    out = _pick(values, "output")
    tol = replace(Tolerances(), **_pick(values, "tolerances"))
    return RunConfig(
        constants=constants, cell=cell, grid=grid, planner=planner, simulation=sim,
        numerics=numerics, output_dir=Path(out.get("dir", "out")), tolerances=tol,
    )
