"""Command-line front end. Every subcommand writes CSV into ``--out`` and a summary to stdout.

Exit codes: 0 success, 2 configuration error, 3 validation failure,
4 numeric-domain error.
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import acceptance, mc_sim
from .angle_dist import BranchNotApplicable
from .config import ConfigError, RunConfig, load_config
from .constants import cell_angle_from_radius
from .differential import ROUNDING_MODES, common_doppler, diff_doppler_cdf, max_diff_doppler, plan_clusters
from .doppler import DopplerDomainError
from .doppler_dist import (
    UnattainableDopplerError,
    doppler_cdf_approx,
    doppler_cdf_exact,
    doppler_cdf_upper_bound,
    doppler_range,
)
from .kernel import KernelDomainError
from .kinematics import BelowHorizonError

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3, 4
NUMERIC_ERRORS = (
    KernelDomainError, DopplerDomainError, BelowHorizonError, UnattainableDopplerError,
    mc_sim.OutsideVisibilityError, BranchNotApplicable,
)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, header, rows) -> Path:
    """Locale-independent CSV: shortest round-trip floats, ``\\n`` line endings."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path


def _simulate(cfg: RunConfig, k, theta_c, theta_v, mu):
    return acceptance.simulate_geometry(cfg, k, theta_c, theta_v, mu)[1]


def cmd_doppler_cdf(cfg: RunConfig, out: Path) -> int:
    """Doppler-magnitude CDFs (exact, approximate, bound, simulated) per altitude and theta_v."""
    rows, summary = [], []
    tc, mu = cfg.cell.theta_c, cfg.cell.mu_ups_min
    for h in cfg.grid.altitudes:
        k = cfg.constants.with_altitude(h)
        for tv in cfg.grid.theta_v_list:
            res = _simulate(cfg, k, tc, tv, mu)
            cell = res.cell
            lo, hi = doppler_range(cell, k)
            s = np.linspace(0.9 * lo, min(1.1 * hi, k.rho), cfg.grid.s_points)
            cols = (
                doppler_cdf_exact(s, cell, k, cfg.numerics),
                doppler_cdf_approx(s, cell, k, cfg.numerics),
                doppler_cdf_upper_bound(s, cell, k, cfg.numerics),
                res.doppler(s),
            )
            rows.extend((h, tc, tv, mu, si, *vals) for si, *vals in zip(s, *cols))
            ks = mc_sim.ks_distance(res.doppler, lambda x: doppler_cdf_approx(x, cell, k, cfg.numerics))
            summary.append(f"h={h / 1e3:.0f} km theta_v={tv}: KS(approx, empirical)={ks:.4f}")
    path = write_csv(out / "doppler_cdf.csv",
                     ["h_m", "theta_c", "theta_v", "mu_ups_min", "s_hz", "cdf_exact", "cdf_approx",
                      "cdf_upper_bound", "cdf_empirical"], rows)
    print("\n".join(summary))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_diff_cdf(cfg: RunConfig, out: Path) -> int:
    """Residual-Doppler CDFs and q10/q90 spread per cell size and theta_v."""
    k = cfg.constants
    mu = cfg.cell.mu_ups_min
    blocks = [(cell_angle_from_radius(r, k.r_e), cfg.cell.theta_v) for r in cfg.grid.cell_radii]
    blocks += [(cfg.cell.theta_c, tv) for tv in cfg.grid.theta_v_list]
    rows, spread = [], []
    for b, (tc, tv) in enumerate(blocks):
        res = _simulate(cfg, k, tc, tv, mu)
        cell = res.cell
        d_t = common_doppler(cell, k)
        lo, hi = doppler_range(cell, k)
        z = np.linspace(lo - d_t, hi - d_t, cfg.grid.zeta_points)
        f = diff_doppler_cdf(z, cell, k, cfg.numerics)
        rows.extend((b, tc, tv, mu, zi, fa, fe) for zi, fa, fe in zip(z, f, res.diff_doppler(z)))
        width = acceptance.diff_spread(cell, k, cfg.numerics)
        q10, q90 = res.diff_doppler.quantile([0.1, 0.9])
        ks = mc_sim.ks_distance(res.diff_doppler, lambda x: diff_doppler_cdf(x, cell, k, cfg.numerics))
        spread.append((b, tc, tv, width, float(q90 - q10), q10, q90, ks))
        print(f"block {b}: theta_c={tc:.5g} theta_v={tv}: q90-q10 analytical={width:.1f} Hz "
              f"empirical={q90 - q10:.1f} Hz KS={ks:.4f}")
    write_csv(out / "diff_cdf.csv",
              ["block", "theta_c", "theta_v", "mu_ups_min", "zeta_hz", "cdf_analytical", "cdf_empirical"], rows)
    path = write_csv(out / "diff_spread.csv",
                     ["block", "theta_c", "theta_v", "width_analytical_hz", "width_empirical_hz",
                      "q10_empirical_hz", "q90_empirical_hz", "ks"], spread)
    print(f"wrote {path.parent}")
    return EXIT_OK


def _plan(cfg: RunConfig):
    p = cfg.planner
    return plan_clusters(p.parent_theta_c, p.threshold, cfg.constants, p.rounding, p.tol)


def cmd_max_diff(cfg: RunConfig, out: Path) -> int:
    """Worst-case spread versus theta_v for the parent cell and the planned sub-cell."""
    k = cfg.constants
    parent = cfg.planner.parent_theta_c
    plan = _plan(cfg)
    tv = np.linspace(0.0, k.phi_max - parent, cfg.grid.theta_v_points)
    tv = np.unique(np.concatenate([tv, [parent, plan.sub_theta_c]]))
    a = max_diff_doppler(tv, parent, k)
    b = max_diff_doppler(tv, plan.sub_theta_c, k)
    path = write_csv(out / "max_diff.csv", ["theta_v_rad", "max_diff_parent_hz", "max_diff_sub_hz"],
                     zip(tv, a, b))
    print(f"parent theta_c={parent}: peak {a.max():.1f} Hz at theta_v={tv[np.argmax(a)]:.5g}, "
          f"{a[0]:.1f} Hz at theta_v=0")
    print(f"sub-cell theta_c={plan.sub_theta_c:.5g}: peak {plan.residual_max:.1f} Hz")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_plan_clusters(cfg: RunConfig, out: Path) -> int:
    """Split the parent cell so the worst-case spread stays within the threshold."""
    plan = _plan(cfg)
    fields = [
        ("threshold_hz", plan.threshold), ("parent_theta_c", plan.parent_theta_c),
        ("sub_theta_c", plan.sub_theta_c), ("cluster_count_exact", plan.cluster_count_exact),
        ("cluster_count_reported", plan.cluster_count_reported), ("rounding", plan.rounding),
        ("residual_max_hz", plan.residual_max), ("residual_argmax_theta_v", plan.residual_argmax_theta_v),
        ("parent_peak_hz", plan.parent_peak), ("feasible", plan.feasible),
    ]
    path = write_csv(out / "plan.csv", ["field", "value"], fields)
    for name, value in fields:
        print(f"{name:24s} {_fmt(value)}")
    print(f"wrote {path}")
    return EXIT_OK if plan.feasible else EXIT_VALIDATION


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    """Simulate one scenario and write the sorted samples."""
    c = cfg.cell
    res = _simulate(cfg, cfg.constants, c.theta_c, c.theta_v, c.mu_ups_min)
    n = res.doppler.n
    rank = np.arange(1, n + 1)
    # each column holds the order statistics of its own quantity
    path = write_csv(out / "samples.csv", ["rank", "cdf", "ups_min_rad", "doppler_hz", "diff_doppler_hz"],
                     zip(rank, rank / n, res.ups_min.values, res.doppler.values, res.diff_doppler.values))
    print(f"satellite {res.sat_index}: theta_v={res.cell.theta_v:.6g} mu_ups_min={res.cell.mu_ups_min:.6g} "
          f"common Doppler {res.common_doppler:.1f} Hz")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_validate(cfg: RunConfig, out: Path) -> int:
    """Run the reproduction and invariant checks."""
    results = acceptance.run_all(cfg)
    for r in results:
        print(r.line())
        for d in r.details:
            print(f"    {d}")
        for i in r.info:
            print(f"    info {i}")
    write_csv(out / "validate.csv", ["criterion", "name", "passed", "runtime_s"],
              ((r.number, r.name, r.passed, round(r.runtime, 3)) for r in results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


COMMANDS = {
    "doppler-cdf": cmd_doppler_cdf,
    "diff-cdf": cmd_diff_cdf,
    "max-diff": cmd_max_diff,
    "plan-clusters": cmd_plan_clusters,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="leodoppler", description="LEO Doppler statistics for spherical-cap cells")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", type=Path, help="INI run configuration")
        p.add_argument("--seed", type=int, help="simulation seed (overrides config)")
        p.add_argument("--out", type=Path, help="output directory (overrides config)")
        p.add_argument("--samples", type=int, help="number of simulated users (overrides config)")
        p.add_argument("--round", choices=ROUNDING_MODES, dest="rounding", help="cluster-count rounding")
    return parser


def apply_overrides(cfg: RunConfig, args) -> RunConfig:
    sim = cfg.simulation
    if args.seed is not None:
        if args.seed < 0 or args.seed >= 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        sim = replace(sim, seed=args.seed)
    if args.samples is not None:
        if args.samples < 1:
            raise ConfigError("--samples must be >= 1")
        sim = replace(sim, samples=args.samples)
    cfg = replace(cfg, simulation=sim)
    if args.rounding:
        cfg = replace(cfg, planner=replace(cfg.planner, rounding=args.rounding))
    if args.out:
        cfg = replace(cfg, output_dir=args.out)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = apply_overrides(load_config(args.config), args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg, cfg.output_dir)
    except NUMERIC_ERRORS as exc:
        print(f"numeric domain error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
