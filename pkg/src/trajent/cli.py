"""Command-line front end.

Subcommands
-----------
simulate   trajectory ensemble of a scenario file, with the ensemble
           (master-equation) curve and the closed-form mean alongside
master     master-equation evolution only
rates      closed-form decay rates of a scenario, as JSON
fit        exponential rate fit of a previously written CSV
optimize   best channel mixing for a thermal scenario, as JSON

Exit codes: 0 success, 2 configuration error, 3 numerical failure.  The
environment variable TRAJENT_LOG selects the log level (DEBUG, INFO, ...).

CSV output carries columns t, mean_C, stderr_C, analytic_C, C_rho with '.'
as decimal separator and 17 significant digits; identical configuration and
seed reproduce byte-identical files regardless of --threads.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import bundled_scenario_names, load_scenario
from .diffusion import run_ensemble_qsd
from .ensemble import average, fit_rate_series
from .errors import ConfigError, NumericalError
from .lindblad import concurrence_series, evolve_rho
from .linalg import ConvergenceError
from .models import Scenario
from .optimize import optimize_unraveling
from .quantum_jump import run_ensemble
from .rates import analytic_mean_concurrence, rate_report

log = logging.getLogger("trajent")

UNRAVELINGS = ("qj", "qsd-homodyne", "qsd-heterodyne", "master")


def _setup_logging() -> None:
    level = os.environ.get("TRAJENT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _write_json(doc, out_path: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    stream, close = _open_out(out_path)
    try:
        stream.write(text)
    finally:
        if close:
            stream.close()


def _grid_args(args) -> tuple[float, float]:
    t_max = args.tmax
    if t_max is None or t_max <= 0:
        raise ConfigError("--tmax must be given and positive")
    grid = args.grid if args.grid is not None else t_max / 100.0
    if grid <= 0 or grid > t_max + 1e-12:
        raise ConfigError("--grid must be in (0, tmax]")
    return t_max, grid


def cmd_simulate(args) -> int:
    s = load_scenario(args.config)
    t_max, grid = _grid_args(args)
    unraveling = args.unraveling
    log.info("simulate: %s unraveling=%s traj=%d tmax=%g grid=%g seed=%d",
             args.config, unraveling, args.traj, t_max, grid, args.seed)

    t0 = time.perf_counter()
    if unraveling == "master":
        mean = stderr = None
        times = grid * np.arange(int(round(t_max / grid)) + 1)
    else:
        if unraveling == "qj":
            records = run_ensemble(s, t_max, args.traj, dt=args.dt,
                                   seed=args.seed, record_grid=grid,
                                   workers=args.threads)
        else:
            kind = unraveling.split("-", 1)[1]
            records = run_ensemble_qsd(kind, s, t_max, args.traj, dt=args.dt,
                                       seed=args.seed, record_grid=grid,
                                       workers=args.threads)
        summary = average(records)
        times, mean, stderr = summary.times, summary.mean_c, summary.stderr

    evo = evolve_rho(s, t_max, record_grid=grid)
    c_rho = concurrence_series(evo)
    analytic = analytic_mean_concurrence(s, unraveling, times)
    log.info("simulate: done in %.2f s", time.perf_counter() - t0)

    stream, close = _open_out(args.out)
    try:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["t", "mean_C", "stderr_C", "analytic_C", "C_rho"])
        for i, t in enumerate(times):
            w.writerow([
                _fmt(t),
                _fmt(mean[i]) if mean is not None else "",
                _fmt(stderr[i]) if stderr is not None else "",
                _fmt(analytic[i]) if analytic is not None else "",
                _fmt(c_rho[i]),
            ])
    finally:
        if close:
            stream.close()
    return 0


def cmd_master(args) -> int:
    s = load_scenario(args.config)
    t_max, grid = _grid_args(args)
    evo = evolve_rho(s, t_max, dt=args.dt, record_grid=grid)
    c_rho = concurrence_series(evo)
    stream, close = _open_out(args.out)
    try:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["t", "C_rho"])
        for t, c in zip(evo.times, c_rho):
            w.writerow([_fmt(t), _fmt(c)])
    finally:
        if close:
            stream.close()
    return 0


def cmd_rates(args) -> int:
    s = load_scenario(args.config)
    try:
        report = rate_report(s)
    except ValueError as exc:
        # collective channels have no closed-form exponential rate
        print(f"error: {exc}", file=sys.stderr)
        return 2
    doc = {
        "kappa_qj": report.kappa_qj,
        "kappa_ho": report.kappa_ho,
        "kappa_ho_opt": report.kappa_ho_opt,
        "kappa_het": report.kappa_het,
        "kappa_qj_opt_thermal": report.kappa_qj_opt_thermal,
        "per_channel": [dataclasses.asdict(t) for t in report.per_channel],
    }
    _write_json(doc, args.out)
    return 0


def cmd_fit(args) -> int:
    path = Path(args.csv)
    try:
        with open(path, newline="") as f:
            rows = list(csv.DictReader(f))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    col = args.column
    if col not in rows[0]:
        raise ConfigError(f"{path}: no column {col!r}; have "
                          f"{sorted(rows[0])}")

    def column(name):
        vals = [r.get(name, "") for r in rows]
        if any(v == "" or v is None for v in vals):
            return None
        return np.array([float(v) for v in vals])

    t = column("t")
    y = column(col)
    if t is None or y is None:
        raise ConfigError(f"{path}: column 't' or {col!r} has gaps")
    stderr = column("stderr_C") if col == "mean_C" else None

    fit = fit_rate_series(t, y, stderr)
    doc = {
        "column": col,
        "rate": fit.rate,
        "rate_stderr": fit.rate_stderr,
        "c0": fit.c0,
        "window": list(fit.window),
        "n_points": fit.n_points,
        "r_squared": fit.r_squared,
    }
    analytic = column("analytic_C")
    if analytic is not None and col != "analytic_C":
        ref = fit_rate_series(t, analytic)
        doc["analytic_rate"] = ref.rate
        doc["rate_over_analytic"] = fit.rate / ref.rate if ref.rate != 0 \
            else None
    _write_json(doc, args.out)
    return 0


def cmd_optimize(args) -> int:
    s = load_scenario(args.config)
    if s.thermal_rates is None:
        raise ConfigError(
            "the mixing optimizer needs a thermal-type scenario "
            "(presets photon_counting, thermal, or rotated_thermal)")
    opt = optimize_unraveling(*s.thermal_rates, restarts=args.restarts,
                              seed=args.seed)
    doc = {
        "achieved": opt.achieved,
        "reference_balanced_mixing": opt.reference,
        "u_a": [[[z.real, z.imag] for z in row] for row in opt.u_a],
        "u_b": [[[z.real, z.imag] for z in row] for row in opt.u_b],
        "detector_phases_a": list(opt.phases_a),
        "detector_phases_b": list(opt.phases_b),
        "thermal_rates": list(s.thermal_rates),
    }
    _write_json(doc, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="trajent",
        description="Trajectory unravelings and entanglement decay of two "
                    "monitored qubits.",
        epilog="Bundled scenarios: " + ", ".join(bundled_scenario_names()))
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, traj=False):
        sp.add_argument("--config", required=True,
                        help="scenario description file (JSON)")
        sp.add_argument("--out", default=None,
                        help="output path ('-' or omitted for stdout)")

    sp = sub.add_parser("simulate", help="run a trajectory ensemble")
    common(sp)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dt", type=float, default=None,
                    help="integration step upper bound (default: automatic)")
    sp.add_argument("--tmax", type=float, required=True)
    sp.add_argument("--grid", type=float, default=None,
                    help="recording grid spacing (default tmax/100)")
    sp.add_argument("--traj", type=int, default=1000)
    sp.add_argument("--threads", type=int, default=1,
                    help="worker processes for the ensemble")
    sp.add_argument("--unraveling", choices=UNRAVELINGS, default="qj")
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("master", help="master-equation evolution only")
    common(sp)
    sp.add_argument("--dt", type=float, default=None)
    sp.add_argument("--tmax", type=float, required=True)
    sp.add_argument("--grid", type=float, default=None)
    sp.set_defaults(fn=cmd_master)

    sp = sub.add_parser("rates", help="closed-form decay rates as JSON")
    common(sp)
    sp.set_defaults(fn=cmd_rates)

    sp = sub.add_parser("fit", help="fit a decay rate to a simulate CSV")
    sp.add_argument("csv", help="CSV file written by 'simulate'")
    sp.add_argument("--column", default="mean_C")
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=cmd_fit)

    sp = sub.add_parser("optimize", help="best channel mixing (thermal baths)")
    common(sp)
    sp.add_argument("--restarts", type=int, default=32)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=cmd_optimize)

    return p


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ConvergenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
