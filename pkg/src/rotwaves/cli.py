"""Command line entry point: ``rotwaves run|sweep|check``."""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, load_config
from .scenario import run_scenario, run_sweep
from .waterwaves import RECORD_COLUMNS

EXIT_TRIP = 3
EXIT_CONFIG = 2


def fmt(x):
    if isinstance(x, (str, int)) and not isinstance(x, bool):
        return str(x)
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_manifest(path, entries):
    with open(path, "w", encoding="utf-8") as fh:
        for k, v in entries:
            fh.write(f"{k} = {v}\n")


def _field_rows(name, run, state):
    g = run.grid
    if name == "waterwaves":
        from .divcurl import solve_divcurl
        from .swe import q_from_omega
        sol = solve_divcurl(state.zeta, run.b, state.psi, state.omega, run.params, g,
                            mean_flow=state.mean_flow, check_div=False)
        vbar, q, psi = sol.v_bar, q_from_omega(state.omega, sol.smap), state.psi
    else:
        vbar, q, psi = state.v_bar, state.q, np.full(g.nx, np.nan)
    for i in range(g.nx):
        yield (name, g.x[i], state.zeta[i], psi[i], vbar[0, i], vbar[1, i], q[0, i], q[1, i], run.b[i])


FIELD_COLUMNS = ("model", "x", "zeta", "psi", "vbar_x", "vbar_y", "q_x", "q_y", "b")


def write_run(result, out_dir: Path):
    cfg = result.config
    runs = [(n, r) for n, r in (("waterwaves", result.waterwaves), ("swe", result.swe)) if r]
    rows = [(name,) + tuple(rec[c] for c in RECORD_COLUMNS) for name, r in runs for rec in r.records]
    write_csv(out_dir / "run.csv", ("model",) + RECORD_COLUMNS, rows)

    by_time = {}
    for name, r in runs:
        for s in r.snapshots:
            by_time.setdefault(round(s.t, 9), []).append((name, r, s))
    written = []
    for t in sorted(by_time):
        fname = f"fields_{t:.6f}.csv"
        rows = [row for name, r, s in by_time[t] for row in _field_rows(name, r, s)]
        write_csv(out_dir / fname, FIELD_COLUMNS, rows)
        written.append(fname)

    if result.comparison is not None:
        c = result.comparison
        write_csv(out_dir / "compare.csv",
                  ("t", "err_zeta", "err_vbar", "err_sqrt_mu_q", "err_surface", "err_max"),
                  zip(c.t, c.zeta, c.v_bar, c.q, c.surface, c.combined))
    return written


def _manifest_head(cfg, command, seed):
    entries = [("command", command), ("code_version", __version__), ("seed", seed),
               ("timestamp", _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))]
    entries += [(f"config.{k}", v) for k, v in sorted(cfg.echo().items())]
    return entries


def cmd_run(args):
    cfg = load_config(args.config, seed=args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = run_scenario(cfg)
    files = write_run(result, out)
    entries = _manifest_head(cfg, "run", cfg.seed)
    for name, r in (("waterwaves", result.waterwaves), ("swe", result.swe)):
        if r is not None:
            entries += [(f"{name}.dt", fmt(r.dt)), (f"{name}.steps", len(r.records) - 1)]
    status = 0
    trips = result.trips
    for trip in trips:
        entries += [("trip.kind", trip.kind), ("trip.value", fmt(trip.value)),
                    ("trip.t", fmt(trip.snapshot.t))]
        print(f"monitor trip: {trip}", file=sys.stderr)
        status = EXIT_TRIP
    entries += [("fields", ",".join(files)), ("status", "tripped" if trips else "ok")]
    write_manifest(out / "manifest.txt", entries)
    return status


def cmd_sweep(args):
    cfg = load_config(args.config, seed=args.seed)
    if cfg.sweep is None:
        raise ConfigError("a sweep needs a [sweep] section")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    values, metrics, fit = run_sweep(cfg, threads=args.threads)
    spec = cfg.sweep
    write_csv(out / "sweep.csv", (spec.parameter, spec.metric), zip(values, metrics))
    write_csv(out / "sweep_fit.csv", ("parameter", "metric", "slope", "intercept", "residual"),
              [(spec.parameter, spec.metric, fit.slope, fit.intercept, fit.residual)])
    entries = _manifest_head(cfg, "sweep", cfg.seed)
    entries += [("slope", fmt(fit.slope)), ("status", "ok")]
    write_manifest(out / "manifest.txt", entries)
    for v, m in zip(values, metrics):
        print(f"{spec.parameter}={v:g}  {spec.metric}={m:.6e}")
    print(f"slope {fit.slope:.4f} (log-log residual {fit.residual:.2e})")
    return 0


def cmd_check(args):
    from .checks import run_checks
    return 0 if run_checks() else 1


def build_parser():
    ap = argparse.ArgumentParser(prog="rotwaves", description=__doc__)
    ap.add_argument("--out-dir", default="out", help="directory for CSV and manifest files")
    ap.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    ap.add_argument("--seed", type=int, default=None, help="override the config seed")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("config")
    p_sweep = sub.add_parser("sweep", help="run a parameter sweep and fit a slope")
    p_sweep.add_argument("config")
    sub.add_parser("check", help="run the invariant self-test battery")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": cmd_run, "sweep": cmd_sweep, "check": cmd_check}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
