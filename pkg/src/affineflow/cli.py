"""Command line: ``affineflow simulate | functionals | verify``.

Exit codes: 0 success; 1 a monitor or acceptance row failed; 2 bad config,
body or suite name; 3 the flow failed numerically.
"""

import argparse
import json
import logging
import sys
from dataclasses import asdict, astuple

from . import acceptance
from . import diagnostics as D
from .body import RNG_ALGORITHM, NonConvexError, OriginNotInteriorError
from .config import BODY_DEFAULTS, CONFIG_VERSION, ConfigError, as_float_list, build_body, load_config
from .flow import CSV_COLUMNS, FAILED, FlowState, center_at_limit, make_record, run
from .io import write_columns, write_reports_json, write_trajectory_csv

log = logging.getLogger("affineflow")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_FLOW = 0, 1, 2, 3


def _error(msg):
    print(f"error: {msg}", file=sys.stderr)


def simulate(cfg):
    """Run one configured experiment, write its outputs, and return the exit code."""
    try:
        body = build_body(cfg.body, cfg.grid)
    except (NonConvexError, OriginNotInteriorError) as exc:
        _error(f"body: {type(exc).__name__}: {exc}")
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        _error(f"body: {exc}")
        return EXIT_USAGE
    if cfg.recenter:
        body = center_at_limit(body, cfg.controller)
    harnack = D.streaming_harnack(t0=0.0) if "harnack" in cfg.monitors else None
    monitors = [harnack] if harnack else []
    trajectory, final = run(body, cfg.controller, monitors=monitors, record_every=cfg.record_every)

    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(cfg.trajectory_path, trajectory)
    write_columns(cfg.plot_path, CSV_COLUMNS, [[astuple(r) for r in trajectory]])
    reports = []
    if len(trajectory) >= 2:
        reports = [r for r in D.monotone_monitors(trajectory) if r.name in cfg.monitors]
    if harnack:
        reports.append(harnack.report())
    for r in reports:
        r.samples_ref = cfg.trajectory_file
    write_reports_json(cfg.monitors_path, reports)

    summary = {
        "config_version": CONFIG_VERSION,
        "body": cfg.body,
        "grid": cfg.grid,
        "rng_algorithm": RNG_ALGORITHM,
        "status": final.status,
        "reason": final.reason,
        "steps": final.steps,
        "t_final": final.t,
        "T_est": final.t_extinct,
        "final_ellipticity": D.ellipticity(final.body),
        "monitors": {r.name: r.verdict for r in reports},
    }
    cfg.summary_path.write_text(json.dumps(summary, indent=2))
    if final.status == FAILED:
        _error(f"flow failed: {final.reason}")
        return EXIT_FLOW
    if any(not r.ok for r in reports):
        return EXIT_FAIL
    return EXIT_OK


def cmd_simulate(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        for e in exc.errors:
            _error(e)
        return EXIT_USAGE
    code = simulate(cfg)
    if code in (EXIT_OK, EXIT_FAIL):
        print(cfg.summary_path.read_text())
    return code


def _body_spec_from_args(args):
    if args.ellipse is not None:
        vals = as_float_list(args.ellipse, 2, 3, "--ellipse")
        if min(vals[:2]) <= 0:
            raise ConfigError(["--ellipse: semi-axes must be positive"])
        return {"kind": "ellipse", "a": vals[0], "b": vals[1], "rot": vals[2] if len(vals) > 2 else 0.0}
    vals = as_float_list(args.random, 1, 4, "--random")
    spec = dict(BODY_DEFAULTS["random"], kind="random")
    for key, v in zip(("seed", "max_harmonic", "decay", "amplitude"), vals):
        spec[key] = int(v) if key in ("seed", "max_harmonic") else v
    return spec


def cmd_functionals(args):
    try:
        spec = _body_spec_from_args(args)
        if args.grid < 64 or args.grid & (args.grid - 1):
            raise ConfigError([f"--grid: must be a power of two >= 64, got {args.grid}"])
        body = build_body(spec, args.grid, halve=not args.no_halving)
    except ConfigError as exc:
        for e in exc.errors:
            _error(e)
        return EXIT_USAGE
    except (NonConvexError, OriginNotInteriorError) as exc:
        _error(f"{type(exc).__name__}: {exc}")
        return EXIT_USAGE
    rec = make_record(FlowState(t=0.0, body=body))
    print(json.dumps(asdict(rec), indent=2))
    return EXIT_OK


def cmd_verify(args):
    if args.suite not in acceptance.SUITES:
        _error(f"unknown suite {args.suite!r}; choose from {sorted(acceptance.SUITES)}")
        return EXIT_USAGE
    rows = []
    for check in acceptance.SUITES[args.suite]:
        for row in check():
            print(row.line(), flush=True)
            rows.append(row)
    failed = sum(not r.passed for r in rows)
    print(f"{len(rows) - failed}/{len(rows)} rows passed")
    return EXIT_FAIL if failed else EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="affineflow", description="Affine normal flow laboratory.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a configured experiment")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("functionals", help="print the functionals of one body")
    g = f.add_mutually_exclusive_group(required=True)
    g.add_argument("--ellipse", metavar="A,B[,ROT]")
    g.add_argument("--random", metavar="SEED[,K,DECAY,AMP]")
    f.add_argument("--grid", type=int, default=256)
    f.add_argument("--no-halving", action="store_true", help="take the random draw as is")
    f.set_defaults(func=cmd_functionals)

    v = sub.add_parser("verify", help="run an acceptance suite")
    v.add_argument("suite", help=", ".join(acceptance.SUITES))
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
