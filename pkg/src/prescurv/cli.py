"""Command-line entry point.

Exit codes: 0 success / converged, 1 verification failures, 2 guard abort
or invalid barriers, 3 max_steps reached, 64 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import ambient as am
from .config import SCENARIOS, load_config, scenario_config
from .curvfun import classify, parse_family
from .errors import ConfigError, PrescurvError
from .flow import InvalidBarriers, run, validate_barriers
from .hypersurface import export_fields_csv, geometry

EXIT_OK, EXIT_FAILED, EXIT_ABORT, EXIT_MAX_STEPS, EXIT_USAGE = 0, 1, 2, 3, 64

log = logging.getLogger("prescurv")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serialisable: {type(obj).__name__}")


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default)


def _env_seed(default):
    raw = os.environ.get("PRESCURV_SEED")
    return int(raw) if raw not in (None, "") else default


def _run_config(args):
    if args.config:
        return load_config(args.config)
    if args.scenario:
        return scenario_config(args.scenario)
    raise ConfigError("need --config or --scenario")


def cmd_run(args):
    rc = _run_config(args)
    cfg = rc.build()
    out = args.out or rc.output.get("dir")
    if not out:
        raise ConfigError("need --out (or output.dir in the config)")
    os.makedirs(out, exist_ok=True)
    try:
        report = run(cfg, snapshot_dir=os.path.join(out, "snapshots"))
    except InvalidBarriers as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ABORT
    report.write(out)
    if args.figures or rc.output.get("figures"):
        from .plotting import field_figure, series_figure

        series_figure(report, os.path.join(out, "series.png"))
        field_figure(report.final_state, os.path.join(out, "final_u.png"))
    if rc.output.get("fields_csv"):
        geom = geometry(report.final_state, cfg.func)
        export_fields_csv(os.path.join(out, "fields.csv"), report.final_state, geom)
    print(f"stop_cause={report.stop_cause} steps={report.steps} t_flow={report.t_flow!r} "
          f"residual={report.series['residual'][-1]!r}")
    if report.stop_cause == "converged":
        return EXIT_OK
    if report.stop_cause == "max_steps":
        return EXIT_MAX_STEPS
    print(report.message, file=sys.stderr)
    return EXIT_ABORT


def cmd_check_curvfun(args):
    func = parse_family(args.family, args.dimension)
    report = classify(func, samples=args.samples, seed=_env_seed(args.seed))
    print(_dump(report.to_dict()))
    return EXIT_OK


def _ambient_from_args(args):
    if args.config:
        return load_config(args.config).ambient()
    if not args.warp:
        raise ConfigError("need --config or --warp")
    warp = am.Warp.from_name(args.warp)
    return am.WarpedAmbient(args.dimension, warp, am.ConformalFactor(*args.psi), tuple(args.slab))


def cmd_inspect_ambient(args):
    amb = _ambient_from_args(args)
    ts = np.linspace(amb.slab[0], amb.slab[1], args.points)
    kb = am.kappa_bar(amb, ts)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["t", "kappa_bar", f"chi_pd({args.lam!r})"])
    for t, k in zip(ts, kb):
        chi = am.convex_chi(amb, region=(t, t), lam=args.lam, times=1, samples=256, seed=_env_seed(0))
        writer.writerow([repr(float(t)), repr(float(k)), str(chi.positive_definite).lower()])
    return EXIT_OK


def cmd_barriers(args):
    cfg = _run_config(args).build()
    verdicts = validate_barriers(cfg)
    print(_dump(verdicts))
    return EXIT_OK if verdicts["lower"]["valid"] and verdicts["upper"]["valid"] else EXIT_ABORT


def cmd_verify(args):
    from .verify import format_table, run_all

    only = {int(x) for x in args.only.split(",")} if args.only else None
    results = run_all(only)
    print(format_table(results))
    if args.json:
        record = [
            {"number": r.number, "title": r.title, "passed": r.passed, "runtime": r.runtime,
             "budget": r.budget, "checks": r.checks}
            for r in results
        ]
        with open(args.json, "w") as fh:
            fh.write(_dump(record))
    return EXIT_OK if all(r.passed and r.within_budget for r in results) else EXIT_FAILED


def build_parser():
    p = _Parser(prog="prescurv", description="Prescribed curvature flow of space-like graphs.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    r = sub.add_parser("run", help="integrate the flow and write a report")
    r.add_argument("--config")
    r.add_argument("--scenario", choices=sorted(SCENARIOS))
    r.add_argument("--out")
    r.add_argument("--figures", action="store_true", help="also render PNG figures")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("check-curvfun", help="certify a curvature function")
    c.add_argument("--family", required=True, help="e.g. K, sigma(2), product(invsigma(1),K)")
    c.add_argument("--dimension", "-n", type=int, default=2)
    c.add_argument("--samples", type=int, default=10_000)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_check_curvfun)

    a = sub.add_parser("inspect-ambient", help="tabulate level-set curvature and chi convexity")
    a.add_argument("--config")
    a.add_argument("--warp", choices=["exp_decay", "gauss_decay", "const", "cosh"])
    a.add_argument("--dimension", "-n", type=int, default=2)
    a.add_argument("--slab", type=float, nargs=2, default=[0.0, 1.0])
    a.add_argument("--psi", type=float, nargs=2, default=[0.0, 0.0])
    a.add_argument("--lambda", dest="lam", type=float, default=1.0)
    a.add_argument("--points", type=int, default=11)
    a.set_defaults(func=cmd_inspect_ambient)

    b = sub.add_parser("barriers", help="validate the barrier pair")
    b.add_argument("--config")
    b.add_argument("--scenario", choices=sorted(SCENARIOS))
    b.set_defaults(func=cmd_barriers)

    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--only", help="comma-separated criterion numbers")
    v.add_argument("--json", help="write the detailed results here")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PrescurvError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
