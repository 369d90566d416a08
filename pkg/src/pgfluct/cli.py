"""Command line front end: ``pgfluct compute | sweep | check | plot``.

All inputs are in natural units; mass, temperature and inverse radius are
powers of one common energy unit.

Exit codes: 0 success, 1 invalid input, 2 non-convergence, 3 failed check.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .core import DEFAULT_DEGENERACY, DomainError, MassRequiredForGauge, PseudoGauge, SystemParams
from .records import MalformedCSV, RunRecord, SWEEPABLE, SweepSpec, csv_preamble, run_sweep, write_sweep_csv
from .quadrature import AngularMode, QuadratureConfig

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGED, EXIT_CHECK = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _gauge(text):
    try:
        return PseudoGauge.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _gauge_list(text):
    return [_gauge(t) for t in text.split(",") if t.strip()]


def _add_quadrature_flags(p):
    p.add_argument("--tol", type=float, default=1e-6, help="relative tolerance (default 1e-6)")
    p.add_argument("--angular", choices=[m.value for m in AngularMode],
                   default=AngularMode.ANALYTIC_MOMENTS.value, help="angular integration mode")
    p.add_argument("--degeneracy", type=float, default=DEFAULT_DEGENERACY)


def build_parser():
    parser = _Parser(prog="pgfluct", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pgfluct {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compute", help="one parameter point, one gauge")
    c.add_argument("--gauge", type=_gauge, required=True, help="can | br | glw | hw")
    c.add_argument("--mass", type=float, required=True)
    c.add_argument("--temp", type=float, required=True)
    c.add_argument("--radius", type=float, required=True)
    c.add_argument("--format", choices=["json", "csv"], default="json")
    _add_quadrature_flags(c)

    s = sub.add_parser("sweep", help="scan one parameter, write CSV")
    s.add_argument("--config", help="key=value file; flags override its values")
    s.add_argument("--param", choices=SWEEPABLE)
    s.add_argument("--from", dest="start", type=float)
    s.add_argument("--to", dest="stop", type=float)
    s.add_argument("--points", type=int)
    s.add_argument("--spacing", choices=["linear", "log"], default="log")
    s.add_argument("--gauges", type=_gauge_list, default=None, help="comma list, default all")
    s.add_argument("--mass", type=float, default=1.0)
    s.add_argument("--temp", type=float, default=1.0)
    s.add_argument("--radius", type=float, default=1.0)
    s.add_argument("--jobs", type=int, default=int(os.environ.get("PGFLUCT_JOBS", "1")))
    s.add_argument("--output", "-o", help="CSV path (default stdout)")
    _add_quadrature_flags(s)

    k = sub.add_parser("check", help="run invariant and oracle checks")
    k.add_argument("--quick", action="store_true", help="reduced grids")
    k.add_argument("--grid", help="comma list of m/T values (default 0.5,1,5)")
    k.add_argument("--report", help="write a JSON report here")

    p = sub.add_parser("plot", help="SVG line plot of a sweep CSV")
    p.add_argument("csv")
    p.add_argument("--x", default="a")
    p.add_argument("--y", default="sigma_n")
    p.add_argument("--series", default="gauge")
    p.add_argument("--logx", action="store_true")
    p.add_argument("--logy", action="store_true")
    p.add_argument("--output", "-o", required=True, help="SVG path")
    p.add_argument("--data", help="sidecar CSV path (default: <svg stem>.data.csv)")
    parser.commands = {"compute": c, "sweep": s, "check": k, "plot": p}
    return parser


# flag name in a config file -> argparse destination
_CONFIG_KEYS = {"param": "param", "from": "start", "to": "stop", "points": "points",
                "spacing": "spacing", "gauges": "gauges", "mass": "mass", "temp": "temp",
                "radius": "radius", "jobs": "jobs", "output": "output", "tol": "tol",
                "angular": "angular", "degeneracy": "degeneracy"}


def read_config(path):
    """Parse a flat ``key = value`` file; '#' starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (t.strip() for t in line.split("=", 1))
            key = key.lstrip("-")
            if key not in _CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def _config(args):
    return QuadratureConfig(rel_tol=args.tol, angular_mode=args.angular)


def cmd_compute(args, out=None):
    out = out or sys.stdout
    params = SystemParams(args.mass, args.temp, args.radius, args.degeneracy)
    rec = RunRecord.compute(args.gauge, params, _config(args))
    if args.format == "json":
        out.write(rec.to_json() + "\n")
    else:
        out.write(csv_preamble() + rec.csv_row() + "\n")
    return EXIT_OK if rec.result.converged else EXIT_NONCONVERGED


def _config_defaults(sweep_parser, path):
    """Turn a config file into typed defaults for the sweep parser."""
    actions = {a.dest: a for a in sweep_parser._actions}
    defaults = {}
    for key, text in read_config(path).items():
        action = actions[_CONFIG_KEYS[key]]
        try:
            value = action.type(text) if action.type else text
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"config key {key!r}: {exc}") from None
        if action.choices and value not in action.choices:
            raise UsageError(f"config key {key!r}: invalid choice {value!r}")
        defaults[action.dest] = value
    return defaults


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "sweep":
        return args
    if args.config:
        # file values become defaults, so explicit flags still win
        parser.commands["sweep"].set_defaults(**_config_defaults(parser.commands["sweep"], args.config))
        args = parser.parse_args(argv)
    for flag, dest in (("--param", "param"), ("--from", "start"), ("--to", "stop"),
                       ("--points", "points")):
        if getattr(args, dest) is None:
            raise UsageError(f"sweep needs {flag}")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    return args


def cmd_sweep(args, out=None):
    out = out or sys.stdout
    fixed = SystemParams(args.mass, args.temp, args.radius, args.degeneracy)
    gauges = args.gauges or [PseudoGauge.CANONICAL, PseudoGauge.BELINFANTE_ROSENFELD,
                             PseudoGauge.GLW, PseudoGauge.HW]
    spec = SweepSpec(args.param, args.start, args.stop, args.points, args.spacing, gauges, fixed)
    records = run_sweep(spec, _config(args), jobs=args.jobs)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            write_sweep_csv(records, fh)
    else:
        write_sweep_csv(records, out)
    failed = sum(not r.result.converged for r in records)
    if failed:
        print(f"pgfluct: {failed} row(s) did not converge", file=sys.stderr)
    return EXIT_NONCONVERGED if failed else EXIT_OK


def cmd_check(args, out=None):
    out = out or sys.stdout
    from .checks import run_checks

    grid = [float(t) for t in args.grid.split(",")] if args.grid else None
    results = []
    for res in run_checks(quick=args.quick, mass_ratios=grid):
        out.write(res.line() + "\n")
        out.flush()
        results.append(res)
    passed = all(r.passed for r in results)
    out.write(f"{sum(r.passed for r in results)}/{len(results)} checks passed\n")
    if args.report:
        report = [dict(name=r.name, measured=r.measured, allowed=r.allowed, passed=r.passed,
                       seconds=r.seconds) for r in results]
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump({"tool_version": __version__, "checks": report}, fh, indent=2)
    return EXIT_OK if passed else EXIT_CHECK


def cmd_plot(args, out=None):
    out = out or sys.stdout
    from .plotting import plot_csv

    data = plot_csv(args.csv, args.output, args.x, args.y, args.series or None,
                    logx=args.logx, logy=args.logy, data_path=args.data)
    out.write(f"wrote {args.output} and {data}\n")
    return EXIT_OK


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        try:
            args = parse_args(argv)
        except SystemExit as exc:   # argparse usage errors, --help, --version
            return exc.code if isinstance(exc.code, int) else EXIT_INPUT
        handler = {"compute": cmd_compute, "sweep": cmd_sweep, "check": cmd_check,
                   "plot": cmd_plot}[args.command]
        return handler(args)
    except MassRequiredForGauge as exc:
        print(f"pgfluct: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DomainError, UsageError, MalformedCSV, ValueError, OSError) as exc:
        print(f"pgfluct: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
