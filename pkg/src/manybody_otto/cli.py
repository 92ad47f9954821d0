"""Command-line front end.

Subcommands: ``cycle`` (one operating point), ``optimize`` (work-optimal x and
the supremacy ratios there), ``sweep`` (ratio tables over parameter grids)
and ``validate`` (the invariant suite).

Frequencies are in units of omega1 and temperatures are given as beta_c
(in 1/omega1) together with a = beta_h / beta_c. Options may also come from
a ``--config`` file of ``key = value`` lines; command-line flags win.

Exit codes: 0 success, 1 runtime or validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

from .cycle import Driving, OttoCycleSpec, performance
from .errors import DomainError, IntegrationError, NotAnEngineError, OptimizationError
from .supremacy import AXES, Convention, RatioPoint, SweepSpec, ratios_at_optima, sweep
from .thermo import MediumSpec
from .validation import CHECKS, run_checks

ENV_OUTPUT_DIR = "MANYBODY_OTTO_OUTPUT_DIR"
DEFAULT_PRECISION = 12

TABLE_FIELDS = (
    "a", "x", "n", "lambda", "sigma_c", "sigma_h", "driving",
    "work", "efficiency", "power", "r", "rho", "q2_positive", "engine_valid",
)
CYCLE_FIELDS = (
    "a", "x", "n", "lambda", "sigma_c", "sigma_h", "driving",
    "work", "efficiency", "power", "q2_positive", "engine_valid",
    "energy_A", "energy_B", "energy_C", "energy_D", "W1", "Q2", "W3", "Q4",
    "q_ab", "q_cd", "eta_otto", "eta_nad_bound",
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --- parsing helpers --------------------------------------------------------


def parse_grid(text: str, cast=float) -> tuple:
    """``"0.1,0.2"`` or an inclusive range ``"start:stop:step"`` (or a mix, comma-separated)."""
    values = []
    for chunk in str(text).split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" in chunk:
            parts = chunk.split(":")
            if len(parts) != 3:
                raise UsageError(f"bad range {chunk!r}; expected start:stop:step")
            start, stop, step = (float(p) for p in parts)
            if step <= 0:
                raise UsageError("range step must be positive")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            values.extend(cast(round(start + k * step, 12)) for k in range(count))
        else:
            values.append(cast(float(chunk)) if cast is int else cast(chunk))
    if not values:
        raise UsageError(f"empty grid {text!r}")
    return tuple(values)


def read_config(path: str) -> list[tuple[str, str]]:
    entries = []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        entries.append((key.replace("_", "-").lower(), value))
    return entries


def _driving(text: str) -> Driving:
    try:
        return Driving(text.lower())
    except ValueError:
        raise argparse.ArgumentTypeError(f"driving must be one of {[d.value for d in Driving]}") from None


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="file of 'key = value' lines (# starts a comment)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", help="output file (default: stdout)")
    p.add_argument(
        "--output-dir",
        default=os.environ.get(ENV_OUTPUT_DIR),
        help=f"directory for relative --output paths (default: ${ENV_OUTPUT_DIR})",
    )
    p.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="significant digits")


def _add_physics(p: argparse.ArgumentParser, grid: bool = False) -> None:
    p.add_argument("--driving", type=_driving, default=Driving.SUDDEN)
    p.add_argument("--omega1", type=float, default=1.0)
    p.add_argument("--ramp-time", type=float, help="unitary stroke duration for ramp driving")
    p.add_argument("--isochore-times", default="1,1", help="tau2,tau4 (default 1,1)")
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--abs-tol", type=float, default=1e-12)
    if grid:
        p.add_argument("--a", dest="a", help="grid of a = beta_h/beta_c")
        p.add_argument("--n", dest="n", default="200", help="grid of particle numbers")
        p.add_argument("--lambda", dest="lam", default="0", help="grid of couplings")
        p.add_argument("--sigma-c", dest="sigma_c", help="grid of sigma_c = N beta_c omega1")
        p.add_argument("--beta-c", dest="beta_c", type=float, help="fixed beta_c (sigma_c then follows N)")
    else:
        p.add_argument("--a", dest="a", type=float)
        p.add_argument("--n", dest="n", type=int, default=1)
        p.add_argument("--lambda", dest="lam", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="manybody-otto", description="Many-particle quantum Otto engine calculator.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cycle", help="evaluate one operating point")
    _add_physics(p)
    p.add_argument("--x", type=float, help="omega1/omega2")
    p.add_argument("--beta-c", dest="beta_c", type=float)
    _add_output(p)

    p = sub.add_parser("optimize", help="maximise work over x and report the ratios there")
    _add_physics(p)
    p.add_argument("--sigma-c", dest="sigma_c", type=float)
    p.add_argument("--beta-c", dest="beta_c", type=float)
    _add_output(p)

    p = sub.add_parser("sweep", help="supremacy ratios over parameter grids")
    _add_physics(p, grid=True)
    p.add_argument(
        "--convention",
        choices=[c.value for c in Convention],
        default=Convention.AT_RESPECTIVE_OPTIMA.value,
    )
    p.add_argument("--x", type=float, help="shared x for the same_resources convention")
    p.add_argument("--order", default=",".join(AXES), help="axis order, slowest first")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: CPU count)")
    _add_output(p)

    p = sub.add_parser("validate", help="run the invariant suite")
    p.add_argument("--config", help="file of 'key = value' lines")
    p.add_argument("--only", action="append", help=f"check name(s), comma-separated; one of {', '.join(CHECKS)}")
    p.add_argument("--seed", type=int, default=0)
    return parser


def _option_map(parser: argparse.ArgumentParser) -> dict[str, str]:
    """Long option name (without dashes) to option string, for config validation."""
    out = {}
    for action in parser._actions:
        for opt in action.option_strings:
            if opt.startswith("--") and opt not in ("--help", "--config"):
                out[opt[2:]] = opt
    return out


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sub = parser._subparsers._group_actions[0].choices[args.command]
        options = _option_map(sub)
        tokens = []
        try:
            entries = read_config(args.config)
        except UsageError as exc:
            sub.error(str(exc))
        for key, value in entries:
            if key not in options:
                sub.error(f"unknown config key {key!r}")
            tokens += [options[key], value]
        # config first so command-line flags override it
        rest = argv[argv.index(args.command) + 1 :]
        args = parser.parse_args([args.command, *tokens, *rest])
        args._subparser = sub
    else:
        args._subparser = parser._subparsers._group_actions[0].choices[args.command]
    return args


# --- formatting -------------------------------------------------------------


def _num(value, precision: int):
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, int):
        return value
    v = float(value)
    if math.isnan(v) or math.isinf(v):
        return None
    return float(format(v, f".{precision}g"))


def _csv_cell(value, precision: int) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    v = float(value)
    if math.isnan(v):
        return "nan"
    return format(v, f".{precision}g")


def render(records: list[dict], fields, fmt: str, precision: int) -> str:
    if fmt == "json":
        rows = [{k: _num(r[k], precision) for k in fields} for r in records]
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for r in records:
        writer.writerow([_csv_cell(r[k], precision) for k in fields])
    return buf.getvalue()


def emit(text: str, args) -> None:
    if not args.output and not args.output_dir:
        sys.stdout.write(text)
        return
    target = Path(args.output) if args.output else Path(f"{args.command}.{args.format}")
    if not target.is_absolute() and args.output_dir:
        target = Path(args.output_dir) / target
    target.write_text(text)


def cycle_record(spec: OttoCycleSpec) -> dict:
    p = performance(spec)
    led = p.ledger
    return {
        "a": spec.a, "x": spec.x, "n": spec.medium.n_particles, "lambda": spec.medium.coupling,
        "sigma_c": spec.sigma_c, "sigma_h": spec.sigma_h, "driving": spec.driving.value,
        "work": p.total_work_out, "efficiency": p.efficiency, "power": p.power,
        "q2_positive": bool(p.q2_positive), "engine_valid": bool(p.engine_valid),
        "energy_A": led.energy_A, "energy_B": led.energy_B, "energy_C": led.energy_C, "energy_D": led.energy_D,
        "W1": led.W1, "Q2": led.Q2, "W3": led.W3, "Q4": led.Q4,
        "q_ab": led.q_ab.value, "q_cd": led.q_cd.value,
        "eta_otto": p.eta_otto, "eta_nad_bound": p.eta_nad_bound,
    }


def ratio_record(point: RatioPoint) -> dict:
    return {
        "a": point.a, "x": point.x_opt_many, "n": point.n_particles, "lambda": point.coupling,
        "sigma_c": point.sigma_c, "sigma_h": point.sigma_h, "driving": point.driving.value,
        "work": point.work, "efficiency": point.efficiency, "power": point.power,
        "r": point.r, "rho": point.rho,
        "q2_positive": point.q2_positive, "engine_valid": point.engine_valid,
    }


# --- commands ---------------------------------------------------------------


def _pair(text: str, name: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"{name} must be two comma-separated numbers") from None
    return lo, hi


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            args._subparser.error(f"--{name.replace('_', '-')} is required")


def cmd_cycle(args) -> int:
    _require(args, "x", "a", "beta_c")
    spec = OttoCycleSpec.from_ratios(
        args.x, args.a, args.beta_c, MediumSpec(args.n, args.lam), args.driving, **_cycle_kwargs(args)
    )
    emit(render([cycle_record(spec)], CYCLE_FIELDS, args.format, args.precision), args)
    return EXIT_OK


def _sigma_c(args, n: int) -> float:
    if (args.sigma_c is None) == (args.beta_c is None):
        args._subparser.error("give exactly one of --sigma-c or --beta-c")
    return args.sigma_c if args.sigma_c is not None else n * args.beta_c * args.omega1


def _cycle_kwargs(args) -> dict:
    return dict(
        omega1=args.omega1,
        ramp_time=args.ramp_time,
        isochore_times=_pair(args.isochore_times, "--isochore-times"),
        rel_tol=args.rel_tol,
        abs_tol=args.abs_tol,
    )


def cmd_optimize(args) -> int:
    _require(args, "a")
    sigma_c = _sigma_c(args, args.n)
    point = ratios_at_optima(args.a, MediumSpec(args.n, args.lam), sigma_c, args.driving, **_cycle_kwargs(args))
    emit(render([ratio_record(point)], TABLE_FIELDS, args.format, args.precision), args)
    return EXIT_OK


def cmd_sweep(args) -> int:
    _require(args, "a")
    if (args.sigma_c is None) == (args.beta_c is None):
        args._subparser.error("give exactly one of --sigma-c or --beta-c")
    spec = SweepSpec(
        a_values=parse_grid(args.a),
        n_values=parse_grid(args.n, int),
        lambda_values=parse_grid(args.lam),
        sigma_c_values=parse_grid(args.sigma_c) if args.sigma_c is not None else None,
        driving=args.driving,
        convention=Convention(args.convention),
        x=args.x,
        beta_c=args.beta_c,
        **_cycle_kwargs(args),
        order=tuple(s.strip() for s in args.order.split(",")),
    )
    points = sweep(spec, workers=args.workers)
    emit(render([ratio_record(p) for p in points], TABLE_FIELDS, args.format, args.precision), args)
    return EXIT_OK


def cmd_validate(args) -> int:
    names = None
    if args.only:
        names = [n.strip() for chunk in args.only for n in chunk.split(",") if n.strip()]
        unknown = [n for n in names if n not in CHECKS]
        if unknown:
            args._subparser.error(f"unknown check(s): {', '.join(unknown)}")
    results = run_checks(names, seed=args.seed)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:<{width}}  deviation={r.deviation:.3e}  tol={r.tolerance:.1e}  {r.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


COMMANDS = {"cycle": cmd_cycle, "optimize": cmd_optimize, "sweep": cmd_sweep, "validate": cmd_validate}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, DomainError) as exc:
        args._subparser.print_usage(sys.stderr)
        print(f"{args._subparser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (IntegrationError, OptimizationError, NotAnEngineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
