"""Command-line interface.

Exit codes: 0 success, 2 usage or parse error, 3 grid mismatch,
4 model singularity, 5 observed order disagrees with theory.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .convergence import cost_profile, geometric_steps, observed_order
from .metrics import case_error_table, case_estimates, grid_size
from .models import SingularityError, rate_function, singularities, value_function
from .presets import DEFAULT_PRESETS, PresetError, get_preset, load_registry
from .series import CSVFormatError, GridError, atomic_write_text, read_series_csv, series_to_csv
from .stencils import (
    Accuracy,
    BoundaryPolicy,
    EvaluationError,
    Family,
    Scheme,
    StencilError,
    builtin_stencil,
    differentiate_series,
    generate_stencil,
    trace_summary,
)
from .svgplot import line_chart

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_GRID = 3
EXIT_SINGULAR = 4
EXIT_ORDER = 5

ORDER_ALARM = 0.5
CASES = tuple(DEFAULT_PRESETS)


class CLIError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _clean(obj):
    """Replace non-finite floats by ``None`` so the JSON stays standard."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dump_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _emit(text: str, path) -> None:
    if path:
        atomic_write_text(path, text)
    else:
        sys.stdout.write(text)


def _overrides(pairs) -> dict:
    out = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep:
            raise CLIError(f"override {pair!r} is not of the form name=value", EXIT_USAGE)
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise CLIError(f"override {key!r}: {value!r} is not a number", EXIT_USAGE) from None
    return out


def _build_model(args):
    preset = get_preset(args.preset or DEFAULT_PRESETS[args.case])
    if preset.model != args.case:
        raise CLIError(f"preset {preset.name!r} is a {preset.model} preset, not {args.case}", EXIT_USAGE)
    try:
        return preset, preset.build(_overrides(args.set))
    except (PresetError, ValueError) as exc:
        raise CLIError(str(exc), EXIT_USAGE) from None


def _scheme(args) -> Scheme:
    return Scheme(args.scheme, args.accuracy)


# -- stencil ----------------------------------------------------------------

def cmd_stencil(args) -> int:
    if args.offsets is not None:
        if args.scheme or args.accuracy:
            raise CLIError("use either --offsets/--deriv or --scheme/--accuracy", EXIT_USAGE)
        try:
            offsets = [int(v) for v in args.offsets.split(",") if v.strip()]
        except ValueError:
            raise CLIError(f"invalid offsets {args.offsets!r}", EXIT_USAGE) from None
        try:
            stencil = generate_stencil(offsets, args.deriv)
        except StencilError as exc:
            raise CLIError(str(exc), EXIT_USAGE) from None
    else:
        if not (args.scheme and args.accuracy):
            raise CLIError("need --scheme and --accuracy, or --offsets", EXIT_USAGE)
        stencil = builtin_stencil(_scheme(args))
    doc = stencil.to_dict()
    if args.format == "json":
        text = json.dumps(doc) + "\n"
    elif args.format == "csv":
        text = "offset,coefficient\n" + "".join(
            f"{o},{c}\n" for o, c in zip(stencil.offsets, stencil.coefficients)
        )
    else:
        cost = cost_profile(stencil)
        text = (
            "| offset | coefficient |\n|---|---|\n"
            + "".join(f"| {o} | {c} |\n" for o, c in zip(stencil.offsets, stencil.coefficients))
            + f"\nderivative order: {stencil.derivative_order}\n"
            f"accuracy order: {stencil.accuracy_order}\n"
            f"evaluations: {cost.evaluations} (context {cost.before} before, {cost.after} after)\n"
        )
    _emit(text, args.output)
    return EXIT_OK


# -- diff -------------------------------------------------------------------

def cmd_diff(args) -> int:
    try:
        series = read_series_csv(args.input)
    except CSVFormatError as exc:
        raise CLIError(f"{args.input}: {exc}", EXIT_USAGE) from None
    except OSError as exc:
        raise CLIError(str(exc), EXIT_USAGE) from None
    try:
        result = differentiate_series(series, _scheme(args), BoundaryPolicy(args.policy))
    except GridError as exc:
        raise CLIError(f"{exc} (max deviation {exc.deviation:.3e})", EXIT_GRID) from None
    except StencilError as exc:
        raise CLIError(str(exc), EXIT_USAGE) from None
    _emit(series_to_csv(result), args.output)
    report = sys.stdout if args.output else sys.stderr
    h = float(np.mean(np.diff(series.times)))
    print(f"h = {h!r}", file=report)
    print(f"scheme = {_scheme(args).name}, policy = {args.policy}", file=report)
    for label, count in trace_summary(result.trace).items():
        print(f"  {label}: {count}", file=report)
    missing = int(np.sum(result.missing))
    if missing:
        print(f"warning: {missing} of {len(result)} values are missing (nan)", file=sys.stderr)
    return EXIT_OK


# -- case -------------------------------------------------------------------

def _grid(args, preset):
    g = dict(preset.grid or {})
    t0 = args.t0 if args.t0 is not None else g.get("t0")
    t1 = args.t1 if args.t1 is not None else g.get("t1")
    if t0 is None or t1 is None:
        raise CLIError("grid not given and preset has none; pass --t0/--t1/--h", EXIT_USAGE)
    if args.n is not None:
        if args.n < 2:
            raise CLIError("--n must be at least 2", EXIT_USAGE)
        h = (t1 - t0) / (args.n - 1)
    else:
        h = args.h if args.h is not None else g.get("h")
    try:
        grid_size(t0, t1, h)
    except (ValueError, GridError) as exc:
        raise CLIError(str(exc), EXIT_USAGE) from None
    return float(t0), float(t1), float(h)


def cmd_case_run(args) -> int:
    preset, model = _build_model(args)
    t0, t1, h = _grid(args, preset)
    experimental = None
    if args.experimental:
        try:
            experimental = read_series_csv(args.experimental)
        except CSVFormatError as exc:
            raise CLIError(f"{args.experimental}: {exc}", EXIT_USAGE) from None
    started = time.perf_counter()
    try:
        report = case_error_table(args.case, (t0, t1, h), experimental, model=model, preset=preset.name)
    except SingularityError as exc:
        raise CLIError(f"{exc}; singular time t = {exc.time:.6g}", EXIT_SINGULAR) from None
    except GridError as exc:
        raise CLIError(f"experimental series: {exc}", EXIT_GRID) from None
    if args.format == "json":
        text = dump_json(report.to_dict())
    elif args.format == "csv":
        text = report.to_csv()
    else:
        text = report.to_markdown(args.metric)
    _emit(text, args.output)
    if args.plot:
        _, rates, estimates = case_estimates(model, t0, t1, report.n)
        curves = [("analytic", rates.times, rates.values)]
        curves += [(name, est.times, est.values) for name, est in estimates.items()]
        svg = line_chart(curves, title=f"{args.case}: derivative estimates", x_label="t", y_label="rate")
        atomic_write_text(args.plot, svg)
    if args.timing:
        print(f"wall-clock {time.perf_counter() - started:.4f} s (informational)", file=sys.stderr)
    return EXIT_OK


# -- converge ---------------------------------------------------------------

def cmd_converge(args) -> int:
    preset, model = _build_model(args)
    stencil = builtin_stencil(_scheme(args))
    try:
        hs = geometric_steps(args.h_max, args.h_min, args.points)
    except ValueError as exc:
        raise CLIError(str(exc), EXIT_USAGE) from None
    lo = args.t + stencil.offsets[0] * hs[0]
    hi = args.t + stencil.offsets[-1] * hs[0]
    for ts in singularities(model):
        if lo <= ts <= hi:
            raise CLIError(f"stencil abscissae span the singular time t = {ts:.6g}", EXIT_SINGULAR)
    try:
        result = observed_order(stencil, value_function(model), rate_function(model), args.t, hs)
    except SingularityError as exc:
        raise CLIError(f"{exc}; singular time t = {exc.time:.6g}", EXIT_SINGULAR) from None
    except ValueError as exc:
        raise CLIError(str(exc), EXIT_USAGE) from None
    except EvaluationError as exc:
        if isinstance(exc.original, SingularityError):
            raise CLIError(f"{exc}; singular time t = {exc.original.time:.6g}", EXIT_SINGULAR) from None
        raise
    doc = {"case": args.case, "preset": preset.name, "scheme": _scheme(args).name, "t": args.t}
    doc.update(result.to_dict())
    text = dump_json(doc) if args.format == "json" else result.to_csv()
    _emit(text, args.output)
    if result.indeterminate:
        print("order indeterminate: fewer than 3 steps above the round-off floor", file=sys.stderr)
        return EXIT_OK
    print(
        f"observed order {result.slope:.3f} +/- {result.half_width:.3f}, "
        f"theoretical {result.theoretical_order}",
        file=sys.stderr,
    )
    if abs(result.slope - result.theoretical_order) > ORDER_ALARM:
        print("error: observed order disagrees with theory", file=sys.stderr)
        return EXIT_ORDER
    return EXIT_OK


# -- presets ----------------------------------------------------------------

def cmd_presets(args) -> int:
    registry = load_registry()
    _emit(dump_json([p.to_dict() for p in registry.values()]), None)
    return EXIT_OK


def _add_model_args(p):
    p.add_argument("--preset", help="preset name (default: the case's bundled preset)")
    p.add_argument("--set", action="append", metavar="NAME=VALUE", help="override a model parameter")


def _add_scheme_args(p, required=True):
    p.add_argument("--scheme", choices=[f.value for f in Family], required=required)
    p.add_argument("--accuracy", choices=[a.value for a in Accuracy], required=required)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdbench", description="Finite-difference differentiation benchmarks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stencil", help="print a builtin or generated stencil")
    _add_scheme_args(p, required=False)
    p.add_argument("--offsets", help="comma-separated integer offsets, e.g. --offsets=-2,-1,0,1,2")
    p.add_argument("--deriv", type=int, default=1, help="derivative order for --offsets (default 1)")
    p.add_argument("--format", choices=["json", "csv", "md"], default="md")
    p.add_argument("--output")
    p.set_defaults(func=cmd_stencil)

    p = sub.add_parser("diff", help="differentiate a t,value CSV series")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    _add_scheme_args(p)
    p.add_argument("--policy", choices=[b.value for b in BoundaryPolicy], default="fallback")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("case", help="case-study runs")
    case_sub = p.add_subparsers(dest="case_command", required=True)
    p = case_sub.add_parser("run", help="error table of all six schemes for one case")
    p.add_argument("case", choices=CASES)
    _add_model_args(p)
    p.add_argument("--t0", type=float)
    p.add_argument("--t1", type=float)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--h", type=float)
    g.add_argument("--n", type=int)
    p.add_argument("--experimental", help="CSV of measured rates on the same grid")
    p.add_argument("--format", choices=["md", "json", "csv"], default="md")
    p.add_argument("--metric", choices=["signed", "abs_l1", "rms"], default="signed", help="value column for md")
    p.add_argument("--output")
    p.add_argument("--plot", metavar="SVG", help="also write an SVG of the estimates")
    p.add_argument("--timing", action="store_true", help="print wall-clock time to stderr")
    p.set_defaults(func=cmd_case_run)

    p = sub.add_parser("converge", help="observed order of accuracy over an h sweep")
    p.add_argument("--case", choices=CASES, required=True)
    _add_model_args(p)
    _add_scheme_args(p)
    p.add_argument("--t", type=float, required=True, help="evaluation point")
    p.add_argument("--h-max", type=float, default=1.0)
    p.add_argument("--h-min", type=float, default=1.0 / 128)
    p.add_argument("--points", type=int, default=8)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("presets", help="list the preset registry as JSON")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except PresetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
