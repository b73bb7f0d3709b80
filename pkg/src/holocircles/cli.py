"""Command line front end.

Exit status is 0 on success, 1 when a suite property fails or a
computation cannot be carried out, and 2 for usage errors.  Data goes to
``--out`` or standard output; logs and progress go to standard error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from . import __version__
from ._io import csv_text, dumps
from .characterize import DEFAULT_N, GridSpec, builtin_function, defect_scan
from .circles import (DEFAULT_TOL, Circle, PoleError, SamplingError,
                      circle_spectrum, extension_defect, rational_extension_eval,
                      rational_pole_scan, read_circles_csv,
                      spectral_extension_eval)
from .expr import (EvaluationError, ExprError, FunctionModel, load_definitions,
                   parse, rational_parts)
from .suites import characterize_suite, geometry_suite

logger = logging.getLogger("holocircles")

REPORT_COLUMNS = ("center_re", "center_im", "radius", "N", "defect",
                  "aliasing_floor", "verdict")


class UsageError(Exception):
    """Bad command line configuration (exit status 2)."""


# ------------------------------------------------------------- parsing

def _power_of_two(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 8 or n & (n - 1):
        raise argparse.ArgumentTypeError(f"N must be a power of two >= 8, got {n}")
    return n


def _positive(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return x


def _circle(text: str) -> Circle:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("circle must look like re,im,radius")
    try:
        re_, im, rad = (float(p) for p in parts)
        return Circle(complex(re_, im), rad)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad circle {text!r}: {exc}") from None


def _point(text: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("point must look like re,im")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad point {text!r}") from None


def _grid(text: str) -> GridSpec:
    try:
        return GridSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _workers_default() -> int:
    raw = os.environ.get("HOLOCIRCLES_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _add_function_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("function")
    g.add_argument("--fn", help="expression in z, or a builtin such as @example9_1(0.5)")
    g.add_argument("--fn-file", help="definition file with one 'name = expression' per line")
    g.add_argument("--fn-name", help="definition to use from --fn-file (default: the last one)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holocircles",
        description="Numerical tests of holomorphic extension from circles.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("defect", help="extension defect on one or more circles")
    _add_function_args(p)
    p.add_argument("--circle", type=_circle, action="append", default=[],
                   help="circle as re,im,radius (repeatable)")
    p.add_argument("--circles", help="CSV file with columns re,im,radius")
    p.add_argument("--N", type=_power_of_two, default=DEFAULT_N, dest="n")
    p.add_argument("--tol", type=_positive, default=DEFAULT_TOL)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("scan", help="defect over a grid of circle centres")
    _add_function_args(p)
    p.add_argument("--radius", type=_positive, required=True)
    p.add_argument("--grid", type=_grid, required=True, help="re0:re1:im0:im1:step")
    p.add_argument("--N", type=_power_of_two, default=DEFAULT_N, dest="n")
    p.add_argument("--tol", type=_positive, default=DEFAULT_TOL)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: $HOLOCIRCLES_WORKERS or 1)")
    p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("geometry-suite", help="property checks of the C^2 geometry")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=_positive, default=None,
                   help="override every tolerance-based property")
    p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("characterize-suite", help="reproduce the example functions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-scans", action="store_true", help="skip the two grid scans")
    p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("extend-eval", help="evaluate the extension inside a circle")
    _add_function_args(p)
    p.add_argument("--circle", type=_circle, required=True)
    p.add_argument("--point", type=_point, required=True, help="re,im")
    p.add_argument("--N", type=_power_of_two, default=DEFAULT_N, dest="n")
    p.add_argument("--out", help="output file (default: stdout)")
    return parser


def resolve_function(args) -> tuple[FunctionModel, str]:
    if args.fn and args.fn_file:
        raise UsageError("give either --fn or --fn-file, not both")
    if args.fn:
        text = args.fn.strip()
        try:
            model = builtin_function(text) if text.startswith("@") else parse(text)
        except (ExprError, ValueError) as exc:
            raise UsageError(f"cannot parse --fn: {exc}") from None
        return model, text
    if args.fn_file:
        try:
            defs = load_definitions(args.fn_file)
        except OSError as exc:
            raise UsageError(f"cannot read {args.fn_file}: {exc}") from None
        except ExprError as exc:
            raise UsageError(f"{args.fn_file}: {exc}") from None
        if not defs:
            raise UsageError(f"{args.fn_file} defines no functions")
        name = args.fn_name or list(defs)[-1]
        if name not in defs:
            raise UsageError(f"{args.fn_file} has no definition {name!r}")
        return defs[name], name
    raise UsageError("a function is required (--fn or --fn-file)")


def _write(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------ commands

def cmd_defect(args) -> int:
    f, label = resolve_function(args)
    circles = list(args.circle)
    if args.circles:
        try:
            circles += read_circles_csv(args.circles)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read {args.circles}: {exc}") from None
    if not circles:
        raise UsageError("give --circle or --circles")
    reports = []
    for c in circles:
        logger.info("defect on circle %s", c)
        reports.append(extension_defect(f, c, args.n, args.tol).to_dict())
    if args.format == "csv":
        text = csv_text(REPORT_COLUMNS, ([r[k] for k in REPORT_COLUMNS] for r in reports))
    elif len(reports) == 1 and not args.circles:
        text = dumps({"function": label, "tolerance": args.tol, **reports[0]},
                     "defect/1")
    else:
        text = dumps({"function": label, "tolerance": args.tol, "reports": reports},
                     "defect-batch/1")
    _write(text, args.out)
    return 0


def cmd_scan(args) -> int:
    f, label = resolve_function(args)
    workers = args.workers if args.workers is not None else _workers_default()
    if workers < 1:
        raise UsageError("--workers must be at least 1")
    logger.info("scanning %d x %d centres with %d worker(s)",
                args.grid.re_values.size, args.grid.im_values.size, workers)
    m = defect_scan(f, args.radius, args.grid, args.n, args.tol, workers)
    for (j, i), msg in sorted(m.errors.items()):
        logger.warning("cell (%g, %g): %s", m.re_values[i], m.im_values[j], msg)
    if args.format == "csv":
        text = csv_text(("center_re", "center_im", "defect", "verdict"), m.rows())
    else:
        text = dumps({
            "function": label, "radius": args.radius, "N": args.n,
            "tolerance": args.tol,
            "cells": [{"center_re": x, "center_im": y, "defect": d, "verdict": v}
                      for x, y, d, v in m.rows()],
            "minima": [[c.real, c.imag] for c in m.minima],
        }, "scan/1")
    _write(text, args.out)
    return 0


def cmd_geometry_suite(args) -> int:
    if args.trials < 0:
        raise UsageError("--trials must be non-negative")
    results = geometry_suite(args.trials, args.seed, args.tol)
    for r in results:
        logger.info("%s %s (worst %.3g)", "PASS" if r.passed else "FAIL", r.name, r.worst)
    passed = all(r.passed for r in results)
    _write(dumps({"seed": args.seed, "trials": args.trials, "passed": passed,
                  "properties": [r.to_dict() for r in results]},
                 "geometry-suite/1"), args.out)
    return 0 if passed else 1


def cmd_characterize_suite(args) -> int:
    rows = characterize_suite(args.seed, scans=not args.no_scans)
    for r in rows:
        logger.info("%s %s", "PASS" if r["passed"] else "FAIL", r["name"])
    passed = all(r["passed"] for r in rows)
    _write(dumps({"seed": args.seed, "passed": passed, "verdicts": rows},
                 "characterize-suite/1"), args.out)
    return 0 if passed else 1


def cmd_extend_eval(args) -> int:
    f, label = resolve_function(args)
    c, p = args.circle, args.point
    if not abs(p - c.center) < c.radius:
        raise UsageError("--point must lie inside the circle")
    s = circle_spectrum(f, c, args.n)
    value, tail = spectral_extension_eval(s, p, with_tail=True)
    payload = {
        "function": label, "center_re": c.center.real, "center_im": c.center.imag,
        "radius": c.radius, "point": [p.real, p.imag], "N": args.n,
        "defect": s.defect, "spectral": [value.real, value.imag], "tail_bound": tail,
    }
    try:
        rational_parts(f)
        is_rational = True
    except ExprError:
        is_rational = False
    if is_rational:
        payload["poles"] = [[z.real, z.imag] for z in rational_pole_scan(f, c)]
        try:
            r = rational_extension_eval(f, c, p)
            payload["rational"] = [r.real, r.imag]
        except PoleError as exc:
            payload["rational"] = None
            payload["rational_error"] = str(exc)
    _write(dumps(payload, "extend-eval/1"), args.out)
    return 0


COMMANDS = {
    "defect": cmd_defect,
    "scan": cmd_scan,
    "geometry-suite": cmd_geometry_suite,
    "characterize-suite": cmd_characterize_suite,
    "extend-eval": cmd_extend_eval,
}


def _setup_logging(verbose: bool):
    """Send package logs to the current standard error, never to stdout."""
    root = logging.getLogger("holocircles")
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    root.addHandler(handler)
    root.setLevel(logging.INFO if verbose else logging.WARNING)
    root.propagate = False


_VALUE_OPTIONS = ("--grid", "--circle", "--point")


def _join_negative_values(argv: list[str]) -> list[str]:
    """Turn ``--grid -0.9:...`` into ``--grid=-0.9:...``; argparse would
    otherwise take the value for an option."""
    out, k = [], 0
    while k < len(argv):
        item = argv[k]
        if item in _VALUE_OPTIONS and k + 1 < len(argv) and argv[k + 1].startswith("-"):
            out.append(f"{item}={argv[k + 1]}")
            k += 2
            continue
        out.append(item)
        k += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _setup_logging(args.verbose)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"holocircles {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (SamplingError, EvaluationError, PoleError, ValueError) as exc:
        print(f"holocircles {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
