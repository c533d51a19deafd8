"""Command-line front end.

Subcommands ``simulate``, ``fit``, ``gof`` and ``analyze``.  Input files are
delimited text, comma or whitespace separated, one record per line; blank
lines and lines starting with ``#`` are skipped.

Exit status: 0 on success, 2 for usage errors, 3 for bad input data and 4
when an optimiser or the bootstrap fails to converge.
"""

import argparse
import json
import re
import sys
from dataclasses import dataclass

import numpy as np

from ._validation import ConvergenceError, DomainError
from .gof import run_gof
from .inference import bootstrap_ci, fit_case1, fit_case2
from .process import DEFAULT_TIE_TOL, ProcessParams, Series, simulate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4

_SPLIT = re.compile(r"[,\s]+")


class DataError(ValueError):
    """Unreadable or invalid input data; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class Transform:
    """Affine preprocessing ``(x - shift) / divisor``."""

    shift: float = 0.0
    divisor: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.shift):
            raise UsageError(f"shift must be finite, got {self.shift!r}")
        if not (np.isfinite(self.divisor) and self.divisor > 0):
            raise UsageError(f"divisor must be a finite positive real, got {self.divisor!r}")

    def __call__(self, x):
        return (x - self.shift) / self.divisor


def ingest(path, column=0, transform=Transform(), skip_header=0):
    """Read one column of a delimited text file and apply ``transform``.

    Parameters
    ----------
    path : str or path-like
        File to read; ``"-"`` reads standard input.
    column : int
        Zero-based field index.
    skip_header : int
        Number of leading lines to ignore before parsing.

    Returns
    -------
    Series

    Raises
    ------
    DataError
        On an unreadable file, a field that does not parse, a transformed
        value that is not strictly positive, or when no records remain.
    """
    if column < 0:
        raise UsageError(f"column must be non-negative, got {column}")
    try:
        if str(path) == "-":
            lines = sys.stdin.read().splitlines()
        else:
            with open(path, encoding="utf-8") as fh:
                lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc

    values = []
    for lineno, line in enumerate(lines, start=1):
        if lineno <= skip_header:
            continue
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        fields = [f for f in _SPLIT.split(text) if f]
        if column >= len(fields):
            raise DataError(f"no column {column} in {len(fields)} field(s)", lineno)
        try:
            raw = float(fields[column])
        except ValueError:
            raise DataError(f"cannot parse {fields[column]!r} as a number", lineno) from None
        if not np.isfinite(raw):
            raise DataError(f"non-finite value {fields[column]!r}", lineno)
        value = transform(raw)
        if not value > 0:
            raise DataError(
                f"value {raw!r} maps to {value!r} after the transform; must be > 0", lineno
            )
        values.append(value)
    if not values:
        raise DataError(f"no data records in {path}")
    return Series(np.array(values), shift=transform.shift, divisor=transform.divisor)


# ---------------------------------------------------------------------------
# output helpers


def _open_out(path):
    if path is None or path == "-":
        return _Stdout()
    return open(path, "w", encoding="utf-8")


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()
        return False


def _write_json(obj, path):
    with _open_out(path) as fh:
        json.dump(obj, fh, indent=2, allow_nan=True)
        fh.write("\n")


def write_profile_table(report, path):
    """Write the case-I profile curve or the case-II contour as CSV.

    Case I gives columns ``lambda,loglik``; case II gives the long format
    ``gamma,lambda,loglik`` with ``lambda`` varying fastest.
    """
    prof = report.profile
    if not prof:
        raise UsageError("this fit did not record a profile grid")
    with _open_out(path) as fh:
        if "gamma" in prof:
            fh.write("gamma,lambda,loglik\n")
            grid = np.asarray(prof["loglik"])
            for i, g in enumerate(prof["gamma"]):
                for j, lam in enumerate(prof["lambda"]):
                    fh.write(f"{float(g)!r},{float(lam)!r},{float(grid[i, j])!r}\n")
        else:
            fh.write("lambda,loglik\n")
            for lam, v in zip(prof["lambda"], prof["loglik"]):
                fh.write(f"{float(lam)!r},{float(v)!r}\n")


def _fit(x, model, tie_tol):
    if model == "equal":
        return fit_case1(x, tol=tie_tol)
    return fit_case2(x, tol=tie_tol)


def _transform(args):
    return Transform(args.shift, args.divisor)


def _load(args):
    return ingest(args.path, args.column, _transform(args), args.skip_header)


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args):
    try:
        p = ProcessParams(args.alpha0, args.alpha1, args.lam)
        values = simulate(args.n, p, seed=args.seed).values
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    with _open_out(args.out) as fh:
        fh.write(f"# alpha0={p.alpha0!r} alpha1={p.alpha1!r} lambda={p.lam!r} seed={args.seed}\n")
        for v in values:
            fh.write(f"{float(v)!r}\n")
    return EXIT_OK


def cmd_fit(args):
    series = _load(args)
    x = series.values
    report = _fit(x, args.model, args.tie_tol)
    if args.grid_out:
        write_profile_table(report, args.grid_out)
    if args.boot:
        report = bootstrap_ci(x, report, B=args.boot, level=args.level, seed=args.seed)
    out = report.to_dict()
    out["transform"] = {"shift": series.shift, "divisor": series.divisor}
    _write_json(out, args.report_out)
    return EXIT_OK


def _gof_dict(x, params, args):
    rep = run_gof(x, params, lags=tuple(args.lags), sims=args.sims, seed=args.seed)
    return rep.to_dict()


def cmd_gof(args):
    series = _load(args)
    x = series.values
    fit = fit_case1(x, tol=args.tie_tol)
    out = {
        "fitted": fit.to_dict(),
        "gof": _gof_dict(x, fit.estimates, args),
        "transform": {"shift": series.shift, "divisor": series.divisor},
    }
    _write_json(out, args.report_out)
    return EXIT_OK


def cmd_analyze(args):
    """Ingest, fit both models, bootstrap, then check the equal-shape fit."""
    series = _load(args)
    x = series.values
    equal = fit_case1(x, tol=args.tie_tol)
    unequal = fit_case2(x, tol=args.tie_tol)
    if args.grid_out:
        write_profile_table(unequal if args.model == "unequal" else equal, args.grid_out)
    if args.boot:
        equal = bootstrap_ci(x, equal, B=args.boot, level=args.level, seed=args.seed)
        unequal = bootstrap_ci(x, unequal, B=args.boot, level=args.level, seed=args.seed)
    out = {
        "n": int(x.size),
        "transform": {"shift": series.shift, "divisor": series.divisor},
        "equal": equal.to_dict(),
        "unequal": unequal.to_dict(),
        "loglik_comparison": {
            "equal": equal.loglik,
            "unequal": unequal.loglik,
            "difference": unequal.loglik - equal.loglik,
        },
        "gof": _gof_dict(x, equal.estimates, args),
    }
    _write_json(out, args.report_out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _positive_float(text):
    v = float(text)
    if not (np.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be a finite positive number, got {text}")
    return v


def _level(text):
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return v


def _boot(text):
    v = int(text)
    if v != 0 and v < 100:
        raise argparse.ArgumentTypeError("B must be 0 (no bootstrap) or at least 100")
    return v


def build_parser():
    parser = _Parser(prog="stationary-ge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="simulate a path of the process")
    sim.add_argument("-n", type=int, required=True, help="path length")
    sim.add_argument("--alpha0", type=_positive_float, required=True)
    sim.add_argument("--alpha1", type=_positive_float, required=True)
    sim.add_argument("--lambda", dest="lam", type=_positive_float, default=1.0)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--out", default=None, help="output file (default stdout)")
    sim.set_defaults(func=cmd_simulate)

    def data_args(p):
        p.add_argument("path", help="delimited text file, '-' for stdin")
        p.add_argument("--column", type=int, default=0, help="zero-based column")
        p.add_argument("--skip-header", type=int, default=0, metavar="N",
                       help="ignore the first N lines")
        p.add_argument("--shift", type=float, default=0.0)
        p.add_argument("--divisor", type=_positive_float, default=1.0)
        p.add_argument("--tie-tol", type=_positive_float, default=DEFAULT_TIE_TOL)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--report-out", default=None, metavar="PATH",
                       help="JSON report file (default stdout)")

    def boot_args(p):
        p.add_argument("--boot", type=_boot, default=0, metavar="B",
                       help="bootstrap replicates (0 skips)")
        p.add_argument("--level", type=_level, default=0.95)
        p.add_argument("--grid-out", default=None, metavar="PATH",
                       help="write the profile curve or contour grid as CSV")

    def gof_args(p):
        p.add_argument("--lags", type=int, nargs="+", default=[1, 2])
        p.add_argument("--sims", type=int, default=5000, help="paths for the ACF bands")

    fit = sub.add_parser("fit", help="maximum-likelihood fit")
    data_args(fit)
    boot_args(fit)
    fit.add_argument("--model", choices=("equal", "unequal"), default="equal")
    fit.set_defaults(func=cmd_fit)

    gof = sub.add_parser("gof", help="subsequence KS, runs and ACF checks")
    data_args(gof)
    gof_args(gof)
    gof.set_defaults(func=cmd_gof)

    ana = sub.add_parser("analyze", help="fit both models, bootstrap and check")
    data_args(ana)
    boot_args(ana)
    gof_args(ana)
    ana.add_argument("--model", choices=("equal", "unequal"), default="equal",
                     help="which fit --grid-out describes")
    ana.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DomainError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
