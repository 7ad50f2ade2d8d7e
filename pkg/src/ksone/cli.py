"""Command-line interface: ``python -m ksone <command> ...``.

Exit codes: 0 success, 2 bad arguments, 3 inversion did not converge,
4 I/O error.
"""

import argparse
import csv
import json
import sys

from .core import PrecisionMode, smirnov
from .invert import ConvergenceError, smirnovi
from .oracle import DEFAULT_BITS, MIN_BITS, OracleCache, oracle_dump
from .tables import DESK_N, DESK_X, ISF_BANDS, ISF_P, GridSpec, Range, compare, isf_stats

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_CONVERGENCE = 3
EXIT_IO = 4

# the n ladder of the full-scale accuracy study
FULL_LADDER = (
    tuple(range(1, 20))
    + tuple(range(20, 100, 5))
    + tuple(range(100, 1100, 50))
    + tuple(range(1100, 2000, 100))
    + tuple(range(2000, 10001, 1000))
)


class UsageError(ValueError):
    pass


def _fmt(v):
    return format(v, ".17g")


def parse_n_list(text):
    """Parse ``"1-20,25,50"`` into a tuple of positive integers."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        try:
            if sep:
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise UsageError(f"bad n list {text!r}") from None
    if not out:
        raise UsageError("n list is empty")
    if min(out) < 1:
        raise UsageError("every n must be >= 1")
    return tuple(out)


def _emit(fmt, record, out):
    if fmt == "json":
        out.write(json.dumps(record) + "\n")
    elif fmt == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(record.keys())
        writer.writerow(record.values())
    else:
        out.write(" ".join(f"{k}={v}" for k, v in record.items()) + "\n")


def _open_out(path, out):
    if path is None or path == "-":
        return out, False
    return open(path, "w", newline="", encoding="utf-8"), True


def cmd_eval(args, out):
    t = smirnov(args.n, args.x, args.mode)
    _emit(args.format, {"sf": _fmt(t.sf), "cdf": _fmt(t.cdf), "pdf": _fmt(t.pdf)}, out)
    return EXIT_OK


def cmd_invert(args, out):
    if (args.psf is None) == (args.pcdf is None):
        raise UsageError("give exactly one of --psf and --pcdf")
    report = smirnovi(args.n, p_sf=args.psf, p_cdf=args.pcdf, mode=args.mode,
                      raise_on_failure=False)
    record = {
        "x": _fmt(report.x),
        "iterations": report.iterations,
        "bisection_steps": report.bisection_steps,
        "converged": report.converged,
    }
    _emit(args.format, record, out)
    if not report.converged:
        print(f"error: {ConvergenceError(report)}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_sweep(args, out):
    grid = GridSpec.make(parse_n_list(args.n), args.grid, args.mode)
    fh, close = _open_out(args.out, out)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("n", "x", "sf", "cdf", "pdf"))
        rows = 0
        for n, x in grid.points():
            t = smirnov(n, x, grid.mode)
            writer.writerow((n, _fmt(x), _fmt(t.sf), _fmt(t.cdf), _fmt(t.pdf)))
            rows += 1
    finally:
        if close:
            fh.close()
    if close:
        print(f"wrote {rows} rows to {args.out}", file=out)
    return EXIT_OK


def _n_list(args, default):
    if args.n is not None:
        return parse_n_list(args.n)
    if args.ladder == "full":
        return FULL_LADDER
    return default


def _stats_row(fields):
    return {k: (_fmt(v) if isinstance(v, float) else v) for k, v in fields.items()}


def cmd_compare(args, out):
    if args.oracle_cache is None and not args.compute:
        raise UsageError("compare needs --oracle-cache, or --compute to evaluate the oracle")
    n_list = _n_list(args, DESK_N)
    modes = args.modes or list(PrecisionMode)
    cache = OracleCache(args.oracle_cache, bits=args.bits, compute=args.compute)
    rows = []
    try:
        for mode in modes:
            grid = GridSpec.make(n_list, args.grid, mode)
            s = compare(grid, cache, args.function, args.restrict)
            row = {"mode": PrecisionMode.parse(mode).name.lower(), "function": args.function,
                   "count": s.count, "mean": s.mean, "std_dev": s.std_dev, "max": s.max}
            row.update({f"rate_{t:.0e}": r for t, r in s.disagreement.items()})
            rows.append(_stats_row(row))
    except KeyError as exc:
        raise UsageError(f"{exc.args[0]}; rerun with --compute") from None
    finally:
        cache.save()
    _emit_table(args.format, rows, out)
    return EXIT_OK


def cmd_isf_stats(args, out):
    if args.n is not None:
        bands = {args.n: parse_n_list(args.n)}
    elif args.ladder == "full":
        bands = {"2..10": tuple(range(2, 11)), "20..100": tuple(range(20, 101, 5)),
                 "200..10000": tuple(n for n in FULL_LADDER if n >= 200)}
    else:
        bands = ISF_BANDS
    p_values = Range.parse(args.grid).values()
    if min(p_values) <= 0.0 or max(p_values) >= 1.0:
        raise UsageError("probabilities must lie strictly between 0 and 1")
    rows = []
    for band, n_list in bands.items():
        n_list = tuple(n for n in n_list if n > 1)
        if not n_list:
            continue
        s = isf_stats(n_list, p_values, args.mode, band)
        row = {"band": s.band, "count": s.count, "mean_iterations": s.mean_iterations,
               "std_iterations": s.std_iterations, "max_iterations": s.max_iterations,
               "failures": s.failures}
        row.update({f"rate_{t:.0e}": r for t, r in s.disagreement.items()})
        rows.append(_stats_row(row))
    _emit_table(args.format, rows, out)
    return EXIT_NO_CONVERGENCE if any(r["failures"] for r in rows) else EXIT_OK


def cmd_oracle_dump(args, out):
    if args.out is None:
        raise UsageError("oracle-dump needs --out")
    grid = GridSpec.make(parse_n_list(args.n), args.grid)
    count = oracle_dump(grid.points(), args.out, args.bits)
    print(f"wrote {count} records to {args.out}", file=out)
    return EXIT_OK


def _emit_table(fmt, rows, out):
    if fmt == "json":
        out.write(json.dumps(rows, indent=2) + "\n")
        return
    if not rows:
        return
    if fmt == "csv":
        writer = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return
    keys = list(rows[0])
    widths = [max(len(k), *(len(str(r[k])) for r in rows)) for k in keys]
    out.write("  ".join(k.ljust(w) for k, w in zip(keys, widths)) + "\n")
    for r in rows:
        out.write("  ".join(str(r[k]).ljust(w) for k, w in zip(keys, widths)) + "\n")


def _bits(text):
    bits = int(text)
    if bits < MIN_BITS:
        raise argparse.ArgumentTypeError(f"--bits must be >= {MIN_BITS}")
    return bits


def _mode(text):
    try:
        return PrecisionMode.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ksone",
        description="One-sided Kolmogorov-Smirnov distribution: SF, CDF, PDF and quantiles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    modes = [m.name.lower() for m in PrecisionMode]

    def common(p, fmt="text"):
        p.add_argument("--mode", type=_mode, default=PrecisionMode.HYBRID,
                       metavar="{" + ",".join(modes) + "}", help="precision mode (default hybrid)")
        p.add_argument("--format", choices=("json", "csv", "text"), default=fmt)

    p = sub.add_parser("eval", help="SF, CDF and PDF at one point")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x", type=float, required=True)
    common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("invert", help="solve for x given a probability")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--psf", type=float)
    p.add_argument("--pcdf", type=float)
    common(p)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("sweep", help="evaluate over a grid and write CSV")
    p.add_argument("--n", required=True, help="n list, e.g. 1-20,25,50")
    p.add_argument("--grid", default=DESK_X, help="x range start:step:stop")
    p.add_argument("--out", help="output CSV (default stdout)")
    common(p, "csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="relative error statistics against the oracle")
    p.add_argument("--n", help="n list (default: the desk grid)")
    p.add_argument("--ladder", choices=("desk", "full"), default="desk",
                   help="n ladder when --n is absent; 'full' takes hours without a cache")
    p.add_argument("--grid", default=DESK_X, help="x range start:step:stop")
    p.add_argument("--mode", dest="modes", type=_mode, action="append",
                   metavar="{" + ",".join(modes) + "}", help="repeatable; default all modes")
    p.add_argument("--function", choices=("sf", "pdf"), default="sf")
    p.add_argument("--restrict", action="store_true", help="only x <= 3/sqrt(n)")
    p.add_argument("--oracle-cache", help="oracle CSV cache")
    p.add_argument("--compute", action="store_true",
                   help="evaluate missing oracle points (and extend the cache)")
    p.add_argument("--bits", type=_bits, default=DEFAULT_BITS)
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("isf-stats", help="iteration counts and round-trip accuracy of the inverse")
    p.add_argument("--n", help="n list (default: three bands)")
    p.add_argument("--ladder", choices=("desk", "full"), default="desk")
    p.add_argument("--grid", default=ISF_P, help="probability range start:step:stop")
    common(p)
    p.set_defaults(func=cmd_isf_stats)

    p = sub.add_parser("oracle-dump", help="write high-precision reference values as CSV")
    p.add_argument("--n", required=True)
    p.add_argument("--grid", default=DESK_X)
    p.add_argument("--out")
    p.add_argument("--bits", type=_bits, default=DEFAULT_BITS)
    p.set_defaults(func=cmd_oracle_dump)
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
