"""Grids, oracle comparisons and inversion statistics.

These are the building blocks behind the ``compare``, ``sweep`` and
``isf-stats`` commands and the acceptance suite.
"""

import math
import statistics
from fractions import Fraction
from typing import NamedTuple

import gmpy2
from gmpy2 import mpfr

from .core import PrecisionMode, smirnov
from .invert import smirnovi
from .oracle import OracleCache

EPS = 2.0**-52
UNDERFLOW_FLOOR = 1e-275
TOLERANCES = (1e-9, 1e-10, 1e-11, 1e-12, 1e-13, 1e-14, 1e-15)

DESK_N = tuple(range(1, 21)) + (25, 50, 75, 100, 200, 500, 1000, 2000)
DESK_X = "0:0.001:1"
ISF_BANDS = {
    "2..10": tuple(range(2, 11)),
    "20..100": tuple(range(20, 101, 10)),
    "200..10000": (200, 500, 1000, 2000, 5000, 10000),
}
ISF_P = "0.01:0.01:0.99"


class Range(NamedTuple):
    """``start + i*step`` for ``i = 0, 1, ...`` while the value is ``<= stop``.

    The bounds are kept as exact rationals and each point is rounded once to
    binary64.
    """

    start: Fraction
    step: Fraction
    stop: Fraction

    @classmethod
    def parse(cls, text):
        try:
            parts = [Fraction(p.strip()) for p in text.split(":")]
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"bad range {text!r}; expected start:step:stop") from None
        if len(parts) != 3:
            raise ValueError(f"bad range {text!r}; expected start:step:stop")
        start, step, stop = parts
        if step <= 0:
            raise ValueError("range step must be positive")
        if start > stop:
            raise ValueError("range start must not exceed stop")
        return cls(start, step, stop)

    def __len__(self):
        return math.floor((self.stop - self.start) / self.step) + 1

    def values(self):
        return [float(self.start + i * self.step) for i in range(len(self))]


class GridSpec(NamedTuple):
    n_list: tuple
    x_range: Range
    mode: PrecisionMode = PrecisionMode.HYBRID

    @classmethod
    def make(cls, n_list, x_range, mode=PrecisionMode.HYBRID):
        n_list = tuple(int(n) for n in n_list)
        if not n_list:
            raise ValueError("grid needs at least one n")
        if any(n < 1 for n in n_list):
            raise ValueError("every n must be >= 1")
        if isinstance(x_range, str):
            x_range = Range.parse(x_range)
        return cls(n_list, x_range, PrecisionMode.parse(mode))

    def points(self):
        xs = self.x_range.values()
        return [(n, x) for n in self.n_list for x in xs]


class ErrorStats(NamedTuple):
    """Signed relative errors ``(oracle - computed)/oracle`` in units of 2**-52."""

    count: int
    mean: float
    std_dev: float
    max: float
    mean_abs: float
    disagreement: dict

    @classmethod
    def from_errors(cls, errors):
        """``errors`` are plain relative errors; the result is scaled by 2**52."""
        if not errors:
            raise ValueError("no points left to compare")
        scaled = [e / EPS for e in errors]
        absolute = [abs(e) for e in errors]
        rates = {t: sum(a > t for a in absolute) / len(errors) for t in TOLERANCES}
        return cls(
            count=len(scaled),
            mean=statistics.fmean(scaled),
            std_dev=statistics.pstdev(scaled),
            max=max(abs(s) for s in scaled),
            mean_abs=statistics.fmean(abs(s) for s in scaled),
            disagreement=rates,
        )


def relative_error(reference, computed):
    """``(reference - computed)/reference`` with the subtraction done exactly."""
    with gmpy2.context(gmpy2.get_context(), precision=200):
        ref = mpfr(reference)
        return float((ref - mpfr(computed)) / ref)


def compare(grid, cache, function="sf", restrict=False):
    """Error statistics of ``function`` against the oracle over ``grid``.

    Points with oracle values at or below 1e-275 are left out.  With
    ``restrict`` only ``x <= 3/sqrt(n)`` is used.
    """
    if function not in ("sf", "pdf"):
        raise ValueError("function must be 'sf' or 'pdf'")
    errors = []
    for n, x in grid.points():
        if restrict and x > 3.0 / math.sqrt(n):
            continue
        rec = cache.get(n, x)
        ref = mpfr(getattr(rec, function), 160)
        if not ref > UNDERFLOW_FLOOR:
            continue
        computed = getattr(smirnov(n, x, grid.mode), function)
        errors.append(relative_error(ref, computed))
    return ErrorStats.from_errors(errors)


class IsfStats(NamedTuple):
    band: str
    count: int
    mean_iterations: float
    std_iterations: float
    max_iterations: int
    failures: int
    disagreement: dict


def isf_stats(n_list, p_values, mode=PrecisionMode.HYBRID, band=""):
    """Iteration counts and round-trip disagreement of ``smirnovi``.

    The round trip compares ``smirnov(n, x).sf`` at the returned root with
    the requested ``p_sf`` (or the CDF with ``p_cdf`` when that is the
    smaller probability).
    """
    mode = PrecisionMode.parse(mode)
    iterations = []
    failures = 0
    errors = []
    for n in n_list:
        for p in p_values:
            report = smirnovi(n, p_sf=p, mode=mode, raise_on_failure=False)
            if not report.converged:
                failures += 1
                continue
            iterations.append(report.iterations)
            t = smirnov(n, report.x, mode)
            if p <= 0.5:
                errors.append(abs(t.sf - p) / p)
            else:
                errors.append(abs(t.cdf - (1.0 - p)) / (1.0 - p))
    count = len(iterations) + failures
    rates = {t: sum(e > t for e in errors) / len(errors) for t in TOLERANCES} if errors else {}
    return IsfStats(
        band=band,
        count=count,
        mean_iterations=statistics.fmean(iterations) if iterations else math.nan,
        std_iterations=statistics.pstdev(iterations) if iterations else math.nan,
        max_iterations=max(iterations, default=0),
        failures=failures,
        disagreement=rates,
    )


def desk_grid(mode=PrecisionMode.FULL):
    return GridSpec.make(DESK_N, DESK_X, mode)


def open_cache(path, compute=True):
    return OracleCache(path, compute=compute)
