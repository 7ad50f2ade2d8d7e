"""Inverse survival function of the one-sided Kolmogorov-Smirnov statistic.

The quantile is found with a bracketed Newton-Raphson iteration on
``smirnov``, using its exact derivative.  Closed forms cover ``n = 1`` and
the upper tail ``p_sf <= n**-n``.  The starting bracket and seed come from
``x(1+x)**(n-1)`` for small ``x`` and from the asymptotic
``exp(-2 n x**2)`` tail elsewhere.
"""

import math
from typing import NamedTuple

from .core import PrecisionMode, _check_n, smirnov

TOLERANCE = 2.2e-16
MAX_ITERATIONS = 100

# bracket endpoints are widened by this many units of 2**-52
_INFLATE = 256 * 2.0**-52


class ProbabilityPair(NamedTuple):
    """A probability and its complement, each carried at full precision."""

    p_sf: float
    p_cdf: float

    @classmethod
    def make(cls, p_sf=None, p_cdf=None):
        if p_sf is None and p_cdf is None:
            raise ValueError("give p_sf, p_cdf or both")
        if p_sf is None:
            p_cdf = _check_prob(p_cdf, "p_cdf")
            p_sf = 1.0 - p_cdf
        elif p_cdf is None:
            p_sf = _check_prob(p_sf, "p_sf")
            p_cdf = 1.0 - p_sf
        else:
            p_sf = _check_prob(p_sf, "p_sf")
            p_cdf = _check_prob(p_cdf, "p_cdf")
            if abs(math.fsum((p_sf, p_cdf, -1.0))) > 2.0**-52:
                raise ValueError("p_sf and p_cdf must add up to 1")
        return cls(p_sf, p_cdf)


def _check_prob(p, name):
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p!r}")
    return p


class RootBracket(NamedTuple):
    a: float
    b: float
    x0: float


class SolveReport(NamedTuple):
    x: float
    iterations: int
    bisection_steps: int
    converged: bool


class ConvergenceError(ArithmeticError):
    """The iteration cap was reached; ``report`` holds the last iterate."""

    def __init__(self, report):
        super().__init__(
            f"no convergence after {report.iterations} iterations (last x={report.x!r})"
        )
        self.report = report


def bracketed_newton(f_and_df, bracket, tol=TOLERANCE, max_iter=MAX_ITERATIONS, decreasing=None):
    """Newton-Raphson safeguarded by a bracket ``[a, b]`` around the root.

    ``f_and_df(x)`` returns ``(f(x), f'(x))`` and ``f`` must change sign on
    the bracket.  Each evaluation replaces the endpoint with the same sign
    as ``f(x)``.  A Newton step is replaced by bisection when it leaves the
    bracket or is at least half as long as the step two iterations earlier.

    ``decreasing`` states whether ``f(a) >= 0 >= f(b)``; when omitted it
    is found by evaluating ``f(a)`` (not counted as an iteration).

    >>> r = bracketed_newton(lambda x: (x * x - 0.25, 2 * x), RootBracket(0.0, 1.0, 0.9))
    >>> r.x, r.converged
    (0.5, True)
    """
    a, b, x = bracket
    if not a <= b:
        raise ValueError("bracket must satisfy a <= b")
    if decreasing is None:
        decreasing = f_and_df(a)[0] >= 0.0
    x = min(max(x, a), b)
    prev = prev2 = math.inf
    bisections = 0
    for it in range(1, max_iter + 1):
        fx, dfx = f_and_df(x)
        if fx == 0.0:
            return SolveReport(x, it, bisections, True)
        if (fx > 0.0) == decreasing:
            a = x
        else:
            b = x
        step = -fx / dfx if dfx != 0.0 and math.isfinite(dfx) else math.nan
        xn = x + step
        if not (a <= xn <= b) or abs(step) >= 0.5 * abs(prev2):
            xn = a + (b - a) / 2
            step = xn - x
            bisections += 1
        prev2, prev = prev, step
        x = xn
        if abs(step) <= tol * abs(x) or b - a < tol * abs(x):
            return SolveReport(x, it, bisections, True)
    return SolveReport(x, max_iter, bisections, False)


def _log_sf(p):
    # log(p_sf), accurate when p_sf is close to one
    if p.p_cdf < 0.5:
        return math.log1p(-p.p_cdf)
    return math.log(p.p_sf)


def bracket_and_seed(n, p):
    """Interval known to contain the root, plus a starting point inside it.

    Both probabilities must be positive and ``n >= 2``.
    """
    n = _check_n(n)
    if n < 2:
        raise ValueError("bracket_and_seed requires n >= 2")
    if not (p.p_sf > 0.0 and p.p_cdf > 0.0):
        raise ValueError("bracket_and_seed requires p_sf > 0 and p_cdf > 0")
    p1 = math.exp((n - 1) * math.log1p(1.0 / n)) / n
    if p.p_cdf <= p1:
        # below 1/n the CDF is x (1 + x)**(n-1)
        a = p.p_cdf / math.e
        b = min(p.p_cdf, 1.0 / n)
        g0 = p.p_cdf / p1
        g1 = g0 * (g0 + math.exp(1.0 - g0)) / (g0 + 1.0)
        x0 = min(g1 / n, b)
    else:
        log_sf = _log_sf(p)
        a = max(-math.expm1(log_sf / n), 1.0 / n)
        b0 = math.sqrt(-log_sf / (2.0 * n))
        b1 = b0 - 1.0 / (6.0 * n)
        b = min(b0, 1.0 - 1.0 / n)
        x0 = b1 if a <= b1 <= b else (a + b) / 2.0
    a = max(a * (1.0 - _INFLATE), 0.0)
    b = min(b * (1.0 + _INFLATE), 1.0)
    return RootBracket(a, b, min(max(x0, a), b))


def smirnovi(n, p_sf=None, p_cdf=None, mode=PrecisionMode.HYBRID, *,
             tol=TOLERANCE, max_iter=MAX_ITERATIONS, raise_on_failure=True):
    """Solve ``smirnov(n, x).sf == p_sf`` for ``x``.

    Give ``p_sf``, ``p_cdf`` or both; when both are given the smaller one is
    used at full precision.  Returns a :class:`SolveReport`.  If the
    iteration cap is reached a :class:`ConvergenceError` is raised, unless
    ``raise_on_failure`` is false, in which case the report has
    ``converged=False``.

    Examples
    --------
    >>> smirnovi(4, p_sf=4.0**-4).x
    0.75
    >>> round(smirnovi(10, p_sf=1.055e-6).x, 8)
    0.75367197
    """
    n = _check_n(n)
    p = ProbabilityPair.make(p_sf, p_cdf)
    mode = PrecisionMode.parse(mode)
    if p.p_sf == 0.0:
        return SolveReport(1.0, 0, 0, True)
    if p.p_cdf == 0.0:
        return SolveReport(0.0, 0, 0, True)
    if n == 1:
        return SolveReport(p.p_cdf, 0, 0, True)
    if p.p_sf <= math.pow(n, -n):
        return SolveReport(1.0 - math.pow(p.p_sf, 1.0 / n), 0, 0, True)

    bracket = bracket_and_seed(n, p)
    if p.p_sf <= 0.5:
        def f_and_df(x):
            t = smirnov(n, x, mode)
            return t.sf - p.p_sf, -t.pdf
    else:
        def f_and_df(x):
            t = smirnov(n, x, mode)
            return p.p_cdf - t.cdf, -t.pdf

    report = bracketed_newton(f_and_df, bracket, tol, max_iter, decreasing=True)
    if not report.converged and raise_on_failure:
        raise ConvergenceError(report)
    return report


def smirnov_isf(n, p_sf, mode=PrecisionMode.HYBRID):
    """Return ``x`` with ``P(D_n^+ >= x) = p_sf``."""
    return smirnovi(n, p_sf=p_sf, mode=mode).x


def smirnov_ppf(n, p_cdf, mode=PrecisionMode.HYBRID):
    """Return ``x`` with ``P(D_n^+ < x) = p_cdf``."""
    return smirnovi(n, p_cdf=p_cdf, mode=mode).x
