"""Survival function, CDF and PDF of the one-sided Kolmogorov-Smirnov statistic.

For a sample of size ``n`` the one-sided statistic ``D_n^+`` has survival
function

    S_n(x) = x * sum_{j=0}^{floor(n(1-x))} A_j(n, x)
    A_j(n, x) = C(n, j) (x + j/n)**(j-1) (1 - x - j/n)**(n-j)

Writing ``n*x = k + alpha`` lets the integer parts of ``x + j/n`` and
``1 - x - j/n`` cancel exactly before the fractional ``alpha`` takes part.
Each term is built from a running binomial coefficient and two scaled
powers, so neither the (huge) binomial nor the (tiny) powers ever leave the
binary64 range on their own; only the final sum is converted back.

For small ``n*x`` the complementary (Smirnov/Dwass) sum over
``j = ceil(n(1-x)) .. n`` has far fewer terms and is used instead.  The
derivative terms are accumulated alongside, so one pass yields SF, CDF and
PDF together.
"""

import math
from enum import IntEnum
from typing import NamedTuple

from ._jit import jit
from .extended import (
    DoubleDouble,
    _pow_scaled_libm,
    dd_add,
    dd_add_d,
    dd_div,
    dd_div_d,
    dd_ldexp,
    dd_mul,
    dd_mul_d,
    dd_normalize,
    div2d,
    frac_base_dd,
    neumaier_add,
    pow_scaled_dd,
    pow_scaled_simple,
    two_prod,
    two_sum,
)

FAST64 = 0
HYBRID = 1
FULL = 2


class PrecisionMode(IntEnum):
    """Arithmetic carrier for one evaluation.

    ``FAST64`` uses binary64 throughout.  ``HYBRID`` uses double-double for
    additions, products and quotients but libm ``pow`` plus a first-order
    correction for the powers.  ``FULL`` raises double-doubles to integer
    powers directly.
    """

    FAST64 = FAST64
    HYBRID = HYBRID
    FULL = FULL

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            try:
                return cls[value.upper()]
            except KeyError:
                raise ValueError(f"unknown precision mode {value!r}") from None
        return cls(value)


# n*x at or below this uses the alternating Smirnov/Dwass sum
_DWASS_CUTOFF = (1, 3, 3)

# beyond this many terms the Maag-Dicaire approximation is returned
_ASYMPTOTE_TERMS = 1e12

# 2*n*x**2 above this gives an SF below the smallest subnormal
_SF_UNDERFLOW = 745.0

_BINOM_RESCALE = 512
_TWO_512 = 2.0 ** _BINOM_RESCALE

# terms more than this many binades below the running maximum are dropped
_FRAME_DEPTH = 1100


class NxSplit(NamedTuple):
    """``n*x == k + alpha + alpha_lo`` exactly, with ``0 <= alpha + alpha_lo < 1``.

    ``alpha`` is the nearest binary64 to the fractional part, so it can be
    ``1.0`` when the fractional part is within 2**-54 of one.
    """

    k: int
    alpha: float
    alpha_lo: float


class SmirnovTriple(NamedTuple):
    sf: float
    cdf: float
    pdf: float


class BinomAccum(NamedTuple):
    """Running binomial coefficient ``(c.hi + c.lo) * 2**e_c``."""

    c: DoubleDouble
    e_c: int

    @classmethod
    def start(cls):
        return cls(DoubleDouble(1.0, 0.0), 0)


class TermPair(NamedTuple):
    a_j: float
    d_j: float


# ---------------------------------------------------------------------------
# n*x split


@jit
def _nx_split(n, x):
    u, v = two_prod(float(n), x)
    k = math.floor(u)
    u1, v1 = two_sum(u - k, v)
    if u1 < 0.0:
        # n*x sits just below the integer u: the fractional part is 1 + v
        k -= 1.0
        u1, v1 = two_sum(1.0, u1)
    elif u1 > 1.0 or (u1 == 1.0 and v1 >= 0.0):
        k += 1.0
        u1, v1 = two_sum(u1 - 1.0, v1)
    # u1 == 1.0 with v1 < 0 is a fractional part just below one
    return int(k), u1, v1


def nx_split(n, x):
    """Split ``n*x`` into its integer part and an exact fractional part.

    ``n*x`` is generally not a binary64 number, but it is exactly ``U + V``
    for binary64 ``U`` and ``V``; the integer part is read off ``U`` and the
    remainder kept as a double-double, so points a hair below a knot ``j/n``
    are not mistaken for the knot.

    >>> nx_split(4, 0.25)
    NxSplit(k=1, alpha=0.0, alpha_lo=0.0)
    >>> nx_split(3, 0.5)
    NxSplit(k=1, alpha=0.5, alpha_lo=0.0)
    """
    n = _check_n(n)
    if not 0.0 <= x <= 1.0:
        raise ValueError("nx_split requires 0 <= x <= 1")
    return NxSplit(*_nx_split(n, float(x)))


# ---------------------------------------------------------------------------
# binomial coefficient


@jit
def _binom_step(c, e_c, n, i, mode):
    if mode == FAST64:
        c = DoubleDouble(c.hi * (n - i + 1) / i, 0.0)
    else:
        c = dd_div_d(dd_mul_d(c, float(n - i + 1)), float(i))
    if c.hi > _TWO_512:
        c = dd_ldexp(c, -_BINOM_RESCALE)
        e_c += _BINOM_RESCALE
    elif c.hi < 1.0:
        c = dd_ldexp(c, _BINOM_RESCALE)
        e_c -= _BINOM_RESCALE
    return c, e_c


def binom_step(acc, n, i, mode=PrecisionMode.HYBRID):
    """Advance ``acc`` from ``C(n, i-1)`` to ``C(n, i)``, rescaling by ``2**512``."""
    if not 1 <= i <= n:
        raise ValueError("binom_step requires 1 <= i <= n")
    c, e_c = _binom_step(acc.c, acc.e_c, n, i, int(PrecisionMode.parse(mode)))
    return BinomAccum(c, e_c)


# ---------------------------------------------------------------------------
# individual terms
#
# Term kernels return (A significand, D significand, exponent): the term
# values are the significands scaled by 2**exponent, with |A sig| in
# [0.5, 1) unless the term is zero.


@jit
def _int_plus(i, a):
    # float(i) + a for an integer i and double-double a
    s, e = two_sum(float(i), a.hi)
    e += a.lo
    s, e = two_sum(s, e)
    return DoubleDouble(s, e)


@jit
def _int_minus(i, a):
    s, e = two_sum(float(i), -a.hi)
    e -= a.lo
    s, e = two_sum(s, e)
    return DoubleDouble(s, e)


@jit
def _dd_pow(base, m, exact):
    if exact:
        return pow_scaled_dd(base, m)
    return pow_scaled_simple(base, m)


@jit
def _multiplier_poly64(n, k, alpha, j):
    # x D_j / A_j = x (1/x + (j-1)/(x + j/n) - (n-j)/(1 - x - j/n)), over a
    # common denominator with x = (k + alpha)/n; carrying x D_j rather than
    # D_j keeps the 1/x factor from overflowing for tiny x
    fn = float(n)
    fk = float(k)
    fj = float(j)
    num = (fn * alpha + (fj + 2.0 * fk * fn)) * alpha + (fj * (fj + fk - fn) + fk * fk * fn)
    den = ((fj + fk) + alpha) * ((fj + fk - fn) + alpha)
    return num / den


@jit
def _multiplier_poly_dd(n, k, alpha, j):
    fn = float(n)
    c1 = dd_add_d(DoubleDouble(*two_prod(2.0 * k, fn)), float(j))
    c0 = dd_add(
        DoubleDouble(*two_prod(float(j), float(j + k - n))),
        dd_mul_d(DoubleDouble(*two_prod(float(k), float(k))), fn),
    )
    num = dd_add(dd_mul(dd_add(dd_mul_d(alpha, fn), c1), alpha), c0)
    den = dd_mul(_int_plus(j + k, alpha), _int_plus(j + k - n, alpha))
    return dd_div(num, den)


@jit
def _term_fast64(n, k, alpha, x, j, c, e_c):
    # alpha < 1 is a plain binary64 here
    p = ((j + k) + alpha) / n
    q = ((n - j - k) - alpha) / n
    if q == 0.0:
        return DoubleDouble(0.0, 0.0), DoubleDouble(0.0, 0.0), 0
    s, es = _pow_scaled_libm(p, j - 1)
    t, et = _pow_scaled_libm(abs(q), n - j)
    if q < 0.0 and (n - j) % 2 == 1:
        t = -t
    a, ea = math.frexp(c * t * s)
    d = _multiplier_poly64(n, k, alpha, j) * a
    return DoubleDouble(a, 0.0), DoubleDouble(d, 0.0), e_c + es + et + ea


@jit
def _term_dd(n, k, alpha, x, j, c, e_c, mode, exact_pow):
    p = dd_div_d(_int_plus(j + k, alpha), float(n))
    qn = _int_minus(n - j - k, alpha)
    if qn.hi == 0.0:
        # the term vanishes at this knot; so does its derivative unless
        # n - j == 1, and dropping it then gives the left-hand limit
        return DoubleDouble(0.0, 0.0), DoubleDouble(0.0, 0.0), 0
    q = dd_div_d(qn, float(n))
    negative = q.hi < 0.0
    if negative:
        q = DoubleDouble(-q.hi, -q.lo)
    s, es = _dd_pow(p, j - 1, exact_pow)
    t, et = _dd_pow(q, n - j, exact_pow)
    if negative and (n - j) % 2 == 1:
        t = DoubleDouble(-t.hi, -t.lo)
    a, ea = dd_normalize(dd_mul(dd_mul(c, t), s))
    if mode == FULL:
        qs = DoubleDouble(-q.hi, -q.lo) if negative else q
        m = dd_add_d(dd_mul_d(div2d(float(j - 1), p), x), 1.0)
        m = dd_add(m, dd_mul_d(div2d(float(j - n), qs), x))
    else:
        m = _multiplier_poly_dd(n, k, alpha, j)
    return a, dd_mul(m, a), e_c + es + et + ea


@jit
def _term(n, k, alpha, x, j, c, e_c, mode, exact_pow):
    if mode == FAST64:
        return _term_fast64(n, k, alpha.hi, x, j, c.hi, e_c)
    return _term_dd(n, k, alpha, x, j, c, e_c, mode, exact_pow)


@jit
def _first_term(n, k, alpha, x, dwass, mode, exact_pow):
    """The ``j = 0`` term of the main sum, or the ``j = n`` term of the alternate one."""
    if mode == FAST64:
        a64 = alpha.hi
        if dwass:
            # (1 + x)**(n-1), x times the derivative factor (1 + n x) / (x (1 + x))
            p = ((n + k) + a64) / n
            s, e = _pow_scaled_libm(p, n - 1)
            m = ((1 + k) + a64) / p
        else:
            # (1 - x)**n / x, x times the derivative factor -n / (1 - x)
            q = ((n - k) - a64) / n
            s, e = _pow_scaled_libm(q, n)
            s /= x
            m = -n * x / q
        a, ea = math.frexp(s)
        return DoubleDouble(a, 0.0), DoubleDouble(m * a, 0.0), e + ea
    if dwass:
        p = dd_div_d(_int_plus(n + k, alpha), float(n))
        s, e = _dd_pow(p, n - 1, exact_pow)
        m = dd_div(_int_plus(1 + k, alpha), p)
    else:
        q = dd_div_d(_int_minus(n - k, alpha), float(n))
        s, e = _dd_pow(q, n, exact_pow)
        s = dd_div_d(s, x)
        m = dd_mul_d(div2d(-float(n), q), x)
    a, ea = dd_normalize(s)
    return a, dd_mul(m, a), e + ea


def term_aj_dj(n, k, x, alpha, j, acc, mode=PrecisionMode.HYBRID, alpha_lo=0.0):
    """Return ``A_j(n, x)`` and ``D_j(n, x)`` as binary64 values.

    ``x = (k + alpha + alpha_lo)/n`` and ``acc`` must hold ``C(n, j)``.  For
    ``j = 0`` the closed form ``(1-x)**n / x`` is used.  Values outside the
    binary64 range are rounded to zero or raise ``OverflowError``; the
    distribution functions never convert individual terms.
    """
    n = _check_n(n)
    if not 0 <= j <= n:
        raise ValueError("term_aj_dj requires 0 <= j <= n")
    if not 0.0 < x < 1.0:
        raise ValueError("term_aj_dj requires 0 < x < 1")
    mode = int(PrecisionMode.parse(mode))
    a = DoubleDouble(float(alpha), float(alpha_lo))
    if j == 0:
        sa, sd, e = _first_term(n, k, a, float(x), False, mode, mode == FULL)
    else:
        sa, sd, e = _term(n, k, a, float(x), j, acc.c, acc.e_c, mode, mode == FULL)
    # the kernels carry x D_j
    sd = dd_div_d(sd, float(x))
    return TermPair(_ldexp_clamped(sa.hi + sa.lo, e), _ldexp_clamped(sd.hi + sd.lo, e))


def _ldexp_clamped(v, e):
    if v == 0.0 or e < -1200:
        return 0.0 * v
    return math.ldexp(v, e)


# ---------------------------------------------------------------------------
# the distribution


@jit
def _shift(a, s):
    if s < -_FRAME_DEPTH:
        return DoubleDouble(0.0, 0.0)
    return dd_ldexp(a, s)


@jit
def _accumulate(acc, term, mode):
    if mode == FAST64:
        # Neumaier pair: hi is the running total, lo the compensation
        t, c = neumaier_add(acc.hi, acc.lo, term.hi)
        return DoubleDouble(t, c)
    return dd_add(acc, term)


@jit
def _finish(acc, mode):
    if mode == FAST64:
        return DoubleDouble(acc.hi + acc.lo, 0.0)
    return acc


@jit
def _complement(p):
    # 1 - p rounded once
    s, e = two_sum(1.0, -p.hi)
    return s + (e - p.lo)


@jit
def _clip01(v):
    return min(max(v, 0.0), 1.0)


@jit
def _smirnov(n, x, mode):
    if x < 0.0:
        return 1.0, 0.0, 0.0
    if x > 1.0:
        return 0.0, 1.0, 0.0
    if n == 1:
        return 1.0 - x, x, 1.0
    if x == 0.0:
        return 1.0, 0.0, 1.0
    if x == 1.0:
        return 0.0, 1.0, 0.0
    if 2.0 * n * x * x > _SF_UNDERFLOW:
        return 0.0, 1.0, 0.0

    k, a_hi, a_lo = _nx_split(n, x)
    if mode == FAST64:
        a_lo = 0.0
        if a_hi >= 1.0:
            k += 1
            a_hi = 0.0
    alpha = DoubleDouble(a_hi, a_lo)

    cutoff = _DWASS_CUTOFF[mode]
    dwass = k < cutoff or (k == cutoff and a_hi == 0.0)
    nterms = k if dwass else n - k - 1

    if nterms > _ASYMPTOTE_TERMS:
        nx6 = 6.0 * n * x + 1.0
        e = -nx6 * nx6 / (18.0 * n)
        sf = math.exp(e)
        return sf, -math.expm1(e), nx6 * 2.0 * sf / 3.0

    # The alternating sum has at most three terms but cancels, so the
    # double-double power is used there even in hybrid mode.
    exact_pow = mode == FULL or dwass
    sig_a, sig_d, frame = _first_term(n, k, alpha, x, dwass, mode, exact_pow)
    sum_a = sig_a
    sum_d = sig_d
    c = DoubleDouble(1.0, 0.0)
    e_c = 0
    for i in range(1, nterms + 1):
        c, e_c = _binom_step(c, e_c, n, i, mode)
        j = n - i if dwass else i
        sig_a, sig_d, e = _term(n, k, alpha, x, j, c, e_c, mode, exact_pow)
        if sig_a.hi == 0.0 and sig_d.hi == 0.0:
            continue
        if e > frame:
            sum_a = _shift(sum_a, frame - e)
            sum_d = _shift(sum_d, frame - e)
            frame = e
        else:
            sig_a = _shift(sig_a, e - frame)
            sig_d = _shift(sig_d, e - frame)
        sum_a = _accumulate(sum_a, sig_a, mode)
        sum_d = _accumulate(sum_d, sig_d, mode)

    # probabilities and density, still scaled by 2**-frame
    prob = dd_mul_d(_finish(sum_a, mode), x)
    dens = _finish(sum_d, mode)
    if frame < -_FRAME_DEPTH:
        prob = DoubleDouble(0.0, 0.0)
        dens = DoubleDouble(0.0, 0.0)
    else:
        prob = dd_ldexp(prob, frame)
        dens = dd_ldexp(dens, frame)

    if dwass:
        cdf = prob.hi + prob.lo
        sf = _complement(prob)
        pdf = dens.hi + dens.lo
    else:
        sf = prob.hi + prob.lo
        cdf = _complement(prob)
        pdf = -(dens.hi + dens.lo)
    return _clip01(sf), _clip01(cdf), max(pdf, 0.0)


def _check_n(n):
    if isinstance(n, bool) or int(n) != n:
        raise TypeError(f"n must be an integer, got {n!r}")
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n >= 2**52:
        raise ValueError("n must be below 2**52")
    return n


def smirnov(n, x, mode=PrecisionMode.HYBRID):
    """SF, CDF and PDF of ``D_n^+`` at ``x``, computed together.

    Parameters
    ----------
    n : int
        Sample size, ``n >= 1``.
    x : float
        Statistic value.  Values outside ``[0, 1]`` are allowed.
    mode : PrecisionMode or str
        Arithmetic carrier; ``"full"`` is the most accurate.

    Returns
    -------
    SmirnovTriple
        ``sf = P(D_n^+ >= x)``, ``cdf = 1 - sf`` and the density.  At the
        knot ``x = 1/n`` the density is the limit from the left.

    Examples
    --------
    >>> smirnov(2, 0.75)
    SmirnovTriple(sf=0.0625, cdf=0.9375, pdf=0.5)
    """
    n = _check_n(n)
    x = float(x)
    if math.isnan(x):
        raise ValueError("x must not be NaN")
    mode = PrecisionMode.parse(mode)
    return SmirnovTriple(*_smirnov(n, x, int(mode)))


def smirnov_sf(n, x, mode=PrecisionMode.HYBRID):
    return smirnov(n, x, mode).sf


def smirnov_cdf(n, x, mode=PrecisionMode.HYBRID):
    return smirnov(n, x, mode).cdf


def smirnov_pdf(n, x, mode=PrecisionMode.HYBRID):
    return smirnov(n, x, mode).pdf
