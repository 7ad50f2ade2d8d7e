"""Error-free transforms, double-double arithmetic and scaled powers.

A double-double is an unevaluated sum ``hi + lo`` of two binary64 values with
``|lo| <= ulp(hi)/2``, good for about 106 significand bits.  A scaled float
is a significand in ``[0.5, 1)`` paired with an integer exponent, so that
values like ``0.5**5000`` stay representable.

Everything here is a numba kernel on plain floats and ints.  No FMA is
assumed: products are split with Dekker's method, so operands must stay
below about ``2**995`` in magnitude.
"""

import math
from typing import NamedTuple

from ._jit import jit

_SPLITTER = 134217729.0  # 2**27 + 1

# pow() of a [0.5, 1) significand is kept above 2**-_POW_FLOOR_BITS
_POW_FLOOR_BITS = 1000


class DoubleDouble(NamedTuple):
    hi: float
    lo: float

    def __float__(self):
        return self.hi + self.lo


class ScaledFloat(NamedTuple):
    """``sig * 2**expt`` with ``0.5 <= |sig| < 1`` (or both zero)."""

    sig: float
    expt: int

    def __float__(self):
        return combine_scaled(self)


class CompensatedSum(NamedTuple):
    total: float = 0.0
    compensation: float = 0.0


# ---------------------------------------------------------------------------
# error-free transforms


@jit
def two_sum(a, b):
    """Return ``(s, e)`` with ``s = fl(a + b)`` and ``s + e == a + b`` exactly."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


@jit
def fast_two_sum(a, b):
    # requires |a| >= |b| (or a == 0)
    s = a + b
    e = b - (s - a)
    return s, e


@jit
def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


@jit
def two_prod(a, b):
    """Return ``(p, e)`` with ``p = fl(a * b)`` and ``p + e == a * b`` exactly."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


# ---------------------------------------------------------------------------
# double-double arithmetic


@jit
def dd_add(a, b):
    s, e = two_sum(a.hi, b.hi)
    t, f = two_sum(a.lo, b.lo)
    e += t
    s, e = fast_two_sum(s, e)
    e += f
    s, e = fast_two_sum(s, e)
    return DoubleDouble(s, e)


@jit
def dd_add_d(a, b):
    """``addD2``: double-double plus binary64."""
    s, e = two_sum(a.hi, b)
    e += a.lo
    s, e = fast_two_sum(s, e)
    return DoubleDouble(s, e)


@jit
def dd_neg(a):
    return DoubleDouble(-a.hi, -a.lo)


@jit
def dd_mul(a, b):
    p, e = two_prod(a.hi, b.hi)
    e += a.hi * b.lo + a.lo * b.hi
    p, e = fast_two_sum(p, e)
    return DoubleDouble(p, e)


@jit
def dd_mul_d(a, b):
    """``mulD2``: double-double times binary64."""
    p, e = two_prod(a.hi, b)
    e += a.lo * b
    p, e = fast_two_sum(p, e)
    return DoubleDouble(p, e)


@jit
def dd_div(a, b):
    if b.hi == 0.0:
        raise ZeroDivisionError("double-double division by zero")
    q1 = a.hi / b.hi
    r = dd_add(a, dd_neg(dd_mul_d(b, q1)))
    q2 = r.hi / b.hi
    r = dd_add(r, dd_neg(dd_mul_d(b, q2)))
    q3 = r.hi / b.hi
    q1, q2 = fast_two_sum(q1, q2)
    return dd_add_d(DoubleDouble(q1, q2), q3)


@jit
def dd_div_d(a, b):
    """Double-double divided by binary64."""
    if b == 0.0:
        raise ZeroDivisionError("double-double division by zero")
    q1 = a.hi / b
    p, e = two_prod(q1, b)
    s, f = two_sum(a.hi, -p)
    f -= e
    f += a.lo
    q2 = (s + f) / b
    q1, q2 = fast_two_sum(q1, q2)
    return DoubleDouble(q1, q2)


@jit
def div22(a, b):
    """Double-double approximation of ``a / b`` for binary64 ``a``, ``b``."""
    return dd_div_d(DoubleDouble(a, 0.0), b)


@jit
def div2d(a, b):
    """binary64 ``a`` divided by double-double ``b``."""
    return dd_div(DoubleDouble(a, 0.0), b)


@jit
def dd_from_int(i):
    # exact for |i| < 2**106
    hi = float(i)
    lo = float(i - int(hi))
    return DoubleDouble(hi, lo)


@jit
def dd_ldexp(a, e):
    return DoubleDouble(math.ldexp(a.hi, e), math.ldexp(a.lo, e))


@jit
def dd_normalize(a):
    """Split ``a`` into a significand with ``0.5 <= |hi| < 1`` and an exponent."""
    if a.hi == 0.0:
        return DoubleDouble(0.0, 0.0), 0
    f, e = math.frexp(a.hi)
    return DoubleDouble(f, math.ldexp(a.lo, -e)), e


# ---------------------------------------------------------------------------
# powers


@jit
def _pow_scaled_libm(base, m):
    """``base**m`` as ``(sig, expt)`` using libm ``pow`` on bounded pieces.

    ``base`` must be positive and finite, ``m >= 0``.  The exponent is split so
    that no single ``pow`` call leaves the normal range; each piece costs one
    ``pow`` rounding, and there is one piece per factor of ~1000 in ``m``.
    """
    f, fe = math.frexp(base)
    bexp = int(fe)
    sig = 0.5
    expt = 1
    while m * -math.log2(f) > _POW_FLOOR_BITS:
        d = int(_POW_FLOOR_BITS / -math.log2(f))
        q = m // d
        r = m - q * d
        t, te = math.frexp(math.pow(f, float(r)))
        sig, se = math.frexp(sig * t)
        expt += int(se) + int(te) + bexp * r
        f, ge = math.frexp(math.pow(f, float(d)))
        bexp = bexp * d + int(ge)
        m = q
    t, te = math.frexp(math.pow(f, float(m)))
    sig, se = math.frexp(sig * t)
    return sig, expt + int(se) + int(te) + bexp * m


@jit
def _simple_correction(z, m):
    # relative correction (1 + z)**m - 1 for tiny z
    if m > 1e8:
        return math.expm1(m * math.log1p(z))
    return m * z * (1.0 + (m - 1) * z / 2.0)


@jit
def pow_d_simple(a, m):
    """``powDSimple``: ``(a.hi + a.lo)**m`` from libm ``pow`` plus a Taylor fix.

    The result must lie inside the binary64 range; see ``pow_scaled_simple``
    for the exponent-extended variant.
    """
    if not a.hi > 0.0:
        raise ValueError("pow_d_simple requires a positive base")
    if m < 0:
        raise ValueError("pow_d_simple requires m >= 0")
    y = math.pow(a.hi, float(m))
    z = a.lo / a.hi
    w = _simple_correction(z, m)
    s, e = two_sum(y, y * w)
    return DoubleDouble(s, e)


@jit
def pow_scaled_simple(a, m):
    """``pow_d_simple`` with the exponent carried separately.

    Returns ``(sig, expt)`` where ``sig`` is a double-double significand.
    """
    if not a.hi > 0.0:
        raise ValueError("pow_scaled_simple requires a positive base")
    if m < 0:
        raise ValueError("pow_scaled_simple requires m >= 0")
    y, ey = _pow_scaled_libm(a.hi, m)
    w = _simple_correction(a.lo / a.hi, m)
    s, e = two_sum(y, y * w)
    sig, es = dd_normalize(DoubleDouble(s, e))
    return sig, ey + es


@jit
def pow_scaled_dd(a, m):
    """``powScaledD``: integer power of a double-double with a separate exponent.

    Binary exponentiation in double-double, pulling powers of two out after
    every product so intermediates never leave ``[0.25, 1)``.
    """
    if not a.hi > 0.0:
        raise ValueError("pow_scaled_dd requires a positive base")
    if m < 0:
        raise ValueError("pow_scaled_dd requires m >= 0")
    base, bexp = dd_normalize(a)
    acc = DoubleDouble(0.5, 0.0)
    expt = 1
    while m > 0:
        if m & 1:
            acc, e = dd_normalize(dd_mul(acc, base))
            expt += e + bexp
        m >>= 1
        if m > 0:
            base, e = dd_normalize(dd_mul(base, base))
            bexp = 2 * bexp + e
    return acc, expt


@jit
def _int_plus_dd(a, b):
    # a (integer-valued, |a| < 2**53) plus double-double b
    s, e = two_sum(a, b.hi)
    e += b.lo
    s, e = two_sum(s, e)
    return DoubleDouble(s, e)


@jit
def frac_base_dd(a, b, c, d):
    """Double-double ``(a + b) / (c + d)``; ``a``, ``c`` integral, ``b``, ``d`` double-double."""
    num = _int_plus_dd(a, b)
    den = _int_plus_dd(c, d)
    return dd_div(num, den)


@jit
def _pow_frac_scaled(a, b, c, d, m):
    base = frac_base_dd(float(a), DoubleDouble(b, 0.0), float(c), DoubleDouble(d, 0.0))
    if not base.hi > 0.0:
        raise ValueError("pow_frac_scaled requires a positive base")
    sig, expt = pow_scaled_simple(base, m)
    f, e = math.frexp(sig.hi + sig.lo)
    return f, expt + e


def pow_frac_scaled(a, b, c, d, m):
    """``((a + b) / (c + d))**m`` as a :class:`ScaledFloat` (``powfour``).

    ``a`` and ``c`` are integers, ``b`` and ``d`` binary64.  The base is
    formed in double-double, so only the exponentiation contributes
    rounding error of note, and the exponent never under- or overflows.
    """
    if m < 0:
        raise ValueError("pow_frac_scaled requires m >= 0")
    sig, expt = _pow_frac_scaled(a, b, c, d, m)
    return ScaledFloat(sig, expt)


# ---------------------------------------------------------------------------
# compensated summation


@jit
def neumaier_add(total, comp, term):
    t = total + term
    if abs(total) >= abs(term):
        comp += (total - t) + term
    else:
        comp += (term - t) + total
    return t, comp


def comp_sum_add(acc, term):
    """Add ``term`` to a Neumaier accumulator and return the new accumulator."""
    return CompensatedSum(*neumaier_add(acc.total, acc.compensation, float(term)))


def comp_sum_finalize(acc):
    return acc.total + acc.compensation


# ---------------------------------------------------------------------------
# significand/exponent split


def split_scaled(x):
    """Exact ``(sig, expt)`` decomposition of a finite binary64 value."""
    if not math.isfinite(x):
        raise ValueError("split_scaled requires a finite value")
    sig, expt = math.frexp(x)
    return ScaledFloat(sig, expt)


def combine_scaled(s):
    """Return ``s.sig * 2**s.expt`` as binary64.

    Values below the subnormal range come back as ``0.0`` (see
    :func:`underflows`); values above the binary64 range raise
    ``OverflowError``.
    """
    if s.sig == 0.0:
        return 0.0
    if s.expt > 1024:
        raise OverflowError("scaled value exceeds the binary64 range")
    if s.expt < -1100:
        return math.copysign(0.0, s.sig)
    return math.ldexp(s.sig, s.expt)


def underflows(s):
    """True when ``s`` is nonzero but rounds to zero as binary64."""
    return s.sig != 0.0 and combine_scaled(s) == 0.0
