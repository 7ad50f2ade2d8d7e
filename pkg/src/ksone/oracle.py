"""High-precision reference values for testing.

Everything is evaluated with MPFR at a configurable working precision.  The
argument ``x`` is taken as the exact rational value of its binary64 bit
pattern, and binomial coefficients are exact integers, so the only rounding
comes from the MPFR arithmetic itself.
"""

import csv
import math
import os
from fractions import Fraction
from typing import NamedTuple

import gmpy2
from gmpy2 import mpfr

DEFAULT_BITS = 300
MIN_BITS = 160
_GUARD_BITS = 20

CSV_FIELDS = ("n", "x_hex", "sf_dec40", "cdf_dec40", "pdf_dec40", "bits")


class OracleRecord(NamedTuple):
    n: int
    x: float
    sf: str
    cdf: str
    pdf: str
    bits: int


def _check(n, x, bits):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x!r}")
    if bits < MIN_BITS:
        raise ValueError(f"bits must be >= {MIN_BITS}")
    return int(n), x


def _context(bits):
    return gmpy2.context(gmpy2.get_context(), precision=bits + _GUARD_BITS)


def _sums(n, x, bits):
    """Return (sum A_j, sum of x-derivatives of A_j), left-continuous at knots."""
    xq = Fraction(x)
    jmax = math.floor(n * (1 - xq))
    with _context(bits):
        xm = mpfr(xq.numerator) / xq.denominator
        nx = mpfr(xq.numerator * n) / xq.denominator
        total = mpfr(0)
        deriv = mpfr(0)
        c = 1
        for j in range(jmax + 1):
            if j:
                c = c * (n - j + 1) // j
            p = (nx + j) / n
            q = (n - j - nx) / n
            if q == 0:
                # A_j vanishes here; its derivative survives only when n - j == 1
                if n - j == 1:
                    deriv -= c * p ** (j - 1)
                continue
            a = c * p ** (j - 1) * q ** (n - j)
            total += a
            deriv += a * ((j - 1) / p - (n - j) / q)
        return xm, total, deriv


def oracle_sf(n, x, bits=DEFAULT_BITS):
    """``P(D_n^+ >= x)`` from the finite sum over ``j <= n(1-x)``."""
    n, x = _check(n, x, bits)
    if x == 0.0:
        return mpfr(1, bits)
    xm, total, _ = _sums(n, x, bits)
    return mpfr(xm * total, bits)


def oracle_cdf(n, x, bits=DEFAULT_BITS):
    n, x = _check(n, x, bits)
    with _context(bits):
        return mpfr(1 - oracle_sf(n, x, bits + _GUARD_BITS), bits)


def oracle_pdf(n, x, bits=DEFAULT_BITS):
    """Density of ``D_n^+``; at a knot ``x = j/n`` the limit from the left."""
    n, x = _check(n, x, bits)
    if x == 0.0:
        return mpfr(1, bits)
    xm, total, deriv = _sums(n, x, bits)
    with _context(bits):
        return mpfr(-(total + xm * deriv), bits)


def oracle_cdf_dwass(n, x, bits=DEFAULT_BITS):
    """CDF from the alternating sum over ``j > n(1-x)``.

    The terms alternate and can cancel heavily, so the working precision is
    raised until two successive evaluations agree to ``bits`` bits.
    """
    n, x = _check(n, x, bits)
    xq = Fraction(x)
    if x == 0.0:
        return mpfr(0, bits)
    jmin = math.floor(n * (1 - xq)) + 1

    def evaluate(work):
        with gmpy2.context(gmpy2.get_context(), precision=work):
            nx = mpfr(xq.numerator * n) / xq.denominator
            total = mpfr(0)
            c = math.comb(n, jmin)
            for j in range(jmin, n + 1):
                if j > jmin:
                    c = c * (n - j + 1) // j
                total += c * ((nx + j) / n) ** (j - 1) * ((n - j - nx) / n) ** (n - j)
            return nx / n * total

    work = bits + _GUARD_BITS
    prev = evaluate(work)
    while True:
        work *= 2
        cur = evaluate(work)
        if cur == prev or (cur != 0 and abs((cur - prev) / cur) < mpfr(2) ** -(bits + 4)):
            return mpfr(cur, bits)
        prev = cur


def oracle_isf(n, p_sf, bits=DEFAULT_BITS):
    """Root of ``oracle_sf(n, x) = p_sf`` by bisection to 2**-160 relative width."""
    if not 0.0 < p_sf < 1.0:
        raise ValueError("p_sf must lie strictly between 0 and 1")
    n = int(n)
    with _context(bits):
        target = mpfr(p_sf)
        lo, hi = mpfr(0), mpfr(1)
        while hi - lo > hi * mpfr(2) ** -160:
            mid = (lo + hi) / 2
            if _sf_exact_point(n, mid, bits) > target:
                lo = mid
            else:
                hi = mid
        return mpfr((lo + hi) / 2, bits)


def _sf_exact_point(n, xm, bits):
    # oracle_sf at an mpfr point (which need not be a binary64)
    num, den = xm.as_integer_ratio()
    xq = Fraction(int(num), int(den))
    jmax = math.floor(n * (1 - xq))
    nx = xm * n
    total = mpfr(0)
    c = 1
    for j in range(jmax + 1):
        if j:
            c = c * (n - j + 1) // j
        q = (n - j - nx) / n
        if q == 0:
            continue
        total += c * ((nx + j) / n) ** (j - 1) * q ** (n - j)
    return xm * total


# ---------------------------------------------------------------------------
# CSV cache


def _dec40(v):
    # 40 significant digits, rounded to nearest
    if v == 0:
        return "0"
    mant, expt, _ = v.digits(10, 40)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    return f"{sign}{mant[0]}.{mant[1:]}e{expt - 1:+d}"


def oracle_record(n, x, bits=DEFAULT_BITS):
    n, x = _check(n, x, bits)
    if x == 0.0:
        sf, pdf = mpfr(1, bits), mpfr(1, bits)
    else:
        xm, total, deriv = _sums(n, x, bits)
        with _context(bits):
            sf = mpfr(xm * total, bits)
            pdf = mpfr(-(total + xm * deriv), bits)
    with _context(bits):
        cdf = mpfr(1 - sf, bits)
    return OracleRecord(n, x, _dec40(sf), _dec40(cdf), _dec40(pdf), bits)


def write_records(records, path):
    """Write records as CSV; returns the number of rows."""
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for r in records:
            writer.writerow((r.n, r.x.hex(), r.sf, r.cdf, r.pdf, r.bits))
            count += 1
    return count


def read_records(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_FIELDS:
            raise ValueError(f"{path}: unexpected oracle cache header")
        return [
            OracleRecord(
                int(row["n"]),
                float.fromhex(row["x_hex"]),
                row["sf_dec40"],
                row["cdf_dec40"],
                row["pdf_dec40"],
                int(row["bits"]),
            )
            for row in reader
        ]


class OracleCache:
    """Oracle records keyed by ``(n, x, bits)`` and backed by a CSV file.

    Missing points are computed on demand when ``compute`` is true and
    written back by :meth:`save`.  Only one writer may use a file at a time.
    """

    def __init__(self, path=None, bits=DEFAULT_BITS, compute=True):
        self.path = path
        self.bits = bits
        self.compute = compute
        self._records = {}
        self._dirty = False
        if path is not None and os.path.exists(path):
            for r in read_records(path):
                self._records[(r.n, r.x, r.bits)] = r

    def __len__(self):
        return len(self._records)

    def get(self, n, x):
        key = (int(n), float(x), self.bits)
        rec = self._records.get(key)
        if rec is None:
            if not self.compute:
                raise KeyError(f"oracle cache has no entry for n={n}, x={float(x).hex()}")
            rec = oracle_record(n, x, self.bits)
            self._records[key] = rec
            self._dirty = True
        return rec

    def save(self):
        if self.path is None or not self._dirty:
            return
        rows = sorted(self._records.values(), key=lambda r: (r.bits, r.n, r.x))
        tmp = f"{self.path}.tmp"
        write_records(rows, tmp)
        os.replace(tmp, self.path)
        self._dirty = False


def oracle_dump(points, path, bits=DEFAULT_BITS):
    """Evaluate the oracle at every ``(n, x)`` in ``points`` and write a CSV.

    Returns the number of records written.  Rewriting the same grid
    produces an identical file.
    """
    records = [oracle_record(n, x, bits) for n, x in points]
    return write_records(records, path)
