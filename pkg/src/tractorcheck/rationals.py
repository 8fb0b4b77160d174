"""Exact rational scalars.

Everything in this package computes over arbitrary-precision rationals so
that identity checks can assert literal zero, never closeness.  gmpy2.mpq
is used when available (roughly an order of magnitude faster than
fractions.Fraction in the inner jet loops); the stdlib Fraction is the
fallback.  Q() is the only constructor the rest of the code uses.
"""

from fractions import Fraction

try:
    from gmpy2 import mpq as _mpq, isqrt as _isqrt

    def Q(a, b=None):
        if b is None:
            if isinstance(a, Fraction):
                return _mpq(a.numerator, a.denominator)
            return _mpq(a)
        return _mpq(a, b)

    def _int_isqrt(n):
        return int(_isqrt(n))

    BACKEND = "gmpy2"
except ImportError:  # pragma: no cover
    from math import isqrt as _int_isqrt

    def Q(a, b=None):
        return Fraction(a) if b is None else Fraction(a, b)

    BACKEND = "fractions"

ZERO = Q(0)
ONE = Q(1)


def qstr(q):
    """Render p/q form, the only rational syntax used in reports."""
    return str(q)


def parse_rational(text):
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        d = int(den)
        if d == 0:
            raise ZeroDivisionError("rational literal with zero denominator: %r" % text)
        return Q(int(num), d)
    return Q(int(text))


def sqrt_exact(q):
    """Exact square root of a rational, or None when q is not a perfect square."""
    if q < 0:
        return None
    num = int(q.numerator)
    den = int(q.denominator)
    rn = _int_isqrt(num)
    rd = _int_isqrt(den)
    if rn * rn != num or rd * rd != den:
        return None
    return Q(rn, rd)
