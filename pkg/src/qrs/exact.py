"""Exact rational scalars.

Values are ``gmpy2.mpq`` instances, which are kept in lowest terms with a
positive denominator after every operation.
"""
from __future__ import annotations

from fractions import Fraction

from gmpy2 import mpq

from .errors import ZeroToNegativePower

Rational = type(mpq())

ZERO = mpq(0)
ONE = mpq(1)


def rat(value, den=None) -> Rational:
    """Build a Rational from an int, Fraction, mpq or a "p/q" string."""
    if den is not None:
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        return mpq(value, den)
    if isinstance(value, Rational):
        return value
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"cannot convert {value!r} to an exact rational")
    return mpq(value)


def parse_rational(text: str) -> Rational:
    s = text.strip()
    if "/" in s:
        p, q = s.split("/", 1)
        num, den = int(p), int(q)
        if den == 0:
            raise ZeroDivisionError(f"zero denominator in {text!r}")
        return mpq(num, den)
    return mpq(int(s))


def format_rational(x) -> str:
    x = rat(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def rat_pow(x, e: int) -> Rational:
    x = rat(x)
    if e < 0:
        if x == 0:
            raise ZeroToNegativePower("0 raised to a negative power")
        return ONE / x ** (-e)
    return x ** e


def binom2(m: int) -> int:
    if m < 0:
        raise ValueError("binom2 needs a non-negative argument")
    return m * (m - 1) // 2


def is_canonical(x: Rational) -> bool:
    from math import gcd

    return x.denominator > 0 and gcd(abs(x.numerator), x.denominator) == 1
