"""Arbitrary-precision arithmetic context shared by every numeric routine.

All production arithmetic uses :mod:`gmpy2` ``mpfr`` values.  A
:class:`PrecisionCtx` fixes the working precision once; routines enter it
with ``with ctx.local():`` so that intermediate results are rounded to the
same number of bits everywhere.
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Iterator, Union

import gmpy2
from gmpy2 import mpfr, mpq

MIN_DIGITS = 15
GUARD_BITS = 16

Number = Union[int, float, str, Fraction, Decimal, "mpfr", "mpq"]


@dataclass(frozen=True)
class PrecisionCtx:
    """Immutable working-precision settings.

    Attributes
    ----------
    decimal_digits : int
        Requested working precision in decimal digits.
    bits : int
        Binary precision actually used (digits plus guard bits).
    pi : mpfr
        pi rounded to ``bits``.
    eig_tol : mpfr
        Relative off-diagonal threshold for the Jacobi eigensolver.
    deriv_h : mpfr
        Finite-difference step for L-derivatives, as a fraction of L.
    """

    decimal_digits: int
    bits: int = field(repr=False)
    pi: object = field(repr=False)
    eig_tol: object = field(repr=False)
    deriv_h: object = field(repr=False)

    @contextmanager
    def local(self) -> Iterator[gmpy2.context]:
        with gmpy2.context(gmpy2.get_context(), precision=self.bits) as c:
            yield c

    def mpf(self, value: Number) -> mpfr:
        """Convert ``value`` to an ``mpfr`` correctly rounded at this precision.

        Strings and Decimals are parsed exactly as decimal literals, so
        ``ctx.mpf("0.01")`` is the nearest binary value to 1/100, not the
        nearest value to the double ``0.01``.
        """
        if isinstance(value, Fraction):
            value = mpq(value.numerator, value.denominator)
        elif isinstance(value, Decimal):
            value = str(value)
        return mpfr(value, self.bits)

    def tolerance(self, guard: int = 5) -> mpfr:
        """``10**(-decimal_digits + guard)`` at this precision."""
        with self.local():
            return mpfr(10) ** (guard - self.decimal_digits)


def make_context(decimal_digits: int) -> PrecisionCtx:
    """Build a :class:`PrecisionCtx` for ``decimal_digits`` significant digits."""
    if isinstance(decimal_digits, bool) or not isinstance(decimal_digits, int):
        raise TypeError("decimal_digits must be an int")
    if decimal_digits < MIN_DIGITS:
        raise ValueError(
            f"decimal_digits must be >= {MIN_DIGITS}, got {decimal_digits}"
        )
    bits = math.ceil(decimal_digits * math.log2(10)) + GUARD_BITS
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        pi = gmpy2.const_pi()
        eig_tol = mpfr(10) ** (5 - decimal_digits)
        deriv_h = mpfr(1) / 1000
    return PrecisionCtx(decimal_digits, bits, pi, eig_tol, deriv_h)


def to_decimal_string(x, digits: int) -> str:
    """Format ``x`` with ``digits`` correctly rounded significant digits.

    Fixed notation for moderate magnitudes, scientific otherwise. Decimal
    strings are the interchange format; binary floats never leave the
    library.
    """
    if digits < 1:
        raise ValueError("digits must be positive")
    if not isinstance(x, type(mpfr(0))):
        x = mpfr(x, 1)
    if not gmpy2.is_finite(x):
        return str(x)
    if x == 0:
        return "0"
    if digits == 1:
        # mpfr cannot emit a single digit directly
        raw, exp, _ = x.digits(10, 12)
        d = Decimal(f"{raw}E{exp - 12}")
        mant = format(abs(d), ".0e").split("e")[0]
        exp = int(format(abs(d), ".0e").split("e")[1]) + 1
        sign = "-" if d < 0 else ""
    else:
        mant, exp, _ = x.digits(10, digits)
        sign = "-" if mant.startswith("-") else ""
        mant = mant.lstrip("-")
    # x = 0.mant * 10**exp
    if -5 < exp <= 25:
        if exp <= 0:
            body = "0." + "0" * (-exp) + mant
        elif exp >= len(mant):
            body = mant + "0" * (exp - len(mant))
        else:
            body = mant[:exp] + "." + mant[exp:]
        return sign + body
    tail = mant[1:]
    return f"{sign}{mant[0]}{'.' + tail if tail else ''}e{exp - 1:+d}"
