"""Working-precision control and coefficient helpers.

All high-precision arithmetic goes through mpmath.  Coefficients are plain
Python values: ``int`` (exact), ``fractions.Fraction`` (exact), or
``mpmath.mpf`` (binary float carrying the precision it was created at).
Operations that produce new floats run inside :func:`working`, so results
are always rounded at an explicit, caller-controlled number of significant
decimal digits (default 60).
"""

from __future__ import annotations

from contextlib import contextmanager
from fractions import Fraction

import mpmath
from mpmath import mpf

DEFAULT_DPS = 60

Coefficient = int | Fraction | mpf


@contextmanager
def working(dps: int | None = None):
    """Context manager pinning mpmath's decimal precision for a computation."""
    with mpmath.workdps(dps if dps is not None else DEFAULT_DPS):
        yield mpmath.mp


def is_exact(value: Coefficient) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def to_mpf(value) -> mpf:
    """Convert a coefficient (or float/str) to mpf at the current precision."""
    if isinstance(value, Fraction):
        return mpf(value.numerator) / value.denominator
    return mpf(value)


def log_abs(value) -> mpf:
    """Natural log of |value| at the current precision. value must be nonzero.

    Handles integers far beyond float range (Fraction numerators of powers
    of the degree-5 family reach thousands of digits) and complex values.
    """
    if isinstance(value, Fraction):
        return log_abs(value.numerator) - log_abs(value.denominator)
    if isinstance(value, int):
        return mpmath.log(mpf(abs(value)))
    return mpmath.log(abs(value))


def exact_decimal(x: mpf) -> str:
    """Exact decimal literal of a binary float (every mpf is a finite decimal).

    Used by the polynomial file format so that serialized decimal
    coefficients reload bit-for-bit at equal or higher precision.
    """
    sign, man, exp, _ = x._mpf_
    if man == 0:
        return "0"
    prefix = "-" if sign else ""
    if exp >= 0:
        return prefix + str(man << exp)
    digits = str(man * 5 ** (-exp))
    point = len(digits) + exp  # position of the decimal point
    if point <= 0:
        return prefix + "0." + "0" * (-point) + digits
    if point >= len(digits):
        return prefix + digits + "0" * (point - len(digits))
    return prefix + digits[:point] + "." + digits[point:]


def parse_decimal(text: str) -> mpf:
    """Parse a decimal literal to mpf, exactly if the current precision allows."""
    frac = Fraction(text)
    return to_mpf(frac)
