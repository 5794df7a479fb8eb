"""Exact and log-scale arithmetic substrate.

Rationals are ``fractions.Fraction`` (always in lowest terms, exact), naturals
are Python ints.  Quantities too large or too small for either are carried as
(sign, ln|x|) pairs; beyond the double exponent range the log itself is an
``mpmath.mpf``, whose exponent is an arbitrary-precision int.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

EXACT_SUM_LIMIT = 10**6  # ln(n!) by direct summation up to here, Stirling beyond


def format_rational(x: Fraction) -> str:
    """Serialize as 'p/q' with the denominator always present."""
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: str) -> Fraction:
    return Fraction(s)


@lru_cache(maxsize=4096)
def log_factorial(n: int) -> float:
    """ln(n!).  Exact summation for n <= 10^6, Stirling series beyond.

    The Stirling remainder after the 1/(1260 n^5) term is < 1/(1680 n^7),
    far below 1e-12 relative for n > 10^6.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n <= EXACT_SUM_LIMIT:
        return math.fsum(math.log(i) for i in range(2, n + 1))
    return (
        n * math.log(n)
        - n
        + 0.5 * math.log(2 * math.pi * n)
        + 1 / (12 * n)
        - 1 / (360 * n**3)
        + 1 / (1260 * n**5)
    )


def loglog(x: float) -> float:
    """ln(ln x).  Positive only for x > e; raises for x <= 1."""
    if x <= 1:
        raise ValueError(f"loglog requires x > 1, got {x}")
    return math.log(math.log(x))


def ln_of_fraction(x: Fraction) -> float:
    """ln of a positive rational, exact for arbitrarily huge magnitudes.

    math.log on big ints is fine at any size, so this never overflows.
    """
    if x <= 0:
        raise ValueError("ln_of_fraction requires a positive rational")
    return math.log(x.numerator) - math.log(x.denominator)


@dataclass(frozen=True)
class LogMagnitude:
    """A real carried as (sign, ln|x|).

    ``ln_abs`` is a float in ordinary use; bounded-mode certificate paths may
    substitute an ``mpmath.mpf`` when even the logarithm exceeds the double
    exponent range.  ``ln_abs`` is meaningless when sign == 0.
    """

    sign: int
    ln_abs: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or +1")

    @classmethod
    def from_float(cls, x: float) -> "LogMagnitude":
        if x == 0:
            return cls(0, 0.0)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def from_int(cls, n: int) -> "LogMagnitude":
        if n == 0:
            return cls(0, 0.0)
        return cls(1 if n > 0 else -1, math.log(abs(n)))

    @classmethod
    def from_fraction(cls, x: Fraction) -> "LogMagnitude":
        if x == 0:
            return cls(0, 0.0)
        return cls(1 if x > 0 else -1, ln_of_fraction(abs(x)))

    def __mul__(self, other: "LogMagnitude") -> "LogMagnitude":
        if self.sign == 0 or other.sign == 0:
            return LogMagnitude(0, 0.0)
        return LogMagnitude(self.sign * other.sign, self.ln_abs + other.ln_abs)

    def __pow__(self, e: int) -> "LogMagnitude":
        if self.sign == 0:
            return LogMagnitude(0, 0.0) if e > 0 else NotImplemented
        sign = self.sign if e % 2 else 1
        return LogMagnitude(sign, self.ln_abs * e)

    def __add__(self, other: "LogMagnitude") -> "LogMagnitude":
        # log-sum-exp; subtraction of near-equal magnitudes loses precision
        # but never overflows.
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        hi, lo = (self, other) if self.ln_abs >= other.ln_abs else (other, self)
        d = lo.ln_abs - hi.ln_abs  # <= 0
        if self.sign == other.sign:
            return LogMagnitude(hi.sign, hi.ln_abs + math.log1p(math.exp(d)))
        if d == 0:
            return LogMagnitude(0, 0.0)
        return LogMagnitude(hi.sign, hi.ln_abs + math.log1p(-math.exp(d)))

    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.ln_abs)

    def to_json(self) -> dict:
        ln = self.ln_abs
        if isinstance(ln, mpmath.mpf):
            try:
                ln = float(ln)
            except OverflowError:
                ln = mpmath.nstr(self.ln_abs, 17)
        return {"sign": self.sign, "ln_abs": ln}
