"""Factorial number system for points of (0,1]^p.

Every a in (0,1] has a unique expansion a = sum_{n>=2} a_n/n! with integer
digits 0 <= a_n <= n-1 and infinitely many digits nonzero.  Terminating
expansions are rewritten to the canonical non-terminating representative
(the factorial analogue of 0.999...), which the greedy-from-above extraction
below produces directly.

Convention note: digits of a FactorialDigits run over n = 2..depth.  The
remaining tail after depth lies in (0, 1/depth!].  ``tail_bound(N)`` is the
bound 1/(N-1)! for a tail *starting at index N*; when two expansions agree
for 2 <= n <= N the difference tail starts at N+1, so the matching bound is
``tail_bound(N+1)`` = 1/N!.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass(frozen=True)
class FactorialDigits:
    """Truncated factorial expansion of a point of (0,1]^p.

    digits[n-2] is the p-vector y_n, for n = 2..depth.
    """

    p: int
    depth: int
    digits: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.depth < 2:
            raise ValueError("depth must be >= 2")
        if len(self.digits) != self.depth - 1:
            raise ValueError("digit count does not match depth")
        for n, level in enumerate(self.digits, start=2):
            if len(level) != self.p:
                raise ValueError(f"level {n} is not a {self.p}-vector")
            for c in level:
                if not 0 <= c <= n - 1:
                    raise ValueError(f"digit {c} out of range at level {n}")

    def level(self, n: int) -> tuple[int, ...]:
        """The p-vector y_n."""
        return self.digits[n - 2]

    def truncate(self, depth: int) -> "FactorialDigits":
        if depth > self.depth:
            raise ValueError("cannot extend by truncation")
        return FactorialDigits(self.p, depth, self.digits[: depth - 1])

    def to_text(self) -> str:
        parts = [f"p={self.p}"]
        for n in range(2, self.depth + 1):
            parts.append(f"{n}:" + ",".join(str(c) for c in self.level(n)))
        return ";".join(parts)

    @classmethod
    def from_text(cls, text: str) -> "FactorialDigits":
        fields = text.strip().split(";")
        if not fields or not fields[0].startswith("p="):
            raise ValueError("expected leading p=<int> field")
        p = int(fields[0][2:])
        digits = []
        for n, field in enumerate(fields[1:], start=2):
            tag, _, vec = field.partition(":")
            if int(tag) != n:
                raise ValueError(f"levels out of order at {tag}")
            digits.append(tuple(int(c) for c in vec.split(",")))
        return cls(p, len(digits) + 1, tuple(digits))


def expand(a: Sequence[Fraction], depth: int) -> FactorialDigits:
    """Greedy digit extraction, canonical non-terminating representative.

    Maintains the tail r in (0, 1/(n-1)!] and takes d_n = ceil(r * n!) - 1,
    which keeps the new tail strictly positive.  Reconstruction:
    value(result, depth+1) + tail == a with 0 < tail <= 1/depth!.
    """
    if depth < 2:
        raise ValueError("depth must be >= 2")
    a = [Fraction(c) for c in a]
    for c in a:
        if not 0 < c <= 1:
            raise ValueError(f"component {c} outside (0,1]")
    remainders = list(a)
    levels = []
    nfact = 1
    for n in range(2, depth + 1):
        nfact *= n
        level = []
        for i in range(len(a)):
            d = -((-remainders[i] * nfact) // 1) - 1  # ceil(r*n!) - 1
            level.append(int(d))
            remainders[i] -= Fraction(int(d), nfact)
        levels.append(tuple(level))
    return FactorialDigits(len(a), depth, tuple(levels))


def value(d: FactorialDigits, k: int) -> tuple[Fraction, ...]:
    """The exact partial sum sum_{n=2}^{k-1} y_n / n!."""
    if not 2 <= k <= d.depth + 1:
        raise ValueError(f"k={k} out of range [2, {d.depth + 1}]")
    total = [Fraction(0)] * d.p
    nfact = 1
    for n in range(2, k):
        nfact *= n
        for i, c in enumerate(d.level(n)):
            total[i] += Fraction(c, nfact)
    return tuple(total)


def tail_bound(N: int) -> Fraction:
    """sum_{n=N}^inf (n-1)/n! = 1/(N-1)!, the worst-case tail from index N."""
    if N < 2:
        raise ValueError("N must be >= 2")
    return Fraction(1, math.factorial(N - 1))


def agreement_depth(d1: FactorialDigits, d2: FactorialDigits) -> int:
    """Largest N <= depth with y_n = ybar_n for all 2 <= n <= N; 1 if none."""
    if d1.p != d2.p or d1.depth != d2.depth:
        raise ValueError("dimension or depth mismatch")
    N = 1
    for n in range(2, d1.depth + 1):
        if d1.level(n) != d2.level(n):
            break
        N = n
    return N
