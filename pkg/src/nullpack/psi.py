"""The universal parameter function and its certified truncations.

psi(y) = sum_{n>=2} r_n(y_2,...,y_{n-1}) y_n / n!  (matrix times digit vector
per summand).  It is only ever handled as (exact truncation, rigorous tail
radius) balls: the truncation is an exact rational q-vector, and the radius
bounds the discarded tail of the full series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .codec import FactorialDigits
from .dense import DenseMapFamily
from .numeric import loglog

TAIL_TERMS = 400  # direct summation horizon for tail bounds
_SLACK = 1.0 + 1e-9  # float roundoff headroom on certified sums


@dataclass(frozen=True)
class PsiTruncation:
    y: FactorialDigits
    N: int
    value: tuple[Fraction, ...]
    tail_radius: float

    def to_json(self) -> dict:
        return {
            "digits": self.y.to_text(),
            "N": self.N,
            "value": [f"{v.numerator}/{v.denominator}" for v in self.value],
            "tail_radius": self.tail_radius,
        }

    def value_floats(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.value)


def _coeff_norm(n: int) -> float:
    """Entrywise norm bound on r_n: 1 for the constant first map, loglog n after."""
    return 1.0 if n == 2 else loglog(n)


def psi_tail_radius(N: int, p: int, q: int) -> float:
    """Upper bound on |psi(y) - psi^(N)(y)| entrywise, for any digits.

    Each discarded term is bounded by p * ||r_n|| * (n-1) / n!; the sum is
    taken directly for TAIL_TERMS terms and the rest dominated by a geometric
    series with ratio <= 1/2.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    # ln of the first term; if already below the float floor, return a tiny
    # but still valid upper bound instead of underflowing to zero.
    first_ln = (
        math.log(p) + math.log(_coeff_norm(max(N, 3))) + math.log(N - 1)
        - math.lgamma(N + 1)
    )
    if first_ln < -680:
        return 1e-290
    total = 0.0
    w = 1.0 / math.factorial(N)  # 1/n! running weight
    n = N
    while n < N + TAIL_TERMS:
        total += p * _coeff_norm(n) * (n - 1) * w
        n += 1
        w /= n
    total += 2 * p * _coeff_norm(n) * (n - 1) * w  # geometric remainder
    return total * _SLACK


def psi_truncated(family: DenseMapFamily, y: FactorialDigits, N: int) -> PsiTruncation:
    """Exact rational truncation sum_{n=2}^{N-1} r_n(prefix) y_n / n! with a
    tail radius valid for the full psi."""
    if N < 2:
        raise ValueError("N must be >= 2")
    if N > 2 and y.depth < N - 1:
        raise ValueError(f"digits of depth >= {N - 1} required")
    value = [Fraction(0)] * family.q
    nfact = 1
    for n in range(2, N):
        nfact *= n
        r = family.r_eval(n, y)
        yn = y.level(n)
        for a in range(family.q):
            s = sum((r[a][b] * yn[b] for b in range(family.p)), Fraction(0))
            value[a] += s / nfact
    return PsiTruncation(
        y=y, N=N, value=tuple(value), tail_radius=psi_tail_radius(N, family.p, family.q)
    )


@lru_cache(maxsize=None)
def psi_tail_constant() -> float:
    """The certified constant C with |psi(y) - psi(ybar)| <= C loglog(N)/N!
    whenever the expansions agree for 2 <= n <= N.

    C = ceil of  sup_{3 <= N <= 200}  N! * sum_{n>N} (n-1) loglog(n)/n!  / loglog(N),
    the sum taken to n = N + 2000 plus a geometric remainder.
    """
    worst = 0.0
    for N in range(3, 201):
        acc = 0.0
        w = 1.0  # N!/n!
        n = N
        for _ in range(2000):
            n += 1
            w /= n
            acc += (n - 1) * loglog(n) * w
        acc += 2 * (n) * loglog(n + 1) * w / (n + 1)  # remainder, ratio < 1/2
        worst = max(worst, acc * _SLACK / loglog(N))
    return float(math.ceil(worst))


def periodize(y):
    """Componentwise representative in (0,1]: x -> x - ceil(x) + 1."""
    out = []
    for x in y:
        if isinstance(x, (Fraction, int)):
            x = Fraction(x)
            out.append(x - math.ceil(x) + 1)
        else:
            out.append(x - math.ceil(x) + 1.0)
    return tuple(out)


def psi_bound(p: int, q: int) -> float:
    """Explicit entrywise bound on |psi| over (0,1]^p.

    First summand contributes at most p * 1/2 (all-ones matrix, digits <= 1),
    the n = 3 summand is exactly zero (the single level-3 map is the zero
    matrix), and the rest is the tail bound from index 4.
    """
    return p * 0.5 + psi_tail_radius(4, p, q)
