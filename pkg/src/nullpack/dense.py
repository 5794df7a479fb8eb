"""Dense matrix-map sequence over digit prefixes.

D_k is the set of admissible digit prefixes (y_2,...,y_{k-1}); its size is
(k-1)!^p.  For each k a finite family of maps D_k -> q x p matrices (entries
on a grid inside [-loglog k, loglog k]) covers every such bounded map to
sup-distance < 1/k.  The families are concatenated into one sequence (r_n):
position 2 is the constant all-ones map, then one contiguous block per k in
increasing order, j ascending within the block, so the map with index (k, j)
sits at position N = 2 + sum_{3 <= l < k} m_l + j.

Maps are never materialized: member j of level k is identified with the
mixed-radix digits of j-1 (one digit per prefix, base G^(pq), prefixes in
lexicographic order), and evaluation decodes a single digit.

Beyond the exact-mode caps, positions and counts are carried in log scale
only; logs are mpmath floats, whose exponent range is unbounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, Optional, Sequence

import mpmath

from .codec import FactorialDigits
from .numeric import LogMagnitude, loglog

mpmath.mp.dps = 40

EXACT_TUPLE_CAP = 10**6  # enumerate D_k while (k-1)!^p is at most this
DIGIT_CAP = 10**6  # exact m_k / position sums while decimal digits fit

GRID_DENOM = 2**40  # grid points rounded to this denominator
GRID_ROUND_SLACK = 2.0**-39  # density slack absorbing the rounding

FractionMatrix = tuple[tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class TupleIndex:
    """A prefix (y_2,...,y_{k-1}) of p-vector digits, i.e. a member of D_k."""

    k: int
    levels: tuple[tuple[int, ...], ...]

    @classmethod
    def from_digits(cls, d: FactorialDigits, k: int) -> "TupleIndex":
        if d.depth < k - 1:
            raise ValueError(f"prefix of depth {k - 1} needed, have {d.depth}")
        return cls(k, d.digits[: k - 2])


@dataclass(frozen=True)
class GridSpec:
    """Equally spaced cell centers covering [-L, L] to radius < 1/k.

    Points are rationals (denominator 2^40); ``density`` is the certified
    covering radius including the rounding slack.
    """

    k: int
    L: float
    count: int
    points: tuple[Fraction, ...]
    density: float


@dataclass(frozen=True)
class DenseMapIndex:
    k: int
    j: int

    def to_json(self) -> dict:
        return {"k": self.k, "j": str(self.j)}


@dataclass(frozen=True)
class SequencePosition:
    """Position N in the sequence (r_n): exact, or a log-scale interval."""

    exact: Optional[int] = None
    ln_lo: Optional[mpmath.mpf] = None
    ln_hi: Optional[mpmath.mpf] = None

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def to_json(self):
        if self.is_exact:
            return str(self.exact)
        return {"lo_ln": _mp_to_json(self.ln_lo), "hi_ln": _mp_to_json(self.ln_hi)}


def _mp_to_json(x):
    """A float when it fits, else nested {sign, ln} pairs.

    Decimal rendering of doubly-huge magnitudes is infeasible (the exponent
    alone can have thousands of digits), so values beyond the float range are
    expressed through their logarithm, recursively.
    """
    try:
        f = float(x)
        if math.isfinite(f):
            return f
    except (OverflowError, ValueError):
        pass
    sign = 1 if x > 0 else -1
    return {"sign": sign, "ln": _mp_to_json(mpmath.log(abs(x)))}


@lru_cache(maxsize=None)
def grid_points(k: int) -> GridSpec:
    """The 1/k-dense grid for level k: G = floor(k L) + 1 cell centers.

    Centers of G equal subintervals of [-L, L] cover the interval to radius
    L/G < 1/k; G is bumped if the rounding slack 2^-39 would eat the margin.
    """
    if k < 3:
        raise ValueError("k must be >= 3")
    L = loglog(k)
    G = math.floor(k * L) + 1
    if 1.0 / k - L / G < GRID_ROUND_SLACK:
        G += 1
    points = tuple(
        Fraction(round((-L + (2 * i + 1) * L / G) * GRID_DENOM), GRID_DENOM)
        for i in range(G)
    )
    density = L / G + 0.5 / GRID_DENOM
    return GridSpec(k=k, L=L, count=G, points=points, density=density)


class DenseMapFamily:
    """The sequence (r_n) for fixed digit dimension p and matrix height q."""

    def __init__(self, p: int, q: int):
        if p < 1 or q < 1:
            raise ValueError("p and q must be positive")
        self.p = p
        self.q = q
        self._m_cache: dict[int, object] = {}
        self._exact_base: dict[int, int] = {3: 2}  # 2 + sum_{3<=l<k} m_l
        self._exact_base_limit: Optional[int] = None

    # -- D_k -------------------------------------------------------------

    def D_size(self, k: int) -> int:
        return math.factorial(k - 1) ** self.p

    def enumerate_D(self, k: int) -> Iterator[TupleIndex]:
        """All of D_k in lexicographic order (earlier levels most significant)."""
        if k < 3:
            raise ValueError("k must be >= 3")
        if self.D_size(k) > EXACT_TUPLE_CAP:
            raise BoundedModeRequired(f"|D_{k}| = {self.D_size(k)} exceeds cap")

        def rec(n: int, acc: list[tuple[int, ...]]):
            if n == k:
                yield TupleIndex(k, tuple(acc))
                return
            for combo in _vectors(n, self.p):
                acc.append(combo)
                yield from rec(n + 1, acc)
                acc.pop()

        yield from rec(2, [])

    def tuple_rank(self, t: TupleIndex) -> int:
        """Lexicographic rank of a prefix within D_k (mixed radix)."""
        rank = 0
        for n, level in enumerate(t.levels, start=2):
            for c in level:
                rank = rank * n + c
        return rank

    def tuple_unrank(self, k: int, rank: int) -> TupleIndex:
        rev = []
        for n in range(k - 1, 1, -1):
            level = []
            for _ in range(self.p):
                rank, c = divmod(rank, n)
                level.append(c)
            rev.append(tuple(reversed(level)))
        return TupleIndex(k, tuple(reversed(rev)))

    # -- counts ----------------------------------------------------------

    def m_count(self, k: int):
        """Number of maps at level k: G_k^(pq (k-1)!^p); exact int or log scale."""
        if k in self._m_cache:
            return self._m_cache[k]
        g = grid_points(k)
        exponent = self.p * self.q * self.D_size(k)
        if g.count == 1:
            result = 1
        elif exponent > 4 * DIGIT_CAP or exponent * math.log10(g.count) > DIGIT_CAP:
            result = LogMagnitude(1, self.ln_m(k))
        else:
            result = g.count**exponent
        self._m_cache[k] = result
        return result

    def ln_m(self, k: int) -> mpmath.mpf:
        g = grid_points(k)
        if g.count == 1:
            return mpmath.mpf(0)
        return mpmath.mpf(self.p * self.q * self.D_size(k)) * mpmath.log(g.count)

    # -- evaluation ------------------------------------------------------

    def eval_map(self, idx: DenseMapIndex, t: TupleIndex) -> FractionMatrix:
        """Value of map (k, j) at one prefix, decoding a single mixed-radix digit."""
        if t.k != idx.k:
            raise ValueError("tuple level does not match map level")
        g = grid_points(idx.k)
        pq = self.p * self.q
        base = g.count**pq
        if idx.j < 1:
            raise ValueError("j out of range")
        if self.D_size(idx.k) <= EXACT_TUPLE_CAP:
            m = self.m_count(idx.k)
            if not isinstance(m, LogMagnitude) and idx.j > m:
                raise ValueError("j out of range")
        rho = self.tuple_rank(t)
        digit = (idx.j - 1) // base**rho % base
        entries = []
        for i in range(pq):
            entries.append(digit // g.count ** (pq - 1 - i) % g.count)
        return tuple(
            tuple(g.points[entries[a * self.p + b]] for b in range(self.p))
            for a in range(self.q)
        )

    def nearest_map_index(
        self, k: int, target: Callable[[TupleIndex], Sequence[Sequence[float]]]
    ) -> "NearestMap":
        """The map whose value at every prefix is the grid matrix nearest the
        target there (ties toward the smaller grid value).

        Targets are clamped entrywise to [-L, L] before rounding; the reported
        sup-distance is against the unclamped target.
        """
        if self.D_size(k) > EXACT_TUPLE_CAP:
            raise BoundedModeRequired(
                f"bounded mode: |D_{k}| = {self.D_size(k)}; index interval [1, m_k]"
            )
        g = grid_points(k)
        pq = self.p * self.q
        base = g.count**pq
        jm1 = 0
        worst = 0.0
        clamped = False
        for t in self.enumerate_D(k):
            M = target(t)
            digit = 0
            for a in range(self.q):
                for b in range(self.p):
                    x = float(M[a][b])
                    xc = min(max(x, -g.L), g.L)
                    clamped = clamped or (xc != x)
                    e = _nearest_index(g.points, xc)
                    worst = max(worst, abs(x - float(g.points[e])))
                    digit = digit * g.count + e  # row-major, big-endian
            jm1 += digit * base ** self.tuple_rank(t)
        return NearestMap(DenseMapIndex(k, jm1 + 1), worst, clamped)

    # -- sequence positions ------------------------------------------------

    def _block_base(self, k: int) -> Optional[int]:
        """2 + sum_{3 <= l < k} m_l, exact, or None past the digit cap."""
        if self._exact_base_limit is not None and k > self._exact_base_limit:
            return None
        kk = max(self._exact_base)
        while kk < k:
            m = self.m_count(kk)
            if isinstance(m, LogMagnitude):
                self._exact_base_limit = kk
                return None
            nxt = self._exact_base[kk] + m
            if nxt.bit_length() > DIGIT_CAP * 4:
                self._exact_base_limit = kk
                return None
            kk += 1
            self._exact_base[kk] = nxt
        return self._exact_base[k]

    def position_of(self, k: int, j) -> SequencePosition:
        """N = 2 + sum_{3 <= l < k} m_l + j under the block ordering."""
        base = self._block_base(k)
        if base is not None and isinstance(j, int):
            m = self.m_count(k)
            if not isinstance(m, LogMagnitude) and 1 <= j <= m:
                return SequencePosition(exact=base + j)
        return self.position_interval(k)

    def position_interval(self, k: int) -> SequencePosition:
        """Log-scale bounds on N valid for every j in [1, m_k]."""
        base = self._block_base(k)
        if base is not None:
            ln_lo = mpmath.log(mpmath.mpf(base + 1))
        else:
            ln_lo = self.ln_m(k - 1)  # N >= m_{k-1}
        ln_m_k = self.ln_m(k)
        if base is not None:
            ln_hi = _ln_add(mpmath.log(mpmath.mpf(base)), ln_m_k)
        else:
            ln_hi = mpmath.log(k) + ln_m_k  # sum_{l<=k} m_l + 2 <= k m_k
        return SequencePosition(
            ln_lo=ln_lo * (1 - mpmath.mpf(10) ** -25),
            ln_hi=ln_hi * (1 + mpmath.mpf(10) ** -25),
        )

    def block_of(self, N: int) -> DenseMapIndex:
        """Invert position_of for an exact N >= 3."""
        k = 3
        while True:
            base = self._block_base(k + 1)
            if base is None:
                raise BoundedModeRequired(
                    f"position {N} lies beyond the exact-mode horizon"
                )
            if N <= base:
                return DenseMapIndex(k, N - self._block_base(k))
            k += 1

    def r_eval(self, N: SequencePosition | int, prefix: FactorialDigits) -> FractionMatrix:
        """r_N at a digit prefix.  r_2 is the all-ones matrix; later positions
        decode to (k, j) and evaluate that map on the prefix truncated to D_k
        (extensions are constant in coordinates beyond k-1)."""
        if isinstance(N, SequencePosition):
            if not N.is_exact:
                raise BoundedModeRequired(
                    "bounded mode: evaluation undefined, bounds only"
                )
            N = N.exact
        if N < 2:
            raise ValueError("N must be >= 2")
        if N == 2:
            one = Fraction(1)
            return tuple(tuple(one for _ in range(self.p)) for _ in range(self.q))
        idx = self.block_of(N)
        return self.eval_map(idx, TupleIndex.from_digits(prefix, idx.k))


@dataclass(frozen=True)
class NearestMap:
    index: DenseMapIndex
    sup_distance: float
    clamped: bool


class BoundedModeRequired(RuntimeError):
    """Raised when an operation needs enumeration past the exact-mode caps."""


def _vectors(n: int, p: int) -> Iterator[tuple[int, ...]]:
    if p == 1:
        for c in range(n):
            yield (c,)
        return
    for c in range(n):
        for rest in _vectors(n, p - 1):
            yield (c,) + rest


def _nearest_index(points: Sequence[Fraction], x: float) -> int:
    best, best_d = 0, abs(x - float(points[0]))
    for i in range(1, len(points)):
        d = abs(x - float(points[i]))
        if d < best_d:  # strict: ties keep the smaller grid value
            best, best_d = i, d
    return best


def _ln_add(a: mpmath.mpf, b: mpmath.mpf) -> mpmath.mpf:
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + mpmath.log1p(mpmath.exp(lo - hi))
