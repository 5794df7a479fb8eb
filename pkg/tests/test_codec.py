import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from nullpack.codec import (
    FactorialDigits,
    agreement_depth,
    expand,
    tail_bound,
    value,
)


def test_expand_one():
    # 1 = sum (n-1)/n!  -- the canonical non-terminating representative
    d = expand([Fraction(1)], 6)
    assert d.digits == ((1,), (2,), (3,), (4,), (5,))


def test_expand_half():
    d = expand([Fraction(1, 2)], 5)
    assert d.digits == ((0,), (2,), (3,), (4,))


def test_expand_two_thirds():
    d = expand([Fraction(2, 3)], 5)
    # 2/3 = 1/2 + 1/3! with the 1/3! borrowed down into the tail
    assert d.digits == ((1,), (0,), (3,), (4,))


def test_value_partial_sums():
    d = expand([Fraction(1)], 5)
    # 1/2 + 2/6 + 3/24 + 4/120 = 119/120
    assert value(d, 6) == (Fraction(119, 120),)
    d = expand([Fraction(1, 2)], 5)
    assert value(d, 6) == (Fraction(59, 120),)


def test_reconstruction_leaves_positive_tail():
    rng = random.Random(1)
    for _ in range(200):
        q = rng.randrange(2, 10**4)
        a = Fraction(rng.randrange(1, q + 1), q)
        d = expand([a], 10)
        tail = a - value(d, 11)[0]
        assert 0 < tail <= Fraction(1, math.factorial(10))


def test_expand_rejects_out_of_range():
    with pytest.raises(ValueError):
        expand([Fraction(0)], 5)
    with pytest.raises(ValueError):
        expand([Fraction(3, 2)], 5)


def test_tail_identity_exact():
    # sum_{n=N}^{K} (n-1)/n! == 1/(N-1)! - 1/K!
    for N in range(2, 16):
        for K in range(N, 16):
            s = sum(Fraction(n - 1, math.factorial(n)) for n in range(N, K + 1))
            assert s == Fraction(1, math.factorial(N - 1)) - Fraction(1, math.factorial(K))


def test_tail_bound_values():
    assert tail_bound(2) == 1
    assert tail_bound(5) == Fraction(1, 24)


def test_text_round_trip():
    d = expand([Fraction(1, 2), Fraction(2, 3)], 6)
    assert FactorialDigits.from_text(d.to_text()) == d


def test_text_format_example():
    assert expand([Fraction(1, 2)], 5).to_text() == "p=1;2:0;3:2;4:3;5:4"


def test_digit_range_enforced():
    with pytest.raises(ValueError):
        FactorialDigits(1, 3, ((1,), (3,)))  # level-3 digit must be <= 2


def test_truncate():
    d = expand([Fraction(1)], 8)
    t = d.truncate(4)
    assert t.depth == 4 and t.digits == d.digits[:3]
    with pytest.raises(ValueError):
        t.truncate(9)


def test_agreement_depth():
    d1 = FactorialDigits(1, 5, ((1,), (2,), (0,), (4,)))
    d2 = FactorialDigits(1, 5, ((1,), (2,), (1,), (4,)))
    assert agreement_depth(d1, d2) == 3
    assert agreement_depth(d1, d1) == 5
    d3 = FactorialDigits(1, 5, ((0,), (2,), (0,), (4,)))
    assert agreement_depth(d1, d3) == 1


@given(
    st.fractions(
        min_value=Fraction(1, 10**6), max_value=1, max_denominator=10**6
    ).filter(lambda x: x > 0),
    st.integers(min_value=3, max_value=12),
)
def test_round_trip_property(a, depth):
    d = expand([a], depth)
    tail = a - value(d, depth + 1)[0]
    assert 0 < tail <= Fraction(1, math.factorial(depth))


@given(st.integers(min_value=2, max_value=40))
def test_tail_bound_matches_series(N):
    # partial sums approach 1/(N-1)! from below
    K = N + 30
    s = sum(Fraction(n - 1, math.factorial(n)) for n in range(N, K + 1))
    assert s < tail_bound(N)
    assert tail_bound(N) - s == Fraction(1, math.factorial(K))
