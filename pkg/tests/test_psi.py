import math
import random
from fractions import Fraction

import pytest

from nullpack.codec import FactorialDigits, expand
from nullpack.dense import DenseMapFamily
from nullpack.numeric import loglog
from nullpack.psi import (
    periodize,
    psi_bound,
    psi_tail_constant,
    psi_tail_radius,
    psi_truncated,
)


def test_truncation_at_one():
    fam = DenseMapFamily(1, 1)
    y = expand([Fraction(1)], 6)
    tr = psi_truncated(fam, y, 4)
    assert tr.value == (Fraction(1, 2),)  # n=2 all-ones term; n=3 map is zero
    assert tr.tail_radius == pytest.approx(0.0617, abs=0.002)


def test_truncation_needs_depth():
    fam = DenseMapFamily(1, 1)
    y = expand([Fraction(1, 2)], 4)
    with pytest.raises(ValueError):
        psi_truncated(fam, y, 6)


def test_tail_radius_dominates_series():
    # direct high-precision partial sums stay below the certified radius
    for N in (4, 6, 10):
        # summed while n! fits a float; the dropped tail is positive
        direct = sum(
            1 * loglog(n) * (n - 1) / math.factorial(n) for n in range(max(N, 3), 160)
        )
        assert direct <= psi_tail_radius(N, 1, 1)
        assert psi_tail_radius(N, 1, 1) <= 4 * direct  # not wildly loose


def test_tail_radius_scales_with_p():
    assert psi_tail_radius(5, 3, 1) == pytest.approx(3 * psi_tail_radius(5, 1, 1))


def test_tail_radius_deep_underflow_guard():
    r = psi_tail_radius(200, 1, 1)
    assert 0 < r < 1e-100


def test_certified_constant():
    assert psi_tail_constant() == 4.0


def test_agreement_lemma():
    # expansions agreeing to depth N differ by at most C loglog(N)/N! plus
    # the truncation slack of both sides
    fam = DenseMapFamily(1, 1)
    C = psi_tail_constant()
    T = 14
    rng = random.Random(5)
    for _ in range(100):
        N = rng.randrange(4, 13)
        shared = [(rng.randrange(n),) for n in range(2, N + 1)]
        tail1 = [(rng.randrange(n),) for n in range(N + 1, T)]
        tail2 = [(rng.randrange(n),) for n in range(N + 1, T)]
        y1 = FactorialDigits(1, T - 1, tuple(shared + tail1))
        y2 = FactorialDigits(1, T - 1, tuple(shared + tail2))
        t1 = psi_truncated(fam, y1, T)
        t2 = psi_truncated(fam, y2, T)
        gap = abs(float(t1.value[0] - t2.value[0]))
        slack = t1.tail_radius + t2.tail_radius
        assert gap <= C * loglog(N) / math.factorial(N) + slack


def test_periodize():
    assert periodize([Fraction(5, 2)]) == (Fraction(1, 2),)
    assert periodize([Fraction(3)]) == (Fraction(1),)
    assert periodize([Fraction(-1, 4)]) == (Fraction(3, 4),)
    assert periodize([0.25])[0] == pytest.approx(0.25)
    assert periodize([-0.25])[0] == pytest.approx(0.75)


def test_psi_bound():
    b = psi_bound(1, 1)
    assert b <= 0.57
    # and it really bounds sampled truncations
    fam = DenseMapFamily(1, 1)
    rng = random.Random(9)
    for _ in range(50):
        levels = tuple((rng.randrange(n),) for n in range(2, 12))
        tr = psi_truncated(fam, FactorialDigits(1, 11, levels), 12)
        assert abs(float(tr.value[0])) + tr.tail_radius <= b
