import math
import random
from fractions import Fraction

import mpmath
import pytest

from nullpack.codec import FactorialDigits, expand
from nullpack.dense import (
    BoundedModeRequired,
    DenseMapFamily,
    DenseMapIndex,
    TupleIndex,
    grid_points,
)
from nullpack.numeric import LogMagnitude


def test_grid_k3_is_single_zero_point():
    g = grid_points(3)
    assert g.count == 1
    assert g.points == (Fraction(0),)


def test_grid_k4():
    g = grid_points(4)
    assert g.count == 2
    assert float(g.points[0]) == pytest.approx(-0.16331712998908188, abs=1e-15)
    assert float(g.points[1]) == pytest.approx(0.16331712998908188, abs=1e-15)


def test_grid_k5():
    assert grid_points(5).count == 3


def test_grid_density_certified():
    # every x in [-L, L] is within `density` of a grid point, and density < 1/k
    for k in range(3, 60):
        g = grid_points(k)
        assert g.density < 1.0 / k
        pts = [float(x) for x in g.points]
        rng = random.Random(k)
        for _ in range(50):
            x = rng.uniform(-g.L, g.L)
            assert min(abs(x - p) for p in pts) <= g.density


def test_grid_rejects_small_k():
    with pytest.raises(ValueError):
        grid_points(2)


def test_D_size():
    fam = DenseMapFamily(1, 1)
    assert fam.D_size(4) == 6
    assert DenseMapFamily(2, 1).D_size(4) == 36


def test_enumerate_D_lexicographic():
    fam = DenseMapFamily(1, 1)
    tuples = list(fam.enumerate_D(4))
    assert len(tuples) == 6
    assert tuples[0].levels == ((0,), (0,))
    assert tuples[-1].levels == ((1,), (2,))
    # ranks agree with enumeration order
    for i, t in enumerate(tuples):
        assert fam.tuple_rank(t) == i
        assert fam.tuple_unrank(4, i) == t


def test_rank_unrank_round_trip_p2():
    fam = DenseMapFamily(2, 1)
    for i, t in enumerate(fam.enumerate_D(4)):
        assert fam.tuple_rank(t) == i
        assert fam.tuple_unrank(4, i) == t


def test_m_counts():
    fam = DenseMapFamily(1, 1)
    assert fam.m_count(3) == 1
    assert fam.m_count(4) == 64
    assert fam.m_count(5) == 3**24 == 282429536481


def test_m_count_log_scale_past_cap():
    fam = DenseMapFamily(1, 1)
    m = fam.m_count(30)  # 29!^1 prefixes, G^(29!) maps: log scale only
    assert isinstance(m, LogMagnitude)
    g = grid_points(30)
    assert float(m.ln_abs) == pytest.approx(
        math.factorial(29) * math.log(g.count), rel=1e-12
    )


def test_eval_map_digit_decoding_matches_materialization():
    # independent oracle: rebuild j from the per-prefix grid choices
    fam = DenseMapFamily(1, 1)
    g = grid_points(4)
    base = g.count  # pq = 1
    for j in (1, 2, 17, 64):
        idx = DenseMapIndex(4, j)
        entries = []
        for t in fam.enumerate_D(4):
            M = fam.eval_map(idx, t)
            entries.append(g.points.index(M[0][0]))
        rebuilt = sum(e * base**rho for rho, e in enumerate(entries)) + 1
        assert rebuilt == j


def test_eval_map_rejects_bad_j():
    fam = DenseMapFamily(1, 1)
    t = fam.tuple_unrank(4, 0)
    with pytest.raises(ValueError):
        fam.eval_map(DenseMapIndex(4, 0), t)
    with pytest.raises(ValueError):
        fam.eval_map(DenseMapIndex(4, 65), t)


def test_nearest_map_round_trip():
    fam = DenseMapFamily(1, 1)
    for j in (1, 23, 64):
        idx = DenseMapIndex(4, j)
        target = lambda t: [[float(fam.eval_map(idx, t)[0][0])]]
        near = fam.nearest_map_index(4, target)
        assert near.index == idx
        assert near.sup_distance == 0.0
        assert not near.clamped


def test_nearest_map_density():
    # random bounded targets land strictly within 1/k
    fam = DenseMapFamily(1, 1)
    for k in (3, 4, 5):
        L = grid_points(k).L
        rng = random.Random(k)
        values = {
            fam.tuple_rank(t): rng.uniform(-L, L) for t in fam.enumerate_D(k)
        }
        near = fam.nearest_map_index(k, lambda t: [[values[fam.tuple_rank(t)]]])
        assert near.sup_distance < 1.0 / k


def test_nearest_map_clamps_out_of_range():
    fam = DenseMapFamily(1, 1)
    near = fam.nearest_map_index(4, lambda t: [[100.0]])
    assert near.clamped
    g = grid_points(4)
    assert near.sup_distance == pytest.approx(100.0 - float(g.points[-1]))


def test_positions():
    fam = DenseMapFamily(1, 1)
    assert fam.position_of(3, 1).exact == 3
    assert fam.position_of(4, 1).exact == 4
    assert fam.position_of(4, 64).exact == 67
    assert fam.position_of(5, 1).exact == 68


def test_block_of_inverts_position():
    fam = DenseMapFamily(1, 1)
    for k in (3, 4, 5):
        for j in (1, 2, 5):
            if k == 3 and j > 1:
                continue
            N = fam.position_of(k, j).exact
            assert fam.block_of(N) == DenseMapIndex(k, j)


def test_position_interval_brackets_block():
    fam = DenseMapFamily(1, 1)
    iv = fam.position_interval(4)
    assert not iv.is_exact
    assert float(mpmath.exp(iv.ln_lo)) <= 4.0
    assert float(mpmath.exp(iv.ln_hi)) >= 67.0


def test_r2_is_all_ones():
    fam = DenseMapFamily(2, 3)
    y = expand([Fraction(1, 2), Fraction(1, 3)], 6)
    r = fam.r_eval(2, y)
    assert r == tuple(tuple(Fraction(1) for _ in range(2)) for _ in range(3))


def test_r3_is_zero():
    fam = DenseMapFamily(1, 1)
    y = expand([Fraction(1, 2)], 6)
    assert fam.r_eval(3, y) == ((Fraction(0),),)


def test_r_eval_constant_in_deep_coordinates():
    # the level-k map only reads the prefix through k-1
    fam = DenseMapFamily(1, 1)
    base = ((1,), (2,), (3,), (4,), (5,))
    y1 = FactorialDigits(1, 6, base)
    y2 = FactorialDigits(1, 6, base[:2] + ((0,), (0,), (0,)))
    for N in (4, 20, 67):  # all level-4 positions
        assert fam.r_eval(N, y1) == fam.r_eval(N, y2)


def test_bounded_mode_raised():
    fam = DenseMapFamily(1, 1)
    with pytest.raises(BoundedModeRequired):
        fam.nearest_map_index(12, lambda t: [[0.0]])
    with pytest.raises(BoundedModeRequired):
        list(fam.enumerate_D(12))


def test_tuple_index_from_digits():
    y = expand([Fraction(1, 2)], 8)
    t = TupleIndex.from_digits(y, 5)
    assert t.levels == y.digits[:3]
    with pytest.raises(ValueError):
        TupleIndex.from_digits(y, 11)
