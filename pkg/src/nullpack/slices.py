"""Slice covering verifier.

Given a family and a tolerance eps, choose the level k (five admissibility
conditions), pick the matrix-map index j nearest to -Jomega^{-1} Jy over all
prefixes and its sequence position N, evaluate the five-term decomposition of
f(y, psi(y), t) with rigorous tail slack, check each term against its
analytic bound, and assemble the covering certificate: the slice image lies
in at most (N-1)!^p balls of radius C' eps / (N-1)!.

Past the exact-mode caps only log-scale bounds are produced ("bounded mode");
those logs are mpmath floats so that doubly-huge magnitudes survive.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Optional

import mpmath
import numpy as np

from .codec import FactorialDigits, value as digit_value
from .dense import (
    EXACT_TUPLE_CAP,
    DenseMapFamily,
    DenseMapIndex,
    SequencePosition,
    TupleIndex,
    _mp_to_json,
    grid_points,
)
from .family import FamilySpec, sup_norm, target_matrix
from .numeric import loglog
from .psi import psi_tail_constant, psi_tail_radius, psi_truncated

K_SCAN_LIMIT = 10**5
K_HARD_LIMIT = 10**18


class NoAdmissibleLevel(RuntimeError):
    def __init__(self, binding: str):
        super().__init__(f"no admissible k below {K_HARD_LIMIT}; binding condition: {binding}")
        self.binding = binding


def _ln_fact_lower(x: mpmath.mpf) -> mpmath.mpf:
    """Valid lower bound on ln(x!) for huge x given as mpf."""
    if x < 2:
        return mpmath.mpf(0)
    return x * (mpmath.log(x) - 1)


def _ln_fact_upper(x: mpmath.mpf) -> mpmath.mpf:
    if x < 2:
        return mpmath.mpf(1)
    return x * mpmath.log(x)


def _conditions(spec: FamilySpec, eps: float, k: int, C: float) -> dict[str, bool]:
    llk = loglog(k)
    ln_fact = math.lgamma(k)  # ln((k-1)!)
    rad_y = math.exp(-ln_fact) if ln_fact < 700 else 0.0
    rad_om = math.exp(math.log(C * llk) - ln_fact) if ln_fact < 700 else 0.0
    rad = max(rad_y, rad_om)
    b = spec.bounds
    return {
        "1_jacobian_modulus": b.modulus_J_y(rad) < eps,
        "2_omega_lipschitz": b.lipschitz_J_omega * rad < eps / (k * math.log(k)),
        "3_norm_bounds": b.sup_J_y < llk and b.sup_pinv_J_y < llk,
        "5_loglog_squared": llk * llk / k < eps,
    }


def select_k(spec: FamilySpec, eps: float, C: Optional[float] = None) -> int:
    """Smallest admissible k >= 3.

    Linear scan up to K_SCAN_LIMIT; beyond that every condition is monotone in
    k, so bisection on [K_SCAN_LIMIT, K_HARD_LIMIT] finds the threshold.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if C is None:
        C = psi_tail_constant()

    def ok(k: int) -> bool:
        return all(_conditions(spec, eps, k, C).values())

    for k in range(3, K_SCAN_LIMIT + 1):
        if ok(k):
            return k
    if not ok(K_HARD_LIMIT):
        conds = _conditions(spec, eps, K_HARD_LIMIT, C)
        binding = ", ".join(name for name, v in conds.items() if not v)
        raise NoAdmissibleLevel(binding)
    lo, hi = K_SCAN_LIMIT, K_HARD_LIMIT  # ok(lo) is False, ok(hi) is True
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass
class ChosenIndex:
    j: Optional[DenseMapIndex]  # None in bounded mode
    N: SequencePosition
    worst_distance: Optional[float]
    bounded: bool

    def j_json(self):
        if self.j is not None:
            return self.j.to_json()
        return {"interval": [1, "m_k"]}


def choose_index(
    spec: FamilySpec, family: DenseMapFamily, k: int, t, C: Optional[float] = None
) -> ChosenIndex:
    """j nearest to the target map over all of D_k, and its position N."""
    if family.D_size(k) > EXACT_TUPLE_CAP:
        return ChosenIndex(
            j=None, N=family.position_interval(k), worst_distance=None, bounded=True
        )

    def target(tup: TupleIndex):
        digits = FactorialDigits(family.p, k - 1, tup.levels)
        return target_matrix(spec, family, digits, k, t)

    nearest = family.nearest_map_index(k, target)
    return ChosenIndex(
        j=nearest.index,
        N=family.position_of(k, nearest.index.j),
        worst_distance=nearest.sup_distance,
        bounded=False,
    )


@dataclass
class Term:
    value: np.ndarray
    slack: float

    @property
    def magnitude(self) -> float:
        return sup_norm(self.value)


@dataclass
class Decomposition:
    terms: dict[str, Term]

    def total(self) -> np.ndarray:
        return sum(t.value for t in self.terms.values())


def decompose(
    spec: FamilySpec,
    family: DenseMapFamily,
    y: FactorialDigits,
    t,
    k: int,
    N: int,
    T: int,
) -> Decomposition:
    """The five-term split of f(y^(T), psi^(T)(y), t).

    By construction the five values sum exactly (up to float arithmetic) to
    f(y^(T), psi^(T)(y), t); slacks bound the gap to the untruncated terms.
    """
    if T < N + 1:
        raise ValueError("T must exceed N")
    if y.depth < T - 1:
        raise ValueError(f"digits of depth >= {T - 1} required")
    t = np.asarray(t, dtype=float)
    p, q = family.p, family.q

    yT = np.array([float(v) for v in digit_value(y, T)])
    yN = np.array([float(v) for v in digit_value(y, N)])
    yk = np.array([float(v) for v in digit_value(y, k)])
    psiT = psi_truncated(family, y, T)
    psiN = psi_truncated(family, y, N)
    psik = psi_truncated(family, y, k)
    vT = np.array(psiT.value_floats())
    vN = np.array(psiN.value_floats())
    vk = np.array(psik.value_floats())

    Jy_k = np.asarray(spec.J_y(yk, vk, t), dtype=float)
    Jw_k = np.asarray(spec.J_omega(yk, vk, t), dtype=float)

    b = spec.bounds
    dy_T = 1.0 / math.factorial(T - 1)  # |y - y^(T)| bound
    dpsi_T = psiT.tail_radius
    trunc_slack = 2 * (b.sup_J_y * p * dy_T + b.sup_J_omega * q * dpsi_T)

    f_TT = np.asarray(spec.f(yT, vT, t), dtype=float)
    f_NT = np.asarray(spec.f(yN, vT, t), dtype=float)
    f_NN = np.asarray(spec.f(yN, vN, t), dtype=float)

    term_I = f_TT - f_NT - Jy_k @ (yT - yN)
    term_II = f_NT - f_NN - Jw_k @ (vT - vN)

    def correction(n: int) -> np.ndarray:
        r = np.array([[float(c) for c in row] for row in family.r_eval(n, y)])
        yn = np.array(y.level(n), dtype=float)
        return (Jy_k + Jw_k @ r) @ yn / math.factorial(n)

    term_III = correction(N)
    term_IV = np.zeros(spec.codim)
    for n in range(N + 1, T):
        term_IV = term_IV + correction(n)
    # tail of IV omitted beyond T
    iv_tail = (
        p * b.sup_J_y * float(1.0 / math.factorial(T - 1))
        + p * q * b.sup_J_omega * psi_tail_radius(T, p, q)
    )
    term_V = f_NN

    return Decomposition(
        terms={
            "I": Term(term_I, trunc_slack),
            "II": Term(term_II, trunc_slack),
            "III": Term(term_III, 0.0),
            "IV": Term(term_IV, iv_tail),
            "V": Term(term_V, trunc_slack),
        }
    )


@dataclass
class TermBounds:
    """Upper bounds on |I|..|IV|; ln_* are mpf and always valid, the float
    fields may underflow to 0 only when the true bound does too."""

    ln_I: mpmath.mpf
    ln_II: mpmath.mpf
    ln_III: mpmath.mpf
    ln_IV: mpmath.mpf
    C: float

    def floats(self) -> dict[str, float]:
        out = {}
        for name in ("I", "II", "III", "IV"):
            ln = getattr(self, f"ln_{name}")
            try:
                out[name] = float(mpmath.exp(ln))
            except OverflowError:
                out[name] = math.inf
        return out

    def ln_sum(self) -> mpmath.mpf:
        lns = [self.ln_I, self.ln_II, self.ln_III, self.ln_IV]
        hi = max(lns)
        return hi + mpmath.log(sum(mpmath.exp(x - hi) for x in lns))


def term_bounds(
    spec: FamilySpec, k: int, N: SequencePosition, eps: float, C: Optional[float] = None
) -> TermBounds:
    """Analytic per-term bounds.

    B_I  = eps / (N-1)!
    B_II = C eps loglog(N) / ((k ln k) (N-1)!)
    B_III = (1/k) ||J_omega|| (N-1) / N!
    B_IV = (p ||J_y|| + p q ||J_omega|| C loglog(N)) / N!

    With an N-interval, each bound is made worst-case (N at the low end; the
    loglog factors at the high end).
    """
    if C is None:
        C = psi_tail_constant()
    b = spec.bounds
    p, q = spec.p, spec.q
    if N.is_exact:
        n = N.exact
        lgN = mpmath.mpf(math.lgamma(n))  # ln((N-1)!)
        lgN1 = lgN + mpmath.log(n)  # ln(N!)
        lll = loglog(n)
        ln_I = mpmath.log(eps) - lgN
        ln_II = mpmath.log(C * eps * lll / (k * math.log(k))) - lgN
        ln_III = mpmath.log(b.sup_J_omega * (n - 1) / k) - lgN1
        ln_IV = mpmath.log(p * b.sup_J_y + p * q * b.sup_J_omega * C * lll) - lgN1
        return TermBounds(ln_I, ln_II, ln_III, ln_IV, C)

    N_lo = mpmath.exp(N.ln_lo)
    lg_lo = _ln_fact_lower(N_lo - 1)  # <= ln((N-1)!) for any N in interval
    lll_hi = mpmath.log(N.ln_hi)  # >= loglog(N)
    ln_I = mpmath.log(eps) - lg_lo
    ln_II = mpmath.log(C * eps / (k * math.log(k))) + lll_hi - lg_lo
    # (N-1)/N! <= 1/(N-2)!
    ln_III = mpmath.log(b.sup_J_omega / k) - _ln_fact_lower(N_lo - 2)
    ln_IV = (
        mpmath.log(p * b.sup_J_y + p * q * b.sup_J_omega * C) + lll_hi
        - _ln_fact_lower(N_lo)
    )
    return TermBounds(ln_I, ln_II, ln_III, ln_IV, C)


@dataclass
class SliceCertificate:
    family: dict
    eps: float
    t: list
    k: int
    j: object
    N: object
    C: float
    c_prime: float
    factorial_exponent: int  # n - d - p
    term_bound_logs: dict
    ball_radius_log: object
    cover_count_log: object
    measure_bound_log: object
    worst_target_distance: Optional[float]
    bounded_mode: bool
    deviations: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "eps": self.eps,
            "t": self.t,
            "k": self.k,
            "j": self.j,
            "N": self.N,
            "C": self.C,
            "c_prime": self.c_prime,
            "factorial_exponent": self.factorial_exponent,
            "term_bound_logs": self.term_bound_logs,
            "ball_radius_log": self.ball_radius_log,
            "cover_count_log": self.cover_count_log,
            "measure_bound_log": self.measure_bound_log,
            "worst_target_distance": self.worst_target_distance,
            "bounded_mode": self.bounded_mode,
            "deviations": self.deviations,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def covering_certificate(
    spec: FamilySpec,
    family: Optional[DenseMapFamily],
    eps: float,
    t,
    C: Optional[float] = None,
) -> SliceCertificate:
    """Assemble the slice covering certificate at tolerance eps.

    measure bound = (N-1)!^p * (ball_radius)^(n-d)
                  = (C' eps)^(n-d) / (N-1)!^(n-d-p)   with C' recorded.
    """
    if C is None:
        C = psi_tail_constant()
    if family is None:
        family = DenseMapFamily(spec.p, spec.q)
    t = list(np.atleast_1d(np.asarray(t, dtype=float)))
    deviations = []
    k = select_k(spec, eps, C)
    llk = loglog(k)
    if spec.bounds.sup_J_omega >= llk:
        deviations.append(
            f"||J_omega|| = {spec.bounds.sup_J_omega} >= loglog({k}) = {llk:.4f}; "
            "term III bound uses the numeric norm directly"
        )

    chosen = choose_index(spec, family, k, t, C)
    if chosen.bounded:
        deviations.append("bounded mode: j and N reported as intervals, bounds only")
    bounds = term_bounds(spec, k, chosen.N, eps, C)

    ln_ball = bounds.ln_sum()
    codim, p = spec.codim, spec.p
    if chosen.N.is_exact:
        n = chosen.N.exact
        lgN = mpmath.mpf(math.lgamma(n))
        cover_log = p * lgN
        measure_log = p * lgN + codim * ln_ball
        c_prime = float(mpmath.exp(ln_ball + lgN - mpmath.log(eps)))
        # the two equivalent exponent arrangements must agree
        alt = codim * (math.log(c_prime) + math.log(eps)) - (codim - p) * lgN
        assert abs(float(measure_log - alt)) <= 1e-6 * max(1.0, abs(float(measure_log)))
    else:
        N_lo = mpmath.exp(chosen.N.ln_lo)
        N_hi_ln = chosen.N.ln_hi
        cover_log = p * _ln_fact_upper(mpmath.exp(N_hi_ln))
        # C' termwise, worst case over the interval
        lll_hi = mpmath.log(N_hi_ln)
        c_prime = float(
            1
            + C * lll_hi / (k * math.log(k))
            + spec.bounds.sup_J_omega / (k * eps)
            + mpmath.exp(
                mpmath.log(
                    (p * spec.bounds.sup_J_y
                     + p * spec.q * spec.bounds.sup_J_omega * C) * float(lll_hi)
                    / eps
                )
                - chosen.N.ln_lo
            )
        )
        measure_log = codim * mpmath.log(c_prime * eps) - (codim - p) * _ln_fact_lower(
            N_lo - 1
        )

    return SliceCertificate(
        family=spec.describe(),
        eps=eps,
        t=[float(x) for x in t],
        k=k,
        j=chosen.j_json(),
        N=chosen.N.to_json(),
        C=C,
        c_prime=c_prime,
        factorial_exponent=codim - p,
        term_bound_logs={
            name: _mp_to_json(getattr(bounds, f"ln_{name}"))
            for name in ("I", "II", "III", "IV")
        },
        ball_radius_log=_mp_to_json(ln_ball),
        cover_count_log=_mp_to_json(cover_log),
        measure_bound_log=_mp_to_json(measure_log),
        worst_target_distance=chosen.worst_distance,
        bounded_mode=chosen.bounded,
        deviations=deviations,
    )


def verify_term_domination(
    spec: FamilySpec,
    family: DenseMapFamily,
    k: int,
    chosen: ChosenIndex,
    eps: float,
    t,
    suffixes: int = 10,
    seed: int = 0,
    C: Optional[float] = None,
) -> dict[str, float]:
    """Worst observed |term| / B_term over all D_k prefixes crossed with
    seeded random deep suffixes.  All ratios <= 1 means the certificate's
    per-term bounds dominate."""
    if chosen.bounded or chosen.N is None or not chosen.N.is_exact:
        raise ValueError("term verification requires exact mode")
    N = chosen.N.exact
    T = N + 3
    bounds = term_bounds(spec, k, chosen.N, eps, C).floats()
    rng = random.Random(seed)
    worst = {name: 0.0 for name in ("I", "II", "III", "IV")}
    for tup in family.enumerate_D(k):
        for _ in range(suffixes):
            levels = list(tup.levels)
            for n in range(k, T):
                levels.append(tuple(rng.randrange(n) for _ in range(family.p)))
            y = FactorialDigits(family.p, T - 1, tuple(levels))
            dec = decompose(spec, family, y, t, k, N, T)
            for name in worst:
                ratio = dec.terms[name].magnitude / bounds[name]
                worst[name] = max(worst[name], ratio)
    return worst
