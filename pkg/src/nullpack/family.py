"""Surface families f : R^p x R^q x R^d -> R^(n-d) with Jacobian data.

A family carries user-declared analytic bounds (sup norms, a Lipschitz
constant for the omega-Jacobian, a modulus of continuity for the y-Jacobian);
``validate`` spot-checks them by sampling but cannot certify them.  All norms
are the largest absolute entry.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import psi as psi_mod

Evaluator = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]

FD_STEP = 1e-6
FD_RTOL = 1e-4
RANK_TOL = 1e-9


def sup_norm(M) -> float:
    return float(np.max(np.abs(np.asarray(M, dtype=float))))


@dataclass(frozen=True)
class FamilyBounds:
    sup_J_y: float
    sup_J_omega: float
    lipschitz_J_omega: float
    sup_pinv_J_y: float  # sup norm of Jomega^{-1} J_y
    modulus_J_y: Callable[[float], float]  # radius -> sup Jacobian variation


@dataclass(frozen=True)
class FamilySpec:
    name: str
    n: int
    d: int
    p: int
    q: int
    f: Evaluator
    J_y: Evaluator
    J_omega: Evaluator
    bounds: FamilyBounds
    t_box: tuple[tuple[float, float], ...]
    params: dict = field(default_factory=dict)
    omega_radius: Optional[float] = None

    @property
    def codim(self) -> int:
        return self.n - self.d

    def omega_ball_radius(self) -> float:
        if self.omega_radius is not None:
            return self.omega_radius
        return psi_mod.psi_bound(self.p, self.q)

    def t_volume(self) -> float:
        v = 1.0
        for lo, hi in self.t_box:
            v *= hi - lo
        return v

    def describe(self) -> dict:
        return {
            "name": self.name,
            "dims": {"n": self.n, "d": self.d, "p": self.p, "q": self.q},
            "params": self.params,
            "t_box": [list(b) for b in self.t_box],
        }


@dataclass
class ValidationIssue:
    kind: str
    message: str
    point: Optional[tuple] = None


@dataclass
class ValidationReport:
    ok: bool
    issues: list[ValidationIssue]

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "issues": [
                {"kind": i.kind, "message": i.message, "point": i.point}
                for i in self.issues
            ],
        }


def right_inverse(M: np.ndarray) -> np.ndarray:
    """Minimal-norm right inverse M^T (M M^T)^{-1} of a full-row-rank matrix."""
    M = np.asarray(M, dtype=float)
    gram = M @ M.T
    sv = np.linalg.svd(gram, compute_uv=False)
    if sv[-1] <= RANK_TOL**2 * max(1.0, sv[0]):
        raise ValueError("matrix is rank deficient; no right inverse")
    return M.T @ np.linalg.inv(gram)


def _grid(lo: float, hi: float, count: int) -> np.ndarray:
    if hi == lo:
        return np.array([lo])
    return np.linspace(lo, hi, count)


def _domain_grid(spec: FamilySpec, per_axis: int = 5):
    w = spec.omega_ball_radius()
    axes = (
        [_grid(1.0 / per_axis, 1.0, per_axis) for _ in range(spec.p)]
        + [_grid(-w, w, per_axis) for _ in range(spec.q)]
        + [_grid(lo, hi, per_axis) for lo, hi in spec.t_box]
    )
    for combo in itertools.product(*axes):
        y = np.array(combo[: spec.p])
        om = np.array(combo[spec.p : spec.p + spec.q])
        t = np.array(combo[spec.p + spec.q :])
        yield y, om, t


def _fd_jacobian(f: Evaluator, y, om, t, wrt: str) -> np.ndarray:
    base = np.asarray(f(y, om, t), dtype=float)
    x = y if wrt == "y" else om
    cols = []
    for i in range(len(x)):
        xp = x.copy()
        xm = x.copy()
        xp[i] += FD_STEP
        xm[i] -= FD_STEP
        if wrt == "y":
            hi, lo = f(xp, om, t), f(xm, om, t)
        else:
            hi, lo = f(y, xp, t), f(y, xm, t)
        cols.append((np.asarray(hi, float) - np.asarray(lo, float)) / (2 * FD_STEP))
    J = np.stack(cols, axis=1)
    return J.reshape(len(base), len(x))


def validate(spec: FamilySpec, per_axis: int = 5) -> ValidationReport:
    """Dimension inequalities, sampled rank of J_omega, and finite-difference
    agreement of both declared Jacobians with f."""
    issues: list[ValidationIssue] = []
    if not spec.p <= spec.codim:
        issues.append(ValidationIssue("dims", "p <= n-d violated"))
    if not spec.codim <= spec.q:
        issues.append(ValidationIssue("dims", "n-d <= q violated"))
    if not spec.d < spec.n:
        issues.append(ValidationIssue("dims", "d < n violated"))
    if issues:
        return ValidationReport(False, issues)

    for y, om, t in _domain_grid(spec, per_axis):
        point = (tuple(y), tuple(om), tuple(t))
        Jw = np.asarray(spec.J_omega(y, om, t), dtype=float)
        sv = np.linalg.svd(Jw, compute_uv=False)
        if sv[-1] <= RANK_TOL:
            issues.append(
                ValidationIssue("rank", "J_omega rank below n-d", point)
            )
            break
        for wrt, J in (("y", spec.J_y), ("omega", spec.J_omega)):
            analytic = np.asarray(J(y, om, t), dtype=float)
            fd = _fd_jacobian(spec.f, y, om, t, wrt)
            scale = max(1.0, sup_norm(analytic))
            if sup_norm(analytic - fd) > FD_RTOL * scale:
                issues.append(
                    ValidationIssue("jacobian", f"J_{wrt} mismatch vs f", point)
                )
                break
        if issues:
            break
    return ValidationReport(not issues, issues)


def target_matrix(spec: FamilySpec, family, y, k: int, t) -> np.ndarray:
    """-J_omega^{-1} J_y evaluated at the level-k truncation (y^(k), psi^(k)(y))."""
    from .codec import value as digit_value

    yk = np.array([float(v) for v in digit_value(y, k)])
    psik = np.array(psi_mod.psi_truncated(family, y, k).value_floats())
    t = np.asarray(t, dtype=float)
    Jw = np.asarray(spec.J_omega(yk, psik, t), dtype=float)
    Jy = np.asarray(spec.J_y(yk, psik, t), dtype=float)
    return -right_inverse(Jw) @ Jy


# -- built-in demos ---------------------------------------------------------


def sawyer_line(lam: float, t_max: float = 1.0) -> FamilySpec:
    """f = lam*y*t - omega: the Besicovitch line family (n=2, d=1, p=q=1)."""

    def f(y, om, t):
        return np.array([lam * y[0] * t[0] - om[0]])

    return FamilySpec(
        name="sawyer_line",
        n=2, d=1, p=1, q=1,
        f=f,
        J_y=lambda y, om, t: np.array([[lam * t[0]]]),
        J_omega=lambda y, om, t: np.array([[-1.0]]),
        bounds=FamilyBounds(
            sup_J_y=abs(lam) * t_max,
            sup_J_omega=1.0,
            lipschitz_J_omega=0.0,
            sup_pinv_J_y=abs(lam) * t_max,
            modulus_J_y=lambda r: 0.0,
        ),
        t_box=((0.0, t_max),),
        params={"lambda": lam},
    )


def sawyer_parabola(lam: float, t_max: float = 1.0) -> FamilySpec:
    """f = lam*y*t^2 - omega: a curved one-parameter family (n=2, d=1, p=q=1)."""

    def f(y, om, t):
        return np.array([lam * y[0] * t[0] ** 2 - om[0]])

    return FamilySpec(
        name="sawyer_parabola",
        n=2, d=1, p=1, q=1,
        f=f,
        J_y=lambda y, om, t: np.array([[lam * t[0] ** 2]]),
        J_omega=lambda y, om, t: np.array([[-1.0]]),
        bounds=FamilyBounds(
            sup_J_y=abs(lam) * t_max**2,
            sup_J_omega=1.0,
            lipschitz_J_omega=0.0,
            sup_pinv_J_y=abs(lam) * t_max**2,
            modulus_J_y=lambda r: 0.0,
        ),
        t_box=((0.0, t_max),),
        params={"lambda": lam},
    )


def twist_pair(lam: float, t_max: float = 1.0) -> FamilySpec:
    """f = (lam*y*t - omega_1, lam*y*t^2 - omega_2): codimension 2 with p = 1,
    exercising the strict p < n-d decay."""

    def f(y, om, t):
        return np.array(
            [lam * y[0] * t[0] - om[0], lam * y[0] * t[0] ** 2 - om[1]]
        )

    return FamilySpec(
        name="twist_pair",
        n=3, d=1, p=1, q=2,
        f=f,
        J_y=lambda y, om, t: np.array([[lam * t[0]], [lam * t[0] ** 2]]),
        J_omega=lambda y, om, t: -np.eye(2),
        bounds=FamilyBounds(
            sup_J_y=abs(lam) * max(t_max, t_max**2),
            sup_J_omega=1.0,
            lipschitz_J_omega=0.0,
            sup_pinv_J_y=abs(lam) * max(t_max, t_max**2),
            modulus_J_y=lambda r: 0.0,
        ),
        t_box=((0.0, t_max),),
        params={"lambda": lam},
    )


DEMOS: dict[str, Callable[..., FamilySpec]] = {
    "sawyer_line": sawyer_line,
    "sawyer_parabola": sawyer_parabola,
    "twist_pair": twist_pair,
}


def make_demo(name: str, lam: float, t_max: float = 1.0) -> FamilySpec:
    if name not in DEMOS:
        raise KeyError(f"unknown family {name!r}; choices: {sorted(DEMOS)}")
    return DEMOS[name](lam, t_max)
