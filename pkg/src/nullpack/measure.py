"""Numerical outer-measure estimation for truncated slice images.

The surrogate for "the slice image is null" is distinct-cell counting on a
fixed dyadic grid anchored at 0: evaluate f(y^(N), psi^(N)(y), t) over a
prefix grid, map each value to its delta-cell, and report
cells * delta^(n-d).  Slice estimates are averaged over a t-grid and scaled
by the t-box volume (the Fubini step).  All sampling is seeded and every
report embeds its provenance, so reruns are byte-identical.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import random
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .codec import FactorialDigits, value as digit_value
from .dense import EXACT_TUPLE_CAP, DenseMapFamily
from .family import FamilySpec
from .psi import psi_truncated

VERSION = "0.1.0"


@dataclass(frozen=True)
class CoverEstimate:
    delta: float
    cells: int
    measure_upper: float
    y_samples: int
    N: int


def prefix_grid(
    family: DenseMapFamily,
    N: int,
    samples: int,
    seed: int,
    cap: int = EXACT_TUPLE_CAP,
) -> list[FactorialDigits]:
    """Digit prefixes of depth N-1: exhaustive while (N-1)!^p fits the cap,
    otherwise a seeded uniform sample of the given size."""
    total = math.factorial(N - 1) ** family.p
    if total <= cap:
        return [
            FactorialDigits(family.p, N - 1, t.levels)
            for t in family.enumerate_D(N)
        ]
    rng = random.Random(seed)
    out = []
    for _ in range(samples):
        levels = tuple(
            tuple(rng.randrange(n) for _ in range(family.p)) for n in range(2, N)
        )
        out.append(FactorialDigits(family.p, N - 1, levels))
    return out


def slice_image_cover(
    spec: FamilySpec,
    family: DenseMapFamily,
    N: int,
    t,
    delta: float,
    y_grid: Sequence[FactorialDigits],
) -> CoverEstimate:
    """Count distinct delta-cells hit by f(y^(N), psi^(N)(y), t) over the grid."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    t = np.asarray(t, dtype=float)
    cells = set()
    for y in y_grid:
        yN = np.array([float(v) for v in digit_value(y, N)])
        vN = np.array(psi_truncated(family, y, N).value_floats())
        x = np.asarray(spec.f(yN, vN, t), dtype=float)
        cells.add(tuple(int(math.floor(c / delta)) for c in x))
    return CoverEstimate(
        delta=delta,
        cells=len(cells),
        measure_upper=len(cells) * delta**spec.codim,
        y_samples=len(y_grid),
        N=N,
    )


def t_grid(spec: FamilySpec, per_axis: int) -> list[np.ndarray]:
    axes = []
    for lo, hi in spec.t_box:
        if per_axis == 1:
            axes.append(np.array([(lo + hi) / 2]))
        else:
            axes.append(np.linspace(lo, hi, per_axis))
    grids = np.meshgrid(*axes, indexing="ij")
    return [np.array(pt) for pt in zip(*(g.ravel() for g in grids))]


def union_measure_estimate(
    spec: FamilySpec,
    family: DenseMapFamily,
    N: int,
    delta: float,
    t_samples: Sequence,
    y_samples: int = 1000,
    seed: int = 0,
) -> float:
    """Mean slice estimate over the t-grid times the t-box volume."""
    vol = spec.t_volume()
    if vol == 0 or not list(t_samples):
        return 0.0
    grid = prefix_grid(family, N, y_samples, seed)
    total = 0.0
    for t in t_samples:
        total += slice_image_cover(spec, family, N, t, delta, grid).measure_upper
    return total / len(list(t_samples)) * vol


CSV_HEADER = "N,delta,y_samples,t_samples,cells,measure_upper,cert_log_bound"


@dataclass
class DecayReport:
    csv_text: str
    rows: list[dict]
    provenance: dict

    def to_json(self) -> dict:
        return {"provenance": self.provenance, "rows": self.rows}


def decay_report(
    spec: FamilySpec,
    family: DenseMapFamily,
    truncations: Sequence[int],
    delta: float,
    seed: int,
    t,
    y_samples: int = 10**4,
    cert_log_bounds: Optional[dict[int, float]] = None,
) -> DecayReport:
    """One CSV row per truncation depth; deterministic for a given seed."""
    t = np.asarray(t, dtype=float)
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    rows = []
    for N in truncations:
        grid = prefix_grid(family, N, y_samples, seed)
        est = slice_image_cover(spec, family, N, t, delta, grid)
        cert = ""
        if cert_log_bounds and N in cert_log_bounds:
            cert = repr(cert_log_bounds[N])
        row = {
            "N": N,
            "delta": delta,
            "y_samples": est.y_samples,
            "t_samples": 1,
            "cells": est.cells,
            "measure_upper": est.measure_upper,
            "cert_log_bound": cert,
        }
        rows.append(row)
        buf.write(
            f"{N},{delta!r},{est.y_samples},1,{est.cells},{est.measure_upper!r},{cert}\n"
        )
    provenance = {
        "version": VERSION,
        "family": spec.describe(),
        "seed": seed,
        "delta": delta,
        "t": [float(x) for x in np.atleast_1d(t)],
        "y_samples": y_samples,
        "spec_hash": spec_hash(spec),
    }
    return DecayReport(csv_text=buf.getvalue(), rows=rows, provenance=provenance)


def spec_hash(spec: FamilySpec) -> str:
    blob = json.dumps(spec.describe(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
