"""Figure rendering for measure reports.

Figures are a convenience companion to the delimited output; the CSV remains
the byte-reproducible artifact.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .measure import DecayReport


def render_decay_figure(report: DecayReport, path: str) -> str:
    """Plot measure_upper (log scale) against truncation depth N."""
    Ns = [row["N"] for row in report.rows]
    vals = [row["measure_upper"] for row in report.rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(Ns, vals, "o-")
    if vals and min(vals) > 0:
        ax.set_yscale("log")
    ax.set_xlabel("truncation depth N")
    ax.set_ylabel("cover estimate (cells * delta^(n-d))")
    fam = report.provenance["family"]["name"]
    ax.set_title(f"{fam}: slice cover vs truncation (delta={report.provenance['delta']:g})")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
