"""Figure rendering for the table and trace reports.

matplotlib is imported lazily with the non-interactive Agg backend so that the
library itself never needs a display or the plotting dependency.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def table_figure(rows: Sequence[dict], path: str | Path) -> Path:
    """theta (degrees) against alpha, one line per cone dimension m."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    keys = sorted({(r["m"], r["bound"]) for r in rows})
    labelled = False
    for m, bound in keys:
        pts = sorted(((r["alpha"], r["theta_deg"]) for r in rows if r["m"] == m and r["bound"] == bound), key=lambda p: p[0])
        found = [(a, t) for a, t in pts if t is not None]
        if found:
            a, t = zip(*found)
            ax.plot(a, t, marker="o", ms=3, label=f"m={m}, {bound}")
        missing = [a for a, t in pts if t is None]
        if missing:
            ax.plot(missing, [0.0] * len(missing), "x", color="grey", label=None if labelled else "no angle")
            labelled = True
    ax.set_xlabel(r"$\alpha$")
    ax.set_ylabel(r"vanishing angle $\theta$ (deg)")
    ax.grid(alpha=0.3)
    if keys:
        ax.legend(fontsize=8)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out)
    plt.close(fig)
    return out


def trace_figure(trajectory: np.ndarray, envelope: np.ndarray, path: str | Path, title: str = "") -> Path:
    """Trajectory w(theta) together with the feasibility envelope c(theta)."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    deg = np.degrees(trajectory[:, 0])
    ax.plot(deg, trajectory[:, 1], label=r"$w(\theta)$")
    ax.plot(np.degrees(envelope[:, 0]), envelope[:, 1], "--", label=r"envelope $c(\theta)$")
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel(r"$\theta$ (deg)")
    ax.set_ylabel("w")
    ax.set_xlim(0.0, max(float(deg[-1]), 1e-3) * 1.05 if math.isfinite(deg[-1]) else None)
    if title:
        ax.set_title(title, fontsize=9)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out)
    plt.close(fig)
    return out
