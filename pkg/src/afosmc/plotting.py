"""PNG figures for traces and metric tables, rendered off-screen.

Figures are built on bare :class:`matplotlib.figure.Figure` objects with an
Agg canvas, so nothing touches pyplot's global state or needs a display.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .harness import CASE_NAMES, Metrics, Reference, Trace

__all__ = ["plot_trace", "plot_table"]


def _save(fig: Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    FigureCanvasAgg(fig)
    fig.savefig(path, dpi=110)
    return path


def plot_trace(trace: Trace, path: str | Path, title: str = "") -> Path:
    """Tracking, error and input panels; adds the sliding value for Case 1."""
    t = trace.t
    has_s = not np.all(np.isnan(trace.s))
    rows = 4 if has_s else 3
    fig = Figure(figsize=(8, 2.2 * rows))
    axes = fig.subplots(rows, 1, sharex=True)
    axes[0].plot(t, trace.q_r, "k--", lw=1, label="reference")
    axes[0].plot(t, trace.q, lw=1, label="position")
    axes[0].set_ylabel("q (mm)")
    axes[0].legend(loc="upper right", fontsize=8)
    axes[1].plot(t, trace.e, lw=1)
    axes[1].set_ylabel("e (mm)")
    axes[2].plot(t, trace.mu, lw=0.8)
    axes[2].set_ylabel("input")
    if has_s:
        mag = np.abs(trace.s)
        axes[3].semilogy(t, np.where(mag > 0, mag, np.nan), lw=0.8)
        axes[3].set_ylabel("|s|")
    axes[-1].set_xlabel("t (s)")
    fig.suptitle(title or CASE_NAMES[trace.case_id])
    fig.tight_layout()
    return _save(fig, Path(path))


def plot_table(references: list[Reference], rows: dict[int, list[Metrics]],
               path: str | Path) -> Path:
    """Grouped bars of RMSE per reference and case, log scale."""
    fig = Figure(figsize=(7, 4))
    ax = fig.subplots()
    x = np.arange(len(references))
    width = 0.8 / max(len(rows), 1)
    for i, (case, metrics) in enumerate(sorted(rows.items())):
        vals = [max(m.rmse, 1e-300) for m in metrics]
        ax.bar(x + (i - (len(rows) - 1) / 2) * width, vals, width, label=CASE_NAMES[case])
    ax.set_xticks(x, [r.label for r in references])
    if all(m.rmse > 0 for ms in rows.values() for m in ms):
        ax.set_yscale("log")
    ax.set_ylabel("RMSE (mm)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, Path(path))
