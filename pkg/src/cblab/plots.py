"""Static SVG plots emitted from trace data (no interactive UI)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_trace_columns(labeled_traces, column: str, path, ylabel: str | None = None,
                       logy: bool = False) -> None:
    """One line per (label, trace); writes an SVG without volatile metadata."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, trace in labeled_traces:
        ax.plot(trace.s, trace.column(column), label=label, lw=1.2)
    ax.set_xlabel("s")
    ax.set_ylabel(ylabel or column)
    if logy:
        ax.set_yscale("log")
    if len(labeled_traces) > 1:
        ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(Path(path), format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_series(series, path, xlabel: str, ylabel: str, logx: bool = False,
                logy: bool = False) -> None:
    """Generic labeled (x, y) line plot to SVG."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, x, y in series:
        ax.plot(x, y, label=label, lw=1.2, marker=".", ms=3)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    if len(series) > 1:
        ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(Path(path), format="svg", metadata={"Date": None})
    plt.close(fig)
