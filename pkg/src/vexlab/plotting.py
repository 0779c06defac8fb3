"""Log-log figures of suite ratios (Agg backend, files only)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["plot_report"]

MAX_SERIES = 12


def plot_report(report, path, max_series: int = MAX_SERIES):
    """Draw ratio against the suite's trend variable, one line per group; returns the path."""
    series = [s for s in report.plot_series() if any(y and y > 0 for y in s[2])]
    fig, ax = plt.subplots(figsize=(7.5, 4.8), dpi=100)
    try:
        for label, xs, ys in series[:max_series]:
            pts = [(x, y) for x, y in zip(xs, ys) if y is not None and y > 0]
            if not pts:
                continue
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", ms=3, lw=1, label=label[:70])
        if len(series) > max_series:
            ax.text(0.01, 0.01, f"{len(series) - max_series} more groups not drawn", transform=ax.transAxes,
                    fontsize=7, color="0.4")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel(report.xvar or "case index")
        ax.set_ylabel("ratio LHS / RHS")
        ax.set_title(f"{report.suite}: {report.verdict}")
        if series:
            ax.legend(fontsize=6, loc="best")
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        fig.savefig(path)
    finally:
        plt.close(fig)
    return path
