"""Render the cumulative-revenue and retention curves to image files."""

from __future__ import annotations

import os
from pathlib import Path

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .simulation import MetricsTable

LABELS = {"gsp-truthful": "GSP (truthful bids)", "coop-optimizer": "Cooperative bid optimizer"}
STYLES = {"gsp-truthful": dict(color="#b2182b", ls="--"), "coop-optimizer": dict(color="#2166ac", ls="-")}


def _curve_figure(table: MetricsTable, column: str, ylabel: str, title: str) -> Figure:
    fig = Figure(figsize=(6.4, 4.0))
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(1, 1, 1)
    for mech in table.mechanisms:
        rounds = table.series(mech, "round")
        ax.plot(rounds, table.series(mech, column), lw=1.6,
                label=LABELS.get(mech, mech), **STYLES.get(mech, {}))
    ax.set_xlabel("auction round")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(frameon=False)
    fig.tight_layout()
    return fig


def render_figures(table: MetricsTable, directory: str | os.PathLike, prefix: str = "") -> list[Path]:
    """Write ``cumulative_revenue.png`` and ``retained_bidders.png``."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    seeds = table.metadata.get("seeds")
    suffix = f" (mean of {seeds} seeds)" if seeds else ""
    specs = [
        ("cumulative_revenue.png", "mean_cum_revenue", "cumulative revenue",
         "Search engine cumulative revenue" + suffix),
        ("retained_bidders.png", "mean_active_bidders", "advertisers retained",
         "Advertisers retained" + suffix),
    ]
    paths = []
    for name, column, ylabel, title in specs:
        fig = _curve_figure(table, column, ylabel, title)
        path = out / f"{prefix}{name}"
        fig.savefig(path, dpi=120, metadata={"Software": None})
        paths.append(path)
    return paths
