# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""Static line figures: every figure is written as its data CSV plus an SVG rendering."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from phillips_lf.records import OutputWriter  # noqa: E402
from phillips_lf.series_core import AnnualSeries  # noqa: E402

# fixed ids and no date so SVG bytes are reproducible
matplotlib.rcParams["svg.hashsalt"] = "phillips-lf"
matplotlib.rcParams["svg.fonttype"] = "none"


def series_frame(**series: AnnualSeries) -> pd.DataFrame:
    """Outer-join named series on year into a frame with a ``year`` column."""
    frame = pd.concat({name: s.to_pandas() for name, s in series.items()}, axis=1)
    return frame.sort_index().reset_index()


def plot_lines(writer: OutputWriter, name: str, title: str, frame: pd.DataFrame, ylabel: str = "") -> tuple[Path, Path]:
    """Write ``figures/<name>.csv`` and ``figures/<name>.svg``; ``frame`` has a ``year`` column."""
    csv_path = writer.table(f"figures/{name}.csv", frame)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    try:
        for column in frame.columns:
            if column == "year":
                continue
            ax.plot(frame["year"], frame[column], label=str(column), linewidth=1.4)
        ax.set_title(title)
        ax.set_xlabel("year")
        if ylabel:
            ax.set_ylabel(ylabel)
        ax.grid(True, linewidth=0.4, alpha=0.6)
        ax.legend(loc="best", fontsize="small")
        fig.tight_layout()
        svg_path = writer.path(f"figures/{name}.svg")
        fig.savefig(svg_path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    return csv_path, svg_path
