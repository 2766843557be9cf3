"""Report rendering: curve CSVs, gnuplot companion scripts and matplotlib
figures written next to the delimited output."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .examples import ExampleCurve
from .serialize import write_csv


def write_curve_csv(path, curve: ExampleCurve, columns) -> None:
    """One row per grid point: the parameter followed by the named series."""
    header = [curve.parameter] + list(columns)
    rows = (
        [curve.grid[i]] + [curve.series[c][i] for c in columns] for i in range(curve.grid.size)
    )
    write_csv(path, header, rows)


def write_gnuplot_script(path, csv_path, curve: ExampleCurve, columns, title: str) -> None:
    """Plain-text gnuplot script plotting the CSV columns; no graphics here."""
    csv_name = Path(csv_path).name
    lines = [
        "set datafile separator ','",
        f"set title '{title}'",
        f"set xlabel '{curve.parameter}'",
        "set key outside",
        "set grid",
        "plot \\",
    ]
    plot_parts = [
        f"  '{csv_name}' using 1:{i + 2} with lines title '{col}'"
        for i, col in enumerate(columns)
    ]
    lines.append(", \\\n".join(plot_parts))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def render_curve_png(path, curve: ExampleCurve, columns, title: str, shade: str | None = None) -> None:
    """Render the named series to a PNG.

    Up to three series share one axes; four or more get a 2x2 panel grid.
    ``shade`` names a series whose violation region (value < -1e-9) is
    highlighted.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    columns = list(columns)
    x = curve.grid
    if len(columns) <= 3:
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        axes = {col: ax for col in columns}
        for col in columns:
            ax.plot(x, curve.series[col], label=col)
        ax.legend()
    else:
        ncols = 2
        nrows = (len(columns) + 1) // 2
        fig, grid_axes = plt.subplots(nrows, ncols, figsize=(8.0, 2.6 * nrows), sharex=True)
        flat = np.atleast_1d(grid_axes).ravel()
        axes = {}
        for ax, col in zip(flat, columns):
            ax.plot(x, curve.series[col], color="tab:blue")
            ax.set_title(col, fontsize=10)
            ax.axhline(0.0, color="0.6", linewidth=0.8)
            axes[col] = ax
        for ax in flat[len(columns):]:
            ax.set_visible(False)
    if shade is not None and shade in axes:
        ax = axes[shade]
        for lo, hi in curve.violation_intervals(shade):
            ax.axvspan(lo, hi, color="tab:orange", alpha=0.25)
    fig.suptitle(title)
    fig.supxlabel(curve.parameter)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
