"""Artifact emission: CSV tables and SVG figures with stable bytes.

CSV files carry ``#``-prefixed metadata lines (config hash, code version)
above the header and print floats at 17 significant digits, so a round-trip
through :func:`read_csv` is lossless. SVG output goes through the matplotlib
Agg/SVG backend with a fixed hash salt and no date stamp, so identical tables
produce identical bytes.
"""

from __future__ import annotations

import csv
import math

import numpy as np

from .errors import ValidationError
from .sweep import ResultTable


def _format_value(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return format(float(value), ".17g")
    return str(value)


def emit_csv(table: ResultTable, path: str) -> None:
    """Write the table with metadata comments, header row and %.17g values."""
    with open(path, "w", newline="") as fh:
        for key in sorted(table.metadata):
            fh.write(f"# {key} = {table.metadata[key]}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_format_value(v) for v in row])


def read_csv(path: str) -> ResultTable:
    """Parse a file written by :func:`emit_csv` back into a table."""
    metadata = {}
    data_lines = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, value = body.split("=", 1)
                    metadata[key.strip()] = value.strip()
                continue
            data_lines.append(line)
    reader = csv.reader(data_lines)
    try:
        columns = tuple(next(reader))
    except StopIteration:
        raise ValidationError(f"{path} has no header row") from None
    int_like = {"n_sites", "n_cells", "gap_closed", "diverged"}
    rows = []
    for record in reader:
        row = []
        for name, text in zip(columns, record):
            if name == "status":
                row.append(text)
            elif name in int_like:
                row.append(int(text))
            else:
                try:
                    row.append(float(text))
                except ValueError:
                    row.append(text)
        rows.append(tuple(row))
    return ResultTable(columns=columns, rows=tuple(rows), metadata=metadata)


def _value_columns(table: ResultTable) -> list:
    axes = set(table.axis_columns)
    names = []
    for name in table.columns:
        if name in axes or name == "status":
            continue
        col = table.column(name)
        if col.dtype == float:
            names.append(name)
    return names


def _savefig(fig, path: str, config_hash: str) -> None:
    import matplotlib

    with matplotlib.rc_context({"svg.hashsalt": config_hash or "modsense"}):
        fig.savefig(path, format="svg", metadata={"Date": None})


def emit_svg(
    table: ResultTable,
    kind: str,
    path: str,
    value_column: str | None = None,
    log_scale: bool = False,
) -> None:
    """Render the table as a standalone SVG figure.

    ``kind`` is 'heatmap' (needs 2 axes; one value column on a colorbar, rows
    with failed status become blank cells) or 'lines' (needs 1 or 2 axes; with
    2 axes the second one keys the line series).
    """
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt
    from matplotlib import colors

    axes = table.axis_columns
    config_hash = table.metadata.get("config_hash", "")
    values = _value_columns(table)
    if not values:
        raise ValidationError("table has no numeric value columns to plot")
    if value_column is None:
        value_column = values[0]
    if value_column not in table.columns:
        raise ValidationError(f"no column {value_column!r} in table")

    if kind == "heatmap":
        if len(axes) != 2:
            raise ValidationError("heatmap needs exactly 2 swept axes")
        x = table.column(axes[1])
        y = table.column(axes[0])
        z = table.column(value_column).astype(float)
        status = table.column("status")
        z = np.where(status == "ok", z, np.nan)
        xs = np.unique(x)
        ys = np.unique(y)
        grid = np.full((len(ys), len(xs)), np.nan)
        xi = np.searchsorted(xs, x)
        yi = np.searchsorted(ys, y)
        grid[yi, xi] = z
        fig, ax = plt.subplots(figsize=(6.0, 4.5))
        norm = None
        if log_scale:
            positive = grid[np.isfinite(grid) & (grid > 0)]
            if positive.size == 0:
                raise ValidationError("log color scale needs positive values")
            norm = colors.LogNorm(vmin=positive.min(), vmax=positive.max())
        masked = np.ma.masked_invalid(grid)
        mesh = ax.pcolormesh(xs, ys, masked, norm=norm, shading="nearest")
        fig.colorbar(mesh, ax=ax, label=value_column)
        ax.set_xlabel(axes[1])
        ax.set_ylabel(axes[0])
        _savefig(fig, path, config_hash)
        plt.close(fig)
        return

    if kind == "lines":
        if len(axes) not in (1, 2):
            raise ValidationError("lines plot needs 1 or 2 swept axes")
        fig, ax = plt.subplots(figsize=(6.0, 4.5))
        x_name = axes[0]
        x = table.column(x_name)
        status = table.column("status")
        if len(axes) == 2:
            group = table.column(axes[1])
            y = np.where(status == "ok", table.column(value_column).astype(float), np.nan)
            for g in np.unique(group):
                mask = group == g
                order = np.argsort(x[mask])
                ax.plot(x[mask][order], y[mask][order], label=f"{axes[1]}={g:g}")
            ax.legend()
        else:
            for name in values:
                y = np.where(status == "ok", table.column(name).astype(float), np.nan)
                order = np.argsort(x)
                ax.plot(x[order], y[order], label=name)
            if len(values) > 1:
                ax.legend()
        if log_scale:
            ax.set_yscale("log")
        ax.set_xlabel(x_name)
        ax.set_ylabel(value_column if len(axes) == 2 else "value")
        _savefig(fig, path, config_hash)
        plt.close(fig)
        return

    raise ValidationError(f"unknown figure kind {kind!r} (use 'heatmap' or 'lines')")
