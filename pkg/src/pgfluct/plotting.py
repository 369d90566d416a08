"""Static SVG line plots of sweep CSV files (presentation only)."""
from __future__ import annotations

import os

from .records import MalformedCSV, read_sweep_csv


def select_columns(text, x, y, series=None):
    """Pick raw column text out of a sweep CSV.

    Returns the header and rows of the selected columns, fields untouched.
    """
    header, rows, lines = read_sweep_csv(text)
    if not rows:
        raise MalformedCSV("empty CSV: no data rows")
    wanted = [x, y] + ([series] if series else [])
    missing = [c for c in wanted if c not in header]
    if missing:
        raise MalformedCSV(f"line {_header_line(text)}: missing column(s) {', '.join(missing)}")
    idx = [header.index(c) for c in wanted]
    picked = [[r[i] for i in idx] for r in rows]
    for row, lineno in zip(picked, lines):
        for field in row[:2]:
            try:
                float(field)
            except ValueError:
                raise MalformedCSV(f"line {lineno}: not a number: {field!r}") from None
    return wanted, picked


def _header_line(text):
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip() and not line.startswith("#"):
            return lineno
    return 1


def plot_csv(csv_path, svg_path, x, y, series=None, logx=False, logy=False, data_path=None):
    """Render ``y`` against ``x`` with one line per ``series`` value.

    Writes the SVG and a CSV sidecar holding exactly the plotted fields.
    Nothing is written if the input is malformed.

    Returns
    -------
    str
        Path of the data sidecar.
    """
    data_path = data_path or os.path.splitext(svg_path)[0] + ".data.csv"
    if os.path.abspath(data_path) == os.path.abspath(csv_path):
        raise ValueError("the data sidecar would overwrite the input CSV")
    with open(csv_path, encoding="utf-8") as fh:
        text = fh.read()
    header, rows = select_columns(text, x, y, series)

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "pgfluct"
    groups = {}
    for row in rows:
        groups.setdefault(row[2] if series else y, []).append((float(row[0]), float(row[1])))
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, pts in groups.items():
        pts.sort()
        xs, ys = zip(*pts)
        ax.plot(xs, ys, marker="o", ms=3 if len(xs) > 1 else 6, label=label)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    if series:
        ax.legend(title=series)
    fig.tight_layout()

    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    with open(data_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    return data_path
