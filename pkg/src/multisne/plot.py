"""Dependency-free SVG scatter plots of embedding CSVs.

Training samples are drawn as circles, test samples as squares, coloured
by true label. With ``unlabelled_black`` the test squares are black.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional
from xml.sax.saxutils import escape

from .errors import DataError

__all__ = ["ScatterOptions", "read_embedding_csv", "render_scatter"]

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
UNKNOWN = "#999999"


@dataclass
class ScatterOptions:
    width: int = 640
    height: int = 480
    margin: int = 20
    legend_width: int = 140
    marker_size: float = 6.0
    unlabelled_black: bool = False
    title: Optional[str] = None
    metadata: Optional[str] = None


def read_embedding_csv(text: str) -> list:
    """Rows of an embedding CSV as dicts; needs ``y1``, ``y2``,
    ``split_role`` and ``true_label`` columns."""
    reader = csv.DictReader(io.StringIO(text))
    need = {"y1", "y2", "split_role", "true_label"}
    if reader.fieldnames is None or not need <= set(reader.fieldnames):
        raise DataError(f"embedding CSV must have columns {sorted(need)}")
    rows = []
    for i, row in enumerate(reader):
        try:
            row["_x"] = float(row["y1"])
            row["_y"] = float(row["y2"])
        except (TypeError, ValueError):
            raise DataError(f"embedding CSV row {i + 1}: non-numeric coordinates") from None
        rows.append(row)
    if not rows:
        raise DataError("embedding CSV has no rows")
    return rows


def _f(x: float) -> str:
    s = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def render_scatter(csv_text: str, options: Optional[ScatterOptions] = None) -> str:
    opt = options or ScatterOptions()
    rows = read_embedding_csv(csv_text)

    classes = []
    for r in rows:
        lab = r["true_label"]
        if lab and lab not in classes:
            classes.append(lab)
    colour = {c: PALETTE[i % len(PALETTE)] for i, c in enumerate(classes)}

    xs = [r["_x"] for r in rows]
    ys = [r["_y"] for r in rows]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    top = opt.margin + (24 if opt.title else 0)
    pw = opt.width - opt.legend_width - 2 * opt.margin
    ph = opt.height - top - opt.margin
    sx = pw / (x1 - x0) if x1 > x0 else 0.0
    sy = ph / (y1 - y0) if y1 > y0 else 0.0

    def px(x):
        return opt.margin + ((x - x0) * sx if sx else pw / 2)

    def py(y):
        return top + ph - ((y - y0) * sy if sy else ph / 2)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{opt.width}" height="{opt.height}" viewBox="0 0 {opt.width} {opt.height}">',
    ]
    if opt.metadata:
        out.append(f"<metadata>{escape(opt.metadata)}</metadata>")
    out.append(f'<rect x="0" y="0" width="{opt.width}" height="{opt.height}" fill="white"/>')
    if opt.title:
        out.append(f'<text x="{opt.margin}" y="{opt.margin + 8}" font-family="sans-serif" '
                   f'font-size="14">{escape(opt.title)}</text>')

    s = opt.marker_size
    out.append('<g id="points" stroke="none">')
    any_test = False
    for r in rows:
        fill = colour.get(r["true_label"], UNKNOWN)
        cx, cy = px(r["_x"]), py(r["_y"])
        if r["split_role"] == "test":
            any_test = True
            if opt.unlabelled_black:
                fill = "#000000"
            out.append(f'<rect class="test" x="{_f(cx - s / 2)}" y="{_f(cy - s / 2)}" '
                       f'width="{_f(s)}" height="{_f(s)}" fill="{fill}"/>')
        else:
            out.append(f'<circle class="train" cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(s / 2)}" fill="{fill}"/>')
    out.append("</g>")

    lx = opt.width - opt.legend_width + 10
    out.append('<g id="legend" font-family="sans-serif" font-size="12">')
    entries = [(c, colour[c]) for c in classes]
    if opt.unlabelled_black and any_test:
        entries.append(("unlabelled", "#000000"))
    for i, (name, fill) in enumerate(entries):
        ly = top + 10 + 18 * i
        out.append(f'<g class="legend-entry"><circle cx="{lx}" cy="{ly}" r="5" fill="{fill}"/>'
                   f'<text x="{lx + 10}" y="{ly + 4}">{escape(name)}</text></g>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"

