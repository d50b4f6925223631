"""Dependency-free SVG line charts.

Output depends only on the table contents, so identical tables give
byte-identical files.
"""

from __future__ import annotations

import math
import os
from pathlib import Path

from .tables import OutputTable

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f")

WIDTH, HEIGHT = 800, 520
LEFT, RIGHT, TOP, BOTTOM = 80, 170, 40, 60


def _escape(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def _range(values):
    finite = [v for v in values if math.isfinite(v)]
    if not finite:
        return 0.0, 1.0
    lo, hi = min(finite), max(finite)
    if hi == lo:
        pad = abs(lo) * 0.5 if lo != 0.0 else 1.0
        return lo - pad, hi + pad
    return lo, hi


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    return [lo + (hi - lo) * i / n for i in range(n + 1)]


def render_svg(table: OutputTable, x_column: str | None = None, title: str | None = None) -> str:
    if len(table.rows) < 2:
        raise ValueError("need at least two rows to plot")
    x_column = x_column or table.columns[0]
    xi = table.columns.index(x_column)
    dependents = [c for c in table.columns if c != x_column]
    xs = [row[xi] for row in table.rows]
    x_lo, x_hi = _range(xs)
    y_lo, y_hi = _range([row[table.columns.index(c)] for row in table.rows for c in dependents])
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return TOP + ph - (y - y_lo) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
    ]
    if title:
        out.append(f'<text x="{LEFT + pw / 2:.2f}" y="22" text-anchor="middle" font-size="15">{_escape(title)}</text>')
    for y in _ticks(y_lo, y_hi):
        yy = py(y)
        out.append(f'<line x1="{LEFT}" y1="{yy:.2f}" x2="{LEFT + pw}" y2="{yy:.2f}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{LEFT - 6}" y="{yy + 4:.2f}" text-anchor="end">{y:.4g}</text>')
    for x in _ticks(x_lo, x_hi):
        xx = px(x)
        out.append(f'<line x1="{xx:.2f}" y1="{TOP + ph}" x2="{xx:.2f}" y2="{TOP + ph + 5}" stroke="#000000"/>')
        out.append(f'<text x="{xx:.2f}" y="{TOP + ph + 18}" text-anchor="middle">{x:.4g}</text>')
    out.append(f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="#000000"/>')
    out.append(f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="#000000"/>')
    out.append(f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 15}" text-anchor="middle">{_escape(x_column)}</text>')

    for k, name in enumerate(dependents):
        j = table.columns.index(name)
        color = COLORS[k % len(COLORS)]
        pts = [(px(row[xi]), py(row[j])) for row in table.rows
               if math.isfinite(row[xi]) and math.isfinite(row[j])]
        path = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{path}"/>')
        ly = TOP + 14 + 18 * k
        out.append(f'<line x1="{LEFT + pw + 12}" y1="{ly - 4}" x2="{LEFT + pw + 32}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{LEFT + pw + 38}" y="{ly}">{_escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_plot(table: OutputTable, path: str | os.PathLike, x_column: str | None = None,
                title: str | None = None) -> None:
    text = render_svg(table, x_column, title)
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp")
    try:
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write plot to {str(path)!r}: {exc}") from exc
