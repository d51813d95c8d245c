"""Minimal self-contained SVG line charts (axes, ticks, legend, polylines)."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(round(v, 12))
        v += step
    return ticks


def _fmt(v: float) -> str:
    if v != 0 and (abs(v) >= 1e5 or abs(v) < 1e-3):
        return f"{v:.1e}"
    return f"{v:g}"


def line_chart(
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    title: str = "",
    x_label: str = "",
    y_label: str = "",
    log_y: bool = False,
    width: int = 800,
    height: int = 500,
) -> str:
    """Render ``(label, xs, ys)`` series as an SVG document string.

    With ``log_y`` non-positive values are dropped from the plotted lines.
    """
    if not series:
        raise ValueError("no series to plot")
    left, right, top, bottom = 80, 170, 50, 60
    pw, ph = width - left - right, height - top - bottom

    def ty(y):
        return math.log10(y) if log_y else y

    xs_all = [float(x) for _, xs, _ in series for x in xs]
    ys_all = [ty(float(y)) for _, _, ys in series for y in ys if not log_y or y > 0]
    if not xs_all or not ys_all:
        raise ValueError("series contain no plottable points")
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    if not log_y and y_lo > 0:
        y_lo = 0.0

    def px(x):
        return left + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return top + ph - (ty(y) - y_lo) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>',
        f'<text x="{width / 2:.1f}" y="28" text-anchor="middle" font-size="18" '
        f'font-family="sans-serif">{escape(title)}</text>',
    ]
    for xt in _nice_ticks(x_lo, x_hi):
        x = px(xt)
        out.append(f'<line x1="{x:.2f}" y1="{top + ph}" x2="{x:.2f}" y2="{top + ph + 5}" stroke="#000"/>')
        out.append(
            f'<text x="{x:.2f}" y="{top + ph + 20}" text-anchor="middle" font-size="12" '
            f'font-family="sans-serif">{escape(_fmt(xt))}</text>'
        )
    if log_y:
        y_ticks = [float(e) for e in range(math.ceil(y_lo), math.floor(y_hi) + 1)] or [y_lo]
        labels = [f"1e{int(e)}" if e == int(e) else f"{10 ** e:.2g}" for e in y_ticks]
        positions = [top + ph - (e - y_lo) / (y_hi - y_lo) * ph for e in y_ticks]
    else:
        y_ticks = _nice_ticks(y_lo, y_hi)
        labels = [_fmt(v) for v in y_ticks]
        positions = [py(v) for v in y_ticks]
    for y, label in zip(positions, labels):
        out.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#e0e0e0"/>')
        out.append(
            f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="12" '
            f'font-family="sans-serif">{escape(label)}</text>'
        )
    out.append(f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="#000" stroke-width="1.5"/>')
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="#000" stroke-width="1.5"/>')
    out.append(
        f'<text x="{left + pw / 2:.1f}" y="{height - 15}" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif">{escape(x_label)}</text>'
    )
    out.append(
        f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" font-size="14" font-family="sans-serif" '
        f'transform="rotate(-90 18 {top + ph / 2:.1f})">{escape(y_label)}</text>'
    )
    for i, (label, xs, ys) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(
            f"{px(float(x)):.2f},{py(float(y)):.2f}" for x, y in zip(xs, ys) if not log_y or y > 0
        )
        if pts:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        ly = top + 15 + 20 * i
        lx = left + pw + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" stroke="{color}" stroke-width="3"/>')
        out.append(
            f'<text x="{lx + 28}" y="{ly + 4}" font-size="12" font-family="sans-serif">{escape(label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, svg: str) -> Path:
    path = Path(path)
    path.write_text(svg, encoding="utf-8", newline="\n")
    return path
