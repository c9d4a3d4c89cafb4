"""Line charts written directly as SVG 1.1 text.

Output contains no timestamps or random ids, so the same data always
produces the same bytes.
"""

from __future__ import annotations

import math
from typing import Sequence, Tuple

COLORS = [
    "#000000",
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#ff7f0e",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#17becf",
]

WIDTH, HEIGHT = 900, 560
LEFT, RIGHT, TOP, BOTTOM = 90, 200, 50, 70


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def nice_ticks(lo: float, hi: float, target: int = 6) -> list:
    """Round tick positions that fall inside ``[lo, hi]``."""
    if hi <= lo:
        span = abs(lo) or 1.0
        lo, hi = lo - 0.5 * span, hi + 0.5 * span
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step) * step
    ticks = []
    k = 0
    while True:
        v = start + k * step
        if v > hi + 1e-9 * step:
            break
        if v >= lo - 1e-9 * step:
            ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        k += 1
    return ticks


def _fmt_tick(v: float) -> str:
    return f"{v:.4g}"


def line_chart(
    curves: Sequence[Tuple[str, Sequence[float], Sequence[float]]],
    title: str = "",
    x_label: str = "t",
    y_label: str = "",
) -> str:
    """Render ``(label, xs, ys)`` curves as one SVG document.

    Each curve becomes one ``<polyline>``; NaN points are skipped.
    """
    xs_all = [x for _, xs, ys in curves for x, y in zip(xs, ys) if math.isfinite(y)]
    ys_all = [y for _, xs, ys in curves for y in ys if math.isfinite(y)]
    if not xs_all:
        raise ValueError("nothing to plot")
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    xt = nice_ticks(x_lo, x_hi)
    yt = nice_ticks(y_lo, y_hi)
    x_lo, x_hi = min(xt[0], x_lo), max(xt[-1], x_hi)
    y_lo, y_hi = min(yt[0], y_lo), max(yt[-1], y_hi)
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return TOP + ph - (y - y_lo) / (y_hi - y_lo) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="Helvetica, Arial, sans-serif">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{LEFT + pw / 2:.2f}" y="{TOP - 18}" text-anchor="middle" font-size="16">{_escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333333"/>',
    ]
    for v in xt:
        x = px(v)
        out.append(f'<line x1="{x:.2f}" y1="{TOP + ph}" x2="{x:.2f}" y2="{TOP + ph + 5}" stroke="#333333"/>')
        out.append(
            f'<text x="{x:.2f}" y="{TOP + ph + 20}" text-anchor="middle" font-size="12">{_fmt_tick(v)}</text>'
        )
    for v in yt:
        y = py(v)
        out.append(f'<line x1="{LEFT - 5}" y1="{y:.2f}" x2="{LEFT}" y2="{y:.2f}" stroke="#333333"/>')
        out.append(f'<line x1="{LEFT}" y1="{y:.2f}" x2="{LEFT + pw}" y2="{y:.2f}" stroke="#eeeeee"/>')
        out.append(
            f'<text x="{LEFT - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="12">{_fmt_tick(v)}</text>'
        )
    out.append(
        f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 20}" text-anchor="middle" font-size="14">{_escape(x_label)}</text>'
    )
    out.append(
        f'<text x="20" y="{TOP + ph / 2:.2f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 20 {TOP + ph / 2:.2f})">{_escape(y_label)}</text>'
    )
    for k, (label, xs, ys) in enumerate(curves):
        color = COLORS[k % len(COLORS)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys) if math.isfinite(y))
        width = 2.5 if k == 0 else 1.5
        out.append(
            f'<polyline id="curve-{k}" class="curve" points="{pts}" fill="none" '
            f'stroke="{color}" stroke-width="{width}"><title>{_escape(label)}</title></polyline>'
        )
        ly = TOP + 10 + 20 * k
        lx = LEFT + pw + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 25}" y2="{ly}" stroke="{color}" stroke-width="{width}"/>')
        out.append(f'<text x="{lx + 32}" y="{ly + 4}" font-size="12">{_escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
