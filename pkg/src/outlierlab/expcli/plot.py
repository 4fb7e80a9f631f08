"""Hand-written SVG line chart for sweep CSVs."""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

from .experiments import SWEEP_COLUMNS, read_csv

WIDTH, HEIGHT = 960, 540
MARGIN = dict(left=80, right=220, top=40, bottom=60)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")

SERIES = (
    ("rho / sqrt(np)", lambda r: r["rho"] / math.sqrt(r["np"])),
    ("rho_G predictor / sqrt(np)", lambda r: r["rho_g_pred"] / math.sqrt(r["np"])),
    ("|lambda_k| / sqrt(np)", lambda r: r["lambda_abs_k"] / math.sqrt(r["np"])),
)


def nice_ticks(lo, hi, target=6):
    """Round tick positions covering ``[lo, hi]``."""
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step) * step
    ticks = []
    t = start
    while t <= hi + step * 1e-9:
        ticks.append(round(t, 12))
        t += step
    if ticks[-1] < hi:
        ticks.append(round(ticks[-1] + step, 12))
    return ticks


def _num(v):
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _label(v):
    return f"{v:g}"


def series_from_csv(path):
    """Median of each plotted series per ``c``."""
    experiment, columns, rows = read_csv(path)
    if experiment != "sweep" or tuple(columns) != SWEEP_COLUMNS:
        raise ValueError("CSV does not follow the sweep schema")
    if not rows:
        raise ValueError("CSV has no data rows")
    by_c = defaultdict(list)
    for raw in rows:
        r = {k: float(v) for k, v in raw.items()}
        r["np"] = (r["two_sqrt_np"] / 2.0) ** 2
        by_c[r["c"]].append(r)
    cs = sorted(by_c)
    out = {}
    for name, fn in SERIES:
        out[name] = [float(np.median([fn(r) for r in by_c[c]])) for c in cs]
    return cs, out


def render_svg(cs, series) -> str:
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    values = [v for vals in series.values() for v in vals]
    xt = nice_ticks(min(cs), max(cs))
    yt = nice_ticks(min(min(values), 2.0), max(values))

    def sx(c):
        return x0 + (c - xt[0]) / (xt[-1] - xt[0]) * (x1 - x0)

    def sy(v):
        return y0 - (v - yt[0]) / (yt[-1] - yt[0]) * (y0 - y1)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
    ]
    for t in xt:
        x = _num(sx(t))
        out.append(f'<line x1="{x}" y1="{y0}" x2="{x}" y2="{y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{x}" y="{y0 + 20}" font-size="12" text-anchor="middle">{_label(t)}</text>')
    for t in yt:
        y = _num(sy(t))
        out.append(f'<line x1="{x0 - 5}" y1="{y}" x2="{x1}" y2="{y}" stroke="#dddddd"/>')
        out.append(f'<text x="{x0 - 8}" y="{y}" font-size="12" text-anchor="end" dominant-baseline="middle">{_label(t)}</text>')
    out.append(f'<text x="{(x0 + x1) // 2}" y="{HEIGHT - 15}" font-size="14" text-anchor="middle">c = np / log n</text>')
    out.append(f'<text x="20" y="{(y0 + y1) // 2}" font-size="14" text-anchor="middle" '
               f'transform="rotate(-90 20 {(y0 + y1) // 2})">median ratio</text>')
    for i, (name, vals) in enumerate(series.items()):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{_num(sx(c))},{_num(sy(v))}" for c, v in zip(cs, vals))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        ly = y1 + 20 * i + 10
        out.append(f'<line x1="{x1 + 15}" y1="{ly}" x2="{x1 + 40}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{x1 + 45}" y="{ly}" font-size="12" dominant-baseline="middle">{_escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text):
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def emit_plot(csv_path, out_svg) -> str:
    """Render the sweep CSV at ``csv_path`` to ``out_svg``; nothing is written on error."""
    cs, series = series_from_csv(csv_path)
    svg = render_svg(cs, series)
    with open(out_svg, "w", encoding="utf-8", newline="") as fh:
        fh.write(svg)
    return svg
