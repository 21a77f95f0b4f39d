"""Minimal log-log line plots written directly as SVG text."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Dict, Sequence, Tuple

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")
W, H = 640, 440
LEFT, RIGHT, TOP, BOTTOM = 72, 150, 36, 52


def _decades(lo: float, hi: float):
    return list(range(math.floor(math.log10(lo)), math.ceil(math.log10(hi)) + 1))


def loglog_svg(
    path,
    series: Dict[str, Tuple[Sequence[float], Sequence[float]]],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
) -> None:
    """Write ``series`` (label -> (x, y)) as a log-log SVG; non-positive points are skipped."""
    clean = {}
    for label, (x, y) in series.items():
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        keep = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
        if keep.any():
            clean[label] = (x[keep], y[keep])
    if not clean:
        raise ValueError("nothing to plot")
    xs = np.concatenate([v[0] for v in clean.values()])
    ys = np.concatenate([v[1] for v in clean.values()])
    xd, yd = _decades(xs.min(), xs.max()), _decades(ys.min(), ys.max())
    if len(xd) < 2:
        xd = [xd[0], xd[0] + 1]
    if len(yd) < 2:
        yd = [yd[0], yd[0] + 1]
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def px(v):
        return LEFT + pw * (math.log10(v) - xd[0]) / (xd[-1] - xd[0])

    def py(v):
        return TOP + ph * (1.0 - (math.log10(v) - yd[0]) / (yd[-1] - yd[0]))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for d in xd:
        x = px(10.0**d)
        out.append(f'<line x1="{x:.2f}" y1="{TOP}" x2="{x:.2f}" y2="{TOP + ph}" stroke="#ddd"/>')
        out.append(f'<text x="{x:.2f}" y="{TOP + ph + 18}" font-size="12" text-anchor="middle">1e{d}</text>')
    for d in yd:
        y = py(10.0**d)
        out.append(f'<line x1="{LEFT}" y1="{y:.2f}" x2="{LEFT + pw}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{LEFT - 6}" y="{y + 4:.2f}" font-size="12" text-anchor="end">1e{d}</text>')
    for i, (label, (x, y)) in enumerate(clean.items()):
        colour = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="1.5"/>')
        ly = TOP + 16 + 18 * i
        out.append(f'<line x1="{LEFT + pw + 10}" y1="{ly}" x2="{LEFT + pw + 30}" y2="{ly}" stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{LEFT + pw + 36}" y="{ly + 4}" font-size="12">{_esc(label)}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="20" font-size="14" text-anchor="middle">{_esc(title)}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{H - 12}" font-size="13" text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{TOP + ph / 2:.1f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 16 {TOP + ph / 2:.1f})">{_esc(ylabel)}</text>'
    )
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
