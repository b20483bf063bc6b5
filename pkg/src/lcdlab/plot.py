"""Minimal log-log SVG writer; output is byte-stable for fixed inputs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 480
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 30, 50


@dataclass
class Series:
    label: str
    ks: list[int]
    values: list[float]
    color: str
    marker: bool = True  # points if True, polyline otherwise


def _decades(lo: float, hi: float) -> list[int]:
    return list(range(math.floor(lo), math.ceil(hi) + 1))


def loglog_svg(series: list[Series], title: str = "", guide_slope: float | None = -3.0) -> str:
    pts = [(k, v) for s in series for k, v in zip(s.ks, s.values) if k > 0 and v > 0]
    if not pts:
        raise ValueError("nothing to plot: no positive points")
    lx = [math.log10(k) for k, _ in pts]
    ly = [math.log10(v) for _, v in pts]
    x0, x1 = math.floor(min(lx)), max(math.ceil(max(lx)), math.floor(min(lx)) + 1)
    y0, y1 = math.floor(min(ly)), max(math.ceil(max(ly)), math.floor(min(ly)) + 1)
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(k):
        return LEFT + (math.log10(k) - x0) / (x1 - x0) * pw

    def sy(v):
        return TOP + (y1 - math.log10(v)) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for d in _decades(x0, x1):
        x = sx(10.0 ** d)
        out.append(f'<line x1="{x:.2f}" y1="{TOP + ph}" x2="{x:.2f}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{TOP + ph + 18}" text-anchor="middle">1e{d}</text>')
    for d in _decades(y0, y1):
        y = sy(10.0 ** d)
        out.append(f'<line x1="{LEFT - 5}" y1="{y:.2f}" x2="{LEFT}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{y + 4:.2f}" text-anchor="end">1e{d}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 12}" text-anchor="middle">degree k</text>')
    out.append(
        f'<text x="16" y="{TOP + ph / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {TOP + ph / 2:.2f})">P(k)</text>'
    )
    if title:
        out.append(f'<text x="{LEFT + pw / 2:.2f}" y="20" text-anchor="middle">{escape(title)}</text>')

    out.append(f'<clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath>')
    out.append('<g clip-path="url(#plot)">')
    if guide_slope is not None:
        # anchored at the first point of the first series
        k_a, v_a = next((k, v) for k, v in zip(series[0].ks, series[0].values) if k > 0 and v > 0)
        k_b = 10.0 ** x1
        v_b = v_a * (k_b / k_a) ** guide_slope
        out.append(
            f'<line x1="{sx(k_a):.2f}" y1="{sy(v_a):.2f}" x2="{sx(k_b):.2f}" y2="{sy(v_b):.2f}" '
            f'stroke="gray" stroke-dasharray="6 4"/>'
        )
    for s in series:
        xy = [(sx(k), sy(v)) for k, v in zip(s.ks, s.values) if k > 0 and v > 0]
        if s.marker:
            for x, y in xy:
                out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="{s.color}"/>')
        elif xy:
            path = " ".join(f"{x:.2f},{y:.2f}" for x, y in xy)
            out.append(f'<polyline points="{path}" fill="none" stroke="{s.color}" stroke-width="1.5"/>')
    out.append("</g>")

    legend = [(s.label, s.color) for s in series]
    if guide_slope is not None:
        legend.append((f"slope {guide_slope:g}", "gray"))
    for i, (label, color) in enumerate(legend):
        y = TOP + 16 + 16 * i
        x = LEFT + pw - 150
        out.append(f'<rect x="{x}" y="{y - 9}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{x + 16}" y="{y}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
