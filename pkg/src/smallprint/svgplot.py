"""Minimal SVG writer for ROC curves: log-scale FAR axis, linear FRR axis,
one labeled polyline per score table. Plain text output keeps plots free of
imaging dependencies and diffable in tests.
"""

from __future__ import annotations

import math
from pathlib import Path

from .evaluation import RocPoint

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 30, 40, 55
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _far_floor(curves: list[tuple[str, list[RocPoint]]]) -> float:
    positive = [p.far for _, pts in curves for p in pts if p.far > 0]
    counts = [p.impostor_count for _, pts in curves for p in pts
              if p.impostor_count > 0]
    floor = min(positive) if positive else 1e-4
    if counts:
        floor = min(floor, 0.5 / max(counts))
    return max(floor, 1e-8)


def write_roc_svg(curves: list[tuple[str, list[RocPoint]]],
                  path: str | Path, title: str = "ROC") -> None:
    """Overlay one FRR-vs-FAR curve per (label, points) pair."""
    floor = _far_floor(curves)
    lo = math.floor(math.log10(floor))
    x0, x1 = float(lo), 0.0
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(far: float) -> float:
        lf = math.log10(max(far, floor))
        return MARGIN_L + (lf - x0) / (x1 - x0) * plot_w

    def sy(frr: float) -> float:
        return MARGIN_T + (1.0 - frr) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title}</text>',
    ]
    # frame
    parts.append(
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" '
        f'height="{plot_h}" fill="none" stroke="#333"/>')
    # FAR decade gridlines
    for d in range(int(lo), 1):
        x = sx(10.0 ** d)
        parts.append(f'<line x1="{x:.1f}" y1="{MARGIN_T}" x2="{x:.1f}" '
                     f'y2="{MARGIN_T + plot_h}" stroke="#ddd"/>')
        parts.append(f'<text x="{x:.1f}" y="{MARGIN_T + plot_h + 18}" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="11">1e{d}</text>')
    # FRR ticks
    for i in range(6):
        frr = i / 5.0
        y = sy(frr)
        parts.append(f'<line x1="{MARGIN_L}" y1="{y:.1f}" '
                     f'x2="{MARGIN_L + plot_w}" y2="{y:.1f}" stroke="#eee"/>')
        parts.append(f'<text x="{MARGIN_L - 8}" y="{y + 4:.1f}" '
                     f'text-anchor="end" font-family="sans-serif" '
                     f'font-size="11">{frr:.1f}</text>')
    parts.append(f'<text x="{MARGIN_L + plot_w / 2:.1f}" '
                 f'y="{HEIGHT - 12}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="13">'
                 f'FAR (log scale)</text>')
    parts.append(f'<text x="18" y="{MARGIN_T + plot_h / 2:.1f}" '
                 f'text-anchor="middle" font-family="sans-serif" '
                 f'font-size="13" transform="rotate(-90 18 '
                 f'{MARGIN_T + plot_h / 2:.1f})">FRR</text>')

    for idx, (label, points) in enumerate(curves):
        color = COLORS[idx % len(COLORS)]
        ordered = sorted(points, key=lambda p: p.threshold)
        coords = " ".join(f"{sx(p.far):.2f},{sy(p.frr):.2f}" for p in ordered)
        parts.append(f'<polyline points="{coords}" fill="none" '
                     f'stroke="{color}" stroke-width="1.8"/>')
        ly = MARGIN_T + 16 + 16 * idx
        lx = MARGIN_L + plot_w - 150
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" '
                     f'y2="{ly - 4}" stroke="{color}" stroke-width="1.8"/>')
        parts.append(f'<text x="{lx + 30}" y="{ly}" '
                     f'font-family="sans-serif" font-size="12">{label}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
