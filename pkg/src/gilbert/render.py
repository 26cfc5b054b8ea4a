"""Deterministic SVG rendering of tessellations.

Output is built by plain string formatting with fixed float formats, so
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import math

from .engine import Tessellation
from .geom import Rect, clip_ray_to_rect

_STROKE = "#1f3b70"
_SEED_FILL = "#c23b22"


def _fmt(v: float) -> str:
    return format(v, ".8g")


def svg_document(tess: Tessellation, window: Rect, *, scale: float = 48.0) -> str:
    """One path per branch (unbounded ones clipped to the window),
    seeds as dots, plus the window frame."""
    margin = 0.05 * max(window.width, window.height, 1e-9)
    w_px = scale * (window.width + 2 * margin)
    h_px = scale * (window.height + 2 * margin)

    def to_px(x: float, y: float) -> tuple[float, float]:
        return (scale * (x - window.x0 + margin),
                scale * (window.y1 + margin - y))

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(w_px)}" '
        f'height="{_fmt(h_px)}" viewBox="0 0 {_fmt(w_px)} {_fmt(h_px)}">',
        '<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>'.format(
            _fmt(w_px), _fmt(h_px)),
    ]
    fx0, fy0 = to_px(window.x0, window.y1)
    lines.append(
        f'<rect x="{_fmt(fx0)}" y="{_fmt(fy0)}" '
        f'width="{_fmt(scale * window.width)}" '
        f'height="{_fmt(scale * window.height)}" '
        f'fill="none" stroke="#888888" stroke-width="1"/>')
    lengths = tess.lengths_array()
    for k, p in enumerate(tess.config.points):
        d = p.direction
        for col, sign in ((0, 1), (1, -1)):
            reach = lengths[k, col]
            if math.isinf(reach):
                clip = clip_ray_to_rect((p.x, p.y),
                                        (sign * d[0], sign * d[1]), window)
                reach = clip[1] if clip is not None else 0.0
            x1 = p.x + sign * reach * d[0]
            y1 = p.y + sign * reach * d[1]
            ax, ay = to_px(p.x, p.y)
            bx, by = to_px(x1, y1)
            lines.append(
                f'<path d="M {_fmt(ax)} {_fmt(ay)} L {_fmt(bx)} {_fmt(by)}" '
                f'stroke="{_STROKE}" stroke-width="1.5" fill="none"/>')
    for p in tess.config.points:
        cx, cy = to_px(p.x, p.y)
        lines.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="2.5" '
                     f'fill="{_SEED_FILL}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_svg(tess: Tessellation, window: Rect, path: str, *,
               scale: float = 48.0) -> None:
    """Write the SVG render of ``tess`` to ``path``."""
    doc = svg_document(tess, window, scale=scale)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(doc)
