"""SVG pictures of one- and two-parameter decompositions.

Rationals become decimals with 12 significant digits here and nowhere
else.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cmp_to_key
from xml.sax.saxutils import escape

WIDTH = 480
HEIGHT = 480
MARGIN = 40
PALETTE = ("#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac")


def _num(x: float) -> str:
    return f"{x:.12g}"


def _colors(labels: list) -> dict:
    return {lab: PALETTE[i % len(PALETTE)] for i, lab in enumerate(sorted(set(labels)))}


def _order_polygon(pts: list) -> list:
    """Vertices of a convex polygon in counterclockwise order (exact)."""
    if len(pts) < 3:
        return pts
    cx = sum(p[0] for p in pts) / len(pts)
    cy = sum(p[1] for p in pts) / len(pts)

    def quadrant_key(p):
        dx, dy = p[0] - cx, p[1] - cy
        half = 0 if (dy > 0 or (dy == 0 and dx > 0)) else 1
        return half, dx, dy

    def cmp(a, b):
        ka, kb = quadrant_key(a), quadrant_key(b)
        if ka[0] != kb[0]:
            return ka[0] - kb[0]
        cross = ka[1] * kb[2] - ka[2] * kb[1]
        return -1 if cross > 0 else (1 if cross < 0 else 0)

    return sorted(pts, key=cmp_to_key(cmp))


def decomposition_svg(dec: dict, layer: str = "cells") -> str:
    """Render the ``cells`` (or ``canonical_cells``) layer of a decomposition document."""
    cells = dec[layer]
    verts = [tuple(Fraction(x) for x in v) for c in cells for v in c["closure"]["vertices"]]
    if not verts:
        raise ValueError("nothing to plot")
    dim = len(verts[0])
    if dim not in (1, 2):
        raise ValueError("plots are available for one or two boundary parameters")

    def label(c):
        mid = c.get("minimal_id")
        return c["canonical_id"] + ("" if mid is None else " | " + ",".join(mid))

    colors = _colors([label(c) for c in cells])
    lo = [min(v[i] for v in verts) for i in range(dim)]
    hi = [max(v[i] for v in verts) for i in range(dim)]
    span = [(hi[i] - lo[i]) or Fraction(1) for i in range(dim)]

    def sx(x):
        return MARGIN + float((x - lo[0]) / span[0]) * (WIDTH - 2 * MARGIN)

    def sy(y):
        if dim == 1:
            return HEIGHT / 2
        return HEIGHT - MARGIN - float((y - lo[1]) / span[1]) * (HEIGHT - 2 * MARGIN)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    # draw full-dimensional pieces first so lower-dimensional cells stay visible
    order = sorted(range(len(cells)), key=lambda i: -len(cells[i]["closure"]["vertices"]))
    for i in order:
        c = cells[i]
        pts = [tuple(Fraction(x) for x in v) for v in c["closure"]["vertices"]]
        col = colors[label(c)]
        title = f"<title>{escape(label(c))}</title>"
        if dim == 1:
            pts.sort()
            if len(pts) == 1:
                out.append(f'<circle cx="{_num(sx(pts[0][0]))}" cy="{_num(sy(0))}" r="5" fill="{col}">{title}</circle>')
            else:
                out.append(
                    f'<line x1="{_num(sx(pts[0][0]))}" y1="{_num(sy(0))}" x2="{_num(sx(pts[-1][0]))}" '
                    f'y2="{_num(sy(0))}" stroke="{col}" stroke-width="6">{title}</line>'
                )
            continue
        if len(pts) == 1:
            out.append(f'<circle cx="{_num(sx(pts[0][0]))}" cy="{_num(sy(pts[0][1]))}" r="4" fill="{col}">{title}</circle>')
        elif len(pts) == 2 or _collinear(pts):
            pts.sort()
            out.append(
                f'<line x1="{_num(sx(pts[0][0]))}" y1="{_num(sy(pts[0][1]))}" x2="{_num(sx(pts[-1][0]))}" '
                f'y2="{_num(sy(pts[-1][1]))}" stroke="{col}" stroke-width="3">{title}</line>'
            )
        else:
            poly = " ".join(f"{_num(sx(x))},{_num(sy(y))}" for x, y in _order_polygon(pts))
            out.append(f'<polygon points="{poly}" fill="{col}" fill-opacity="0.6" stroke="black" stroke-width="0.5">{title}</polygon>')
    y = 16
    for lab, col in colors.items():
        out.append(f'<rect x="8" y="{y - 10}" width="10" height="10" fill="{col}"/>')
        out.append(f'<text x="22" y="{y}" font-size="11" font-family="sans-serif">{escape(lab)}</text>')
        y += 14
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _collinear(pts) -> bool:
    a = pts[0]
    for b in pts[1:]:
        if b != a:
            break
    else:
        return True
    return all((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) == 0 for p in pts)
