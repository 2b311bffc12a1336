"""SVG 1.1 drawings of planar maps and partitions.

A RecMap is drawn as two unit squares side by side, the source partition on
the left and the arrival partition on the right, with each piece and its
image sharing a color.  Colors come from a fixed palette indexed by piece
number, so output is deterministic.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

from .geometry import Multirectangle, Rectangle, RectPartition
from .recmap import FlipMap, RecMap

__all__ = ["render_svg", "PALETTE"]

PALETTE = (
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
)

_SIZE = 300
_GAP = 40
_MARGIN = 20


def _rect_elem(r: Rectangle, x0: float, view: tuple, color: str, label: str) -> str:
    (bx, by), (sx, sy) = view
    lo, hi = r.fbox()
    x = x0 + (lo[0] - bx) * sx
    w = (hi[0] - lo[0]) * sx
    # SVG y grows downward; flip so the second axis points up
    y = _MARGIN + _SIZE - (hi[1] - by) * sy
    h = (hi[1] - lo[1]) * sy
    return (
        f'<rect x="{x:.4f}" y="{y:.4f}" width="{w:.4f}" height="{h:.4f}" '
        f'fill="{color}" fill-opacity="0.75" stroke="black" stroke-width="1">'
        f"<title>{escape(label)}</title></rect>"
    )


def _view(M: Multirectangle) -> tuple:
    lo, hi = M.bounding_box().fbox()
    return (lo[0], lo[1]), (_SIZE / (hi[0] - lo[0]), _SIZE / (hi[1] - lo[1]))


def _frame(x0: float, caption: str) -> list[str]:
    return [
        f'<rect x="{x0:.4f}" y="{_MARGIN}" width="{_SIZE}" height="{_SIZE}" fill="none" stroke="#333" stroke-width="2"/>',
        f'<text x="{x0 + _SIZE / 2:.4f}" y="{_MARGIN + _SIZE + 16}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{escape(caption)}</text>',
    ]


def _document(width: float, body: list[str]) -> str:
    height = _SIZE + 2 * _MARGIN + 10
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}">\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def render_svg(x: RecMap | FlipMap | RectPartition | Multirectangle) -> str:
    """Render a planar map (source and arrival side by side) or a partition."""
    if x.dim != 2:
        raise ValueError(f"rendering needs dimension 2, got {x.dim}")
    if isinstance(x, (RecMap, FlipMap)):
        left, right = _MARGIN, _MARGIN + _SIZE + _GAP
        view = _view(x.ambient)
        body = _frame(left, "source") + _frame(right, "arrival")
        for i, p in enumerate(x.pieces):
            color = PALETTE[i % len(PALETTE)]
            body.append(_rect_elem(p.domain, left, view, color, f"piece {i}"))
            body.append(_rect_elem(p.image, right, view, color, f"image of piece {i}"))
        return _document(2 * _SIZE + _GAP + 2 * _MARGIN, body)
    cells = x.cells if isinstance(x, RectPartition) else list(x)
    view = _view(x.target if isinstance(x, RectPartition) else x)
    body = _frame(_MARGIN, "partition")
    for i, c in enumerate(cells):
        body.append(_rect_elem(c, _MARGIN, view, PALETTE[i % len(PALETTE)], f"cell {i}"))
    return _document(_SIZE + 2 * _MARGIN, body)
