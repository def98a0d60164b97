"""Deterministic SVG rendering for low-dimensional box geometry.

Only dimensions 1 and 2 are drawable. Output is a pure function of the
input: boxes are sorted, coordinates are printed from exact rationals at
fixed precision, and the palette is a fixed list, so identical inputs give
identical bytes.
"""

from __future__ import annotations

from fractions import Fraction

from . import torus_boxes as tb
from .torus_boxes import BoxUnion
from .tower_builder import TowerSpec

PALETTE = (
    "#3b6fb6", "#c85a4e", "#56904f", "#8e66ad",
    "#c78a3b", "#5ba2a6", "#b05c8a", "#7b7f46",
)
MARGIN = 24
SCALE = 560


def _dec(x: Fraction) -> str:
    # exact fixed-point with 4 places; SVG units, no float rounding drift
    scaled = round(Fraction(x) * 10**4)
    sign = "-" if scaled < 0 else ""
    q, r = divmod(abs(scaled), 10**4)
    return f"{sign}{q}.{r:04d}"


def _pieces(u: BoxUnion) -> list[tuple[tuple[Fraction, Fraction], ...]]:
    """Wrap-free segment products of every box, sorted for stable output."""
    out = []
    for box in u.boxes:
        per_axis = [iv.pieces() for iv in box.intervals]
        stack = [()]
        for pieces in per_axis:
            stack = [pre + (seg,) for pre in stack for seg in pieces]
        out.extend(stack)
    out.sort()
    return out


def _rect(x, y, w, h, fill, opacity="0.75") -> str:
    return (
        f'<rect x="{_dec(x)}" y="{_dec(y)}" width="{_dec(w)}" '
        f'height="{_dec(h)}" fill="{fill}" fill-opacity="{opacity}"/>'
    )


def render_box_union(u: BoxUnion, color: str = PALETTE[0]) -> str:
    """One union: a band strip for d=1, a filled square for d=2."""
    if u.d > 2:
        raise ValueError(f"dimension {u.d} is not drawable; need d <= 2")
    rows = [(color, u)]
    return _render_rows(rows, band_height=SCALE if u.d == 2 else 48)


def render_tower(spec: TowerSpec) -> str:
    """The p tower levels E + a*alpha, one color per level index a."""
    if spec.d > 2:
        raise ValueError(f"dimension {spec.d} is not drawable; need d <= 2")
    if spec.E is None:
        raise ValueError("tower has no explicit geometry to draw")
    rows = []
    for a in range(spec.p):
        shift = tuple(a * c for c in spec.alpha_star.coords)
        rows.append((PALETTE[a % len(PALETTE)], tb.translate(spec.E, shift)))
    return _render_rows(rows, band_height=SCALE if spec.d == 2 else 36)


def _render_rows(rows, band_height: int) -> str:
    d = rows[0][1].d
    width = SCALE + 2 * MARGIN
    if d == 1:
        height = MARGIN * 2 + band_height * len(rows)
    else:
        height = SCALE + 2 * MARGIN
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    for idx, (color, u) in enumerate(rows):
        if d == 1:
            y0 = MARGIN + idx * band_height
            parts.append(
                f'<rect x="{MARGIN}" y="{y0}" width="{SCALE}" '
                f'height="{band_height - 8}" fill="none" stroke="#888888"/>'
            )
            for ((lo, hi),) in _pieces(u):
                parts.append(_rect(
                    MARGIN + lo * SCALE, y0,
                    (hi - lo) * SCALE, band_height - 8, color,
                ))
        else:
            if idx == 0:
                parts.append(
                    f'<rect x="{MARGIN}" y="{MARGIN}" width="{SCALE}" '
                    f'height="{SCALE}" fill="none" stroke="#888888"/>'
                )
            for (x0, x1), (y0, y1) in _pieces(u):
                # screen y runs downward; torus axis 1 runs upward
                parts.append(_rect(
                    MARGIN + x0 * SCALE,
                    MARGIN + (1 - y1) * SCALE,
                    (x1 - x0) * SCALE, (y1 - y0) * SCALE, color,
                ))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def export_svg(obj, path: str) -> str:
    """Write the drawing for a box union or tower spec; returns the text."""
    if isinstance(obj, BoxUnion):
        text = render_box_union(obj)
    elif isinstance(obj, TowerSpec):
        text = render_tower(obj)
    else:
        raise ValueError(f"cannot draw a {type(obj).__name__}")
    with open(path, "w") as fh:
        fh.write(text)
    return text
