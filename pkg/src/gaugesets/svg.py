"""Minimal SVG rendering of planar regions.

Unbounded regions are clipped to a square window; edges created by the
clipping are drawn dashed.
"""

from __future__ import annotations

import html
import math
from typing import List, Optional

import numpy as np

from .errors import DomainError
from .geometry import ConvexBody, HalfSpace, hrep_2d, intersect_halfspaces_2d
from .io import AtomRegion

SIZE = 800
PAD = 40
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def _fmt(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _window(atoms: List[AtomRegion]):
    pts = [a.vertices for a in atoms if not a.empty and a.vertices is not None and a.vertices.size]
    if pts:
        P = np.vstack(pts)
        lo, hi = P.min(axis=0), P.max(axis=0)
    else:
        lo, hi = np.zeros(2), np.zeros(2)
    unbounded = any(a.rays is not None and a.rays.size for a in atoms if not a.empty)
    span = float((hi - lo).max())
    if span == 0.0:
        span = 2.0
    margin = span * (0.5 if unbounded else 0.1)
    c = 0.5 * (lo + hi)
    half = 0.5 * span + margin
    return c - half, c + half


def _clip(atom: AtomRegion, lo, hi):
    box = [HalfSpace([1, 0], hi[0]), HalfSpace([-1, 0], -lo[0]),
           HalfSpace([0, 1], hi[1]), HalfSpace([0, -1], -lo[1])]
    if atom.vertices is not None:
        cons = hrep_2d(ConvexBody(atom.vertices, atom.rays))
    else:
        cons = list(atom.constraints)
    reg = intersect_halfspaces_2d(list(cons) + box)
    if reg.is_empty():
        return None
    return reg.vertices


def _on_box(p, q, lo, hi, tol):
    for k in range(2):
        for edge in (lo[k], hi[k]):
            if abs(p[k] - edge) <= tol and abs(q[k] - edge) <= tol:
                return True
    return False


def render(atoms: List[AtomRegion], grid: Optional[np.ndarray] = None) -> str:
    """SVG document for the nonempty planar atoms (800 by 800)."""
    for a in atoms:
        if a.dim != 2:
            raise DomainError("only planar regions can be plotted")
    lo, hi = _window(atoms)
    scale = (SIZE - 2 * PAD) / float((hi - lo).max())

    def tx(p):
        return PAD + (p[0] - lo[0]) * scale, SIZE - PAD - (p[1] - lo[1]) * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
           f'viewBox="0 0 {SIZE} {SIZE}">',
           f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>']
    tol = 1e-9 * (1.0 + float(np.abs(np.concatenate([lo, hi])).max()))
    for i, a in enumerate(atoms):
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<g id="atom-{i}">')
        out.append(f'<title>{html.escape(a.label)}</title>')
        poly = None if a.empty else _clip(a, lo, hi)
        if poly is not None and poly.shape[0]:
            pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in map(tx, poly))
            out.append(f'<polygon points="{pts}" fill="{color}" fill-opacity="0.3" stroke="none"/>')
            n = poly.shape[0]
            if n == 1:
                x, y = tx(poly[0])
                out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" fill="{color}"/>')
            for k in range(n if n > 2 else n - 1):
                p, q = poly[k], poly[(k + 1) % n]
                (x1, y1), (x2, y2) = tx(p), tx(q)
                dash = ' stroke-dasharray="6,4"' if _on_box(p, q, lo, hi, tol) else ""
                out.append(f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
                           f'stroke="{color}" stroke-width="1.5"{dash}/>')
        state = "empty" if a.empty else ""
        out.append(f'<text x="{PAD}" y="{PAD - 12}" dx="{i * 110}" font-size="12" '
                   f'fill="{color}">{html.escape(a.label)}{" (" + state + ")" if state else ""}</text>')
        out.append("</g>")
    if grid is not None:
        c = 0.5 * (lo + hi)
        r = 0.05 * float((hi - lo).max())
        out.append('<g id="grid" stroke="#888888" stroke-width="0.5">')
        for w in np.atleast_2d(grid):
            u = np.asarray(w, dtype=float) / math.hypot(*w)
            (x1, y1), (x2, y2) = tx(c), tx(c + r * u)
            out.append(f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
