"""Minimal SVG line plots, enough for transmittance and reflectance curves."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def line_plot(panels, width=720, height=300):
    """Render stacked panels as one SVG document.

    ``panels`` is a list of dicts with ``title``, ``x`` and ``series``, each
    series being ``(label, y, dashed)``.
    """
    pad_l, pad_r, pad_t, pad_b = 60, 20, 30, 40
    total_h = height * len(panels)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{total_h}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{total_h}" fill="white"/>']
    colors = ["#1f4e9c", "#c0392b", "#27823b", "#7d3c98"]
    for p, panel in enumerate(panels):
        y0 = p * height
        x = np.asarray(panel["x"], float)
        ys = [np.asarray(s[1], float) for s in panel["series"]]
        finite = np.concatenate([y[np.isfinite(y)] for y in ys] + [np.array([0.0, 1.0])])
        xmin, xmax = float(np.nanmin(x)), float(np.nanmax(x))
        ymin, ymax = float(finite.min()), float(finite.max())
        if ymax - ymin < 1e-12:
            ymax = ymin + 1
        if xmax - xmin < 1e-12:
            xmax = xmin + 1
        pw, ph = width - pad_l - pad_r, height - pad_t - pad_b

        def sx(v):
            return pad_l + (v - xmin) / (xmax - xmin) * pw

        def sy(v):
            return y0 + pad_t + (1 - (v - ymin) / (ymax - ymin)) * ph

        out.append(f'<text x="{width / 2}" y="{y0 + 18}" text-anchor="middle">{escape(panel["title"])}</text>')
        out.append(f'<rect x="{pad_l}" y="{y0 + pad_t}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>')
        for tx in _ticks(xmin, xmax):
            out.append(f'<text x="{sx(tx):.1f}" y="{y0 + height - 22}" text-anchor="middle">{tx:.3g}</text>')
        for ty in _ticks(ymin, ymax):
            out.append(f'<text x="{pad_l - 6}" y="{sy(ty) + 4:.1f}" text-anchor="end">{ty:.3g}</text>')
        for i, (label, y, dashed) in enumerate(panel["series"]):
            y = np.asarray(y, float)
            segs, cur = [], []
            for xv, yv in zip(x, y):
                if math.isfinite(yv):
                    cur.append(f"{sx(xv):.2f},{sy(yv):.2f}")
                elif cur:
                    segs.append(cur)
                    cur = []
            if cur:
                segs.append(cur)
            dash = ' stroke-dasharray="5,3"' if dashed else ""
            col = colors[i % len(colors)]
            for seg in segs:
                out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.4"{dash} points="{" ".join(seg)}"/>')
            ly = y0 + pad_t + 14 + 14 * i
            out.append(f'<line x1="{width - 150}" y1="{ly - 4}" x2="{width - 125}" y2="{ly - 4}" stroke="{col}"{dash}/>')
            out.append(f'<text x="{width - 120}" y="{ly}">{escape(label)}</text>')
        out.append(f'<text x="{width / 2}" y="{y0 + height - 6}" text-anchor="middle">omega</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
