"""Minimal SVG line charts for profile overlays."""

from xml.sax.saxutils import escape

import numpy as np

COLORS = ("#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd")
DASHES = ("", "6,3", "2,2", "8,3,2,3", "1,3")


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, n)


def line_chart(series, title="", xlabel="", ylabel="", width=480, height=360, swap_axes=False):
    """Render ``series = [(label, x, y), ...]`` as an SVG string.

    With ``swap_axes`` the coordinate goes on the vertical axis, the layout
    used for profiles across the interface.
    """
    ml, mr, mt, mb = 70, 20, 30, 50
    pw, ph = width - ml - mr, height - mt - mb
    pts = []
    for label, x, y in series:
        x, y = np.asarray(x, float), np.asarray(y, float)
        if swap_axes:
            x, y = y, x
        pts.append((label, x, y))
    allx = np.concatenate([p[1] for p in pts]) if pts else np.array([0.0, 1.0])
    ally = np.concatenate([p[2] for p in pts]) if pts else np.array([0.0, 1.0])
    x0, x1 = float(np.nanmin(allx)), float(np.nanmax(allx))
    y0, y1 = float(np.nanmin(ally)), float(np.nanmax(ally))
    if x1 - x0 < 1e-300:
        x0, x1 = x0 - 1.0, x1 + 1.0
    if y1 - y0 < 1e-300:
        y0, y1 = y0 - 1.0, y1 + 1.0

    def sx(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
           f'<text x="{width / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>']
    for t in _ticks(x0, x1):
        out.append(f'<text x="{sx(t):.1f}" y="{mt + ph + 15}" text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{ml - 5}" y="{sy(t) + 4:.1f}" text-anchor="end">{t:.3g}</text>')
    xl, yl = (ylabel, xlabel) if swap_axes else (xlabel, ylabel)
    out.append(f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">{escape(xl)}</text>')
    out.append(f'<text x="14" y="{mt + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 14 {mt + ph / 2})">{escape(yl)}</text>')
    for k, (label, x, y) in enumerate(pts):
        c, d = COLORS[k % len(COLORS)], DASHES[k % len(DASHES)]
        path = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y) if np.isfinite(a) and np.isfinite(b))
        dash = f' stroke-dasharray="{d}"' if d else ""
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5"{dash} points="{path}"/>')
        ly = mt + 14 + 14 * k
        out.append(f'<line x1="{ml + pw - 120}" y1="{ly - 4}" x2="{ml + pw - 95}" y2="{ly - 4}" '
                   f'stroke="{c}" stroke-width="1.5"{dash}/>')
        out.append(f'<text x="{ml + pw - 90}" y="{ly}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_chart(path, *args, **kw):
    with open(path, "w") as f:
        f.write(line_chart(*args, **kw))
