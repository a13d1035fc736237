"""Minimal self-rendered SVG line charts (no plotting library needed)."""

import math
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"]


def _ticks(lo, hi, log_y):
    if log_y:
        return [10.0**k for k in range(math.floor(lo), math.ceil(hi) + 1)]
    step = 10 ** math.floor(math.log10(max(hi - lo, 1e-12)))
    if (hi - lo) / step < 4:
        step /= 2
    start = math.ceil(lo / step) * step
    return list(np.arange(start, hi + step * 1e-9, step))


def svg_line_plot(series, title="", xlabel="", ylabel="", log_y=False, width=640, height=420, floor=1e-8):
    """Render ``{label: (x, y)}`` as an SVG document with one polyline per label.

    With ``log_y`` the values are clipped below at ``floor`` before taking logs.
    """
    left, right, top, bottom = 70, 160, 40, 50
    pw, ph = width - left - right, height - top - bottom
    cleaned = {}
    for label, (x, y) in series.items():
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = np.isfinite(y)
        x, y = x[keep], y[keep]
        if log_y:
            y = np.log10(np.maximum(y, floor))
        cleaned[label] = (x, y)
    xs = np.concatenate([v[0] for v in cleaned.values()]) if cleaned else np.zeros(1)
    ys = np.concatenate([v[1] for v in cleaned.values()]) if cleaned else np.zeros(1)
    if xs.size == 0:
        xs = ys = np.zeros(1)
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(v):
        return left + (v - x0) / (x1 - x0) * pw

    def py(v):
        return top + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for v in _ticks(y0, y1, log_y):
        pos = math.log10(v) if log_y else v
        if y0 - 1e-9 <= pos <= y1 + 1e-9:
            label = f"1e{int(round(pos))}" if log_y else f"{v:.3g}"
            out.append(f'<line x1="{left}" x2="{left + pw}" y1="{py(pos):.1f}" y2="{py(pos):.1f}" stroke="#ddd"/>')
            out.append(f'<text x="{left - 6}" y="{py(pos) + 4:.1f}" text-anchor="end">{label}</text>')
    for v in _ticks(x0, x1, False):
        out.append(f'<text x="{px(v):.1f}" y="{top + ph + 18}" text-anchor="middle">{v:.4g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(ylabel)}</text>'
    )
    for k, (label, (x, y)) in enumerate(cleaned.items()):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.8" points="{pts}">'
                   f"<title>{escape(str(label))}</title></polyline>")
        ly = top + 14 + 18 * k
        out.append(f'<line x1="{left + pw + 10}" x2="{left + pw + 30}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 36}" y="{ly + 4}">{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
