"""Minimal SVG line and scatter charts for run plots.

Only what the CLI needs: stacked panels, each with its own axes, ticks and a
legend. Values are written with ``repr``-free fixed formatting so files are
identical across runs and locales.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#17becf")


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str = ""
    color: str | None = None


@dataclass
class Panel:
    series: list = field(default_factory=list)
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    kind: str = "line"


def nice_ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    """Round tick positions covering ``[lo, hi]``."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return np.array([0.0])
    if hi <= lo:
        pad = abs(lo) * 0.1 or 1.0
        lo, hi = lo - pad, hi + pad
    raw = (hi - lo) / max(n, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    return np.arange(start, hi + 1e-9 * step, step)


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return "0" if abs(v) < 1e-300 else f"{v:.3g}"


def _bounds(panel: Panel):
    xs = [np.asarray(s.x, dtype=float) for s in panel.series if len(s.x)]
    ys = [np.asarray(s.y, dtype=float) for s in panel.series if len(s.y)]
    if not xs:
        return 0.0, 1.0, 0.0, 1.0
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    x, y = x[np.isfinite(x)], y[np.isfinite(y)]
    if not x.size or not y.size:
        return 0.0, 1.0, 0.0, 1.0
    return float(x.min()), float(x.max()), float(y.min()), float(y.max())


def _panel(panel: Panel, x0: float, y0: float, w: float, h: float) -> list[str]:
    ml, mr, mt, mb = 70.0, 130.0, 24.0, 36.0
    pw, ph = w - ml - mr, h - mt - mb
    xlo, xhi, ylo, yhi = _bounds(panel)
    xt, yt = nice_ticks(xlo, xhi), nice_ticks(ylo, yhi)
    xlo, xhi = min(xlo, xt[0]), max(xhi, xt[-1])
    ylo, yhi = min(ylo, yt[0]), max(yhi, yt[-1])
    if xhi == xlo:
        xhi = xlo + 1.0
    if yhi == ylo:
        yhi = ylo + 1.0

    def px(v):
        return x0 + ml + (np.asarray(v, dtype=float) - xlo) / (xhi - xlo) * pw

    def py(v):
        return y0 + mt + (1.0 - (np.asarray(v, dtype=float) - ylo) / (yhi - ylo)) * ph

    out = [
        f'<rect x="{_fmt(x0 + ml)}" y="{_fmt(y0 + mt)}" width="{_fmt(pw)}" height="{_fmt(ph)}" '
        'fill="none" stroke="#444" stroke-width="1"/>',
        f'<text x="{_fmt(x0 + ml + pw / 2)}" y="{_fmt(y0 + 16)}" text-anchor="middle" font-size="13">'
        f"{escape(panel.title)}</text>",
        f'<text x="{_fmt(x0 + ml + pw / 2)}" y="{_fmt(y0 + h - 4)}" text-anchor="middle" font-size="11">'
        f"{escape(panel.xlabel)}</text>",
        f'<text x="{_fmt(x0 + 14)}" y="{_fmt(y0 + mt + ph / 2)}" text-anchor="middle" font-size="11" '
        f'transform="rotate(-90 {_fmt(x0 + 14)} {_fmt(y0 + mt + ph / 2)})">{escape(panel.ylabel)}</text>',
    ]
    for v in xt:
        X = float(px(v))
        out.append(f'<line x1="{_fmt(X)}" y1="{_fmt(y0 + mt + ph)}" x2="{_fmt(X)}" y2="{_fmt(y0 + mt + ph + 4)}" stroke="#444"/>')
        out.append(f'<text x="{_fmt(X)}" y="{_fmt(y0 + mt + ph + 16)}" text-anchor="middle" font-size="10">{_tick_label(v)}</text>')
    for v in yt:
        Y = float(py(v))
        out.append(f'<line x1="{_fmt(x0 + ml - 4)}" y1="{_fmt(Y)}" x2="{_fmt(x0 + ml + pw)}" y2="{_fmt(Y)}" stroke="#ddd"/>')
        out.append(f'<text x="{_fmt(x0 + ml - 6)}" y="{_fmt(Y + 3)}" text-anchor="end" font-size="10">{_tick_label(v)}</text>')
    for k, s in enumerate(panel.series):
        color = s.color or PALETTE[k % len(PALETTE)]
        x, y = np.asarray(s.x, dtype=float), np.asarray(s.y, dtype=float)
        ok = np.isfinite(x) & np.isfinite(y)
        X, Y = px(x[ok]), py(y[ok])
        if panel.kind == "scatter":
            out.extend(f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="2" fill="{color}"/>' for a, b in zip(X, Y))
        elif X.size:
            pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(X, Y))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        if s.label:
            ly = y0 + mt + 12 + 14 * k
            lx = x0 + ml + pw + 10
            out.append(f'<rect x="{_fmt(lx)}" y="{_fmt(ly - 8)}" width="10" height="10" fill="{color}"/>')
            out.append(f'<text x="{_fmt(lx + 14)}" y="{_fmt(ly + 1)}" font-size="10">{escape(s.label)}</text>')
    return out


def render(panels, width: float = 720.0, panel_height: float = 220.0, title: str = "") -> str:
    """Stack ``panels`` vertically into one SVG document."""
    top = 24.0 if title else 0.0
    height = top + panel_height * len(panels)
    body = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}" font-family="sans-serif">',
        f'<rect width="{_fmt(width)}" height="{_fmt(height)}" fill="white"/>',
    ]
    if title:
        body.append(f'<text x="{_fmt(width / 2)}" y="17" text-anchor="middle" font-size="15">{escape(title)}</text>')
    for i, p in enumerate(panels):
        body.extend(_panel(p, 0.0, top + i * panel_height, width, panel_height))
    body.append("</svg>")
    return "\n".join(body) + "\n"


def write(path, panels, **kw) -> Path:
    path = Path(path)
    path.write_text(render(panels, **kw), encoding="utf-8")
    return path
