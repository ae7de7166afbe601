"""Minimal self-contained SVG line and bar charts.

Output depends only on the data (fixed number formatting, no timestamps or
random ids), so repeated runs produce identical files.
"""

from __future__ import annotations

from html import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
W, H = 720, 360
ML, MR, MT, MB = 70, 150, 40, 50


def _f(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi <= lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, n)


def _frame(title: str, xlabel: str, ylabel: str, xlim, ylim, xticks=None) -> list[str]:
    pw, ph = W - ML - MR, H - MT - MB
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" '
        'font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{ML + pw / 2:.1f}" y="{H - 12}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="16" y="{MT + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {MT + ph / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for v in _ticks(*ylim):
        y = MT + ph * (1 - (v - ylim[0]) / (ylim[1] - ylim[0]))
        out.append(f'<line x1="{ML - 4}" y1="{_f(y)}" x2="{ML}" y2="{_f(y)}" stroke="black"/>')
        out.append(f'<text x="{ML - 6}" y="{_f(y + 4)}" text-anchor="end">{v:.3g}</text>')
    for v, label in xticks if xticks is not None else [(v, f"{v:.3g}") for v in _ticks(*xlim)]:
        x = ML + pw * (v - xlim[0]) / (xlim[1] - xlim[0])
        out.append(f'<line x1="{_f(x)}" y1="{MT + ph}" x2="{_f(x)}" y2="{MT + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{_f(x)}" y="{MT + ph + 18}" text-anchor="middle">{escape(label)}</text>')
    return out


def _legend(labels) -> list[str]:
    out = []
    for i, lab in enumerate(labels):
        y = MT + 10 + 18 * i
        c = PALETTE[i % len(PALETTE)]
        out.append(f'<rect x="{W - MR + 12}" y="{y - 8}" width="14" height="10" fill="{c}"/>')
        out.append(f'<text x="{W - MR + 32}" y="{y + 1}">{escape(lab)}</text>')
    return out


def _limits(arrays) -> tuple[float, float]:
    vals = np.concatenate([np.asarray(a, dtype=float).ravel() for a in arrays])
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        return 0.0, 1.0
    lo, hi = float(vals.min()), float(vals.max())
    pad = 0.05 * (hi - lo) if hi > lo else 1.0
    return lo - pad, hi + pad


def line_chart(x, series: dict[str, np.ndarray], title: str, xlabel: str, ylabel: str, ylim=None) -> str:
    """Overlayed line plot; non-finite points are clipped to the frame."""
    x = np.asarray(x, dtype=float)
    xlim = (float(x[0]), float(x[-1])) if len(x) > 1 else (0.0, 1.0)
    ylim = ylim or _limits(series.values())
    pw, ph = W - ML - MR, H - MT - MB
    out = _frame(title, xlabel, ylabel, xlim, ylim)
    for i, (label, y) in enumerate(series.items()):
        y = np.clip(np.nan_to_num(np.asarray(y, dtype=float).ravel(), nan=ylim[0]), *ylim)
        px = ML + pw * (x - xlim[0]) / (xlim[1] - xlim[0])
        py = MT + ph * (1 - (y - ylim[0]) / (ylim[1] - ylim[0]))
        pts = " ".join(f"{_f(a)},{_f(b)}" for a, b in zip(px, py))
        out.append(f'<polyline fill="none" stroke="{PALETTE[i % len(PALETTE)]}" stroke-width="1.2" points="{pts}"/>')
    out += _legend(series.keys())
    out.append("</svg>")
    return "\n".join(out) + "\n"


def bar_chart(groups, series: dict[str, np.ndarray], title: str, xlabel: str, ylabel: str, ylim=(0.0, 100.0)) -> str:
    """Grouped bars: one group per entry of ``groups``, one bar per series."""
    groups = list(groups)
    n_g, n_s = len(groups), len(series)
    pw, ph = W - ML - MR, H - MT - MB
    slot = pw / max(n_g, 1)
    xticks = [(i + 0.5, str(g)) for i, g in enumerate(groups)]
    out = _frame(title, xlabel, ylabel, (0.0, float(n_g)), ylim, xticks)
    bw = 0.8 * slot / max(n_s, 1)
    for j, vals in enumerate(series.values()):
        for i, v in enumerate(np.asarray(vals, dtype=float)):
            v = 0.0 if not np.isfinite(v) else float(np.clip(v, *ylim))
            h = ph * (v - ylim[0]) / (ylim[1] - ylim[0])
            x = ML + slot * i + 0.1 * slot + bw * j
            out.append(
                f'<rect x="{_f(x)}" y="{_f(MT + ph - h)}" width="{_f(bw)}" height="{_f(h)}" '
                f'fill="{PALETTE[j % len(PALETTE)]}"/>'
            )
    out += _legend(series.keys())
    out.append("</svg>")
    return "\n".join(out) + "\n"
