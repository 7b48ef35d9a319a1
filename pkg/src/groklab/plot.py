"""Deterministic SVG line charts.

Coordinates are printed with fixed precision so identical input gives
byte-identical files.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .io import atomic_write_text

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=64, right=64, top=32, bottom=48)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


class PlotDataError(ValueError):
    pass


def _check(name: str, xs: np.ndarray, ys: np.ndarray, log_x: bool) -> None:
    if xs.shape != ys.shape or xs.ndim != 1 or xs.size == 0:
        raise PlotDataError(f"series {name!r}: x and y must be equal-length nonempty 1-D")
    bad = np.flatnonzero(~(np.isfinite(xs) & np.isfinite(ys)))
    if bad.size:
        raise PlotDataError(f"series {name!r}: non-finite values at indices {bad.tolist()}")
    if log_x:
        bad = np.flatnonzero(xs <= 0)
        if bad.size:
            raise PlotDataError(f"series {name!r}: nonpositive x on a log axis at indices {bad.tolist()}")


def _range(vals: list[np.ndarray]) -> tuple[float, float]:
    lo = min(float(v.min()) for v in vals)
    hi = max(float(v.max()) for v in vals)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def render_svg(series, log_x: bool = False, right_axis=(), title: str = "",
               x_label: str = "", y_label: str = "", y2_label: str = "") -> str:
    """SVG text for ``series``: a mapping (or list of pairs) name -> (xs, ys).

    Series named in ``right_axis`` are scaled against a second y axis.
    """
    items = list(series.items()) if isinstance(series, dict) else list(series)
    if not items:
        raise PlotDataError("no series to plot")
    data = []
    for name, (xs, ys) in items:
        xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
        _check(name, xs, ys, log_x)
        data.append((str(name), np.log10(xs) if log_x else xs, ys, name in right_axis))

    x0, x1 = _range([d[1] for d in data])
    left = [d[2] for d in data if not d[3]]
    right = [d[2] for d in data if d[3]]
    yl = _range(left) if left else (0.0, 1.0)
    yr = _range(right) if right else None

    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(x):
        return MARGIN["left"] + pw * (x - x0) / (x1 - x0)

    def sy(y, rng):
        return MARGIN["top"] + ph * (1.0 - (y - rng[0]) / (rng[1] - rng[0]))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
           f'fill="none" stroke="black"/>']
    if title:
        out.append(f'<text x="{WIDTH / 2:.2f}" y="20" text-anchor="middle">{escape(title)}</text>')
    for t in _ticks(x0, x1):
        lab = f"{10 ** t:.3g}" if log_x else f"{t:.4g}"
        out.append(f'<text x="{sx(t):.2f}" y="{HEIGHT - MARGIN["bottom"] + 16}" '
                   f'text-anchor="middle">{lab}</text>')
    for t in _ticks(*yl):
        out.append(f'<text x="{MARGIN["left"] - 6}" y="{sy(t, yl) + 4:.2f}" '
                   f'text-anchor="end">{t:.4g}</text>')
    if yr is not None:
        for t in _ticks(*yr):
            out.append(f'<text x="{WIDTH - MARGIN["right"] + 6}" y="{sy(t, yr) + 4:.2f}" '
                       f'text-anchor="start">{t:.4g}</text>')
    if x_label:
        out.append(f'<text x="{WIDTH / 2:.2f}" y="{HEIGHT - 8}" text-anchor="middle">'
                   f'{escape(x_label)}{" (log)" if log_x else ""}</text>')
    if y_label:
        out.append(f'<text x="14" y="{HEIGHT / 2:.2f}" text-anchor="middle" '
                   f'transform="rotate(-90 14 {HEIGHT / 2:.2f})">{escape(y_label)}</text>')
    if y2_label and yr is not None:
        xr = WIDTH - 14
        out.append(f'<text x="{xr}" y="{HEIGHT / 2:.2f}" text-anchor="middle" '
                   f'transform="rotate(90 {xr} {HEIGHT / 2:.2f})">{escape(y2_label)}</text>')

    for i, (name, xs, ys, on_right) in enumerate(data):
        rng = yr if on_right else yl
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{sx(x):.2f},{sy(y, rng):.2f}" for x, y in zip(xs, ys))
        dash = ' stroke-dasharray="5,3"' if on_right else ""
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} '
                   f'points="{pts}"/>')
        ly = MARGIN["top"] + 14 + 14 * i
        lx = MARGIN["left"] + 8
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 18}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="1.5"{dash}/>')
        suffix = " (right)" if on_right else ""
        out.append(f'<text x="{lx + 24}" y="{ly}">{escape(name)}{suffix}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(series, path: str | Path, log_x: bool = False, right_axis=(), **labels) -> Path:
    path = Path(path)
    atomic_write_text(path, render_svg(series, log_x=log_x, right_axis=right_axis, **labels))
    return path


def plot_trace(trace, path: str | Path, log_x: bool = False) -> Path:
    """Train/test accuracy on the left axis, lambda_proxy on the right."""
    steps = trace.column("step")
    if log_x:
        steps = steps + 1.0  # step 0 has no log position
    series = {
        "train_acc": (steps, trace.column("train_acc")),
        "test_acc": (steps, trace.column("test_acc")),
        "lambda_proxy": (steps, trace.column("lambda_proxy")),
    }
    series = {k: v for k, v in series.items() if np.isfinite(v[1]).all()}
    return emit_plot(series, path, log_x=log_x, right_axis=("lambda_proxy",),
                     x_label="step + 1" if log_x else "step", y_label="accuracy",
                     y2_label="lambda_proxy")


__all__ = ["emit_plot", "render_svg", "plot_trace", "PlotDataError"]
