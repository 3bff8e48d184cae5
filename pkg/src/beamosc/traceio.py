"""Deterministic file output: trace/envelope CSV, row tables, and SVG plots.

Identical inputs produce byte-identical files: floats are written with
repr() (shortest round-trip form), row order is the natural iteration
order, and nothing timestamps the output.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .simulate import Trace

_SVG_W, _SVG_H = 900, 360
_PAD_L, _PAD_R, _PAD_T, _PAD_B = 64, 16, 28, 40
_MAX_POLYLINE = 4000  # plotted samples cap; traces are strided down to this


def write_trace_csv(trace: Trace, path) -> None:
    """Waveforms as CSV with header t,v_in,v_out,x."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("t,v_in,v_out,x\n")
        for t, vi, vo, x in zip(trace.time, trace.v_in, trace.v_out, trace.x):
            fh.write(f"{float(t)!r},{float(vi)!r},{float(vo)!r},{float(x)!r}\n")


def write_envelope_csv(env: np.ndarray, path) -> None:
    """Envelope rows as CSV with header t,amplitude."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("t,amplitude\n")
        for t, a in env:
            fh.write(f"{float(t)!r},{float(a)!r}\n")


def write_rows_csv(rows: list[dict], path) -> None:
    """A list of uniform dicts as CSV; None becomes an empty cell."""
    if not rows:
        raise ValueError("no rows to write")
    fieldnames = list(rows[0])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if v is None else v) for k, v in row.items()})


def write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _polyline(xs: np.ndarray, ys: np.ndarray) -> str:
    return " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))


def write_trace_svg(trace: Trace, path, env: np.ndarray | None = None,
                    title: str = "startup transient") -> None:
    """Self-contained SVG plot of v_out against time, with optional envelope."""
    stride = max(1, len(trace.time) // _MAX_POLYLINE)
    t = trace.time[::stride]
    v = trace.v_out[::stride]
    t0, t1 = float(t[0]), float(t[-1])
    vmax = float(np.abs(v).max())
    if env is not None and len(env):
        vmax = max(vmax, float(env[:, 1].max()))
    if vmax == 0.0:
        vmax = 1.0
    span_t = (t1 - t0) or 1.0
    plot_w = _SVG_W - _PAD_L - _PAD_R
    plot_h = _SVG_H - _PAD_T - _PAD_B
    y_mid = _PAD_T + plot_h / 2.0

    def sx(ts):
        return _PAD_L + (ts - t0) / span_t * plot_w

    def sy(vs):
        return y_mid - vs / vmax * (plot_h / 2.0)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" '
        f'height="{_SVG_H}" viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<text x="{_PAD_L}" y="18" font-family="sans-serif" font-size="13">'
        f"{title}</text>",
        f'<line x1="{_PAD_L}" y1="{y_mid:.2f}" x2="{_SVG_W - _PAD_R}" '
        f'y2="{y_mid:.2f}" stroke="#bbb"/>',
        f'<line x1="{_PAD_L}" y1="{_PAD_T}" x2="{_PAD_L}" '
        f'y2="{_SVG_H - _PAD_B}" stroke="#bbb"/>',
        f'<polyline fill="none" stroke="#1f77b4" stroke-width="1" '
        f'points="{_polyline(sx(t), sy(v))}"/>',
    ]
    if env is not None and len(env):
        parts.append(
            f'<polyline fill="none" stroke="#d62728" stroke-width="1.5" '
            f'points="{_polyline(sx(env[:, 0]), sy(env[:, 1]))}"/>'
        )
    parts.extend([
        f'<text x="{_PAD_L}" y="{_SVG_H - 12}" font-family="sans-serif" '
        f'font-size="11">t = {t0:.4g} .. {t1:.4g} s</text>',
        f'<text x="8" y="{_PAD_T + 10}" font-family="sans-serif" '
        f'font-size="11">{vmax:.3g} V</text>',
        f'<text x="8" y="{_SVG_H - _PAD_B}" font-family="sans-serif" '
        f'font-size="11">{-vmax:.3g} V</text>',
        "</svg>",
    ])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")
