"""CSV, JSON and minimal SVG writers. CSV is the authoritative output."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from xml.sax.saxutils import escape

BENCH_HEADER = ("op", "l_max", "rep", "error", "seconds", "levels")
CONVERGENCE_HEADER = ("N", "error", "eoc")
NOISE_HEADER = ("op", "mode", "n", "error")
SOLVE_FIELD_HEADER_1D = ("i", "x", "u", "u_exact")
SOLVE_FIELD_HEADER_2D = ("i", "j", "x", "y", "u", "u_exact")
SOLVE_TRACE_HEADER = ("step", "t", "level", "refreshed", "add", "mul", "rot", "twin_error")
SWEEP_HEADER = ("l_refresh", "refreshes", "add", "mul", "rot", "cost", "error", "twin_error")


def fmt(value) -> str:
    """Stable text form: ints as-is, floats in 10 significant digits."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return "nan" if math.isnan(value) else format(value, ".9e")
    return str(value)


def write_csv(path: Path, header, rows) -> Path:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path: Path) -> list[dict]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")
    return path


COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def svg_plot(path: Path, series: dict, title: str, xlabel: str, ylabel: str,
             logx: bool = False, logy: bool = False, width: int = 480, height: int = 320) -> Path:
    """Line chart of ``{name: (xs, ys)}``; non-positive values are dropped on log axes."""
    def tx(v, log):
        return math.log10(v) if log else v

    pts = {}
    for name, (xs, ys) in series.items():
        keep = [(tx(x, logx), tx(y, logy)) for x, y in zip(xs, ys)
                if math.isfinite(x) and math.isfinite(y)
                and (not logx or x > 0) and (not logy or y > 0)]
        if keep:
            pts[name] = keep
    allp = [p for v in pts.values() for p in v] or [(0.0, 0.0)]
    x0, x1 = min(p[0] for p in allp), max(p[0] for p in allp)
    y0, y1 = min(p[1] for p in allp), max(p[1] for p in allp)
    x1, y1 = (x1 if x1 > x0 else x0 + 1), (y1 if y1 > y0 else y0 + 1)
    ml, mr, mt, mb = 60, 110, 30, 40
    pw, ph = width - ml - mr, height - mt - mb

    def px(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def py(y):
        return mt + ph - (y - y0) / (y1 - y0) * ph

    def lab(v, log):
        return f"1e{v:.1f}" if log else f"{v:.3g}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
           f'<text x="{ml + pw / 2}" y="18" text-anchor="middle">{escape(title)}</text>',
           f'<text x="{ml + pw / 2}" y="{height - 6}" text-anchor="middle">{escape(xlabel)}</text>',
           f'<text x="14" y="{mt + ph / 2}" text-anchor="middle" '
           f'transform="rotate(-90 14 {mt + ph / 2})">{escape(ylabel)}</text>']
    for v, anchor in ((x0, "start"), (x1, "end")):
        out.append(f'<text x="{px(v):.1f}" y="{mt + ph + 14}" text-anchor="{anchor}">{lab(v, logx)}</text>')
    for v in (y0, y1):
        out.append(f'<text x="{ml - 4}" y="{py(v) + 4:.1f}" text-anchor="end">{lab(v, logy)}</text>')
    for n, (name, p) in enumerate(pts.items()):
        c = COLOURS[n % len(COLOURS)]
        coords = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in p)
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{coords}"/>')
        out.extend(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="2.5" fill="{c}"/>' for x, y in p)
        ly = mt + 12 + 14 * n
        out.append(f'<line x1="{width - mr + 8}" y1="{ly - 4}" x2="{width - mr + 24}" y2="{ly - 4}" '
                   f'stroke="{c}" stroke-width="2"/>')
        out.append(f'<text x="{width - mr + 28}" y="{ly}">{escape(str(name))}</text>')
    out.append("</svg>")
    path.write_text("\n".join(out) + "\n")
    return path
