"""Budget-vs-return line plots written as plain SVG.

Output is a pure function of the summary rows, so identical CSV input gives
byte-identical files.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Dict, List, Sequence

from .bench import SummaryRow, read_summary

WIDTH, HEIGHT = 480, 320
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 60, 110, 30, 45
COLORS = {"mcts": "#d62728", "mcts-t": "#1f77b4", "mcts-t+": "#2ca02c"}
FALLBACK = ("#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def _f(x: float) -> str:
    return f"{x:.2f}"


def render_svg(env: str, rows: Sequence[SummaryRow]) -> str:
    """One line per variant: x = budget (log2 scale), y = mean return with a
    shaded one-standard-error band."""
    budgets = sorted({r.budget for r in rows})
    lo = min(r.mean_return - r.stderr for r in rows)
    hi = max(r.mean_return + r.stderr for r in rows)
    if hi - lo < 1e-9:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    xmin, xmax = math.log2(budgets[0]), math.log2(budgets[-1])
    if xmax == xmin:
        xmin, xmax = xmin - 1, xmax + 1
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def sx(b: float) -> float:
        return MARGIN_L + (math.log2(b) - xmin) / (xmax - xmin) * pw

    def sy(v: float) -> float:
        return MARGIN_T + (hi - v) / (hi - lo) * ph

    out: List[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{_f(MARGIN_L + pw / 2)}" y="18" text-anchor="middle" font-size="13">{env}</text>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for b in budgets:
        x = sx(b)
        out.append(f'<line x1="{_f(x)}" y1="{MARGIN_T + ph}" x2="{_f(x)}" y2="{MARGIN_T + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{_f(x)}" y="{MARGIN_T + ph + 16}" text-anchor="middle">{b}</text>')
    for k in range(5):
        v = lo + (hi - lo) * k / 4
        y = sy(v)
        out.append(f'<line x1="{MARGIN_L - 4}" y1="{_f(y)}" x2="{MARGIN_L}" y2="{_f(y)}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_L - 6}" y="{_f(y + 4)}" text-anchor="end">{v:.3g}</text>')
    out.append(f'<text x="{_f(MARGIN_L + pw / 2)}" y="{HEIGHT - 8}" text-anchor="middle">traces per step</text>')
    out.append(f'<text x="14" y="{_f(MARGIN_T + ph / 2)}" text-anchor="middle" '
               f'transform="rotate(-90 14 {_f(MARGIN_T + ph / 2)})">mean return</text>')

    by_variant: Dict[str, List[SummaryRow]] = {}
    for r in sorted(rows, key=lambda r: (r.variant, r.budget)):
        by_variant.setdefault(r.variant, []).append(r)
    for i, (variant, vrows) in enumerate(by_variant.items()):
        color = COLORS.get(variant, FALLBACK[i % len(FALLBACK)])
        upper = [f"{_f(sx(r.budget))},{_f(sy(r.mean_return + r.stderr))}" for r in vrows]
        lower = [f"{_f(sx(r.budget))},{_f(sy(r.mean_return - r.stderr))}" for r in reversed(vrows)]
        out.append(f'<polygon points="{" ".join(upper + lower)}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
        line = " ".join(f"{_f(sx(r.budget))},{_f(sy(r.mean_return))}" for r in vrows)
        out.append(f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="2"/>')
        ly = MARGIN_T + 12 + 16 * i
        lx = MARGIN_L + pw + 10
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 18}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 22}" y="{ly + 4}">{variant}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_summary(summary_csv, out_dir) -> List[Path]:
    """Write ``<env>.svg`` for every environment in a summary CSV."""
    rows = read_summary(summary_csv)
    if not rows:
        raise ValueError(f"{summary_csv}: no rows to plot")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    by_env: Dict[str, List[SummaryRow]] = {}
    for r in rows:
        by_env.setdefault(r.env, []).append(r)
    written = []
    for env in sorted(by_env):
        path = out_dir / f"{env}.svg"
        path.write_text(render_svg(env, by_env[env]))
        written.append(path)
    return written
