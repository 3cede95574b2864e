"""CSV tables and grouped bar charts (hand-written SVG) of success rates."""

from __future__ import annotations

import csv
import math
from html import escape
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .roles import FIGURE_GROUPS
from .stats import SCENARIOS, RateSummary

CSV_HEADER = ["combination", "scenario", "n", "successes", "rate", "wilson_lo", "wilson_hi", "software_filter"]

PLOT_H = 300.0
BAR_W = 22.0
GROUP_GAP = 28.0
LEFT, TOP, BOTTOM, RIGHT = 60.0, 50.0, 70.0, 150.0
COLORS = ("#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3")


def _num(x: float) -> str:
    return "" if isinstance(x, float) and math.isnan(x) else f"{x:.10g}"


def write_results_csv(summaries: Iterable[RateSummary], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for s in summaries:
            w.writerow([
                s.combination, s.scenario, s.n, s.successes,
                _num(s.rate), _num(s.wilson_lo), _num(s.wilson_hi), s.software_filter,
            ])


def read_results_csv(path) -> list[RateSummary]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            f = lambda k: float(row[k]) if row[k] else float("nan")  # noqa: E731
            out.append(RateSummary(
                row["combination"], row["scenario"], int(row["n"]), int(row["successes"]),
                f("rate"), f("wilson_lo"), f("wilson_hi"), row["software_filter"],
            ))
    return out


def _label(s: RateSummary) -> str:
    return f"{s.combination} ({s.software_filter})" if s.software_filter else s.combination


def render_svg(summaries: Sequence[RateSummary], title: str = "", scenarios: Optional[Sequence[str]] = None) -> str:
    """Grouped bars: one group per combination, one bar per scenario, y from 0 to 1."""
    rows = [s for s in summaries if not s.empty]
    scenarios = list(scenarios or SCENARIOS.values())
    groups: list[str] = []
    for s in rows:
        if _label(s) not in groups:
            groups.append(_label(s))
    group_w = len(scenarios) * BAR_W + GROUP_GAP
    width = LEFT + max(1, len(groups)) * group_w + RIGHT
    height = TOP + PLOT_H + BOTTOM
    base = TOP + PLOT_H
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}" font-family="sans-serif" font-size="10">',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    for tick in range(0, 11, 2):
        y = base - PLOT_H * tick / 10
        parts.append(f'<line x1="{LEFT:.1f}" y1="{y:.3f}" x2="{width - RIGHT:.1f}" y2="{y:.3f}" stroke="#ddd"/>')
        parts.append(f'<text x="{LEFT - 6:.1f}" y="{y + 3:.3f}" text-anchor="end">{tick / 10:.1f}</text>')
    parts.append(
        f'<text x="16" y="{TOP + PLOT_H / 2:.1f}" transform="rotate(-90 16 {TOP + PLOT_H / 2:.1f})" '
        'text-anchor="middle">success probability</text>'
    )
    lookup = {(_label(s), s.scenario): s for s in rows}
    for gi, g in enumerate(groups):
        x0 = LEFT + GROUP_GAP / 2 + gi * group_w
        for si, scen in enumerate(scenarios):
            s = lookup.get((g, scen))
            if s is None:
                continue
            h = s.rate * PLOT_H
            x = x0 + si * BAR_W
            parts.append(
                f'<rect class="bar" x="{x:.3f}" y="{base - h:.3f}" width="{BAR_W - 2:.1f}" height="{h:.3f}" '
                f'fill="{COLORS[si % len(COLORS)]}" data-combination="{escape(g)}" data-scenario="{scen}" '
                f'data-rate="{s.rate:.10g}"/>'
            )
            parts.append(
                f'<text x="{x + BAR_W / 2 - 1:.3f}" y="{base - h - 3:.3f}" text-anchor="middle" '
                f'font-size="8">{s.rate:.3f}</text>'
            )
        parts.append(
            f'<text x="{x0 + len(scenarios) * BAR_W / 2:.1f}" y="{base + 16:.1f}" '
            f'text-anchor="middle">{escape(g)}</text>'
        )
    parts.append(f'<line x1="{LEFT:.1f}" y1="{base:.1f}" x2="{width - RIGHT:.1f}" y2="{base:.1f}" stroke="#000"/>')
    for si, scen in enumerate(scenarios):
        y = TOP + 14 * si
        lx = width - RIGHT + 12
        parts.append(f'<rect x="{lx:.1f}" y="{y:.1f}" width="10" height="10" fill="{COLORS[si % len(COLORS)]}"/>')
        parts.append(f'<text x="{lx + 14:.1f}" y="{y + 9:.1f}">{scen}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def figure_summaries(summaries: Sequence[RateSummary], members) -> list[RateSummary]:
    keyed = {(s.combination, s.software_filter or None, s.scenario): s for s in summaries}
    picked = []
    for combo, flt in members:
        for scen in SCENARIOS.values():
            s = keyed.get((combo, flt, scen))
            if s is not None:
                picked.append(s)
    return picked


def emit_report(summaries: Sequence[RateSummary], out_dir, groups: Optional[dict] = None) -> list[Path]:
    """Write ``results.csv`` plus one SVG per figure group that has data."""
    out = Path(out_dir)
    (out / "figures").mkdir(parents=True, exist_ok=True)
    csv_path = out / "results.csv"
    write_results_csv(summaries, csv_path)
    written = [csv_path]
    charts = dict(groups if groups is not None else FIGURE_GROUPS)
    unfiltered = [s for s in summaries if not s.software_filter]
    if unfiltered:
        combos = list(dict.fromkeys(s.combination for s in unfiltered))
        charts.setdefault("all", [(c, None) for c in combos])
    for name, members in charts.items():
        picked = [s for s in figure_summaries(summaries, members) if not s.empty]
        if not picked:
            continue
        path = out / "figures" / f"{name}.svg"
        path.write_text(render_svg(picked, title=name.replace("_", " ")))
        written.append(path)
    return written
