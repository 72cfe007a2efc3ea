"""Text, CSV, markdown and SVG renderings of gap reports and trajectories.

Output is pure and byte-stable: no locale, '.' as decimal separator, LF line
endings, and every displayed number is the engine value rounded half away
from zero to the shown precision.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

from .domain import (
    ALL_LEVELS,
    ASSOCIATE_LEVELS,
    LEADERSHIP_LEVELS,
    OVERALL,
    PARTNER_LEVELS,
    JobLevel,
    PopulationSnapshot,
    Segment,
    aggregate,
    round_half_away,
)
from .equilibrium import THRESHOLD, GapReport
from .flows import Trajectory
from .projection import trajectory_r30

FORMATS = ("text", "csv", "markdown")
EXTENSIONS = {"text": "txt", "csv": "csv", "markdown": "md"}


@dataclass(frozen=True)
class RowSpec:
    key: str
    label: str
    unit: str  # "count" or "percent"


SUPPLY_ROWS = (
    RowSpec("population", "Population", "count"),
    RowSpec("population_distribution", "Population distribution", "percent"),
    RowSpec("demand", "Demand", "count"),
    RowSpec("demand_distribution", "Demand distribution", "percent"),
    RowSpec("demand_in_proportion", "Demand in proportion", "percent"),
    RowSpec("demand_30", "30% of demand", "count"),
    RowSpec("available", "Available", "count"),
    RowSpec("available_distribution", "Available distribution", "percent"),
    RowSpec("available_in_proportion", "Available in proportion", "percent"),
)
SUBGROUP_ROWS = (
    RowSpec("available", "Available", "count"),
    RowSpec("proportion_of_available", "Proportion of available", "percent"),
    RowSpec("fill_capacity", "Fill capacity", "percent"),
    RowSpec("short_to_30", "Short % to 30%", "percent"),
    RowSpec("r30", "R30", "percent"),
)

VIEW_LABELS = {
    Segment.ALL: "Overall",
    Segment.WHITE_FEMALE: "White female",
    Segment.MINORITY: "Minority",
    Segment.FEMALE: "Female",
    Segment.MALE: "Male",
    Segment.WHITE: "White",
    Segment.WHITE_MALE: "White male",
    Segment.MINORITY_FEMALE: "Minority female",
    Segment.MINORITY_MALE: "Minority male",
}


def artifact_name(band: str, view: str, kind: str, ext: str) -> str:
    return f"{band}-{view}-{kind}.{ext}"


def format_value(value: float | None, unit: str, precision: int = 0) -> str:
    """Displayed form of one cell; percentages carry no '%' sign here."""
    if value is None:
        return ""
    if unit == "percent":
        return f"{round_half_away(100.0 * value, precision):.{precision}f}"
    return f"{round_half_away(value):.0f}"


@dataclass(frozen=True)
class TableSection:
    title: str
    view: Segment
    rows: tuple[tuple[RowSpec, tuple[float | None, ...]], ...]


def table_sections(report: GapReport) -> list[TableSection]:
    """Supply table followed by one block per subgroup view, in display order."""
    band = report.band.label if report.band else "dataset"
    sections = [
        TableSection(
            f"Supply chain, {band}",
            OVERALL,
            tuple((spec, report.supply_row(spec.key)) for spec in SUPPLY_ROWS),
        )
    ]
    for view in report.subgroup_views:
        sections.append(
            TableSection(
                f"{VIEW_LABELS.get(view, view.value)} availability, {band}",
                view,
                tuple((spec, report.subgroup_row(view, spec.key)) for spec in SUBGROUP_ROWS),
            )
        )
    return sections


def _cells(spec: RowSpec, values, precision: int, with_sign: bool) -> list[str]:
    out = []
    for v in values:
        s = format_value(v, spec.unit, precision)
        if not s:
            s = "-" if with_sign else ""
        elif spec.unit == "percent" and with_sign:
            s += "%"
        out.append(s)
    return out


def render_gap_table(report: GapReport, fmt: str = "text", precision: int = 0) -> bytes:
    if fmt not in FORMATS:
        raise ValueError(f"unknown table format {fmt!r}; choose from {', '.join(FORMATS)}")
    if precision < 0:
        raise ValueError("precision must be >= 0")
    sections = table_sections(report)
    headers = [c.label for c in report.columns]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["section", "row", "unit", *[c.value for c in report.columns]])
        for sec in sections:
            for spec, values in sec.rows:
                w.writerow([sec.view.value, spec.key, spec.unit, *_cells(spec, values, precision, False)])
        return buf.getvalue().encode("utf-8")
    lines: list[str] = []
    for i, sec in enumerate(sections):
        body = [[spec.label, *_cells(spec, values, precision, True)] for spec, values in sec.rows]
        if i:
            lines.append("")
        if fmt == "markdown":
            lines.append(f"### {sec.title}")
            lines.append("")
            lines.append("| " + " | ".join(["", *headers]) + " |")
            lines.append("|" + "|".join([":---", *["---:"] * len(headers)]) + "|")
            lines.extend("| " + " | ".join(r) + " |" for r in body)
        else:
            table = [["", *headers], *body]
            widths = [max(len(r[j]) for r in table) for j in range(len(table[0]))]
            lines.append(sec.title)
            lines.append("=" * len(sec.title))
            for r in table:
                cells = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
                lines.append("  ".join(cells).rstrip())
    return ("\n".join(lines) + "\n").encode("utf-8")


_HEADING = re.compile(r"^### (.*)$")


def parse_markdown_table(data: bytes) -> dict[str, dict[str, list[float | None]]]:
    """Read numbers back from :func:`render_gap_table` markdown output.

    Returns ``{section title: {row label: [values]}}``; percentages come back
    in percentage points, missing cells as None.
    """
    out: dict[str, dict[str, list[float | None]]] = {}
    current = None
    for line in data.decode("utf-8").split("\n"):
        m = _HEADING.match(line)
        if m:
            current = out.setdefault(m.group(1), {})
            continue
        if current is None or not line.startswith("|"):
            continue
        cells = [c.strip() for c in line.strip().strip("|").split("|")]
        if not cells[0] or set(cells[0]) <= set(":-"):
            continue
        current[cells[0]] = [None if c == "-" else float(c.rstrip("%")) for c in cells[1:]]
    return out


# --------------------------------------------------------------------- SVG ---

PALETTE = ("#4c4c4c", "#9a9a9a", "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b")
_W, _H = 760, 420
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 20, 50, 90


def _n(x: float) -> str:
    s = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _svg(body: list[str], title: str) -> bytes:
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f"<title>{escape(title)}</title>",
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="#ffffff"/>',
        f'<text x="{_W // 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">'
        f"{escape(title)}</text>",
    ]
    return ("\n".join(head + body + ["</svg>"]) + "\n").encode("utf-8")


def _nice_step(span: float) -> float:
    raw = span / 5.0 if span > 0 else 1.0
    mag = 10.0 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if m * mag >= raw:
            return m * mag
    return 10 * mag


def _axis(lo: float, hi: float, fmt) -> tuple[float, float, list[str], callable]:
    lo, hi = min(lo, 0.0), max(hi, 0.0)
    if hi == lo:
        hi = lo + 1.0
    step = _nice_step(hi - lo)
    lo_t = step * (lo // step)
    hi_t = step * -(-hi // step)
    plot_h = _H - _TOP - _BOTTOM

    def y(v: float) -> float:
        return _TOP + plot_h * (hi_t - v) / (hi_t - lo_t)

    out = [
        f'<line x1="{_LEFT}" y1="{_n(_TOP)}" x2="{_LEFT}" y2="{_n(_H - _BOTTOM)}" stroke="#000000"/>',
    ]
    k = 0
    while True:
        v = lo_t + k * step
        if v > hi_t + 1e-9 * step:
            break
        out.append(
            f'<line x1="{_LEFT - 4}" y1="{_n(y(v))}" x2="{_W - _RIGHT}" y2="{_n(y(v))}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_LEFT - 8}" y="{_n(y(v) + 4)}" text-anchor="end" font-family="sans-serif" '
            f'font-size="11">{escape(fmt(v))}</text>'
        )
        k += 1
    out.append(
        f'<line x1="{_LEFT}" y1="{_n(y(0.0))}" x2="{_W - _RIGHT}" y2="{_n(y(0.0))}" stroke="#000000"/>'
    )
    return lo_t, hi_t, out, y


def _legend(labels: Sequence[str], y0: float) -> list[str]:
    out = []
    x = _LEFT
    for i, label in enumerate(labels):
        out.append(f'<rect x="{x}" y="{_n(y0)}" width="12" height="12" fill="{PALETTE[i % len(PALETTE)]}"/>')
        out.append(
            f'<text x="{x + 16}" y="{_n(y0 + 10)}" font-family="sans-serif" font-size="11">{escape(label)}</text>'
        )
        x += 22 + 7 * len(label)
    return out


def render_supply_chart(report: GapReport) -> bytes:
    """Grouped bars per column: demand, 30% of demand and availability per view."""
    series = [("Demand", lambda c: report.demand(c)), ("30% of demand", lambda c: THRESHOLD * report.demand(c))]
    for view in report.views:
        series.append((f"Available ({VIEW_LABELS.get(view, view.value)})", lambda c, v=view: report.available(c, v)))
    cols = list(report.columns)
    values = [[fn(c) for _, fn in series] for c in cols]
    flat = [v for row in values for v in row]
    _, _, axis, y = _axis(min(flat), max(flat), lambda v: f"{round_half_away(v):.0f}")
    plot_w = _W - _LEFT - _RIGHT
    group_w = plot_w / len(cols)
    bar_w = group_w * 0.8 / len(series)
    body = list(axis)
    for gi, (col, row) in enumerate(zip(cols, values)):
        x0 = _LEFT + gi * group_w + group_w * 0.1
        body.append(f'<g id="group-{col.value}">')
        for si, v in enumerate(row):
            top, bottom = (y(v), y(0.0)) if v >= 0 else (y(0.0), y(v))
            body.append(
                f'<rect x="{_n(x0 + si * bar_w)}" y="{_n(top)}" width="{_n(bar_w * 0.92)}" '
                f'height="{_n(bottom - top)}" fill="{PALETTE[si % len(PALETTE)]}">'
                f"<title>{escape(series[si][0])}: {round_half_away(v):.0f}</title></rect>"
            )
        body.append(
            f'<text x="{_n(x0 + group_w * 0.4)}" y="{_H - _BOTTOM + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{escape(col.label)}</text>'
        )
        body.append("</g>")
    body.extend(_legend([s[0] for s in series], _H - _BOTTOM + 34))
    band = report.band.label if report.band else "dataset"
    return _svg(body, f"Leadership demand and availability, {band}")


def trajectory_rows(trajectory: Trajectory, view: Segment) -> list[tuple[int, float | None, float, float, float]]:
    """(year, r30, total population, leadership population, view leadership population)."""
    r30 = trajectory_r30(trajectory, view)
    return [
        (
            snap.t,
            r,
            snap.total(),
            aggregate(snap, LEADERSHIP_LEVELS, Segment.ALL),
            aggregate(snap, LEADERSHIP_LEVELS, view),
        )
        for snap, r in zip(trajectory.snapshots, r30)
    ]


def render_trajectory(trajectory: Trajectory, view: Segment, label: str = "") -> tuple[bytes, bytes]:
    """r30-over-time line chart (SVG) and its data (CSV, full float precision)."""
    rows = trajectory_rows(trajectory, view)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["year", "r30", "population", "leadership", "view_leadership"])
    for t, r, pop, lead, lead_v in rows:
        w.writerow([t, "" if r is None else repr(r), repr(pop), repr(lead), repr(lead_v)])
    data = buf.getvalue().encode("utf-8")

    pts = [(t, r) for t, r, *_ in rows if r is not None]
    vals = [r for _, r in pts] or [0.0]
    _, _, axis, y = _axis(min(vals), max(vals), lambda v: f"{round_half_away(100 * v):.0f}%")
    t0, t1 = rows[0][0], rows[-1][0]
    plot_w = _W - _LEFT - _RIGHT

    def x(t: int) -> float:
        return _LEFT + plot_w * ((t - t0) / (t1 - t0) if t1 > t0 else 0.5)

    body = list(axis)
    if pts:
        coords = " ".join(f"{_n(x(t))},{_n(y(r))}" for t, r in pts)
        body.append(f'<polyline points="{coords}" fill="none" stroke="{PALETTE[3]}" stroke-width="2"/>')
    n_ticks = min(10, t1 - t0) or 1
    for k in range(n_ticks + 1):
        t = t0 + round((t1 - t0) * k / n_ticks)
        body.append(
            f'<text x="{_n(x(t))}" y="{_H - _BOTTOM + 16}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="11">{t}</text>'
        )
    body.append(
        f'<text x="{_W // 2}" y="{_H - _BOTTOM + 36}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12">year</text>'
    )
    name = VIEW_LABELS.get(view, view.value)
    title = f"Leadership R30 over time, {name}" + (f" ({label})" if label else "")
    return _svg(body, title), data


_DEMOGRAPHIC_ROWS = (
    ("Associate", ASSOCIATE_LEVELS),
    ("Counsel", frozenset({JobLevel.COUNSEL})),
    ("Partner", PARTNER_LEVELS),
    ("Non-equity partner", frozenset({JobLevel.NONEQUITY_PARTNER})),
    ("Equity partner", frozenset({JobLevel.EQUITY_PARTNER})),
    ("Leadership", LEADERSHIP_LEVELS),
    ("Total", ALL_LEVELS),
)


def render_demographics(snapshot: PopulationSnapshot, fmt: str = "text", precision: int = 0) -> bytes:
    """Headcount, share of total, female share and minority share per level group."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown table format {fmt!r}")
    total = snapshot.total()
    header = ["", "Headcount", "Share of total", "Female", "Minority"]
    body = []
    for label, levels in _DEMOGRAPHIC_ROWS:
        n = aggregate(snapshot, levels, Segment.ALL)
        ratios = [
            n / total if total else None,
            aggregate(snapshot, levels, Segment.FEMALE) / n if n else None,
            aggregate(snapshot, levels, Segment.MINORITY) / n if n else None,
        ]
        body.append((label, n, ratios))
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["group", "headcount", "share_of_total", "female", "minority"])
        for label, n, ratios in body:
            w.writerow([label, format_value(n, "count"), *[format_value(r, "percent", precision) for r in ratios]])
        return buf.getvalue().encode("utf-8")
    rows = [
        [label, format_value(n, "count"), *[(format_value(r, "percent", precision) + "%") if r is not None else "-" for r in ratios]]
        for label, n, ratios in body
    ]
    if fmt == "markdown":
        lines = ["| " + " | ".join(header) + " |", "|" + "|".join([":---", *["---:"] * 4]) + "|"]
        lines += ["| " + " | ".join(r) + " |" for r in rows]
    else:
        table = [header, *rows]
        widths = [max(len(r[j]) for r in table) for j in range(5)]
        lines = ["  ".join([r[0].ljust(widths[0]), *[c.rjust(w) for c, w in zip(r[1:], widths[1:])]]).rstrip() for r in table]
    return ("\n".join(lines) + "\n").encode("utf-8")


__all__ = [
    "EXTENSIONS",
    "FORMATS",
    "SUBGROUP_ROWS",
    "SUPPLY_ROWS",
    "artifact_name",
    "format_value",
    "parse_markdown_table",
    "render_demographics",
    "render_gap_table",
    "render_supply_chart",
    "render_trajectory",
    "table_sections",
    "trajectory_rows",
]
