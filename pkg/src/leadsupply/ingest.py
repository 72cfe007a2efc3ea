"""Dataset files: a comma-separated record grammar shared with config files.

::

    #source: AML + public sources
    #year: 2021
    #band: 751plus
    #firms: 110
    record,level,gender,race,kind,value
    population,counsel,female,white,,7166
    flow,counsel,female,white,attrition,548.1
    flow,senior_associate,female,white,promotion:counsel,301.2

Leading ``#key: value`` lines are metadata; later ``#`` lines are comments.
Parsing collects every problem (with its line number) before raising.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

from .domain import (
    ATOMIC_SEGMENTS,
    Band,
    FirmSizeBand,
    Gender,
    JobLevel,
    PopulationSnapshot,
    Race,
    Segment,
)
from .errors import Issue, ParseError, TaxonomyError
from .flows import ALLOWED_PROMOTIONS, CellFlows, FlowRates

HEADER = ("record", "level", "gender", "race", "kind", "value")
REQUIRED_META = ("source", "year", "band", "firms")
_FIELD_OF_KIND = {
    "lateral": "lateral_in",
    "attrition": "attrition",
    "retirement": "retirement",
    "retention": "retention",
    "reo": "reo",
    "promotion_rate": "promotion_rate",
}
FLOW_KINDS = tuple(_FIELD_OF_KIND) + ("promotion:<level>",)


@dataclass(frozen=True)
class Row:
    line: int
    record: str
    level: str
    gender: str
    race: str
    kind: str
    value: str


@dataclass
class RawTable:
    meta: dict[str, tuple[str, int]]
    rows: list[Row]
    issues: list[Issue]
    header_line: int


def read_table(data: bytes | str) -> RawTable:
    """Split a file into metadata, rows and grammar-level issues. Never raises."""
    issues: list[Issue] = []
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            return RawTable({}, [], [Issue(0, f"not UTF-8 text: {exc.reason} at byte {exc.start}")], 0)
    else:
        text = data
    if text.startswith("\ufeff"):
        text = text[1:]
    meta: dict[str, tuple[str, int]] = {}
    rows: list[Row] = []
    header_line = 0
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        if line.lstrip().startswith("#"):
            if header_line:
                continue
            body = line.lstrip()[1:]
            if ":" not in body:
                continue
            key, value = body.split(":", 1)
            key = key.strip().lower()
            if key in meta:
                issues.append(Issue(lineno, f"duplicate metadata #{key}"))
            else:
                meta[key] = (value.strip(), lineno)
            continue
        try:
            cells = next(csv.reader([line]))
        except csv.Error as exc:
            issues.append(Issue(lineno, f"malformed row: {exc}"))
            continue
        cells = [c.strip() for c in cells]
        if not header_line:
            header_line = lineno
            if tuple(c.lower() for c in cells) != HEADER:
                issues.append(Issue(lineno, f"expected header {','.join(HEADER)}"))
            continue
        if len(cells) != len(HEADER):
            issues.append(Issue(lineno, f"expected {len(HEADER)} fields, got {len(cells)}"))
            continue
        rows.append(Row(lineno, *cells))
    if not header_line:
        issues.append(Issue(0, "missing header row"))
    return RawTable(meta, rows, issues, header_line)


def parse_number(token: str) -> float:
    value = float(token)
    if not math.isfinite(value):
        raise ValueError(token)
    return value


@dataclass(frozen=True)
class DatasetMeta:
    source: str
    year: int
    band: FirmSizeBand
    extra: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "extra", MappingProxyType(dict(self.extra)))

    def __eq__(self, other):
        if not isinstance(other, DatasetMeta):
            return NotImplemented
        return (self.source, self.year, self.band, dict(self.extra)) == (
            other.source,
            other.year,
            other.band,
            dict(other.extra),
        )


@dataclass(frozen=True)
class DatasetFile:
    meta: DatasetMeta
    population: PopulationSnapshot
    rates: FlowRates | None = None

    @property
    def band(self) -> Band:
        return self.meta.band.band


def _parse_meta(raw: RawTable, issues: list[Issue]) -> DatasetMeta | None:
    meta = raw.meta
    where = raw.header_line or 1
    for key in REQUIRED_META:
        if key not in meta:
            issues.append(Issue(where, f"missing metadata #{key}"))
    year = firms = band = None
    if "year" in meta:
        value, line = meta["year"]
        try:
            year = int(value)
        except ValueError:
            issues.append(Issue(line, f"#year must be an integer, got {value!r}"))
    if "firms" in meta:
        value, line = meta["firms"]
        try:
            firms = int(value)
            if firms < 0:
                raise ValueError
        except ValueError:
            issues.append(Issue(line, f"#firms must be a nonnegative integer, got {value!r}"))
            firms = None
    if "band" in meta:
        value, line = meta["band"]
        try:
            band = Band.parse(value)
        except TaxonomyError as exc:
            issues.append(Issue(line, str(exc)))
    if None in (year, firms, band) or "source" not in meta:
        return None
    extra = {k: v for k, (v, _) in meta.items() if k not in REQUIRED_META}
    return DatasetMeta(meta["source"][0], year, FirmSizeBand(band, firms), extra)


def _parse_cell(row: Row, issues: list[Issue]) -> tuple[JobLevel, Segment] | None:
    ok = True
    try:
        level = JobLevel.parse(row.level)
    except TaxonomyError as exc:
        issues.append(Issue(row.line, str(exc)))
        ok = False
    try:
        gender = Gender(row.gender.lower())
    except ValueError:
        issues.append(Issue(row.line, f"unknown gender {row.gender!r}"))
        ok = False
    try:
        race = Race(row.race.lower())
    except ValueError:
        issues.append(Issue(row.line, f"unknown race {row.race!r}"))
        ok = False
    if not ok:
        return None
    return level, Segment.atomic(gender, race)


def parse_flow_kind(kind: str) -> tuple[str, JobLevel | None]:
    kind = kind.strip().lower()
    if kind.startswith("promotion:"):
        return "promotion", JobLevel.parse(kind.split(":", 1)[1])
    if kind in _FIELD_OF_KIND:
        return kind, None
    raise TaxonomyError(f"unknown flow kind {kind!r}")


def parse(data: bytes | str, source: str = "<input>") -> DatasetFile:
    """Parse and fully validate a dataset; raise ParseError listing every issue."""
    raw = read_table(data)
    issues = list(raw.issues)
    meta = _parse_meta(raw, issues)
    counts: dict = {}
    count_lines: dict = {}
    flows: dict = {}
    flow_lines: dict = {}
    mentioned: set = set()
    for row in raw.rows:
        rec = row.record.lower()
        if rec not in ("population", "flow"):
            issues.append(Issue(row.line, f"unknown record type {row.record!r}"))
            continue
        cell = _parse_cell(row, issues)
        if cell is not None and rec == "population":
            mentioned.add(cell)
        try:
            value = parse_number(row.value)
        except ValueError:
            issues.append(Issue(row.line, f"value {row.value!r} is not a finite number"))
            continue
        if cell is None:
            continue
        where = f"{cell[0].value}/{cell[1].value}"
        if rec == "population":
            if row.kind:
                issues.append(Issue(row.line, "population rows must leave kind empty"))
                continue
            if value < 0:
                issues.append(Issue(row.line, f"negative headcount {value:g} for {where}"))
                continue
            if cell in counts:
                issues.append(Issue(row.line, f"duplicate population cell {where} (first at line {count_lines[cell]})"))
                continue
            counts[cell] = value
            count_lines[cell] = row.line
            continue
        try:
            kind, dest = parse_flow_kind(row.kind)
        except TaxonomyError as exc:
            issues.append(Issue(row.line, str(exc)))
            continue
        key = (cell, row.kind.strip().lower())
        if key in flow_lines:
            issues.append(Issue(row.line, f"duplicate flow {row.kind} for {where} (first at line {flow_lines[key]})"))
            continue
        flow_lines[key] = row.line
        problem = _flow_problem(cell[0], kind, dest, value)
        if problem:
            issues.append(Issue(row.line, f"{where}: {problem}"))
            continue
        flows.setdefault(cell, {})[(kind, dest)] = value
    missing = [(lv, s) for lv in JobLevel for s in ATOMIC_SEGMENTS if (lv, s) not in mentioned]
    if missing and raw.header_line:
        listed = ", ".join(f"{lv.value}/{s.value}" for lv, s in missing)
        issues.append(Issue(raw.header_line, f"missing population cells: {listed}"))
    if issues:
        raise ParseError(sorted(issues, key=lambda i: i.line), source)
    return DatasetFile(meta, PopulationSnapshot(0, counts), _build_rates(flows) if flows else None)


def _flow_problem(level: JobLevel, kind: str, dest: JobLevel | None, value: float) -> str | None:
    if kind in ("retention", "promotion_rate"):
        if not 0.0 <= value <= 1.0:
            return f"{kind} must lie in [0, 1], got {value:g}"
    elif value < 0:
        return f"negative {kind} flow {value:g}"
    if kind == "reo" and level is not JobLevel.SENIOR_ASSOCIATE and value:
        return "reo is only defined for senior associates"
    if kind == "retirement" and not level.is_leadership and value:
        return "retirement is only defined for leadership levels"
    if kind == "promotion_rate" and level.is_leadership and value:
        return "promotion_rate is only defined for associate levels"
    if kind == "promotion" and dest not in ALLOWED_PROMOTIONS.get(level, ()):
        return f"cannot promote from {level.value} to {dest.value}"
    return None


def _build_rates(flows: dict) -> FlowRates:
    cells = {}
    for cell, entries in flows.items():
        kwargs = {}
        promotion = {}
        for (kind, dest), value in entries.items():
            if kind == "promotion":
                promotion[dest] = value
            else:
                kwargs[_FIELD_OF_KIND[kind]] = value
        cells[cell] = CellFlows(promotion=promotion, **kwargs)
    return FlowRates(cells)


def format_number(value: float) -> str:
    """Shortest text that parses back to the same float."""
    value = float(value) + 0.0
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _row(*cells: str) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerow(cells)
    return buf.getvalue()


def serialize(dataset: DatasetFile) -> bytes:
    """Deterministic UTF-8 text with LF endings; ``parse`` inverts it exactly."""
    m = dataset.meta
    lines = [
        f"#source: {m.source}\n",
        f"#year: {m.year}\n",
        f"#band: {m.band.band.value}\n",
        f"#firms: {m.band.firm_count}\n",
    ]
    lines += [f"#{k}: {v}\n" for k, v in sorted(m.extra.items())]
    lines.append(",".join(HEADER) + "\n")
    for lv in JobLevel:
        for s in ATOMIC_SEGMENTS:
            lines.append(_row("population", lv.value, s.gender.value, s.race.value, "", format_number(dataset.population[(lv, s)])))
    if dataset.rates is not None:
        for (lv, s), f in dataset.rates.items():
            for kind, value in flow_entries(f):
                lines.append(_row("flow", lv.value, s.gender.value, s.race.value, kind, format_number(value)))
    return "".join(lines).encode("utf-8")


def flow_entries(f: CellFlows) -> list[tuple[str, float]]:
    """Non-default fields of a cell as (kind token, value) in a fixed order."""
    default = CellFlows()
    out = []
    for kind, name in _FIELD_OF_KIND.items():
        value = getattr(f, name)
        if value != getattr(default, name):
            out.append((kind, value))
    for dest in sorted(f.promotion, key=lambda lv: lv.rank):
        out.append((f"promotion:{dest.value}", f.promotion[dest]))
    return out


def load(path: str | Path) -> DatasetFile:
    path = Path(path)
    return parse(path.read_bytes(), source=str(path))


def fixture_path(band: Band | str) -> Path:
    band = band if isinstance(band, Band) else Band.parse(band)
    return Path(str(resources.files("leadsupply") / "fixtures" / f"band-{band.value}.csv"))


def load_fixture(band: Band | str) -> DatasetFile:
    return load(fixture_path(band))


def fixture_paths() -> list[Path]:
    return [fixture_path(b) for b in (Band.B751_PLUS, Band.B501_750, Band.B251_500)]


def combine(datasets: Iterable[DatasetFile]) -> PopulationSnapshot:
    """Cell-wise sum of several bands' populations (the all-firms view)."""
    total: dict = {}
    for ds in datasets:
        for cell, v in ds.population.counts.items():
            total[cell] = total.get(cell, 0.0) + v
    return PopulationSnapshot(0, total)


def with_rates(dataset: DatasetFile, rates: FlowRates | None) -> DatasetFile:
    return replace(dataset, rates=rates)
