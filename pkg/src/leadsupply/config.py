"""Scenario and pool-policy files, written in the dataset record grammar.

Scenario::

    #label: entry growth 1%
    #years: 30
    #growth: 0.01
    #scaling: per_capita
    record,level,gender,race,kind,value
    multiplier,,female,minority,lateral,1.5

Empty ``level``, ``gender`` or ``race`` fields match every value.

Policy::

    #pool_size: 4
    #share: 0.3
    #pools: 5
    record,level,gender,race,kind,value
    hire_prob,,,,1,0
    hire_prob,,,,2,0.5

A policy may instead name a built-in table with ``#probs: hbr-2016``.
"""

from __future__ import annotations

from .domain import ATOMIC_SEGMENTS, Gender, JobLevel, Race, Segment
from .errors import Issue, ParseError, PolicyError, ScenarioError, TaxonomyError
from .ingest import HEADER, format_number, parse_number, read_table
from .poolmodel import PoolPolicy, parse_probs
from .projection import MAX_YEARS, MULTIPLIER_KINDS, FlowScaling, Scenario


def _meta_number(raw, key, issues, cast=float, default=None):
    if key not in raw.meta:
        if default is None:
            issues.append(Issue(0, f"missing metadata #{key}"))
        return default
    text, line = raw.meta[key]
    try:
        value = cast(text)
        if cast is float:
            parse_number(text)
        return value
    except ValueError:
        issues.append(Issue(line, f"#{key}: not a valid number {text!r}"))
        return None


def _segments(gender: str, race: str) -> list[Segment | None]:
    if not gender and not race:
        return [None]
    genders = [Gender(gender.lower())] if gender else list(Gender)
    races = [Race(race.lower())] if race else list(Race)
    return [s for s in ATOMIC_SEGMENTS if s.gender in genders and s.race in races]


def parse_scenario(data: bytes | str, source: str = "<scenario>") -> Scenario:
    raw = read_table(data)
    issues = list(raw.issues)
    years = _meta_number(raw, "years", issues, int, default=30)
    growth = _meta_number(raw, "growth", issues, float, default=0.0)
    max_years = _meta_number(raw, "max_years", issues, int, default=MAX_YEARS)
    label = raw.meta.get("label", ("scenario", 0))[0]
    scaling = FlowScaling.PER_CAPITA
    if "scaling" in raw.meta:
        text, line = raw.meta["scaling"]
        try:
            scaling = FlowScaling(text.lower())
        except ValueError:
            issues.append(Issue(line, f"#scaling must be absolute or per_capita, got {text!r}"))
    multipliers: dict = {}
    seen: dict = {}
    for row in raw.rows:
        if row.record != "multiplier":
            issues.append(Issue(row.line, f"unknown record {row.record!r}; scenario files hold multiplier rows"))
            continue
        if row.kind not in MULTIPLIER_KINDS:
            issues.append(Issue(row.line, f"unknown multiplier kind {row.kind!r}"))
            continue
        try:
            level = JobLevel.parse(row.level) if row.level else None
            segs = _segments(row.gender, row.race)
        except (TaxonomyError, ValueError) as exc:
            issues.append(Issue(row.line, str(exc)))
            continue
        try:
            factor = parse_number(row.value)
        except ValueError:
            issues.append(Issue(row.line, f"not a finite number: {row.value!r}"))
            continue
        if not factor > 0:
            issues.append(Issue(row.line, f"multiplier must be > 0, got {factor}"))
            continue
        for seg in segs:
            key = (row.kind, level, seg)
            if key in seen:
                issues.append(Issue(row.line, f"duplicate multiplier (first on line {seen[key]})"))
                continue
            seen[key] = row.line
            multipliers[key] = factor
    if issues:
        raise ParseError(sorted(issues, key=lambda i: i.line), source)
    try:
        return Scenario(
            years=years,
            annual_growth=growth,
            flow_multipliers=multipliers,
            label=label,
            flow_scaling=scaling,
            max_years=max_years,
        )
    except ScenarioError as exc:
        raise ParseError([Issue(0, str(exc))], source) from None


def parse_policy(data: bytes | str, source: str = "<policy>") -> PoolPolicy:
    raw = read_table(data)
    issues = list(raw.issues)
    pool_size = _meta_number(raw, "pool_size", issues, int)
    share = _meta_number(raw, "share", issues, float)
    pools = _meta_number(raw, "pools", issues, int)
    probs: dict[int, float] = {}
    if "probs" in raw.meta:
        text, line = raw.meta["probs"]
        try:
            probs = parse_probs(text)
        except PolicyError as exc:
            issues.append(Issue(line, str(exc)))
    first: dict[int, int] = {}
    for row in raw.rows:
        if row.record != "hire_prob":
            issues.append(Issue(row.line, f"unknown record {row.record!r}; policy files hold hire_prob rows"))
            continue
        try:
            d = int(row.kind)
            p = parse_number(row.value)
        except ValueError:
            issues.append(Issue(row.line, f"expected <diverse count>,<probability>, got {row.kind!r},{row.value!r}"))
            continue
        if d in first:
            issues.append(Issue(row.line, f"duplicate hire_prob for {d} (first on line {first[d]})"))
            continue
        first[d] = row.line
        probs[d] = p
    if not probs and not issues:
        issues.append(Issue(0, "no hire probabilities given"))
    if issues:
        raise ParseError(sorted(issues, key=lambda i: i.line), source)
    try:
        return PoolPolicy(pool_size, share, pools, probs)
    except PolicyError as exc:
        raise ParseError([Issue(0, str(exc))], source) from None


def serialize_scenario(scenario: Scenario) -> bytes:
    lines = [
        f"#label: {scenario.label}",
        f"#years: {scenario.years}",
        f"#growth: {format_number(scenario.annual_growth)}",
        f"#scaling: {scenario.flow_scaling.value}",
        f"#max_years: {scenario.max_years}",
        ",".join(HEADER),
    ]
    for (kind, level, seg), factor in sorted(
        scenario.flow_multipliers.items(),
        key=lambda kv: (kv[0][0], kv[0][1].rank if kv[0][1] else -1, kv[0][2].value if kv[0][2] else ""),
    ):
        g = seg.gender.value if seg else ""
        r = seg.race.value if seg else ""
        lines.append(",".join(["multiplier", level.value if level else "", g, r, kind, format_number(factor)]))
    return ("\n".join(lines) + "\n").encode("utf-8")


__all__ = ["parse_policy", "parse_scenario", "serialize_scenario"]
