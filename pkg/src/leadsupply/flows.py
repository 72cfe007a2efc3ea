"""Annual flow quantities and the level-by-level population recurrences.

All headcount flows are absolute annual counts. Fractions (retention and the
associate promotion rate) multiply the current population of their level.
Every recurrence reads year-t values only, so the four level updates can be
evaluated in any order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from .domain import (
    ATOMIC_SEGMENTS,
    Cell,
    JobLevel,
    PopulationSnapshot,
    Segment,
)
from .errors import InfeasibleFlowsError, TaxonomyError

JA, MA, SA = JobLevel.JUNIOR_ASSOCIATE, JobLevel.MID_ASSOCIATE, JobLevel.SENIOR_ASSOCIATE
C, NE, EQ = JobLevel.COUNSEL, JobLevel.NONEQUITY_PARTNER, JobLevel.EQUITY_PARTNER

ASSOCIATE_ORDER = (JA, MA, SA)
LEADERSHIP_ORDER = (C, NE, EQ)

# headcount promotions are only recorded out of senior associate and above
ALLOWED_PROMOTIONS: Mapping[JobLevel, frozenset[JobLevel]] = MappingProxyType(
    {
        SA: frozenset({C, NE, EQ}),
        C: frozenset({NE, EQ}),
        NE: frozenset({EQ}),
    }
)

# tolerance for float cancellation when a level is drained exactly
_NEG_TOL = 1e-9


class AssociateInflow(Enum):
    """How promoted associates enter higher associate levels.

    ADJACENT: level x receives the promoted, retained part of level x-1.
    ALL_LOWER: level x receives that quantity from every lower associate level,
    the literal reading of the summation; the source then loses it once per
    receiving level so headcount stays balanced.
    """

    ADJACENT = "adjacent"
    ALL_LOWER = "all_lower"


@dataclass(frozen=True)
class CellFlows:
    """Flows for one (level, atomic segment) cell over one year."""

    lateral_in: float = 0.0
    attrition: float = 0.0
    retirement: float = 0.0
    retention: float = 1.0
    reo: float = 0.0
    promotion: Mapping[JobLevel, float] = field(default_factory=dict)
    promotion_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "promotion", MappingProxyType(dict(self.promotion)))

    @property
    def promotion_out(self) -> float:
        return sum(self.promotion[d] for d in sorted(self.promotion, key=lambda lv: lv.rank))

    def scaled(self, k: float) -> "CellFlows":
        """Multiply every headcount flow by ``k``; fractions are unchanged."""
        return replace(
            self,
            lateral_in=self.lateral_in * k,
            attrition=self.attrition * k,
            retirement=self.retirement * k,
            reo=self.reo * k,
            promotion={d: v * k for d, v in self.promotion.items()},
        )

    @property
    def is_zero(self) -> bool:
        return (
            self.lateral_in == self.attrition == self.retirement == self.reo == self.promotion_rate == 0.0
            and not any(self.promotion.values())
        )


_ZERO = CellFlows()

HEADCOUNT_KINDS = ("lateral", "attrition", "retirement", "reo")
FRACTION_KINDS = ("retention", "promotion_rate")
_KIND_FIELD = {
    "lateral": "lateral_in",
    "attrition": "attrition",
    "retirement": "retirement",
    "retention": "retention",
    "reo": "reo",
    "promotion_rate": "promotion_rate",
}


def _check_cell(level: JobLevel, seg: Segment, f: CellFlows) -> list[str]:
    where = f"{level.value}/{seg.value}"
    problems = []
    for name in ("lateral_in", "attrition", "retirement", "reo"):
        v = getattr(f, name)
        if not v >= 0.0:
            problems.append(f"{where}: {name} must be >= 0, got {v}")
    for name in ("retention", "promotion_rate"):
        v = getattr(f, name)
        if not 0.0 <= v <= 1.0:
            problems.append(f"{where}: {name} must lie in [0, 1], got {v}")
    if f.reo and level is not SA:
        problems.append(f"{where}: reo is only defined for senior associates")
    if f.retirement and not level.is_leadership:
        problems.append(f"{where}: retirement is only defined for leadership levels")
    if f.promotion_rate and level.is_leadership:
        problems.append(f"{where}: promotion_rate is only defined for associate levels")
    allowed = ALLOWED_PROMOTIONS.get(level, frozenset())
    for dest, v in f.promotion.items():
        if dest not in allowed:
            problems.append(f"{where}: cannot promote to {dest.value}")
        if not v >= 0.0:
            problems.append(f"{where}: promotion to {dest.value} must be >= 0, got {v}")
    return problems


@dataclass(frozen=True)
class FlowRates:
    """Annual flows for every (level, atomic segment) cell; absent cells are zero."""

    cells: Mapping[Cell, CellFlows] = field(default_factory=dict)

    def __post_init__(self):
        problems = []
        clean = {}
        for key, f in self.cells.items():
            level, seg = key
            if not isinstance(level, JobLevel) or not isinstance(seg, Segment) or not seg.is_atomic:
                raise TaxonomyError(f"flow cells need (JobLevel, atomic Segment), got {key!r}")
            problems.extend(_check_cell(level, seg, f))
            if f != _ZERO:
                clean[key] = f
        if problems:
            raise ValueError("invalid flow rates:\n  " + "\n  ".join(problems))
        object.__setattr__(self, "cells", MappingProxyType(clean))

    def cell(self, level: JobLevel, segment: Segment) -> CellFlows:
        return self.cells.get((level, segment), _ZERO)

    def promotion_in(self, level: JobLevel, segment: Segment) -> float:
        """Headcount promoted into ``level`` from every lower level."""
        return sum(
            self.cell(src, segment).promotion.get(level, 0.0)
            for src in JobLevel
            if src < level
        )

    def promotion_out(self, level: JobLevel, segment: Segment) -> float:
        return self.cell(level, segment).promotion_out

    def scaled(self, k: float) -> "FlowRates":
        return FlowRates({c: f.scaled(k) for c, f in self.cells.items()})

    def replace_cell(self, level: JobLevel, segment: Segment, **changes) -> "FlowRates":
        cells = dict(self.cells)
        cells[(level, segment)] = replace(self.cell(level, segment), **changes)
        return FlowRates(cells)

    def items(self) -> Iterator[tuple[Cell, CellFlows]]:
        for lv in JobLevel:
            for s in ATOMIC_SEGMENTS:
                if (lv, s) in self.cells:
                    yield (lv, s), self.cells[(lv, s)]

    @classmethod
    def zeros(cls) -> "FlowRates":
        return cls({})


@dataclass(frozen=True)
class Trajectory:
    """Consecutive snapshots, optionally with the flows applied at each year."""

    snapshots: tuple[PopulationSnapshot, ...]
    rates: tuple[FlowRates, ...] = ()

    def __post_init__(self):
        snaps = tuple(self.snapshots)
        if not snaps:
            raise ValueError("trajectory needs at least one snapshot")
        for a, b in zip(snaps, snaps[1:]):
            if b.t != a.t + 1:
                raise ValueError(f"time indices must increase by 1 ({a.t} -> {b.t})")
        object.__setattr__(self, "snapshots", snaps)
        object.__setattr__(self, "rates", tuple(self.rates))
        if self.rates and len(self.rates) != len(snaps):
            raise ValueError("rates must be given for every snapshot")

    def __len__(self) -> int:
        return len(self.snapshots)

    def __iter__(self):
        return iter(self.snapshots)

    def __getitem__(self, i):
        return self.snapshots[i]

    @property
    def years(self) -> list[int]:
        return [s.t for s in self.snapshots]


def _settle(level: JobLevel, seg: Segment, value: float, gross: float) -> float:
    if value >= 0.0:
        return value
    if value >= -_NEG_TOL * max(1.0, gross):
        return 0.0
    raise InfeasibleFlowsError(level, seg, -value)


def _promoted_associates(snapshot: PopulationSnapshot, rates: FlowRates, level: JobLevel, seg: Segment) -> float:
    f = rates.cell(level, seg)
    return f.promotion_rate * f.retention * snapshot.get(level, seg)


def step_associates(
    snapshot: PopulationSnapshot,
    rates: FlowRates,
    inflow: AssociateInflow = AssociateInflow.ADJACENT,
) -> dict[Cell, float]:
    """Year t+1 headcounts for the three associate levels.

    Lateral entry into associate levels (new graduates at junior level) is
    added to the printed recurrence; it is zero unless supplied.
    """
    inflow = AssociateInflow(inflow)
    out = {}
    for seg in ATOMIC_SEGMENTS:
        promoted = {lv: _promoted_associates(snapshot, rates, lv, seg) for lv in ASSOCIATE_ORDER}
        for idx, lv in enumerate(ASSOCIATE_ORDER):
            f = rates.cell(lv, seg)
            lower = ASSOCIATE_ORDER[:idx]
            higher = ASSOCIATE_ORDER[idx + 1 :]
            if inflow is AssociateInflow.ADJACENT:
                gained = promoted[lower[-1]] if lower else 0.0
                lost = promoted[lv] if higher else 0.0
            else:
                gained = sum(promoted[i] for i in lower)
                lost = promoted[lv] * len(higher)
            leadership_out = f.promotion_out if lv is SA else 0.0
            current = snapshot.get(lv, seg)
            value = current + f.lateral_in - f.attrition + gained - lost - leadership_out
            gross = current + f.lateral_in + gained
            out[(lv, seg)] = _settle(lv, seg, value, gross)
    return out


def _step_leadership(snapshot: PopulationSnapshot, rates: FlowRates, level: JobLevel) -> dict[Cell, float]:
    out = {}
    for seg in ATOMIC_SEGMENTS:
        f = rates.cell(level, seg)
        current = snapshot.get(level, seg)
        gained = rates.promotion_in(level, seg)
        value = current + f.lateral_in + gained - f.promotion_out - f.attrition - f.retirement
        out[(level, seg)] = _settle(level, seg, value, current + f.lateral_in + gained)
    return out


def step_counsel(snapshot: PopulationSnapshot, rates: FlowRates) -> dict[Cell, float]:
    return _step_leadership(snapshot, rates, C)


def step_nonequity(snapshot: PopulationSnapshot, rates: FlowRates) -> dict[Cell, float]:
    return _step_leadership(snapshot, rates, NE)


def step_equity(snapshot: PopulationSnapshot, rates: FlowRates) -> dict[Cell, float]:
    return _step_leadership(snapshot, rates, EQ)


def step(
    snapshot: PopulationSnapshot,
    rates: FlowRates,
    inflow: AssociateInflow = AssociateInflow.ADJACENT,
) -> PopulationSnapshot:
    """Advance every level one year from the year-t state."""
    counts = step_associates(snapshot, rates, inflow)
    counts.update(step_counsel(snapshot, rates))
    counts.update(step_nonequity(snapshot, rates))
    counts.update(step_equity(snapshot, rates))
    return PopulationSnapshot(snapshot.t + 1, counts)


def run(
    snapshot: PopulationSnapshot,
    rates: FlowRates,
    years: int,
    inflow: AssociateInflow = AssociateInflow.ADJACENT,
) -> Trajectory:
    """Apply ``step`` with fixed rates ``years`` times."""
    snaps = [snapshot]
    for _ in range(years):
        try:
            snaps.append(step(snaps[-1], rates, inflow))
        except InfeasibleFlowsError as exc:
            raise exc.at_year(snaps[-1].t) from None
    return Trajectory(tuple(snaps))


def total_flows(rates: FlowRates, kinds: Iterable[str]) -> float:
    """Sum of named headcount flows over every cell (bookkeeping helper)."""
    total = 0.0
    for _, f in rates.items():
        for k in kinds:
            total += getattr(f, _KIND_FIELD[k])
    return total
