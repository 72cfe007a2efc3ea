"""Leadership demand, availability and the 30% gap metrics.

Demand for a level is promotions into it plus lateral hires. Availability is
attrition plus promotions out, net of passed-over senior associates and
retirements. A subgroup's gap ratio compares its availability with 30% of the
overall demand: negative is a shortage, zero equilibrium, positive a surplus.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

from .domain import (
    GAP_VIEWS,
    OVERALL,
    SUBGROUP_VIEWS,
    Band,
    JobLevel,
    PopulationSnapshot,
    Segment,
    aggregate,
)
from .errors import UndefinedMarketError
from .flows import FlowRates

THRESHOLD = 0.30
DEFAULT_EPSILON = 0.005


class MarketState(Enum):
    EQUILIBRIUM = "equilibrium"
    SHORTAGE = "shortage"
    SURPLUS = "surplus"


class Column(Enum):
    """Table columns: the three leadership levels plus two sums."""

    COUNSEL = "counsel"
    PARTNER = "partner"
    NONEQUITY = "nonequity"
    EQUITY = "equity"
    TOTAL = "total"

    @property
    def levels(self) -> frozenset[JobLevel]:
        return _COLUMN_LEVELS[self]

    @property
    def label(self) -> str:
        return _COLUMN_LABELS[self]


_COLUMN_LEVELS = {
    Column.COUNSEL: frozenset({JobLevel.COUNSEL}),
    Column.PARTNER: frozenset({JobLevel.NONEQUITY_PARTNER, JobLevel.EQUITY_PARTNER}),
    Column.NONEQUITY: frozenset({JobLevel.NONEQUITY_PARTNER}),
    Column.EQUITY: frozenset({JobLevel.EQUITY_PARTNER}),
    Column.TOTAL: frozenset({JobLevel.COUNSEL, JobLevel.NONEQUITY_PARTNER, JobLevel.EQUITY_PARTNER}),
}
_COLUMN_LABELS = {
    Column.COUNSEL: "Counsel",
    Column.PARTNER: "Partner (NE+E)",
    Column.NONEQUITY: "Non-equity partner (NE)",
    Column.EQUITY: "Equity partner (E)",
    Column.TOTAL: "Total",
}
ALL_COLUMNS = tuple(Column)


def _require_leadership(level: JobLevel) -> None:
    if not isinstance(level, JobLevel) or not level.is_leadership:
        raise ValueError(f"demand and availability are defined for leadership levels only, got {level!r}")


def demand(level: JobLevel, rates: FlowRates, segment_view: Segment = OVERALL) -> float:
    """Annual openings at ``level``: promotions in plus lateral hires."""
    _require_leadership(level)
    return sum(
        rates.promotion_in(level, s) + rates.cell(level, s).lateral_in
        for s in _ordered(segment_view)
    )


def available(level: JobLevel, rates: FlowRates, segment_view: Segment = OVERALL) -> float:
    """Annual availability at ``level``; may be negative and is never clamped."""
    _require_leadership(level)
    total = 0.0
    for s in _ordered(segment_view):
        f = rates.cell(level, s)
        total += f.attrition + f.promotion_out - f.reo - f.retirement
    return total


def _ordered(view: Segment):
    atoms = Segment.parse(view).atoms if isinstance(view, str) else view.atoms
    return [s for s in Segment if s in atoms]


def _check_demand(demand_overall: float) -> None:
    if not demand_overall > 0:
        raise UndefinedMarketError(f"overall demand must be positive, got {demand_overall}")


def mansfield_ratio(available_m: float, demand_overall: float) -> float:
    _check_demand(demand_overall)
    return available_m / (THRESHOLD * demand_overall) - 1.0


def fill_capacity(available_m: float, demand_overall: float) -> float:
    _check_demand(demand_overall)
    return available_m / demand_overall


def shortfall_to_30(fill: float) -> float:
    return THRESHOLD - fill


def classify(r30: float, epsilon: float = DEFAULT_EPSILON) -> MarketState:
    if r30 < -epsilon:
        return MarketState.SHORTAGE
    if r30 > epsilon:
        return MarketState.SURPLUS
    return MarketState.EQUILIBRIUM


@dataclass(frozen=True)
class DemandSupply:
    """Y+ and Y- per (column, view); Partner and Total are exact sums."""

    demand: Mapping[tuple[Column, Segment], float]
    available: Mapping[tuple[Column, Segment], float]

    @classmethod
    def from_rates(cls, rates: FlowRates, views: Sequence[Segment] = GAP_VIEWS) -> "DemandSupply":
        dem, av = {}, {}
        for view in views:
            per_level = {
                lv: (demand(lv, rates, view), available(lv, rates, view))
                for lv in (JobLevel.COUNSEL, JobLevel.NONEQUITY_PARTNER, JobLevel.EQUITY_PARTNER)
            }
            for col in Column:
                # sums run in table order so Partner/Total rows add up bit-for-bit
                lvls = [lv for lv in per_level if lv in col.levels]
                if col is Column.TOTAL:
                    d = per_level[JobLevel.COUNSEL][0] + (
                        per_level[JobLevel.NONEQUITY_PARTNER][0] + per_level[JobLevel.EQUITY_PARTNER][0]
                    )
                    a = per_level[JobLevel.COUNSEL][1] + (
                        per_level[JobLevel.NONEQUITY_PARTNER][1] + per_level[JobLevel.EQUITY_PARTNER][1]
                    )
                else:
                    d = sum(per_level[lv][0] for lv in lvls)
                    a = sum(per_level[lv][1] for lv in lvls)
                dem[(col, view)] = d
                av[(col, view)] = a
        return cls(dem, av)


@dataclass(frozen=True)
class GapMetrics:
    available: float
    proportion_of_available: float | None
    fill_capacity: float
    short_to_30: float
    r30: float
    classification: MarketState


@dataclass(frozen=True)
class GapReport:
    """Everything behind one band's supply table and subgroup gap tables."""

    supply: DemandSupply
    population: Mapping[Column, float] | None
    metrics: Mapping[tuple[Column, Segment], GapMetrics]
    columns: tuple[Column, ...] = ALL_COLUMNS
    views: tuple[Segment, ...] = GAP_VIEWS
    band: Band | None = None
    epsilon: float = DEFAULT_EPSILON

    @property
    def subgroup_views(self) -> tuple[Segment, ...]:
        return tuple(v for v in self.views if v is not OVERALL)

    def demand(self, col: Column, view: Segment = OVERALL) -> float:
        return self.supply.demand[(col, view)]

    def available(self, col: Column, view: Segment = OVERALL) -> float:
        return self.supply.available[(col, view)]

    def metric(self, col: Column, view: Segment) -> GapMetrics:
        return self.metrics[(col, view)]

    def supply_row(self, key: str) -> tuple[float | None, ...]:
        """Unrounded values of one overall supply-table row across ``columns``."""
        return tuple(self._supply_value(key, c) for c in self.columns)

    def subgroup_row(self, view: Segment, key: str) -> tuple[float, ...]:
        return tuple(getattr(self.metric(c, view), key) for c in self.columns)

    def _supply_value(self, key: str, col: Column) -> float | None:
        pop = self.population
        tot = Column.TOTAL
        if key == "population":
            return None if pop is None else pop[col]
        if key == "population_distribution":
            return None if pop is None else _ratio(pop[col], pop[tot])
        if key == "demand":
            return self.demand(col)
        if key == "demand_distribution":
            return _ratio(self.demand(col), self.demand(tot))
        if key == "demand_in_proportion":
            return None if pop is None else _ratio(self.demand(col), pop[col])
        if key == "demand_30":
            return THRESHOLD * self.demand(col)
        if key == "available":
            return self.available(col)
        if key == "available_distribution":
            return _ratio(self.available(col), self.available(tot))
        if key == "available_in_proportion":
            return None if pop is None else _ratio(self.available(col), pop[col])
        raise KeyError(key)


def _ratio(num: float, den: float) -> float | None:
    return num / den if den else None


def column_population(snapshot: PopulationSnapshot) -> dict[Column, float]:
    return {c: aggregate(snapshot, c.levels, Segment.ALL) for c in Column}


def gap_report(
    rates: FlowRates,
    population: PopulationSnapshot | None = None,
    *,
    epsilon: float = DEFAULT_EPSILON,
    band: Band | None = None,
    columns: Sequence[Column] = ALL_COLUMNS,
    views: Sequence[Segment] = GAP_VIEWS,
) -> GapReport:
    views = tuple(views)
    if OVERALL not in views:
        views = (OVERALL, *views)
    columns = tuple(columns)
    supply = DemandSupply.from_rates(rates, views)
    metrics = {}
    for col in columns:
        overall_demand = supply.demand[(col, OVERALL)]
        overall_av = supply.available[(col, OVERALL)]
        for view in views:
            av = supply.available[(col, view)]
            fill = fill_capacity(av, overall_demand)
            r30 = mansfield_ratio(av, overall_demand)
            metrics[(col, view)] = GapMetrics(
                available=av,
                proportion_of_available=_ratio(av, overall_av),
                fill_capacity=fill,
                short_to_30=shortfall_to_30(fill),
                r30=r30,
                classification=classify(r30, epsilon),
            )
    return GapReport(
        supply=supply,
        population=None if population is None else column_population(population),
        metrics=metrics,
        columns=tuple(columns),
        views=views,
        band=band,
        epsilon=epsilon,
    )


def leadership_r30(rates: FlowRates, view: Segment) -> float:
    """Gap ratio of ``view`` over the whole leadership population."""
    supply = DemandSupply.from_rates(rates, (OVERALL, view))
    return mansfield_ratio(supply.available[(Column.TOTAL, view)], supply.demand[(Column.TOTAL, OVERALL)])


__all__ = [
    "ALL_COLUMNS",
    "Column",
    "DEFAULT_EPSILON",
    "DemandSupply",
    "GapMetrics",
    "GapReport",
    "MarketState",
    "SUBGROUP_VIEWS",
    "THRESHOLD",
    "available",
    "classify",
    "demand",
    "fill_capacity",
    "gap_report",
    "leadership_r30",
    "mansfield_ratio",
    "shortfall_to_30",
]
