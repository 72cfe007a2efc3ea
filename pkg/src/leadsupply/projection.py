"""Multi-year projection under growth and flow-multiplier scenarios.

Two conventions for carrying one observed year of flows forward:

* ``absolute`` keeps every headcount flow at its observed size (so the identity
  scenario is exactly repeated :func:`flows.step`);
* ``per_capita`` rescales each cell's outflows (attrition, retirement, reo and
  headcount promotions) by how far that cell has grown since year 0, so flows
  behave like fixed rates. Lateral hires stay absolute in both modes.

In either mode, junior-associate lateral entry grows by ``(1 + g) ** t``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from types import MappingProxyType
from typing import Mapping, Sequence

from .domain import ATOMIC_SEGMENTS, JobLevel, PopulationSnapshot, Segment
from .equilibrium import leadership_r30
from .errors import InfeasibleFlowsError, ScenarioError, UndefinedMarketError
from .flows import JA, AssociateInflow, CellFlows, FlowRates, Trajectory, step

MAX_YEARS = 100
MULTIPLIER_KINDS = ("lateral", "attrition", "retirement", "reo", "promotion", "promotion_rate", "retention")

# (kind, level or None, atomic segment or None); None matches every value
MultiplierKey = tuple[str, "JobLevel | None", "Segment | None"]


class FlowScaling(Enum):
    ABSOLUTE = "absolute"
    PER_CAPITA = "per_capita"


@dataclass(frozen=True)
class Scenario:
    years: int = 30
    annual_growth: float = 0.0
    flow_multipliers: Mapping[MultiplierKey, float] = field(default_factory=dict)
    label: str = "baseline"
    flow_scaling: FlowScaling = FlowScaling.PER_CAPITA
    max_years: int = MAX_YEARS

    def __post_init__(self):
        if int(self.years) != self.years or self.years < 1:
            raise ScenarioError(f"years must be a positive integer, got {self.years}")
        if self.years > self.max_years:
            raise ScenarioError(f"years {self.years} exceeds the configured maximum {self.max_years}")
        if not self.annual_growth > -1.0:
            raise ScenarioError(f"annual_growth must exceed -1, got {self.annual_growth}")
        clean = {}
        for key, factor in dict(self.flow_multipliers).items():
            kind, level, seg = key
            if kind not in MULTIPLIER_KINDS:
                raise ScenarioError(f"unknown multiplier kind {kind!r}")
            if level is not None and not isinstance(level, JobLevel):
                raise ScenarioError(f"multiplier level must be a JobLevel, got {level!r}")
            if seg is not None and not (isinstance(seg, Segment) and seg.is_atomic):
                raise ScenarioError(f"multiplier segment must be atomic, got {seg!r}")
            if not factor > 0.0:
                raise ScenarioError(f"multiplier for {kind} must be > 0, got {factor}")
            clean[(kind, level, seg)] = float(factor)
        object.__setattr__(self, "years", int(self.years))
        object.__setattr__(self, "flow_scaling", FlowScaling(self.flow_scaling))
        object.__setattr__(self, "flow_multipliers", MappingProxyType(clean))

    def multiplier(self, kind: str, level: JobLevel, seg: Segment) -> float:
        k = 1.0
        for (mk, ml, ms), factor in self.flow_multipliers.items():
            if mk == kind and ml in (None, level) and ms in (None, seg):
                k *= factor
        return k


def _adjust(f: CellFlows, scenario: Scenario, level: JobLevel, seg: Segment, outflow_scale: float, entry: float) -> CellFlows:
    m = lambda kind: scenario.multiplier(kind, level, seg)  # noqa: E731
    out_k = outflow_scale
    return replace(
        f,
        lateral_in=f.lateral_in * m("lateral") * entry,
        attrition=f.attrition * m("attrition") * out_k,
        retirement=f.retirement * m("retirement") * out_k,
        reo=f.reo * m("reo") * out_k,
        promotion={d: v * m("promotion") * out_k for d, v in f.promotion.items()},
        promotion_rate=f.promotion_rate * m("promotion_rate"),
        retention=f.retention * m("retention"),
    )


def rates_at(
    base_rates: FlowRates,
    scenario: Scenario,
    t: int,
    initial: PopulationSnapshot | None = None,
    current: PopulationSnapshot | None = None,
) -> FlowRates:
    """Scenario-adjusted flows applied from year ``t`` to ``t + 1``."""
    per_capita = scenario.flow_scaling is FlowScaling.PER_CAPITA
    if per_capita and (initial is None or current is None):
        raise ValueError("per-capita scaling needs the initial and current snapshots")
    growth = (1.0 + scenario.annual_growth) ** t
    cells = {}
    for lv in JobLevel:
        for seg in ATOMIC_SEGMENTS:
            f = base_rates.cell(lv, seg)
            scale = 1.0
            if per_capita:
                n0 = initial.get(lv, seg)
                scale = current.get(lv, seg) / n0 if n0 > 0 else 1.0
            entry = growth if lv is JA else 1.0
            cells[(lv, seg)] = _adjust(f, scenario, lv, seg, scale, entry)
    try:
        return FlowRates(cells)
    except ValueError as exc:
        raise ScenarioError(f"scenario {scenario.label!r} makes flows invalid at year {t}: {exc}") from None


def project(
    snapshot: PopulationSnapshot,
    rates: FlowRates,
    scenario: Scenario,
    inflow: AssociateInflow = AssociateInflow.ADJACENT,
) -> Trajectory:
    """Year-by-year application of ``step``; ``rates[t]`` are the flows used at year t."""
    snaps = [snapshot]
    used = []
    for t in range(scenario.years + 1):
        r_t = rates_at(rates, scenario, t, snapshot, snaps[-1])
        used.append(r_t)
        if t == scenario.years:
            break
        try:
            snaps.append(step(snaps[-1], r_t, inflow))
        except InfeasibleFlowsError as exc:
            raise exc.at_year(snaps[-1].t) from None
    return Trajectory(tuple(snaps), tuple(used))


def project_many(
    snapshot: PopulationSnapshot,
    rates: FlowRates,
    scenarios: Sequence[Scenario],
    jobs: int = 1,
    inflow: AssociateInflow = AssociateInflow.ADJACENT,
) -> list[Trajectory]:
    """Independent scenarios, possibly in parallel; result order follows input order."""
    run = lambda sc: project(snapshot, rates, sc, inflow)  # noqa: E731
    if jobs > 1 and len(scenarios) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run, scenarios))
    return [run(sc) for sc in scenarios]


def trajectory_r30(trajectory: Trajectory, view: Segment) -> list[float | None]:
    """Leadership gap ratio per year; None where overall demand is zero."""
    if not trajectory.rates:
        raise ValueError("trajectory carries no per-year rates")
    out = []
    for r in trajectory.rates:
        try:
            out.append(leadership_r30(r, view))
        except UndefinedMarketError:
            out.append(None)
    return out


def feasibility_horizon(
    snapshot: PopulationSnapshot,
    rates: FlowRates,
    scenario: Scenario,
    view: Segment,
    inflow: AssociateInflow = AssociateInflow.ADJACENT,
) -> int | None:
    """First year index whose leadership r30 for ``view`` is >= 0, else None.

    Years with no overall leadership demand have no defined ratio and never
    count as feasible.
    """
    return first_feasible_year(project(snapshot, rates, scenario, inflow), view)


def first_feasible_year(trajectory: Trajectory, view: Segment) -> int | None:
    for t, r in enumerate(trajectory_r30(trajectory, view)):
        if r is not None and r >= 0.0:
            return t
    return None


__all__ = [
    "FlowScaling",
    "MAX_YEARS",
    "MULTIPLIER_KINDS",
    "Scenario",
    "feasibility_horizon",
    "first_feasible_year",
    "project",
    "project_many",
    "rates_at",
    "trajectory_r30",
]
