"""Leadership pipeline flows, the 30% gap ratio, projections and slate arithmetic."""

from .domain import (
    ATOMIC_SEGMENTS,
    GAP_VIEWS,
    OVERALL,
    SUBGROUP_VIEWS,
    Band,
    JobLevel,
    PopulationSnapshot,
    Segment,
    aggregate,
    round_half_away,
    share,
)
from .equilibrium import Column, GapReport, MarketState, available, demand, gap_report, mansfield_ratio
from .flows import AssociateInflow, CellFlows, FlowRates, Trajectory, run, step
from .ingest import DatasetFile, load, load_fixture, parse, serialize
from .poolmodel import PoolPolicy, diverse_hire_rate, gap_to_nominal, hire_rate_monte_carlo
from .projection import FlowScaling, Scenario, feasibility_horizon, project

__version__ = "0.1.0"

__all__ = [
    "ATOMIC_SEGMENTS",
    "AssociateInflow",
    "Band",
    "CellFlows",
    "Column",
    "DatasetFile",
    "FlowRates",
    "FlowScaling",
    "GAP_VIEWS",
    "GapReport",
    "JobLevel",
    "MarketState",
    "OVERALL",
    "PoolPolicy",
    "PopulationSnapshot",
    "SUBGROUP_VIEWS",
    "Scenario",
    "Segment",
    "Trajectory",
    "aggregate",
    "available",
    "demand",
    "diverse_hire_rate",
    "feasibility_horizon",
    "gap_report",
    "gap_to_nominal",
    "hire_rate_monte_carlo",
    "load",
    "load_fixture",
    "mansfield_ratio",
    "parse",
    "project",
    "round_half_away",
    "run",
    "serialize",
    "share",
    "step",
]
