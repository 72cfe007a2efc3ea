"""Exception hierarchy shared by every module."""

from __future__ import annotations

from dataclasses import dataclass


class LeadSupplyError(Exception):
    """Base class for all model and data errors."""


class TaxonomyError(LeadSupplyError, ValueError):
    """Unknown job level, segment, band or flow-kind token."""


class InfeasibleFlowsError(LeadSupplyError):
    """A recurrence produced a negative headcount."""

    def __init__(self, level, segment, shortfall: float, year: int | None = None):
        self.level = level
        self.segment = segment
        self.shortfall = shortfall
        self.year = year
        where = f"{level.value}/{segment.value}"
        msg = f"negative headcount at {where}: short by {shortfall:.6g}"
        if year is not None:
            msg = f"year {year}: {msg}"
        super().__init__(msg)

    def at_year(self, year: int) -> "InfeasibleFlowsError":
        return InfeasibleFlowsError(self.level, self.segment, self.shortfall, year)


class InfeasibleProbabilityError(LeadSupplyError):
    """Flow / population ratios do not form a valid per-agent distribution."""


class UndefinedMarketError(LeadSupplyError, ZeroDivisionError):
    """Overall demand is not positive, so gap ratios are undefined."""


class CalibrationError(LeadSupplyError):
    """Calibration targets violate the Partner / Total sum identities."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("inconsistent targets: " + "; ".join(violations))


class AllocationError(LeadSupplyError):
    """Diverse share cannot be spread over pools with floor/ceiling counts."""


class PolicyError(LeadSupplyError):
    """Hire-probability table is missing an entry or holds a bad value."""


class ScenarioError(LeadSupplyError):
    """Scenario parameters out of range."""


class ParseError(LeadSupplyError):
    """One or more validation problems in a dataset or config file.

    ``issues`` keeps every problem found, not only the first one.
    """

    def __init__(self, issues: list["Issue"], source: str = "<input>"):
        self.issues = issues
        self.source = source
        lines = [f"{source}:{i.line}: {i.message}" for i in issues]
        super().__init__("\n".join(lines))


@dataclass(frozen=True)
class Issue:
    line: int
    message: str
