"""Job levels, demographic segments, firm-size bands and population snapshots."""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import TaxonomyError


class JobLevel(Enum):
    JUNIOR_ASSOCIATE = "junior_associate"
    MID_ASSOCIATE = "mid_associate"
    SENIOR_ASSOCIATE = "senior_associate"
    COUNSEL = "counsel"
    NONEQUITY_PARTNER = "nonequity_partner"
    EQUITY_PARTNER = "equity_partner"

    @property
    def rank(self) -> int:
        return _LEVEL_ORDER.index(self)

    @property
    def is_leadership(self) -> bool:
        return self.rank >= _LEVEL_ORDER.index(JobLevel.COUNSEL)

    @property
    def is_associate(self) -> bool:
        return not self.is_leadership

    def __lt__(self, other: "JobLevel") -> bool:
        if not isinstance(other, JobLevel):
            return NotImplemented
        return self.rank < other.rank

    def __le__(self, other: "JobLevel") -> bool:
        if not isinstance(other, JobLevel):
            return NotImplemented
        return self.rank <= other.rank

    @classmethod
    def parse(cls, token: str) -> "JobLevel":
        try:
            return cls(token.strip().lower())
        except ValueError:
            raise TaxonomyError(f"unknown job level {token!r}") from None


_LEVEL_ORDER = list(JobLevel)

ASSOCIATE_LEVELS = frozenset(lv for lv in JobLevel if lv.is_associate)
LEADERSHIP_LEVELS = frozenset(lv for lv in JobLevel if lv.is_leadership)
PARTNER_LEVELS = frozenset({JobLevel.NONEQUITY_PARTNER, JobLevel.EQUITY_PARTNER})
ALL_LEVELS = frozenset(JobLevel)


class Gender(Enum):
    FEMALE = "female"
    MALE = "male"


class Race(Enum):
    WHITE = "white"
    MINORITY = "minority"


class Segment(Enum):
    """Atomic gender x race cells plus the aggregate views built from them."""

    WHITE_FEMALE = "white_female"
    MINORITY_FEMALE = "minority_female"
    WHITE_MALE = "white_male"
    MINORITY_MALE = "minority_male"
    ALL = "all"
    FEMALE = "female"
    MALE = "male"
    WHITE = "white"
    MINORITY = "minority"

    @property
    def atoms(self) -> frozenset["Segment"]:
        return _ATOMS[self]

    @property
    def is_atomic(self) -> bool:
        return self in ATOMIC_SEGMENTS

    @property
    def gender(self) -> Gender:
        return _GENDER_RACE[self][0]

    @property
    def race(self) -> Race:
        return _GENDER_RACE[self][1]

    @classmethod
    def atomic(cls, gender: Gender, race: Race) -> "Segment":
        for seg, gr in _GENDER_RACE.items():
            if gr == (gender, race):
                return seg
        raise TaxonomyError(f"no atomic segment for {gender}, {race}")

    @classmethod
    def parse(cls, token: str) -> "Segment":
        key = token.strip().lower().replace("-", "_")
        key = _SEGMENT_ALIASES.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise TaxonomyError(f"unknown segment {token!r}") from None


_GENDER_RACE = {
    Segment.WHITE_FEMALE: (Gender.FEMALE, Race.WHITE),
    Segment.MINORITY_FEMALE: (Gender.FEMALE, Race.MINORITY),
    Segment.WHITE_MALE: (Gender.MALE, Race.WHITE),
    Segment.MINORITY_MALE: (Gender.MALE, Race.MINORITY),
}
ATOMIC_SEGMENTS = tuple(_GENDER_RACE)
_ATOMS = {s: frozenset({s}) for s in ATOMIC_SEGMENTS}
_ATOMS[Segment.ALL] = frozenset(ATOMIC_SEGMENTS)
_ATOMS[Segment.FEMALE] = frozenset(s for s in ATOMIC_SEGMENTS if _GENDER_RACE[s][0] is Gender.FEMALE)
_ATOMS[Segment.MALE] = frozenset(s for s in ATOMIC_SEGMENTS if _GENDER_RACE[s][0] is Gender.MALE)
_ATOMS[Segment.WHITE] = frozenset(s for s in ATOMIC_SEGMENTS if _GENDER_RACE[s][1] is Race.WHITE)
_ATOMS[Segment.MINORITY] = frozenset(s for s in ATOMIC_SEGMENTS if _GENDER_RACE[s][1] is Race.MINORITY)

_SEGMENT_ALIASES = {
    "omega": "all",
    "overall": "all",
    "minority_all": "minority",
    "minorities": "minority",
}

# the three views every gap table is computed for
OVERALL = Segment.ALL
SUBGROUP_VIEWS = (Segment.WHITE_FEMALE, Segment.MINORITY)
GAP_VIEWS = (OVERALL, *SUBGROUP_VIEWS)


class Band(Enum):
    B251_500 = "251-500"
    B501_750 = "501-750"
    B751_PLUS = "751plus"

    @property
    def label(self) -> str:
        return {"251-500": "251-500 lawyers", "501-750": "501-750 lawyers", "751plus": "751+ lawyers"}[self.value]

    @classmethod
    def parse(cls, token: str) -> "Band":
        key = token.strip().lower().replace("+", "plus").replace(" ", "")
        key = {"751": "751plus", "751_plus": "751plus", "751-plus": "751plus"}.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise TaxonomyError(f"unknown firm-size band {token!r}") from None


@dataclass(frozen=True)
class FirmSizeBand:
    band: Band
    firm_count: int

    def __post_init__(self):
        if self.firm_count < 0:
            raise ValueError("firm_count must be nonnegative")


Cell = tuple[JobLevel, Segment]


@dataclass(frozen=True)
class PopulationSnapshot:
    """Headcounts per (job level, atomic segment) at year ``t``.

    Missing cells count as zero. Aggregates are always computed from the
    atomic cells on demand.
    """

    t: int
    counts: Mapping[Cell, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (level, seg), value in self.counts.items():
            if not isinstance(level, JobLevel):
                raise TaxonomyError(f"not a job level: {level!r}")
            if not isinstance(seg, Segment) or not seg.is_atomic:
                raise TaxonomyError(f"snapshot cells need atomic segments, got {seg!r}")
            value = float(value)
            if not value >= 0.0:
                raise ValueError(f"negative or NaN headcount {value} at {level.value}/{seg.value}")
            clean[(level, seg)] = value
        object.__setattr__(self, "counts", MappingProxyType(clean))

    def __getitem__(self, cell: Cell) -> float:
        return self.counts.get(cell, 0.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PopulationSnapshot):
            return NotImplemented
        cells = set(self.counts) | set(other.counts)
        return self.t == other.t and all(self[c] == other[c] for c in cells)

    __hash__ = None

    def get(self, level: JobLevel, segment: Segment) -> float:
        return self.counts.get((level, segment), 0.0)

    def with_counts(self, counts: Mapping[Cell, float], t: int | None = None) -> "PopulationSnapshot":
        return PopulationSnapshot(self.t if t is None else t, counts)

    def scaled(self, k: float) -> "PopulationSnapshot":
        return PopulationSnapshot(self.t, {c: v * k for c, v in self.counts.items()})

    def total(self) -> float:
        return aggregate(self, ALL_LEVELS, Segment.ALL)

    @classmethod
    def zeros(cls, t: int = 0) -> "PopulationSnapshot":
        return cls(t, {(lv, s): 0.0 for lv in JobLevel for s in ATOMIC_SEGMENTS})


def _resolve_segment(segment: Segment | str) -> Segment:
    if isinstance(segment, Segment):
        return segment
    if isinstance(segment, str):
        return Segment.parse(segment)
    raise TaxonomyError(f"unknown segment {segment!r}")


def _resolve_levels(level_set: Iterable[JobLevel | str] | JobLevel) -> frozenset[JobLevel]:
    if isinstance(level_set, JobLevel):
        return frozenset({level_set})
    levels = frozenset(lv if isinstance(lv, JobLevel) else JobLevel.parse(lv) for lv in level_set)
    if not levels:
        raise ValueError("level_set must be nonempty")
    return levels


def aggregate(snapshot: PopulationSnapshot, level_set, segment) -> float:
    """Exact sum of atomic counts over ``level_set`` x ``segment``."""
    levels = _resolve_levels(level_set)
    atoms = _resolve_segment(segment).atoms
    # fixed iteration order keeps float sums reproducible
    return sum(
        snapshot.get(lv, s) for lv in JobLevel if lv in levels for s in ATOMIC_SEGMENTS if s in atoms
    )


def share(snapshot: PopulationSnapshot, level_set, segment, base_level_set, base_segment) -> float:
    base = aggregate(snapshot, base_level_set, base_segment)
    if base <= 0:
        raise ZeroDivisionError("share base aggregate is zero")
    return aggregate(snapshot, level_set, segment) / base


def round_half_away(x: float, ndigits: int = 0) -> float:
    """Round half away from zero.

    The value is first snapped to 12 significant digits so that a product
    such as ``0.3 * 9735`` (stored as 2920.4999999999995) ties upward.
    """
    if x != x or x in (float("inf"), float("-inf")):
        return x
    d = Decimal(format(x, ".12g"))
    q = Decimal(1).scaleb(-ndigits)
    r = d.copy_abs().quantize(q, rounding=ROUND_HALF_UP)
    out = float(r if d >= 0 else -r)
    return out + 0.0  # drop negative zero


def percent_points(fraction: float, ndigits: int = 0) -> float:
    return round_half_away(100.0 * fraction, ndigits)
