"""Bundled 2021 cohorts: populations and flows calibrated to published aggregates.

Only aggregates were published: headcounts per level and band, gender and
minority percentages, and annual demand / availability per leadership level
for the overall population and the two subgroups. Raw flows were not. This
module rebuilds a consistent cell-level dataset from those aggregates:

* populations: per-band female and minority counts chosen so every published
  percentage rounds exactly and the all-firm counts sum exactly; minority
  female = minority x female share (independence); associates split evenly
  into junior / mid / senior thirds.
* flows: ``build_fixture_rates`` inverts the demand / availability
  definitions with a fixed canonical split, and ``stationary_associates``
  picks associate flows that keep the associate pipeline level at year 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .domain import (
    ATOMIC_SEGMENTS,
    OVERALL,
    Band,
    FirmSizeBand,
    PopulationSnapshot,
    Segment,
    round_half_away,
)
from .equilibrium import Column
from .errors import CalibrationError
from .flows import ASSOCIATE_ORDER, C, EQ, NE, SA, CellFlows, FlowRates
from .ingest import DatasetFile, DatasetMeta, serialize

YEAR = 2021
SOURCE = "AML 2021 leadership aggregates (published); cell flows calibrated"

FIRM_COUNTS = {Band.B251_500: 155, Band.B501_750: 62, Band.B751_PLUS: 110}

# headcount per level
LEVEL_COUNTS = {
    Band.B751_PLUS: {"associate": 73760, C: 19635, NE: 13660, EQ: 47632},
    Band.B501_750: {"associate": 17549, C: 5455, NE: 3865, EQ: 10852},
    Band.B251_500: {"associate": 20780, C: 7973, NE: 9839, EQ: 17628},
}

# (female, minority) per level; each rounds to the published band percentage,
# partner / leadership / total rows included, and the bands sum to the
# published all-firm counts.
COMPOSITION = {
    Band.B751_PLUS: {"associate": (34869, 19978), C: (7910, 2833), NE: (4186, 1701), EQ: (10661, 4948)},
    Band.B501_750: {"associate": (8239, 4568), C: (2372, 789), NE: (1143, 410), EQ: (2367, 955)},
    Band.B251_500: {"associate": (9441, 4299), C: (3050, 933), NE: (2976, 1077), EQ: (3677, 1335)},
}

# canonical split of the calibrated flows
PROMOTION_SHARE_OF_DEMAND = 0.6
PROMOTION_SHARE_OF_AVAILABLE = 0.3
ASSOCIATE_ATTRITION = 0.15

_LEVEL_COLUMNS = ((C, Column.COUNSEL), (NE, Column.NONEQUITY), (EQ, Column.EQUITY))
_VIEWS = (OVERALL, Segment.WHITE_FEMALE, Segment.MINORITY)


def _split_counts(n: int, female: int, minority: int) -> dict[Segment, int]:
    minority_female = int(round_half_away(minority * female / n)) if n else 0
    return {
        Segment.WHITE_FEMALE: female - minority_female,
        Segment.MINORITY_FEMALE: minority_female,
        Segment.WHITE_MALE: n - female - (minority - minority_female),
        Segment.MINORITY_MALE: minority - minority_female,
    }


def band_population(band: Band) -> PopulationSnapshot:
    counts = {}
    for key, n in LEVEL_COUNTS[band].items():
        female, minority = COMPOSITION[band][key]
        cells = _split_counts(n, female, minority)
        if key == "associate":
            for seg, x in cells.items():
                base, extra = divmod(x, 3)
                for i, lv in enumerate(ASSOCIATE_ORDER):
                    counts[(lv, seg)] = base + (1 if i < extra else 0)
        else:
            for seg, x in cells.items():
                counts[(key, seg)] = x
    return PopulationSnapshot(0, counts)


@dataclass(frozen=True)
class SupplyTargets:
    """Per-column demand (overall) and availability per view.

    Partner and Total may be omitted; when given they must equal the sums of
    their constituent columns.
    """

    demand: Mapping[Column, float]
    available: Mapping[Segment, Mapping[Column, float]]

    @classmethod
    def from_columns(cls, demand: Sequence[float], available: Mapping[Segment, Sequence[float]]) -> "SupplyTargets":
        cols = tuple(Column)
        return cls(dict(zip(cols, demand)), {v: dict(zip(cols, row)) for v, row in available.items()})

    def violations(self) -> list[str]:
        out = []
        rows = [("demand", self.demand)] + [(f"available[{v.value}]", r) for v, r in self.available.items()]
        for name, row in rows:
            for col in (Column.COUNSEL, Column.NONEQUITY, Column.EQUITY):
                if col not in row:
                    out.append(f"{name}: missing {col.value}")
            if out:
                continue
            checks = [(Column.PARTNER, row[Column.NONEQUITY] + row[Column.EQUITY], "nonequity + equity")]
            partner = row.get(Column.PARTNER, checks[0][1])
            checks.append((Column.TOTAL, row[Column.COUNSEL] + partner, "counsel + partner"))
            for col, expected, label in checks:
                if col in row and not _close(row[col], expected):
                    out.append(f"{name}: {col.value} {row[col]:g} != {label} {expected:g}")
        for view in self.available:
            if view not in _VIEWS:
                out.append(f"unsupported view {view.value}")
        if OVERALL not in self.available:
            out.append("available: missing overall view")
        for col, value in self.demand.items():
            if value < 0:
                out.append(f"demand: {col.value} is negative ({value:g})")
        return out


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-9 * max(1.0, abs(a), abs(b))


def _shares(values: Mapping[Segment, float], atoms: Sequence[Segment]) -> dict[Segment, float]:
    total = sum(values.get(s, 0.0) for s in atoms)
    if total <= 0:
        return {s: 1.0 / len(atoms) for s in atoms}
    return {s: values.get(s, 0.0) / total for s in atoms}


def _atomic_targets(targets: SupplyTargets, population: PopulationSnapshot | None):
    """Split column targets into per-(level, atomic segment) demand and availability."""
    dem, av = {}, {}
    minority = (Segment.MINORITY_FEMALE, Segment.MINORITY_MALE)
    for lv, col in _LEVEL_COLUMNS:
        pop = {s: population.get(lv, s) if population is not None else 0.0 for s in ATOMIC_SEGMENTS}
        share = _shares(pop, ATOMIC_SEGMENTS)
        for s in ATOMIC_SEGMENTS:
            dem[(lv, s)] = targets.demand[col] * share[s]
        overall = targets.available[OVERALL][col]
        wf = targets.available.get(Segment.WHITE_FEMALE, {}).get(col)
        mi = targets.available.get(Segment.MINORITY, {}).get(col)
        pop_share = _shares(pop, ATOMIC_SEGMENTS)
        if wf is None:
            wf = overall * pop_share[Segment.WHITE_FEMALE]
        if mi is None:
            mi = overall * (pop_share[Segment.MINORITY_FEMALE] + pop_share[Segment.MINORITY_MALE])
        msplit = _shares(pop, minority)
        av[(lv, Segment.WHITE_FEMALE)] = wf
        av[(lv, Segment.MINORITY_FEMALE)] = mi * msplit[Segment.MINORITY_FEMALE]
        av[(lv, Segment.MINORITY_MALE)] = mi * msplit[Segment.MINORITY_MALE]
        av[(lv, Segment.WHITE_MALE)] = overall - wf - mi
    return dem, av


def build_fixture_rates(targets: SupplyTargets, population: PopulationSnapshot | None = None) -> FlowRates:
    """Leadership flows (and senior-associate promotions) matching ``targets``.

    Canonical split, per atomic segment: availability is 70% attrition and
    30% promotion out (equity partners, having nowhere to go, 100%
    attrition); a negative availability becomes retirement. Promotions out of
    counsel go to non-equity and equity partner in proportion to their
    demand; promotions out of non-equity go to equity. Where those exceed a
    level's demand they are scaled down and the excess stays as attrition.
    Senior associates then supply promotions up to 60% of demand and lateral
    hires fill the rest. Segment weights come from ``population`` when given,
    otherwise they are uniform.
    """
    problems = targets.violations()
    if problems:
        raise CalibrationError(problems)
    dem, av = _atomic_targets(targets, population)
    cells: dict = {}
    for s in ATOMIC_SEGMENTS:
        att, ret, out = {}, {}, {}
        for lv, _ in _LEVEL_COLUMNS:
            a = av[(lv, s)]
            if a < 0:
                att[lv], ret[lv], out[lv] = 0.0, -a, 0.0
            elif lv is EQ:
                att[lv], ret[lv], out[lv] = a, 0.0, 0.0
            else:
                out[lv] = PROMOTION_SHARE_OF_AVAILABLE * a
                att[lv], ret[lv] = a - out[lv], 0.0
        d_ne, d_eq = dem[(NE, s)], dem[(EQ, s)]
        to_ne = out[C] * d_ne / (d_ne + d_eq) if d_ne + d_eq > 0 else 0.0
        promo = {(C, NE): to_ne, (C, EQ): out[C] - to_ne, (NE, EQ): out[NE]}
        for dest in (NE, EQ):
            incoming = [k for k in promo if k[1] is dest]
            total_in = sum(promo[k] for k in incoming)
            limit = dem[(dest, s)]
            if total_in > limit:
                scale = limit / total_in
                for k in incoming:
                    excess = promo[k] * (1.0 - scale)
                    promo[k] -= excess
                    att[k[0]] += excess
        from_sa = {}
        lateral = {}
        for lv, _ in _LEVEL_COLUMNS:
            leader_in = sum(v for (src, dst), v in promo.items() if dst is lv)
            from_sa[lv] = max(0.0, PROMOTION_SHARE_OF_DEMAND * dem[(lv, s)] - leader_in)
            lateral[lv] = max(0.0, dem[(lv, s)] - leader_in - from_sa[lv])
        cells[(SA, s)] = CellFlows(promotion={lv: from_sa[lv] for lv, _ in _LEVEL_COLUMNS})
        for lv, _ in _LEVEL_COLUMNS:
            cells[(lv, s)] = CellFlows(
                lateral_in=lateral[lv],
                attrition=att[lv],
                retirement=ret[lv],
                promotion={dst: v for (src, dst), v in promo.items() if src is lv},
            )
    return FlowRates(cells)


def stationary_associates(
    rates: FlowRates, population: PopulationSnapshot, attrition_rate: float = ASSOCIATE_ATTRITION
) -> FlowRates:
    """Add associate flows that hold every associate cell constant at year 0.

    Each associate level loses ``attrition_rate`` of its headcount, retention
    is the complement, and promotion rates are solved bottom-up from the
    senior associates' outflow to leadership. Junior entry hires close the
    balance.
    """
    cells = dict(rates.cells)
    problems = []
    ja, ma, sa = ASSOCIATE_ORDER
    keep = 1.0 - attrition_rate
    for s in ATOMIC_SEGMENTS:
        a = {lv: population.get(lv, s) for lv in ASSOCIATE_ORDER}
        senior = rates.cell(sa, s)
        out_s = senior.promotion_out + attrition_rate * a[sa]
        p_m = out_s / (keep * a[ma]) if a[ma] else 0.0
        out_m = attrition_rate * a[ma] + p_m * keep * a[ma]
        p_j = out_m / (keep * a[ja]) if a[ja] else 0.0
        entry = attrition_rate * a[ja] + p_j * keep * a[ja]
        for name, p in (("mid", p_m), ("junior", p_j)):
            if p > 1.0:
                problems.append(f"{s.value}: {name} promotion rate {p:.3f} exceeds 1")
        if problems:
            continue
        cells[(ja, s)] = CellFlows(
            lateral_in=entry, attrition=attrition_rate * a[ja], retention=keep, promotion_rate=p_j
        )
        cells[(ma, s)] = CellFlows(attrition=attrition_rate * a[ma], retention=keep, promotion_rate=p_m)
        cells[(sa, s)] = CellFlows(
            attrition=attrition_rate * a[sa], retention=keep, reo=senior.reo, promotion=dict(senior.promotion)
        )
    if problems:
        raise CalibrationError(problems)
    return FlowRates(cells)


# Published demand and availability per column (counsel, partner, non-equity,
# equity, total). A few values carry a fraction below display precision: the
# published integers are rounded figures whose sums differ by one in places
# (e.g. 1477 + 1848 vs 3324), and only unrounded values reproduce every
# printed cell at once.
PUBLISHED_TARGETS = {
    Band.B751_PLUS: SupplyTargets.from_columns(
        demand=(2623, 9735.4, 2741.2, 6994.2, 12358.4),
        available={
            OVERALL: (2681, 6716, 3494, 3222, 9397),
            Segment.WHITE_FEMALE: (782.9, 1453, 816, 637, 2235.9),
            Segment.MINORITY: (431, 1003, 522, 481, 1434),
        },
    ),
    Band.B501_750: SupplyTargets.from_columns(
        demand=(1144, 2312, 618, 1694, 3456),
        available={
            OVERALL: (913, 2345, 625, 1720, 3258),
            Segment.WHITE_FEMALE: (270, 481.3, 162.3, 319, 751.3),
            Segment.MINORITY: (169.3, 273.3, 80, 193.3, 442.6),
        },
    ),
    Band.B251_500: SupplyTargets.from_columns(
        demand=(1072, 3324.2, 1476.6, 1847.6, 4396.2),
        available={
            OVERALL: (1209, 2745, 1742, 1003, 3954),
            Segment.WHITE_FEMALE: (318, 648, 433, 215, 966),
            Segment.MINORITY: (196, 286.6, 183.6, 103, 482.6),
        },
    ),
}


def band_dataset(band: Band) -> DatasetFile:
    population = band_population(band)
    rates = build_fixture_rates(PUBLISHED_TARGETS[band], population)
    rates = stationary_associates(rates, population)
    meta = DatasetMeta(SOURCE, YEAR, FirmSizeBand(band, FIRM_COUNTS[band]))
    return DatasetFile(meta, population, rates)


def write_fixtures(directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for band in (Band.B751_PLUS, Band.B501_750, Band.B251_500):
        path = directory / f"band-{band.value}.csv"
        path.write_bytes(serialize(band_dataset(band)))
        paths.append(path)
    return paths


if __name__ == "__main__":
    import sys

    target = sys.argv[1] if len(sys.argv) > 1 else str(Path(__file__).parent / "fixtures")
    for p in write_fixtures(target):
        print(p)
