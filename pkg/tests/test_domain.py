import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from leadsupply.domain import (
    ALL_LEVELS,
    ASSOCIATE_LEVELS,
    ATOMIC_SEGMENTS,
    LEADERSHIP_LEVELS,
    PARTNER_LEVELS,
    Band,
    Gender,
    JobLevel,
    PopulationSnapshot,
    Race,
    Segment,
    aggregate,
    percent_points,
    round_half_away,
    share,
)
from leadsupply.errors import TaxonomyError
from leadsupply.ingest import combine

from published_tables import ALL_FIRM_COUNTS, DEMOGRAPHICS

LEVEL_GROUPS = {
    "associate": ASSOCIATE_LEVELS,
    "counsel": {JobLevel.COUNSEL},
    "partner": PARTNER_LEVELS,
    "nonequity": {JobLevel.NONEQUITY_PARTNER},
    "equity": {JobLevel.EQUITY_PARTNER},
    "leadership": LEADERSHIP_LEVELS,
    "total": ALL_LEVELS,
}

counts = st.floats(min_value=0, max_value=1e6, allow_nan=False)
snapshots = st.dictionaries(
    st.tuples(st.sampled_from(list(JobLevel)), st.sampled_from(ATOMIC_SEGMENTS)), counts
).map(lambda d: PopulationSnapshot(0, d))


@pytest.fixture(scope="module")
def all_firms(fixtures):
    return combine(fixtures.values())


def test_aggregate_published_totals(all_firms):
    assert aggregate(all_firms, ALL_LEVELS, Segment.ALL) == 248628
    assert aggregate(all_firms, LEADERSHIP_LEVELS, Segment.ALL) == 136539


def test_share_examples(all_firms):
    assert share(all_firms, ALL_LEVELS, "female", ALL_LEVELS, "all") == pytest.approx(0.3656, abs=5e-5)
    assert share(all_firms, {JobLevel.COUNSEL}, "all", ALL_LEVELS, "all") == pytest.approx(0.1330, abs=5e-5)
    assert share(all_firms, LEADERSHIP_LEVELS, "minority", LEADERSHIP_LEVELS, "minority") == 1.0


def test_all_firm_female_and_minority_counts(all_firms):
    for row, (female, minority) in ALL_FIRM_COUNTS.items():
        levels = LEVEL_GROUPS[row]
        assert aggregate(all_firms, levels, Segment.FEMALE) == female
        assert aggregate(all_firms, levels, Segment.MINORITY) == minority


@pytest.mark.parametrize("group", sorted(DEMOGRAPHICS))
def test_demographic_percentages_within_one_point(group, fixtures, all_firms):
    snap = all_firms if group == "all" else fixtures[Band.parse(group)].population
    for row, (n, pct_total, pct_female, pct_minority) in DEMOGRAPHICS[group].items():
        levels = LEVEL_GROUPS[row]
        assert aggregate(snap, levels, "all") == n
        if pct_total is not None:
            assert abs(percent_points(share(snap, levels, "all", ALL_LEVELS, "all")) - pct_total) <= 1
        assert abs(percent_points(share(snap, levels, "female", levels, "all")) - pct_female) <= 1
        assert abs(percent_points(share(snap, levels, "minority", levels, "all")) - pct_minority) <= 1


def test_empty_snapshot_aggregates_to_zero():
    z = PopulationSnapshot.zeros()
    for seg in Segment:
        assert aggregate(z, ALL_LEVELS, seg) == 0
        assert aggregate(z, {JobLevel.COUNSEL}, seg) == 0


def test_zero_base_share_raises():
    with pytest.raises(ZeroDivisionError):
        share(PopulationSnapshot.zeros(), ALL_LEVELS, "female", ALL_LEVELS, "all")


def test_unknown_tokens_raise_taxonomy_error():
    with pytest.raises(TaxonomyError):
        aggregate(PopulationSnapshot.zeros(), ALL_LEVELS, "purple")
    with pytest.raises(TaxonomyError):
        JobLevel.parse("intern")
    with pytest.raises(TaxonomyError):
        Band.parse("1000+")


def test_leadership_predicate_by_enumeration():
    top3 = list(JobLevel)[-3:]
    for lv in JobLevel:
        assert lv.is_leadership == (lv in top3)
        assert lv.is_associate == (not lv.is_leadership)
    assert sorted(JobLevel, key=lambda lv: lv.rank) == list(JobLevel)
    assert JobLevel.SENIOR_ASSOCIATE < JobLevel.COUNSEL


def test_segment_taxonomy():
    assert Segment.ALL.atoms == frozenset(ATOMIC_SEGMENTS)
    assert Segment.MINORITY.atoms == {Segment.MINORITY_FEMALE, Segment.MINORITY_MALE}
    assert Segment.FEMALE.atoms == {Segment.WHITE_FEMALE, Segment.MINORITY_FEMALE}
    assert Segment.parse("Omega") is Segment.ALL
    assert Segment.parse("minority-all") is Segment.MINORITY
    for s in ATOMIC_SEGMENTS:
        assert Segment.atomic(s.gender, s.race) is s
    assert Segment.atomic(Gender.FEMALE, Race.WHITE) is Segment.WHITE_FEMALE
    assert not Segment.WHITE.is_atomic


def test_snapshot_rejects_bad_cells():
    with pytest.raises(TaxonomyError):
        PopulationSnapshot(0, {(JobLevel.COUNSEL, Segment.ALL): 1})
    with pytest.raises(ValueError):
        PopulationSnapshot(0, {(JobLevel.COUNSEL, Segment.WHITE_MALE): -1})
    with pytest.raises(ValueError):
        PopulationSnapshot(0, {(JobLevel.COUNSEL, Segment.WHITE_MALE): math.nan})


def test_snapshot_equality_treats_missing_as_zero():
    a = PopulationSnapshot(3, {(JobLevel.COUNSEL, Segment.WHITE_MALE): 0.0})
    assert a == PopulationSnapshot(3, {})
    assert a != PopulationSnapshot(4, {})


@given(snapshots)
def test_partition_property(snap):
    for lv in JobLevel:
        atoms = sum(snap.get(lv, s) for s in ATOMIC_SEGMENTS)
        assert aggregate(snap, {lv}, Segment.ALL) == atoms


@given(snapshots, st.sampled_from(list(Segment)), st.sampled_from(list(LEVEL_GROUPS.values())))
def test_subset_share_in_unit_interval(snap, seg, levels):
    base = aggregate(snap, ALL_LEVELS, Segment.ALL)
    if base == 0:
        return
    assert 0.0 <= share(snap, levels, seg, ALL_LEVELS, Segment.ALL) <= 1.0 + 1e-15


@pytest.mark.parametrize(
    "x, nd, expected",
    [(0.5, 0, 1), (-0.5, 0, -1), (2.5, 0, 3), (-2.5, 0, -3), (0.3 * 9735, 0, 2921), (1.005, 2, 1.01), (-0.4, 0, 0)],
)
def test_round_half_away(x, nd, expected):
    assert round_half_away(x, nd) == expected
    assert math.copysign(1.0, round_half_away(-0.4)) == 1.0


@given(st.floats(min_value=-1e9, max_value=1e9, allow_nan=False))
def test_round_half_away_is_odd_and_close(x):
    r = round_half_away(x)
    assert round_half_away(-x) == -r or r == 0
    assert abs(r - x) <= 0.5 + 1e-6 * max(1.0, abs(x))
