import pytest
from hypothesis import given
from hypothesis import strategies as st

from leadsupply.domain import ALL_LEVELS, Band, JobLevel, Segment, aggregate
from leadsupply.errors import ParseError
from leadsupply.ingest import combine, fixture_paths, load, parse, serialize

from conftest import systems

HEAD = "#source: test\n#year: 2021\n#band: 751plus\n#firms: 3\nrecord,level,gender,race,kind,value\n"


def full_population(value="1", skip=None):
    rows = []
    for lv in JobLevel:
        for g in ("female", "male"):
            for r in ("white", "minority"):
                if (lv.value, g, r) != skip:
                    rows.append(f"population,{lv.value},{g},{r},,{value}")
    return "\n".join(rows) + "\n"


def test_fixture_totals(fixtures):
    assert combine(fixtures.values()).total() == 248628
    assert fixtures[Band.B751_PLUS].population.total() == 154687
    assert all(ds.rates is not None for ds in fixtures.values())
    assert len(fixture_paths()) == 3


def test_minimal_file_parses():
    ds = parse(HEAD + full_population())
    assert ds.band is Band.B751_PLUS and ds.meta.year == 2021 and ds.meta.band.firm_count == 3
    assert aggregate(ds.population, ALL_LEVELS, Segment.ALL) == 24
    assert ds.rates is None


def test_negative_headcount_names_the_line():
    text = HEAD + full_population().replace("population,counsel,female,white,,1", "population,counsel,female,white,,-4")
    with pytest.raises(ParseError) as exc:
        parse(text, "x.csv")
    (issue,) = exc.value.issues
    lines = text.split("\n")
    assert lines[issue.line - 1].endswith(",-4")
    assert "negative headcount" in issue.message
    assert str(exc.value).startswith(f"x.csv:{issue.line}:")


def test_every_issue_is_reported():
    text = (
        "#source: t\n#year: soon\n#band: 751plus\n#firms: 1\nrecord,level,gender,race,kind,value\n"
        + full_population(skip=("equity_partner", "male", "minority"))
        + "flow,counsel,female,white,attrition,-1\n"
        + "flow,intern,female,white,attrition,1\n"
        + "flow,counsel,female,white,lateral,abc\n"
        + "population,counsel,female,white,,1\n"
        + "flow,junior_associate,male,white,retirement,2\n"
    )
    with pytest.raises(ParseError) as exc:
        parse(text)
    messages = " | ".join(i.message for i in exc.value.issues)
    assert len(exc.value.issues) >= 7, messages
    for fragment in ("year", "missing population cells", "negative attrition", "intern", "abc", "duplicate", "retirement"):
        assert fragment in messages


def test_unknown_band_and_missing_header():
    with pytest.raises(ParseError):
        parse(HEAD.replace("751plus", "huge") + full_population())
    with pytest.raises(ParseError) as exc:
        parse("#source: t\n")
    assert any("header" in i.message for i in exc.value.issues)


def test_bytes_and_bom_accepted():
    text = HEAD + full_population()
    assert parse(("﻿" + text).encode()) == parse(text)
    with pytest.raises(ParseError):
        parse(b"\xff\xfe\x00garbage")


def test_fixture_serialization_round_trips(fixtures):
    for band, ds in fixtures.items():
        assert parse(serialize(ds)) == ds
        assert serialize(load(fixture_paths()[0].parent / f"band-{band.value}.csv")) == serialize(ds)


@given(systems(whole=False))
def test_round_trip_property(system):
    pop, rates = system
    base = parse(HEAD + full_population())
    ds = type(base)(base.meta, pop, rates)
    again = parse(serialize(ds))
    assert again.population == ds.population
    assert again.rates == ds.rates
    assert serialize(again) == serialize(ds)


@given(st.text(max_size=400) | st.binary(max_size=400))
def test_fuzzed_input_only_raises_parse_error(data):
    try:
        parse(data)
    except ParseError:
        pass


@given(st.lists(st.sampled_from(full_population().splitlines() + ["flow,counsel,female,white,attrition,2", ",,,", "x"]), max_size=50))
def test_shuffled_rows_only_raise_parse_error(rows):
    try:
        parse(HEAD + "\n".join(rows))
    except ParseError:
        pass
