from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from leadsupply.domain import ATOMIC_SEGMENTS, Band, JobLevel, PopulationSnapshot
from leadsupply.flows import ALLOWED_PROMOTIONS, ASSOCIATE_ORDER, SA, AssociateInflow, CellFlows, FlowRates
from leadsupply.ingest import load_fixture

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

BANDS = tuple(Band)


def random_system(
    rng: np.random.Generator,
    total_agents: int | None = None,
    inflow: AssociateInflow = AssociateInflow.ADJACENT,
    whole: bool = True,
    empty_share: float = 0.1,
) -> tuple[PopulationSnapshot, FlowRates]:
    """A random population with flows that keep every cell nonnegative after one step."""
    cells = [(lv, s) for lv in JobLevel for s in ATOMIC_SEGMENTS]
    if total_agents is None:
        sizes = rng.integers(0, 5000, size=len(cells)).astype(float)
    else:
        sizes = rng.multinomial(total_agents, rng.dirichlet(np.ones(len(cells)))).astype(float)
    if not whole:
        sizes = sizes + rng.random(len(cells))
    sizes[rng.random(len(cells)) < empty_share] = 0.0
    pop = PopulationSnapshot(0, dict(zip(cells, sizes)))
    flows = {}
    for (lv, seg), n in zip(cells, sizes):
        lateral = rng.uniform(0.5, 200.0) if lv.is_leadership or rng.random() < 0.7 else 0.0
        if lv is JobLevel.JUNIOR_ASSOCIATE:
            lateral = rng.uniform(50.0, 1000.0)
        if n == 0:
            flows[(lv, seg)] = CellFlows(lateral_in=lateral)
            continue
        dests = sorted(ALLOWED_PROMOTIONS.get(lv, ()), key=lambda d: d.rank)
        out_share = rng.uniform(0.0, 0.95)
        if lv in ASSOCIATE_ORDER and lv is not SA:
            # associate promotions are fractions; ALL_LOWER removes them once per higher level
            higher = len(ASSOCIATE_ORDER) - 1 - ASSOCIATE_ORDER.index(lv)
            times = higher if inflow is AssociateInflow.ALL_LOWER else 1
            w = rng.dirichlet(np.ones(2))
            retention = rng.uniform(0.5, 1.0)
            promo_frac = out_share * w[1] / times
            flows[(lv, seg)] = CellFlows(
                lateral_in=lateral,
                attrition=out_share * w[0] * n,
                retention=retention,
                promotion_rate=min(1.0, promo_frac / retention),
            )
            continue
        kinds = ["attrition"] + (["retirement"] if lv.is_leadership else []) + [f"p:{d.value}" for d in dests]
        w = rng.dirichlet(np.ones(len(kinds))) * out_share * n
        amounts = dict(zip(kinds, w))
        flows[(lv, seg)] = CellFlows(
            lateral_in=lateral,
            attrition=amounts["attrition"],
            retirement=amounts.get("retirement", 0.0),
            reo=rng.uniform(0.0, 0.2) * n if lv is SA else 0.0,
            promotion={d: amounts[f"p:{d.value}"] for d in dests},
        )
    return pop, FlowRates(flows)


def systems(**kw):
    return st.integers(0, 2**32 - 1).map(lambda s: random_system(np.random.default_rng(s), **kw))


@pytest.fixture(scope="session")
def fixtures():
    return {b: load_fixture(b) for b in BANDS}


@pytest.fixture(scope="session")
def fixture751(fixtures):
    return fixtures[Band.B751_PLUS]


# ---------------------------------------------------------------- acceptance --

_CRITERIA: dict[int, list[tuple[str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, name): acceptance criterion n")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    n, name = marker.args
    # an expected failure (xfail) still reports the criterion as FAIL
    outcome = "PASS" if call.excinfo is None else "FAIL"
    _CRITERIA.setdefault(n, []).append((name, outcome))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        name = _CRITERIA[n][0][0]
        ok = all(o == "PASS" for _, o in _CRITERIA[n])
        terminalreporter.write_line(f"criterion {n} ({name}): {'PASS' if ok else 'FAIL'}")
