import numpy as np
import pytest

from leadsupply.agents import simulate_agents
from leadsupply.domain import JobLevel, PopulationSnapshot, Segment
from leadsupply.errors import InfeasibleProbabilityError
from leadsupply.flows import AssociateInflow, CellFlows, FlowRates, step

from conftest import random_system

C, NE = JobLevel.COUNSEL, JobLevel.NONEQUITY_PARTNER
WM = Segment.WHITE_MALE


def test_zero_probabilities_preserve_counts():
    p, _ = random_system(np.random.default_rng(0))
    est = simulate_agents(p, FlowRates.zeros(), seed=1, replications=64)
    for cell, v in est.mean.items():
        assert v == p[cell]
        assert est.stderr[cell] == 0.0


def test_single_agent_certain_promotion():
    p = PopulationSnapshot(0, {(C, WM): 1})
    rates = FlowRates({(C, WM): CellFlows(promotion={NE: 1.0})})
    est = simulate_agents(p, rates, replications=16)
    assert est.mean[(NE, WM)] == 1.0 and est.mean[(C, WM)] == 0.0


def test_probability_above_one_rejected():
    p = PopulationSnapshot(0, {(C, WM): 3})
    with pytest.raises(InfeasibleProbabilityError):
        simulate_agents(p, FlowRates({(C, WM): CellFlows(attrition=4)}), replications=4)
    with pytest.raises(InfeasibleProbabilityError):
        simulate_agents(p, FlowRates({(C, WM): CellFlows(attrition=2, retirement=2)}), replications=4)


def test_requires_whole_headcounts():
    with pytest.raises(ValueError):
        simulate_agents(PopulationSnapshot(0, {(C, WM): 2.5}), FlowRates.zeros(), replications=4)


def test_seeded_and_thread_independent():
    p, r = random_system(np.random.default_rng(5), total_agents=10_000)
    a = simulate_agents(p, r, seed=9, replications=200, jobs=1)
    b = simulate_agents(p, r, seed=9, replications=200, jobs=4)
    c = simulate_agents(p, r, seed=10, replications=200)
    assert a == b
    assert a != c


@pytest.mark.parametrize("inflow", list(AssociateInflow))
def test_mean_matches_deterministic_step(inflow):
    p, r = random_system(np.random.default_rng(11), total_agents=200_000, inflow=inflow)
    est = simulate_agents(p, r, seed=3, replications=400, inflow=inflow)
    assert est.agreement(step(p, r, inflow), k=4.0) >= 0.95


def test_fractional_laterals_have_exact_expectation():
    rates = FlowRates({(C, WM): CellFlows(lateral_in=2.25)})
    est = simulate_agents(PopulationSnapshot.zeros(), rates, seed=2, replications=4000)
    assert abs(est.mean[(C, WM)] - 2.25) < 4 * est.stderr[(C, WM)]
