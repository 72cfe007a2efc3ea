import pytest
from hypothesis import given
from hypothesis import strategies as st

from leadsupply.errors import PolicyError
from leadsupply.poolmodel import (
    HBR_2016,
    REFERENCE_POLICY,
    PoolPolicy,
    allocate_pools,
    diverse_hire_rate,
    gap_to_nominal,
    hire_rate_monte_carlo,
    parse_probs,
)


def test_reference_allocation_and_rate():
    assert allocate_pools(REFERENCE_POLICY) == [1, 1, 1, 1, 2]
    assert diverse_hire_rate(REFERENCE_POLICY) == pytest.approx(0.10)
    assert gap_to_nominal(REFERENCE_POLICY) == pytest.approx(-0.20)
    assert dict(REFERENCE_POLICY.hire_prob_by_diverse_count) == dict(HBR_2016)


def test_allocation_examples():
    assert allocate_pools(PoolPolicy(4, 0.0, 5, {})) == [0] * 5
    assert allocate_pools(PoolPolicy(10, 0.3, 3, {3: 0.2})) == [3, 3, 3]


def test_rate_examples():
    assert diverse_hire_rate(PoolPolicy(4, 0.3, 5, {1: 0.0, 2: 0.0})) == 0.0
    assert diverse_hire_rate(PoolPolicy(4, 0.5, 1, {2: 0.5})) == 0.5
    assert diverse_hire_rate(PoolPolicy(4, 0.0, 5, {})) == 0.0


def test_missing_probability_is_policy_error():
    with pytest.raises(PolicyError):
        diverse_hire_rate(PoolPolicy(4, 0.3, 5, {1: 0.0}))


def test_total_is_rounded_product():
    # 0.5 * 3 = 1.5 per pool over 3 pools: 4.5 rounds half away to 5
    assert allocate_pools(PoolPolicy(3, 0.5, 3, {1: 0, 2: 0})) == [1, 2, 2]


def test_invalid_policies():
    with pytest.raises(PolicyError):
        PoolPolicy(0, 0.3, 5)
    with pytest.raises(PolicyError):
        PoolPolicy(4, 1.3, 5)
    with pytest.raises(PolicyError):
        PoolPolicy(4, 0.3, 0)
    with pytest.raises(PolicyError):
        PoolPolicy(4, 0.3, 5, {5: 0.1})
    with pytest.raises(PolicyError):
        PoolPolicy(4, 0.3, 5, {1: 1.5})
    with pytest.raises(PolicyError):
        PoolPolicy(4, 0.3, 5, {0: 0.2})


def test_monte_carlo():
    mc = hire_rate_monte_carlo(REFERENCE_POLICY, seed=42, trials=1_000_000)
    assert abs(mc.mean - 0.1) < 3 * mc.stderr
    assert mc.stderr == pytest.approx(0.0003, abs=0.00005)
    zero = hire_rate_monte_carlo(PoolPolicy(4, 0.3, 5, {1: 0, 2: 0}), trials=10_000)
    assert zero.mean == 0.0 and zero.stderr == 0.0
    assert hire_rate_monte_carlo(REFERENCE_POLICY, seed=1, trials=200_000, jobs=4) == hire_rate_monte_carlo(
        REFERENCE_POLICY, seed=1, trials=200_000, jobs=1
    )


def test_parse_probs():
    assert parse_probs("1:0,2:0.5") == {1: 0.0, 2: 0.5}
    assert parse_probs("hbr-2016") == dict(HBR_2016)
    for bad in ("", "1-0", "x:1", "1:0:2", "1.5:0.2"):
        with pytest.raises(PolicyError):
            parse_probs(bad)


policies = st.builds(
    lambda n, f, pools: (n, f, pools),
    st.integers(1, 12),
    st.floats(0.0, 1.0),
    st.integers(1, 12),
)


@given(policies)
def test_allocation_invariants(p):
    n, f, pools = p
    alloc = allocate_pools(PoolPolicy(n, f, pools, {d: 0.0 for d in range(1, n + 1)}))
    assert len(alloc) == pools
    assert max(alloc) - min(alloc) <= 1
    assert all(0 <= a <= n for a in alloc)
    assert abs(sum(alloc) - f * n * pools) <= 0.5 + 1e-9
    assert alloc == sorted(alloc)


@given(policies)
def test_neutral_lottery(p):
    n, f, pools = p
    policy = PoolPolicy(n, f, pools, {d: d / n for d in range(1, n + 1)})
    alloc = allocate_pools(policy)
    assert diverse_hire_rate(policy) == pytest.approx(sum(alloc) / (n * pools), rel=1e-12, abs=1e-15)
    if (f * n) == int(f * n):
        assert gap_to_nominal(policy) == pytest.approx(0.0, abs=1e-12)


@given(policies, st.data())
def test_rate_monotone_in_probabilities(p, data):
    n, f, pools = p
    probs = {d: data.draw(st.floats(0.0, 1.0)) for d in range(1, n + 1)}
    policy = PoolPolicy(n, f, pools, probs)
    base = diverse_hire_rate(policy)
    d = data.draw(st.integers(1, n))
    bumped = dict(probs)
    bumped[d] = min(1.0, probs[d] + data.draw(st.floats(0.0, 1.0)))
    assert 0.0 <= base <= 1.0
    assert diverse_hire_rate(PoolPolicy(n, f, pools, bumped)) >= base
