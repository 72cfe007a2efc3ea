"""Candidate-slate arithmetic for a fixed diverse share.

Each opening draws one pool (uniformly among ``num_pools``) and makes one
hire from it. A pool with ``d`` diverse candidates yields a diverse hire with
probability ``hire_prob_by_diverse_count[d]``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .domain import round_half_away
from .errors import AllocationError, PolicyError

# Empirical hire likelihoods imported from a 2016 HBR study of finalist pools
# (one woman/minority finalist: ~0%; two: ~50%). An external assumption.
HBR_2016: Mapping[int, float] = MappingProxyType({1: 0.0, 2: 0.5})
NAMED_TABLES = {"hbr-2016": HBR_2016}

MC_CHUNK = 1 << 16


@dataclass(frozen=True)
class PoolPolicy:
    pool_size: int
    diversity_share: float
    num_pools: int
    hire_prob_by_diverse_count: Mapping[int, float] = field(default_factory=lambda: dict(HBR_2016))

    def __post_init__(self):
        if int(self.pool_size) != self.pool_size or self.pool_size < 1:
            raise PolicyError(f"pool_size must be a positive integer, got {self.pool_size}")
        if int(self.num_pools) != self.num_pools or self.num_pools < 1:
            raise PolicyError(f"num_pools must be a positive integer, got {self.num_pools}")
        if not 0.0 <= self.diversity_share <= 1.0:
            raise PolicyError(f"diversity_share must lie in [0, 1], got {self.diversity_share}")
        probs = {}
        for d, p in dict(self.hire_prob_by_diverse_count).items():
            if int(d) != d or not 0 <= d <= self.pool_size:
                raise PolicyError(f"diverse count {d} outside 0..{self.pool_size}")
            if not 0.0 <= p <= 1.0:
                raise PolicyError(f"hire probability for {d} diverse must lie in [0, 1], got {p}")
            probs[int(d)] = float(p)
        if probs.get(0, 0.0) != 0.0:
            raise PolicyError("a pool without diverse candidates cannot produce a diverse hire")
        object.__setattr__(self, "pool_size", int(self.pool_size))
        object.__setattr__(self, "num_pools", int(self.num_pools))
        object.__setattr__(self, "hire_prob_by_diverse_count", MappingProxyType(probs))

    def hire_prob(self, d: int) -> float:
        if d == 0:
            return 0.0
        try:
            return self.hire_prob_by_diverse_count[d]
        except KeyError:
            raise PolicyError(f"no hire probability for pools with {d} diverse candidates") from None


REFERENCE_POLICY = PoolPolicy(pool_size=4, diversity_share=0.3, num_pools=5, hire_prob_by_diverse_count=HBR_2016)


def allocate_pools(policy: PoolPolicy) -> list[int]:
    """Spread the diverse share over pools using floor and ceiling counts.

    Floor-count pools come first; only as many ceiling-count pools are used as
    the rounded total requires.
    """
    per_pool = policy.diversity_share * policy.pool_size
    lo, hi = math.floor(round_half_away(per_pool, 9)), math.ceil(round_half_away(per_pool, 9))
    total = int(round_half_away(per_pool * policy.num_pools))
    n = policy.num_pools
    if not lo * n <= total <= hi * n:
        raise AllocationError(f"{total} diverse candidates cannot be split into {n} pools of {lo} or {hi}")
    n_hi = 0 if hi == lo else total - lo * n
    return [lo] * (n - n_hi) + [hi] * n_hi


def diverse_hire_rate(policy: PoolPolicy) -> float:
    pools = allocate_pools(policy)
    return sum(policy.hire_prob(d) for d in pools) / policy.num_pools


def gap_to_nominal(policy: PoolPolicy) -> float:
    return diverse_hire_rate(policy) - policy.diversity_share


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    trials: int

    def __str__(self) -> str:
        return f"{self.mean:.4f} ± {self.stderr:.4f}"


def _chunk_hits(probs: np.ndarray, seed: int, index: int, size: int) -> int:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    pools = rng.integers(0, probs.size, size=size)
    return int(np.count_nonzero(rng.random(size) < probs[pools]))


def hire_rate_monte_carlo(policy: PoolPolicy, seed: int = 42, trials: int = 1_000_000, jobs: int = 1) -> MonteCarloEstimate:
    """Sample openings; deterministic for a given seed whatever ``jobs`` is."""
    if trials < 1:
        raise ValueError("trials must be positive")
    probs = np.array([policy.hire_prob(d) for d in allocate_pools(policy)])
    sizes = [MC_CHUNK] * (trials // MC_CHUNK)
    if trials % MC_CHUNK:
        sizes.append(trials % MC_CHUNK)
    args = [(probs, seed, i, n) for i, n in enumerate(sizes)]
    if jobs > 1 and len(args) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            hits = sum(pool.map(lambda a: _chunk_hits(*a), args))
    else:
        hits = sum(_chunk_hits(*a) for a in args)
    mean = hits / trials
    var = mean * (1.0 - mean) * trials / (trials - 1) if trials > 1 else 0.0
    return MonteCarloEstimate(mean, math.sqrt(var / trials), trials)


def parse_probs(text: str) -> dict[int, float]:
    """Parse ``"1:0,2:0.5"`` or a named table such as ``"hbr-2016"``."""
    text = text.strip()
    if text in NAMED_TABLES:
        return dict(NAMED_TABLES[text])
    out = {}
    for part in text.split(","):
        if not part.strip():
            continue
        try:
            d, p = part.split(":")
            d_i = int(d)
            if str(d_i) != d.strip():
                raise ValueError
            out[d_i] = float(p)
        except ValueError:
            raise PolicyError(f"malformed hire probability entry {part!r}; expected <count>:<prob>") from None
    if not out:
        raise PolicyError("empty hire probability table")
    return out
