"""Agent-level Monte Carlo check of the deterministic recurrences.

Every lawyer is an agent. Each year an agent independently attrites, retires,
is promoted to one destination, or stays, with probabilities equal to the
corresponding headcount flow divided by the realised size of its cell at the
start of the year. Lateral hires enter as new agents. Expected counts then
equal the deterministic step exactly, so the two can be compared cell by cell.

Replications are split into fixed-size chunks, each seeded from
``SeedSequence(seed, spawn_key=(chunk,))``; results are bitwise identical for
a given ``(seed, replications)`` whatever the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .domain import ATOMIC_SEGMENTS, Cell, JobLevel, PopulationSnapshot
from .errors import InfeasibleProbabilityError
from .flows import ASSOCIATE_ORDER, SA, AssociateInflow, FlowRates

CHUNK = 64
_CELLS: tuple[Cell, ...] = tuple((lv, s) for lv in JobLevel for s in ATOMIC_SEGMENTS)
_INDEX = {c: i for i, c in enumerate(_CELLS)}
_PROB_TOL = 1e-12


@dataclass(frozen=True)
class AgentEstimate:
    mean: dict[Cell, float]
    stderr: dict[Cell, float]
    replications: int
    years: int

    def z_scores(self, expected: PopulationSnapshot) -> dict[Cell, float]:
        """(simulated mean - expected) / SE; zero-variance cells give 0 or inf."""
        out = {}
        for cell in _CELLS:
            diff = self.mean[cell] - expected[cell]
            se = self.stderr[cell]
            if se > 0:
                out[cell] = diff / se
            else:
                out[cell] = 0.0 if abs(diff) <= 1e-9 * max(1.0, abs(expected[cell])) else math.inf
        return out

    def agreement(self, expected: PopulationSnapshot, k: float = 3.0) -> float:
        """Fraction of cells whose mean lies within ``k`` standard errors."""
        z = self.z_scores(expected)
        return sum(abs(v) < k for v in z.values()) / len(z)


def _whole(counts: dict[Cell, float]) -> np.ndarray:
    arr = np.array([counts.get(c, 0.0) for c in _CELLS])
    rounded = np.rint(arr)
    if np.any(np.abs(arr - rounded) > 1e-9):
        raise ValueError("agent simulation needs whole-number headcounts")
    return rounded.astype(np.int64)


def _transitions(rates: FlowRates, inflow: AssociateInflow):
    """Per source cell: list of (destination cell or None, kind, value).

    ``kind`` is "count" for headcount flows (divided by the realised cell
    size) and "fraction" for per-capita associate promotions.
    """
    table = {}
    for lv, seg in _CELLS:
        f = rates.cell(lv, seg)
        moves = []
        if f.attrition:
            moves.append((None, "count", f.attrition))
        if f.retirement:
            moves.append((None, "count", f.retirement))
        if lv in ASSOCIATE_ORDER:
            idx = ASSOCIATE_ORDER.index(lv)
            higher = ASSOCIATE_ORDER[idx + 1 :]
            frac = f.promotion_rate * f.retention
            if higher and frac:
                targets = higher[:1] if inflow is AssociateInflow.ADJACENT else higher
                moves.extend(((dest, seg), "fraction", frac) for dest in targets)
        if lv is SA or lv.is_leadership:
            for dest in sorted(f.promotion, key=lambda d: d.rank):
                if f.promotion[dest]:
                    moves.append(((dest, seg), "count", f.promotion[dest]))
        table[(lv, seg)] = moves
    return table


def _simulate_chunk(state0, transitions, laterals, years, seed, index, size):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    state = np.repeat(state0[None, :], size, axis=0)
    lat_whole = np.floor(laterals).astype(np.int64)
    lat_frac = laterals - lat_whole
    for _ in range(years):
        nxt = np.zeros_like(state)
        for ci, cell in enumerate(_CELLS):
            n = state[:, ci]
            moves = transitions[cell]
            remaining = n.copy()
            used = np.zeros(size)
            for dest, kind, value in moves:
                if kind == "count":
                    with np.errstate(divide="ignore", invalid="ignore"):
                        p = np.where(n > 0, value / n, np.inf)
                else:
                    p = np.full(size, value)
                if np.any(p > 1.0 + _PROB_TOL):
                    raise InfeasibleProbabilityError(
                        f"flow {value:.6g} out of {cell[0].value}/{cell[1].value} exceeds its population"
                    )
                left = 1.0 - used
                with np.errstate(divide="ignore", invalid="ignore"):
                    cond = np.where(left > 0, np.clip(p / left, 0.0, 1.0), 0.0)
                drawn = rng.binomial(remaining, cond)
                remaining -= drawn
                used += p
                if np.any(used > 1.0 + 1e-9):
                    raise InfeasibleProbabilityError(
                        f"transition probabilities out of {cell[0].value}/{cell[1].value} sum above 1"
                    )
                if dest is not None:
                    nxt[:, _INDEX[dest]] += drawn
            nxt[:, ci] += remaining
        extra = (rng.random((size, len(_CELLS))) < lat_frac).astype(np.int64)
        state = nxt + lat_whole + extra
    return state


def simulate_agents(
    snapshot: PopulationSnapshot,
    rates: FlowRates,
    seed: int = 42,
    replications: int = 256,
    years: int = 1,
    inflow: AssociateInflow = AssociateInflow.ADJACENT,
    jobs: int = 1,
) -> AgentEstimate:
    """Mean and standard error of each cell after ``years`` simulated years."""
    if replications < 2:
        raise ValueError("need at least two replications for a standard error")
    inflow = AssociateInflow(inflow)
    state0 = _whole(dict(snapshot.counts))
    transitions = _transitions(rates, inflow)
    laterals = np.array([rates.cell(*c).lateral_in for c in _CELLS])
    sizes = [CHUNK] * (replications // CHUNK)
    if replications % CHUNK:
        sizes.append(replications % CHUNK)
    args = [(state0, transitions, laterals, years, seed, i, n) for i, n in enumerate(sizes)]
    if jobs > 1 and len(args) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda a: _simulate_chunk(*a), args))
    else:
        parts = [_simulate_chunk(*a) for a in args]
    samples = np.concatenate(parts, axis=0).astype(float)
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / math.sqrt(replications)
    return AgentEstimate(
        mean={c: float(mean[i]) for i, c in enumerate(_CELLS)},
        stderr={c: float(se[i]) for i, c in enumerate(_CELLS)},
        replications=replications,
        years=years,
    )
