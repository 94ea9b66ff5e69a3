"""Seeded Monte Carlo simulation of the physical ball process.

Trials are split into fixed-size blocks. Block ``b`` draws from
``PCG64(SeedSequence(seed, spawn_key=(b,)))``, so the aggregate counts depend
only on ``(seed, trials, block_size)`` and not on how blocks are scheduled
across workers.

Within a block every trial is simulated in lockstep: a transfer draws the
moved composition type by type with hypergeometric draws (the exact law of
a uniform draw without replacement), and a query draws one uniformly chosen
ball from the queried urn.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .engine import EmptyUrnDraw
from .scheme import Query, SchemeConfig

__all__ = ["DEFAULT_BLOCK_SIZE", "MonteCarloEstimate", "monte_carlo", "block_rng"]

DEFAULT_BLOCK_SIZE = 1 << 16


@dataclass(frozen=True)
class MonteCarloEstimate:
    query: Query
    hits: int
    trials: int

    @property
    def frequency(self) -> float:
        return self.hits / self.trials

    @property
    def stderr(self) -> float:
        p = self.frequency
        return math.sqrt(p * (1 - p) / self.trials)

    def z_score(self, exact: Fraction) -> float:
        diff = self.frequency - float(exact)
        if self.stderr == 0:
            return 0.0 if diff == 0 else math.copysign(math.inf, diff)
        return diff / self.stderr


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _draw_moved(rng, comp: np.ndarray, k: int) -> np.ndarray:
    """Per-row composition of ``k`` balls drawn without replacement from ``comp`` (n x s)."""
    moved = np.zeros_like(comp)
    left = np.full(comp.shape[0], k, dtype=np.int64)
    rest = comp.sum(axis=1)
    for j in range(comp.shape[1] - 1):
        rest = rest - comp[:, j]
        x = rng.hypergeometric(comp[:, j], rest, left)
        moved[:, j] = x
        left = left - x
    moved[:, -1] = left
    return moved


def _draw_type(rng, comp: np.ndarray, j: int) -> np.ndarray:
    """Boolean per row: a uniformly drawn ball from ``comp`` is of type ``j``."""
    totals = comp.sum(axis=1)
    u = rng.integers(0, totals)
    before = comp[:, :j].sum(axis=1)
    return (u >= before) & (u < before + comp[:, j])


def _run_block(args) -> list[int]:
    seed, block, n, urn_ids, types, start, steps, queries = args
    rng = block_rng(seed, block)
    state = {u: np.tile(np.asarray(start[u], dtype=np.int64), (n, 1)) for u in urn_ids}
    hits = [0] * len(queries)

    def ask(snapshot):
        for qi, (urn, j, at) in enumerate(queries):
            if at == snapshot:
                hits[qi] += int(_draw_type(rng, state[urn], j).sum())

    ask(0)
    for i, (src, dst, k) in enumerate(steps, start=1):
        if k:
            moved = _draw_moved(rng, state[src], k)
            state[src] = state[src] - moved
            state[dst] = state[dst] + moved
        ask(i)
    return hits


def monte_carlo(
    config: SchemeConfig,
    trials: int,
    seed: int,
    *,
    queries=None,
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> list[MonteCarloEstimate]:
    """Estimate each query's probability from ``trials`` simulated runs.

    ``queries`` defaults to the config's own. Results are identical for any
    ``workers`` value.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= seed < 2**64:
        raise ValueError("seed must fit in 64 unsigned bits")
    counts = config.integer_counts()
    queries = tuple(config.queries if queries is None else queries)
    urn_ids = tuple(counts)
    start = {u: [counts[u][t] for t in config.types] for u in urn_ids}

    # totals are deterministic; refuse draws from an urn that will be empty
    totals = {u: sum(c) for u, c in start.items()}
    totals_at = [dict(totals)]
    for step in config.steps:
        totals[step.source] -= step.k
        totals[step.destination] += step.k
        totals_at.append(dict(totals))
    plan = []
    for q in queries:
        at = config.snapshot_index(q)
        if totals_at[at][q.urn] == 0:
            raise EmptyUrnDraw(f"query {q.label()}: urn is empty")
        plan.append((q.urn, config.types.index(q.type), at))

    steps = [(s.source, s.destination, s.k) for s in config.steps]
    sizes = [block_size] * (trials // block_size)
    if trials % block_size:
        sizes.append(trials % block_size)
    jobs = [(seed, b, n, urn_ids, config.types, start, steps, plan) for b, n in enumerate(sizes)]

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_block = list(pool.map(_run_block, jobs))
    else:
        per_block = [_run_block(job) for job in jobs]

    hits = [sum(col) for col in zip(*per_block)]
    return [MonteCarloEstimate(q, h, trials) for q, h in zip(queries, hits)]
