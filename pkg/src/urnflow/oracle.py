"""Brute-force enumeration of urn transfer outcomes.

Every function here sums exact hypergeometric weights over all the ways the
moved balls can be composed; none of them uses the closed forms in
:mod:`urnflow.engine`, which is what makes them usable as a check on it.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType

from .engine import EmptyUrnDraw, InfeasibleTransfer, TransferStep
from .exact_math import binomial

__all__ = [
    "EnumerationCapExceeded",
    "IntegerUrn",
    "OutcomeRow",
    "OutcomeTable",
    "hypergeometric_outcomes",
    "outcome_table",
    "enumerate_single",
    "enumerate_multitype",
    "chain_distributions",
    "enumerate_chain",
    "ProcessEnumeration",
    "enumerate_process",
    "count_compositions",
    "estimate_outcomes",
]


class EnumerationCapExceeded(RuntimeError):
    def __init__(self, estimate: int, cap: int):
        self.estimate = estimate
        self.cap = cap
        super().__init__(f"enumeration needs about {estimate} outcome terms, cap is {cap}")


@dataclass(frozen=True)
class IntegerUrn:
    """Physical urn: nonnegative ball count per type."""

    counts: Mapping[str, int]

    def __post_init__(self):
        if any(n < 0 for n in self.counts.values()):
            raise ValueError(f"negative ball count in {dict(self.counts)}")
        object.__setattr__(self, "counts", MappingProxyType(dict(self.counts)))

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, t: str) -> int:
        return self.counts.get(t, 0)


def _binomial_run(n: int, lo: int, hi: int) -> list[int]:
    """[C(n, lo), C(n, lo+1), ..., C(n, hi)] by the ratio C(n, x+1) = C(n, x)(n-x)/(x+1)."""
    run, c = [], binomial(n, lo)
    for x in range(lo, hi + 1):
        run.append(c)
        c = c * (n - x) // (x + 1)
    return run


@lru_cache(maxsize=4096)
def _ways(counts: tuple[int, ...], k: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    """(moved, number of k-subsets with that composition), lexicographic in ``moved``."""
    total = sum(counts)
    if k > total:
        raise InfeasibleTransfer(f"cannot draw {k} balls from an urn holding {total}")
    if not counts:
        return (((), 1),)
    if len(counts) == 1:
        return (((k,), binomial(counts[0], k)),)
    rows = []
    last = len(counts) - 1

    def rec(j, left, prefix, ways):
        lo, hi = max(0, left - sum(counts[j + 1:])), min(counts[j], left)
        if lo > hi:
            return
        run = _binomial_run(counts[j], lo, hi)
        if j == last - 1:
            # the final type takes whatever is left: C(counts[last], left - x)
            tail = _binomial_run(counts[last], left - hi, left - lo)
            for x, c in zip(range(lo, hi + 1), run):
                rows.append((prefix + (x, left - x), ways * c * tail[hi - x]))
            return
        for x, c in zip(range(lo, hi + 1), run):
            rec(j + 1, left - x, prefix + (x,), ways * c)

    rec(0, k, (), 1)
    return tuple(rows)


def hypergeometric_outcomes(counts: Sequence[int], k: int) -> list[tuple[tuple[int, ...], Fraction]]:
    """All compositions of ``k`` balls drawn without replacement, with exact probabilities.

    Returns ``(moved, weight)`` pairs in lexicographic order of ``moved``; the
    weight is prod_t C(counts_t, moved_t) / C(total, k).
    """
    counts = tuple(counts)
    denom = binomial(sum(counts), k)
    return [(moved, Fraction(ways, denom)) for moved, ways in _ways(counts, k)]


@dataclass(frozen=True)
class OutcomeRow:
    moved: Mapping[str, int]
    weight: Fraction
    draw_probs: Mapping[str, Fraction]


@dataclass(frozen=True)
class OutcomeTable:
    types: tuple[str, ...]
    rows: tuple[OutcomeRow, ...] = field(default=())

    def total_weight(self) -> Fraction:
        return sum((r.weight for r in self.rows), Fraction(0))

    def probability(self, t: str) -> Fraction:
        return sum((r.weight * r.draw_probs[t] for r in self.rows), Fraction(0))


def _types_of(*urns: IntegerUrn) -> tuple[str, ...]:
    seen = {}
    for urn in urns:
        for t in urn.counts:
            seen.setdefault(t, None)
    return tuple(seen)


def outcome_table(sources: Sequence[tuple[IntegerUrn, int]], destination: IntegerUrn) -> OutcomeTable:
    """Joint outcomes of drawing ``k`` balls from each source and pooling them in ``destination``.

    Rows are in lexicographic order over the per-source compositions. The
    ``moved`` column is the pooled composition of everything transferred.
    """
    types = _types_of(destination, *(u for u, _ in sources))
    per_source = []
    for urn, k in sources:
        if k > urn.total:
            raise InfeasibleTransfer(f"cannot draw {k} balls from an urn holding {urn.total}")
        per_source.append(hypergeometric_outcomes([urn[t] for t in types], k))
    final_total = destination.total + sum(k for _, k in sources)
    if final_total == 0:
        raise EmptyUrnDraw("destination is empty after the transfer")

    rows = []
    for combo in itertools.product(*per_source):
        moved = [sum(col) for col in zip(*(m for m, _ in combo))] if combo else [0] * len(types)
        weight = math.prod((w for _, w in combo), start=Fraction(1))
        rows.append(OutcomeRow(
            moved=dict(zip(types, moved)),
            weight=weight,
            draw_probs={t: Fraction(destination[t] + x, final_total) for t, x in zip(types, moved)},
        ))
    return OutcomeTable(types, tuple(rows))


def enumerate_single(a: int, b: int, c: int, d: int, k: int) -> Fraction:
    """White-draw probability after ``k`` balls go from (a white, b black) into (c white, d black).

    Evaluated as the literal sum over i = 0..k of (c + i) C(a, i) C(b, k - i),
    divided by (c + d + k) C(a + b, k).
    """
    if k > a + b:
        raise InfeasibleTransfer(f"cannot move {k} balls out of {a + b}")
    if c + d + k == 0:
        raise EmptyUrnDraw("receiving urn is empty")
    row_a = _binomial_run(a, 0, min(a, k))
    row_b = _binomial_run(b, 0, min(b, k))
    terms = 0
    for i in range(k + 1):
        if i <= a and k - i <= b:
            terms += (c + i) * row_a[i] * row_b[k - i]
    return Fraction(terms, (c + d + k) * binomial(a + b, k))


def enumerate_multitype(
    sources: Sequence[tuple[IntegerUrn, int]], destination: IntegerUrn, t: str
) -> Fraction:
    """Type-``t`` draw probability in ``destination`` after all sources have contributed."""
    return outcome_table(sources, destination).probability(t)


def chain_distributions(urns: Sequence[IntegerUrn], K: Sequence[int], types=None):
    """Distribution of each receiving urn's composition along a transfer chain.

    Returns ``(types, dists, terms)``: ``dists[m-1]`` maps the composition
    tuple of urn ``m`` (right after receiving ``K[m-1]`` balls) to its exact
    probability. Branches reaching the same composition are merged, which is
    the memoisation on (step, composition). ``terms`` counts weight products
    formed, the work measure used by the benchmark.
    """
    if len(K) > len(urns) - 1:
        raise ValueError(f"{len(K)} transfers need at least {len(K) + 1} urns")
    types = tuple(types) if types is not None else _types_of(*urns)
    frontier = {tuple(urns[0][t] for t in types): Fraction(1)}
    dists, terms = [], 0
    for m, k in enumerate(K, start=1):
        base = tuple(urns[m][t] for t in types)
        nxt: dict[tuple[int, ...], Fraction] = {}
        for comp, w in frontier.items():
            if k > sum(comp):
                raise InfeasibleTransfer(f"step {m}: cannot move {k} balls out of {sum(comp)}")
            for moved, w2 in hypergeometric_outcomes(comp, k):
                key = tuple(x + y for x, y in zip(base, moved))
                nxt[key] = nxt.get(key, Fraction(0)) + w * w2
                terms += 1
        dists.append(nxt)
        frontier = nxt
    return types, dists, terms


def enumerate_chain(urns: Sequence[IntegerUrn], K: Sequence[int], t: str) -> list[Fraction]:
    """Exact type-``t`` draw probability at urns 1..len(K) of the chain."""
    types, dists, _ = chain_distributions(urns, K)
    if t not in types:
        return [Fraction(0)] * len(K)
    j = types.index(t)
    out = []
    for m, dist in enumerate(dists, start=1):
        p = Fraction(0)
        for comp, w in dist.items():
            total = sum(comp)
            if total == 0:
                raise EmptyUrnDraw(f"urn {m} is empty")
            p += w * Fraction(comp[j], total)
        out.append(p)
    return out


@dataclass
class ProcessEnumeration:
    """Exact joint distributions of every urn's composition, one per snapshot.

    Ball totals evolve deterministically, so every outcome at snapshot ``n``
    shares the denominator ``denominators[n]`` (the product of C(total, k)
    over the steps so far) and weights are kept as integer numerators.
    """

    urn_ids: tuple[str, ...]
    types: tuple[str, ...]
    weights: list[dict[tuple, int]]
    denominators: list[int]
    terms: int

    def distribution(self, snapshot: int) -> dict[tuple, Fraction]:
        d = self.denominators[snapshot]
        return {joint: Fraction(w, d) for joint, w in self.weights[snapshot].items()}

    def probability(self, snapshot: int, urn: str, t: str) -> Fraction:
        i, j = self.urn_ids.index(urn), self.types.index(t)
        dist = self.weights[snapshot]
        total = sum(next(iter(dist))[i])
        if total == 0:
            raise EmptyUrnDraw(f"urn {urn!r} is empty at snapshot {snapshot}")
        hits = sum(w * joint[i][j] for joint, w in dist.items())
        return Fraction(hits, self.denominators[snapshot] * total)


def enumerate_process(
    counts: Mapping[str, Mapping[str, int]],
    types: Sequence[str],
    steps: Sequence[TransferStep],
    cap: int | None = None,
) -> ProcessEnumeration:
    """Enumerate an arbitrary sequence of transfers between integer urns.

    The state is the tuple of every urn's composition; identical joint states
    are merged after each step. Raises :class:`EnumerationCapExceeded` when
    ``cap`` is given and the term estimate exceeds it.
    """
    types = tuple(types)
    urn_ids = tuple(counts)
    if cap is not None:
        estimate = estimate_outcomes(counts, types, steps)
        if estimate > cap:
            raise EnumerationCapExceeded(estimate, cap)
    start = tuple(tuple(counts[u].get(t, 0) for t in types) for u in urn_ids)
    weights, denominators = [{start: 1}], [1]
    totals = [sum(c) for c in start]
    terms = 0
    for n, step in enumerate(steps, start=1):
        src, dst = urn_ids.index(step.source), urn_ids.index(step.destination)
        if step.k > totals[src]:
            raise InfeasibleTransfer(f"step {n}: cannot move {step.k} balls out of {totals[src]}")
        nxt: dict[tuple, int] = {}
        for joint, w in weights[-1].items():
            for moved, ways in _ways(joint[src], step.k):
                state = list(joint)
                state[src] = tuple(x - y for x, y in zip(joint[src], moved))
                state[dst] = tuple(x + y for x, y in zip(joint[dst], moved))
                key = tuple(state)
                nxt[key] = nxt.get(key, 0) + w * ways
                terms += 1
        denominators.append(denominators[-1] * binomial(totals[src], step.k))
        totals[src] -= step.k
        totals[dst] += step.k
        weights.append(nxt)
    return ProcessEnumeration(urn_ids, types, weights, denominators, terms)


def count_compositions(limits: Sequence[int], k: int) -> int:
    """Number of integer vectors with 0 <= x_j <= limits[j] summing to ``k``."""
    ways = [1] + [0] * k
    for lim in limits:
        nxt, window = [0] * (k + 1), 0
        for s in range(k + 1):
            window += ways[s]
            if s - lim - 1 >= 0:
                window -= ways[s - lim - 1]
            nxt[s] = window
        ways = nxt
    return ways[k]


def estimate_outcomes(
    counts: Mapping[str, Mapping[str, int]], types: Sequence[str], steps: Sequence[TransferStep]
) -> int:
    """Upper bound on the outcome terms :func:`enumerate_process` would form.

    Tracks the largest count each urn could hold per type and multiplies the
    number of feasible moved compositions over all steps (no merging assumed).
    """
    hi = {u: [c.get(t, 0) for t in types] for u, c in counts.items()}
    estimate = 1
    for step in steps:
        src = hi[step.source]
        estimate *= max(1, count_compositions(src, step.k))
        moved_hi = [min(x, step.k) for x in src]
        hi[step.destination] = [x + y for x, y in zip(hi[step.destination], moved_hi)]
    return estimate
