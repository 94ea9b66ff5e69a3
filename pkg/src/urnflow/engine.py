"""Closed-form urn transfer engine.

Urns are carried as *expected compositions*: a ball total plus the exact
expected fraction of each type. Moving ``k`` random balls from a source with
type fraction ``theta`` into a destination holding ``N`` balls of which ``c``
(in expectation) are of that type gives the destination the fraction

    (theta * k + c) / (N + k)

and leaves the source fractions untouched. Everything below is built on that
update, its multi-source form, and the affine chain recurrence it implies.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType

__all__ = [
    "UrnError",
    "UnknownUrn",
    "InfeasibleTransfer",
    "EmptyUrnDraw",
    "UrnComposition",
    "TransferStep",
    "BoundsInterval",
    "SchemeState",
    "scheme_a",
    "closed_form",
    "interpolate",
    "prob_type",
    "transfer",
    "bounds",
    "multi_transfer",
    "chain_run",
    "apply_steps",
]


class UrnError(ValueError):
    """Base class for invalid urn operations."""


class UnknownUrn(UrnError):
    pass


class InfeasibleTransfer(UrnError):
    pass


class EmptyUrnDraw(UrnError):
    pass


def _frozen(mapping: Mapping) -> Mapping:
    return MappingProxyType(dict(mapping))


@dataclass(frozen=True)
class UrnComposition:
    """Ball total plus exact expected fraction per type label."""

    total: int
    fractions: Mapping[str, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if self.total < 0:
            raise UrnError(f"urn total must be nonnegative, got {self.total}")
        fractions = {t: Fraction(p) for t, p in self.fractions.items()}
        if self.total == 0 and fractions:
            # an empty urn has no composition; drop whatever was passed
            fractions = {}
        for t, p in fractions.items():
            if not 0 <= p <= 1:
                raise UrnError(f"fraction for {t!r} outside [0, 1]: {p}")
        if self.total > 0 and sum(fractions.values()) != 1:
            raise UrnError(f"fractions must sum to 1, got {sum(fractions.values())}")
        object.__setattr__(self, "fractions", _frozen(fractions))

    @classmethod
    def from_counts(cls, counts: Mapping[str, int]) -> UrnComposition:
        if any(n < 0 for n in counts.values()):
            raise UrnError(f"negative ball count in {dict(counts)}")
        total = sum(counts.values())
        if total == 0:
            return cls(0)
        return cls(total, {t: Fraction(n, total) for t, n in counts.items()})

    def count(self, t: str) -> Fraction:
        """Expected number of balls of type ``t``."""
        return self.total * self.fractions.get(t, Fraction(0))

    @property
    def is_integral(self) -> bool:
        return all(self.count(t).denominator == 1 for t in self.fractions)

    def counts(self) -> dict[str, int]:
        if not self.is_integral:
            raise UrnError("urn composition has non-integer expected counts")
        return {t: int(self.count(t)) for t in self.fractions}

    def __eq__(self, other):
        if not isinstance(other, UrnComposition):
            return NotImplemented
        # explicit zero fractions and absent types mean the same thing
        keys = set(self.fractions) | set(other.fractions)
        return self.total == other.total and all(
            self.fractions.get(t, 0) == other.fractions.get(t, 0) for t in keys
        )

    __hash__ = None


@dataclass(frozen=True)
class TransferStep:
    source: str
    destination: str
    k: int

    def __post_init__(self):
        if self.source == self.destination:
            raise UrnError(f"transfer source and destination are both {self.source!r}")
        if self.k < 0:
            raise UrnError(f"transfer size must be nonnegative, got {self.k}")


@dataclass(frozen=True)
class BoundsInterval:
    alpha: Fraction
    beta: Fraction

    @property
    def width(self) -> Fraction:
        return self.beta - self.alpha

    def __contains__(self, p) -> bool:
        return self.alpha <= p <= self.beta


@dataclass(frozen=True)
class SchemeState:
    """Immutable snapshot of every urn, keyed by urn identifier."""

    urns: Mapping[str, UrnComposition]

    def __post_init__(self):
        object.__setattr__(self, "urns", _frozen(self.urns))

    def __getitem__(self, urn_id: str) -> UrnComposition:
        try:
            return self.urns[urn_id]
        except KeyError:
            raise UnknownUrn(f"unknown urn {urn_id!r}") from None

    def replace(self, **changes: UrnComposition) -> SchemeState:
        return SchemeState({**self.urns, **changes})

    def __eq__(self, other):
        if not isinstance(other, SchemeState):
            return NotImplemented
        return dict(self.urns) == dict(other.urns)

    __hash__ = None


def scheme_a(a: int, b: int, c: int, d: int) -> Fraction:
    """White-draw probability from the receiving urn after one ball is moved.

    The donor holds ``a`` white and ``b`` black balls, the receiver ``c`` white
    and ``d`` black.
    """
    if min(a, b, c, d) < 0:
        raise UrnError("ball counts must be nonnegative")
    if a + b == 0:
        raise EmptyUrnDraw("cannot move a ball out of an empty urn")
    return Fraction(c, c + d + 1) + Fraction(a, a + b) * Fraction(1, c + d + 1)


def closed_form(theta: Fraction, k: int, c: Fraction, n: int) -> Fraction:
    """(theta*k + c) / (n + k): receiver holds ``n`` balls, ``c`` of the tracked type."""
    if n + k == 0:
        raise EmptyUrnDraw("receiving urn is empty after the transfer")
    return (theta * k + c) / (n + k)


def interpolate(interval: BoundsInterval, theta: Fraction) -> Fraction:
    """alpha + (beta - alpha) * theta."""
    return interval.alpha + interval.width * theta


def prob_type(urn: UrnComposition, t: str) -> Fraction:
    """Probability that one ball drawn from ``urn`` is of type ``t``."""
    if urn.total == 0:
        raise EmptyUrnDraw("cannot draw from an empty urn")
    return urn.fractions.get(t, Fraction(0))


def _check_feasible(state: SchemeState, step: TransferStep, already_taken: int = 0) -> None:
    src = state[step.source]
    state[step.destination]
    if step.k + already_taken > src.total:
        raise InfeasibleTransfer(
            f"cannot move {step.k} balls from {step.source!r}: only "
            f"{src.total - already_taken} available"
        )


def _depleted(urn: UrnComposition, k: int) -> UrnComposition:
    # random removal leaves the expected fractions of the remainder unchanged
    return UrnComposition(urn.total - k, urn.fractions)


def transfer(state: SchemeState, step: TransferStep) -> SchemeState:
    """Move ``step.k`` uniformly chosen balls from source to destination."""
    _check_feasible(state, step)
    if step.k == 0:
        return state
    src, dst = state[step.source], state[step.destination]
    n, k = dst.total, step.k
    types = set(src.fractions) | set(dst.fractions)
    mixed = {t: closed_form(src.fractions.get(t, 0), k, dst.count(t), n) for t in types}
    return state.replace(
        **{step.source: _depleted(src, k), step.destination: UrnComposition(n + k, mixed)}
    )


def bounds(destination: UrnComposition, t: str, k: int) -> BoundsInterval:
    """Extreme post-transfer probabilities for type ``t`` when ``k`` balls arrive.

    ``alpha`` is reached when none of the arriving balls are of type ``t``,
    ``beta`` when all of them are. For non-integer expected compositions the
    expected count is used in place of a ball count.
    """
    if k < 1:
        raise UrnError(f"bounds needs k >= 1, got {k}")
    n, c = destination.total, destination.count(t)
    return BoundsInterval(c / (n + k), (c + k) / (n + k))


def multi_transfer(state: SchemeState, steps: Sequence[TransferStep]) -> SchemeState:
    """Move balls from several sources into one common destination at once.

    The destination fraction for type t becomes
    (sum_i theta_i k_i + c) / (N + sum_i k_i).
    """
    if not steps:
        return state
    dest_id = steps[0].destination
    taken: dict[str, int] = {}
    for step in steps:
        if step.destination != dest_id:
            raise UrnError("multi_transfer steps must share a destination")
        _check_feasible(state, step, taken.get(step.source, 0))
        taken[step.source] = taken.get(step.source, 0) + step.k

    dst = state[dest_id]
    inflow = sum(taken.values())
    if inflow == 0:
        return state
    sources = {s: state[s] for s in taken}
    types = set(dst.fractions).union(*(u.fractions for u in sources.values()))
    mixed = {}
    for t in types:
        arriving = sum(sources[s].fractions.get(t, 0) * k for s, k in taken.items())
        mixed[t] = (arriving + dst.count(t)) / (dst.total + inflow)
    changes = {s: _depleted(sources[s], k) for s, k in taken.items()}
    changes[dest_id] = UrnComposition(dst.total + inflow, mixed)
    return state.replace(**changes)


def chain_run(urns: Sequence[UrnComposition], K: Sequence[int], t: str) -> list[Fraction]:
    """Type-``t`` draw probability at urns 1..len(K) of a transfer chain.

    ``K[m-1]`` balls go from urn ``m-1`` to urn ``m``, in order. Each entry is
    obtained from the previous one by the affine step
    ``p_m = alpha_m + (beta_m - alpha_m) * p_{m-1}``.
    """
    if len(K) > len(urns) - 1:
        raise UrnError(f"{len(K)} transfers need at least {len(K) + 1} urns, got {len(urns)}")
    if any(k < 0 for k in K):
        raise UrnError("transfer sizes must be nonnegative")

    prev = urns[0].fractions.get(t, Fraction(0)) if urns[0].total else None
    available = urns[0].total
    out = []
    for m, k in enumerate(K, start=1):
        if k > available:
            raise InfeasibleTransfer(
                f"step {m}: cannot move {k} balls, urn {m - 1} holds {available}"
            )
        urn = urns[m]
        if urn.total + k == 0:
            raise EmptyUrnDraw(f"urn {m} is empty after step {m}")
        if k == 0:
            p = urn.fractions[t] if t in urn.fractions else Fraction(0)
        else:
            p = interpolate(bounds(urn, t, k), prev)
        out.append(p)
        prev, available = p, urn.total + k
    return out


def apply_steps(state: SchemeState, steps: Iterable[TransferStep]) -> list[SchemeState]:
    """Fold ``transfer`` over ``steps``; returns the initial state and every intermediate one."""
    history = [state]
    for i, step in enumerate(steps, start=1):
        try:
            history.append(transfer(history[-1], step))
        except InfeasibleTransfer as exc:
            raise InfeasibleTransfer(f"step {i}: {exc}") from None
    return history
