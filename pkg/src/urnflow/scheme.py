"""Scheme description files: parsing, validation and serialization.

A scheme file is JSON with four top-level keys::

    {
      "types": ["white", "black"],
      "urns": {
        "P0": {"white": 3, "black": 2},
        "P":  {"total": 30, "fractions": {"white": "37/60", "black": "23/60"}}
      },
      "steps":   [{"from": "P0", "to": "P", "k": 2}],
      "queries": [{"urn": "P", "type": "white"}]
    }

Urns are given either as integer ball counts or as a total with exact
``"p/q"`` fractions. A query may carry ``"after": n`` to be evaluated once
the first ``n`` steps have run; by default it sees the final state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from .engine import SchemeState, TransferStep, UrnComposition, UrnError
from .exact_math import format_fraction

__all__ = [
    "SchemeError",
    "SchemeSyntaxError",
    "InfeasibleScheme",
    "Query",
    "SchemeConfig",
    "parse_scheme",
    "loads_scheme",
    "bundled_scheme",
    "BUNDLED",
]

BUNDLED = ("exercise1", "exercise2", "exercise3", "exercise3_small", "tiny_transfer", "tiny_multi")


class SchemeError(Exception):
    """Invalid scheme file. ``line`` is 1-based when it could be located."""

    exit_code = 1

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.message = message
        self.field = field
        self.line = line
        where = []
        if field:
            where.append(field)
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class SchemeSyntaxError(SchemeError):
    pass


class InfeasibleScheme(SchemeError):
    exit_code = 3


@dataclass(frozen=True)
class Query:
    urn: str
    type: str
    after: int | None = None

    def label(self) -> str:
        base = f"{self.urn}:{self.type}"
        return base if self.after is None else f"{base}@{self.after}"


@dataclass(frozen=True)
class SchemeConfig:
    types: tuple[str, ...]
    urns: dict[str, UrnComposition]
    steps: tuple[TransferStep, ...] = ()
    queries: tuple[Query, ...] = ()
    description: str = field(default="", compare=False)

    def initial_state(self) -> SchemeState:
        return SchemeState(self.urns)

    def snapshot_index(self, query: Query) -> int:
        return len(self.steps) if query.after is None else query.after

    @property
    def is_integral(self) -> bool:
        return all(u.is_integral for u in self.urns.values())

    def integer_counts(self) -> dict[str, dict[str, int]]:
        """Per-urn ball counts over the full type list; raises if any urn is fractional."""
        out = {}
        for urn_id, urn in self.urns.items():
            if not urn.is_integral:
                raise SchemeError(
                    f"urn {urn_id!r} has a non-integer expected composition", f"urns.{urn_id}"
                )
            counts = urn.counts()
            out[urn_id] = {t: counts.get(t, 0) for t in self.types}
        return out

    def with_k(self, k: int) -> SchemeConfig:
        """Same scheme with every step moving ``k`` balls."""
        steps = tuple(TransferStep(s.source, s.destination, k) for s in self.steps)
        return SchemeConfig(self.types, self.urns, steps, self.queries, self.description)

    def to_dict(self) -> dict:
        urns = {}
        for urn_id, urn in self.urns.items():
            if urn.is_integral:
                counts = urn.counts()
                urns[urn_id] = {t: counts.get(t, 0) for t in self.types}
            else:
                urns[urn_id] = {
                    "total": urn.total,
                    "fractions": {t: format_fraction(p) for t, p in urn.fractions.items()},
                }
        out = {}
        if self.description:
            out["description"] = self.description
        out["types"] = list(self.types)
        out["urns"] = urns
        out["steps"] = [{"from": s.source, "to": s.destination, "k": s.k} for s in self.steps]
        queries = []
        for q in self.queries:
            item = {"urn": q.urn, "type": q.type}
            if q.after is not None:
                item["after"] = q.after
            queries.append(item)
        out["queries"] = queries
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


@lru_cache(maxsize=1)
def _schema() -> dict:
    text = resources.files("urnflow").joinpath("data/scheme.schema.json").read_text("utf-8")
    return json.loads(text)


def _value_lines(text: str) -> dict[tuple, int]:
    """Map every JSON path (tuple of keys/indices) to the line its value starts on.

    Assumes ``text`` is already known to be valid JSON.
    """
    decoder = json.JSONDecoder()
    ws = " \t\n\r"
    lines: dict[tuple, int] = {}

    def skip(i):
        while i < len(text) and text[i] in ws:
            i += 1
        return i

    def walk(i, path):
        i = skip(i)
        lines[path] = text.count("\n", 0, i) + 1
        ch = text[i]
        if ch == "{":
            i = skip(i + 1)
            if text[i] == "}":
                return i + 1
            while True:
                key, i = json.decoder.scanstring(text, skip(i) + 1)
                i = skip(i) + 1  # ':'
                i = skip(walk(i, path + (key,)))
                if text[i] == "}":
                    return i + 1
                i += 1  # ','
        if ch == "[":
            i = skip(i + 1)
            if text[i] == "]":
                return i + 1
            n = 0
            while True:
                i = skip(walk(i, path + (n,)))
                n += 1
                if text[i] == "]":
                    return i + 1
                i += 1
        _, end = decoder.raw_decode(text, i)
        return end

    walk(0, ())
    return lines


def _path_str(path) -> str:
    out = ""
    for part in path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<root>"


def loads_scheme(text: str, source: str = "<string>") -> SchemeConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemeSyntaxError(f"{source}: malformed JSON: {exc.msg}", line=exc.lineno) from None

    lines = _value_lines(text)

    def fail(message, path, cls=SchemeError):
        path = tuple(path)
        line = lines.get(path)
        while line is None and path:
            path = path[:-1]
            line = lines.get(path)
        raise cls(f"{source}: {message}", _path_str(tuple(path)), line)

    error = jsonschema.exceptions.best_match(
        jsonschema.Draft202012Validator(_schema()).iter_errors(data)
    )
    if error is not None:
        fail(error.message, error.absolute_path)

    types = tuple(data["types"])
    known = set(types)

    urns: dict[str, UrnComposition] = {}
    for urn_id, spec in data["urns"].items():
        base = ("urns", urn_id)
        try:
            if "total" in spec:
                fractions = {}
                for t, raw in spec["fractions"].items():
                    if t not in known:
                        fail(f"undeclared type {t!r}", base + ("fractions", t))
                    try:
                        fractions[t] = Fraction(raw.strip())
                    except ZeroDivisionError:
                        fail(f"zero denominator in {raw!r}", base + ("fractions", t))
                urns[urn_id] = UrnComposition(spec["total"], fractions)
            else:
                for t in spec:
                    if t not in known:
                        fail(f"undeclared type {t!r}", base + (t,))
                urns[urn_id] = UrnComposition.from_counts(spec)
        except UrnError as exc:
            fail(str(exc), base)

    steps = []
    for i, raw in enumerate(data["steps"]):
        for key in ("from", "to"):
            if raw[key] not in urns:
                fail(f"step {i + 1}: undeclared urn {raw[key]!r}", ("steps", i, key))
        try:
            steps.append(TransferStep(raw["from"], raw["to"], raw["k"]))
        except UrnError as exc:
            fail(f"step {i + 1}: {exc}", ("steps", i))

    # totals evolve deterministically, so feasibility can be checked up front
    totals = {u: urn.total for u, urn in urns.items()}
    for i, step in enumerate(steps):
        if step.k > totals[step.source]:
            fail(
                f"step {i + 1}: cannot move {step.k} balls from {step.source!r}, "
                f"it holds {totals[step.source]}",
                ("steps", i, "k"),
                InfeasibleScheme,
            )
        totals[step.source] -= step.k
        totals[step.destination] += step.k

    queries = []
    for i, raw in enumerate(data["queries"]):
        if raw["urn"] not in urns:
            fail(f"query {i + 1}: undeclared urn {raw['urn']!r}", ("queries", i, "urn"))
        if raw["type"] not in known:
            fail(f"query {i + 1}: undeclared type {raw['type']!r}", ("queries", i, "type"))
        after = raw.get("after")
        if after is not None and after > len(steps):
            fail(f"query {i + 1}: after={after} but there are {len(steps)} steps",
                 ("queries", i, "after"))
        queries.append(Query(raw["urn"], raw["type"], after))

    return SchemeConfig(types, urns, tuple(steps), tuple(queries), data.get("description", ""))


def parse_scheme(path: str | Path) -> SchemeConfig:
    path = Path(path)
    try:
        text = path.read_text("utf-8")
    except FileNotFoundError:
        raise SchemeError(f"{path}: no such file") from None
    except OSError as exc:
        raise SchemeError(f"{path}: cannot read: {exc.strerror}") from None
    return loads_scheme(text, str(path))


def bundled_scheme(name: str) -> SchemeConfig:
    """Load one of the example schemes shipped with the package, e.g. ``"exercise1"``."""
    ref = resources.files("urnflow").joinpath(f"data/{name}.json")
    return loads_scheme(ref.read_text("utf-8"), f"{name}.json")
