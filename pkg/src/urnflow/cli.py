"""``urnflow`` command line: compute, verify, simulate and bench scheme files.

Exit status: 0 success, 1 usage or parse error, 2 verification mismatch
(or a Monte Carlo estimate beyond 5 standard errors), 3 infeasible scheme.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
import timeit
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction

from . import engine, oracle
from .exact_math import format_fraction
from .montecarlo import monte_carlo
from .scheme import Query, SchemeConfig, SchemeError, parse_scheme

EXIT_OK, EXIT_USAGE, EXIT_MISMATCH, EXIT_INFEASIBLE = 0, 1, 2, 3
DEFAULT_CAP = 10**6
DEFAULT_DIGITS = 6
WARN_SIGMA, FAIL_SIGMA = 3.0, 5.0


def render_decimal(value: Fraction, digits: int = DEFAULT_DIGITS) -> str:
    """Correctly rounded (half-even) decimal with ``digits`` significant digits."""
    with localcontext() as ctx:
        ctx.prec = digits
        q = Decimal(value.numerator) / Decimal(value.denominator)
    return format(q, "f")


def default_cap() -> int:
    raw = os.environ.get("URNFLOW_CAP")
    if raw is None:
        return DEFAULT_CAP
    try:
        return int(raw)
    except ValueError:
        raise SchemeError(f"URNFLOW_CAP must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class ResultRecord:
    query: Query
    exact: Fraction
    decimal: str
    alpha: Fraction | None = None
    beta: Fraction | None = None
    method: str = "closed-form"


@dataclass(frozen=True)
class VerifyRow:
    query: Query
    engine: Fraction
    oracle: Fraction

    @property
    def match(self) -> bool:
        return self.engine == self.oracle


@dataclass(frozen=True)
class SimulateRow:
    query: Query
    exact: Fraction
    frequency: float
    stderr: float
    z: float

    @property
    def status(self) -> str:
        if abs(self.z) > FAIL_SIGMA:
            return "FAIL"
        if abs(self.z) > WARN_SIGMA:
            return "warn"
        return "ok"


@dataclass(frozen=True)
class BenchRow:
    k: int
    closed_form_s: float | None
    enumeration_s: float | None
    terms: int | None
    states: tuple[int, ...] = ()
    note: str = ""


def _closed_form_values(config: SchemeConfig) -> tuple[list[engine.SchemeState], list[Fraction]]:
    history = engine.apply_steps(config.initial_state(), config.steps)
    values = []
    for q in config.queries:
        urn = history[config.snapshot_index(q)][q.urn]
        try:
            values.append(engine.prob_type(urn, q.type))
        except engine.EmptyUrnDraw:
            raise engine.EmptyUrnDraw(f"query {q.label()}: urn {q.urn!r} is empty") from None
    return history, values


def cmd_compute(config: SchemeConfig, digits: int = DEFAULT_DIGITS) -> list[ResultRecord]:
    history, values = _closed_form_values(config)
    records = []
    for q, p in zip(config.queries, values):
        at = config.snapshot_index(q)
        alpha = beta = None
        # the interval comes from the last transfer into the queried urn
        for i in range(at, 0, -1):
            step = config.steps[i - 1]
            if step.destination == q.urn and step.k > 0:
                interval = engine.bounds(history[i - 1][q.urn], q.type, step.k)
                alpha, beta = interval.alpha, interval.beta
                break
        records.append(ResultRecord(q, p, render_decimal(p, digits), alpha, beta))
    return records


def cmd_verify(config: SchemeConfig, cap: int | None = None) -> list[VerifyRow]:
    cap = default_cap() if cap is None else cap
    counts = config.integer_counts()
    _, values = _closed_form_values(config)
    enum = oracle.enumerate_process(counts, config.types, config.steps, cap=cap)
    return [
        VerifyRow(q, p, enum.probability(config.snapshot_index(q), q.urn, q.type))
        for q, p in zip(config.queries, values)
    ]


def cmd_simulate(config: SchemeConfig, trials: int, seed: int, workers: int = 1) -> list[SimulateRow]:
    _, values = _closed_form_values(config)
    estimates = monte_carlo(config, trials, seed, workers=workers)
    return [
        SimulateRow(e.query, p, e.frequency, e.stderr, e.z_score(p))
        for e, p in zip(estimates, values)
    ]


def _two_type_single_step(config: SchemeConfig):
    if len(config.steps) != 1 or len(config.types) != 2:
        return None
    step = config.steps[0]
    counts = config.integer_counts()
    tracked = config.queries[0].type
    other = next(t for t in config.types if t != tracked)
    src, dst = counts[step.source], counts[step.destination]
    return src[tracked], src[other], dst[tracked], dst[other]


def cmd_bench(
    config: SchemeConfig, sweep, cap: int | None = None, repeat: int = 5, number: int = 200
) -> list[BenchRow]:
    """Time closed form against enumeration with every step's k set to each sweep value.

    Single-step two-type schemes are enumerated with the literal k+1 term sum;
    anything else goes through the general process enumeration.
    """
    cap = default_cap() if cap is None else cap
    counts = config.integer_counts()
    rows = []
    for k in sweep:
        variant = config.with_k(k)
        try:
            _closed_form_values(variant)
        except (engine.InfeasibleTransfer, engine.EmptyUrnDraw):
            rows.append(BenchRow(k, None, None, None, note="skipped (infeasible)"))
            continue
        closed = min(timeit.repeat(lambda: _closed_form_values(variant), repeat=repeat, number=number))
        closed /= number

        single = _two_type_single_step(variant)
        if single is not None:
            terms, states = k + 1, ()
            if terms > cap:
                rows.append(BenchRow(k, closed, None, terms, note="skipped (cap)"))
                continue
            t0 = time.perf_counter()
            oracle.enumerate_single(*single, k)
            enum_s = time.perf_counter() - t0
        else:
            estimate = oracle.estimate_outcomes(counts, variant.types, variant.steps)
            if estimate > cap:
                rows.append(BenchRow(k, closed, None, estimate, note="skipped (cap)"))
                continue
            t0 = time.perf_counter()
            enum = oracle.enumerate_process(counts, variant.types, variant.steps)
            enum_s = time.perf_counter() - t0
            terms, states = enum.terms, tuple(len(w) for w in enum.weights[1:])
        rows.append(BenchRow(k, closed, enum_s, terms, states))
    return rows


# -- rendering ---------------------------------------------------------------


def _fmt(value, digits):
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    if isinstance(value, tuple):
        return ";".join(str(v) for v in value)
    return str(value)


def _table(header, rows) -> str:
    widths = [max(len(str(c)) for c in col) for col in zip(header, *rows)]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    return "\n".join(lines) + "\n"


def _emit(fmt, header, rows, records) -> str:
    if fmt == "json":
        return json.dumps(records, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue()
    return _table(header, rows)


def render_compute(records, fmt="table", digits=DEFAULT_DIGITS) -> str:
    header = ["query", "exact", "decimal", "alpha", "beta", "method"]
    rows, out = [], []
    for r in records:
        alpha = render_decimal(r.alpha, digits) if r.alpha is not None else ""
        beta = render_decimal(r.beta, digits) if r.beta is not None else ""
        exact = format_fraction(r.exact)
        rows.append([r.query.label(), exact if fmt != "table" else f"{exact} ≈ {r.decimal}",
                     r.decimal, alpha, beta, r.method])
        out.append({
            "urn": r.query.urn, "type": r.query.type, "after": r.query.after,
            "exact": exact, "decimal": r.decimal,
            "alpha": _fmt(r.alpha, digits) or None, "beta": _fmt(r.beta, digits) or None,
            "method": r.method,
        })
    return _emit(fmt, header, rows, out)


def render_verify(rows_, fmt="table", digits=DEFAULT_DIGITS) -> str:
    header = ["query", "engine", "oracle", "status"]
    rows, out = [], []
    for r in rows_:
        status = "EXACT-MATCH" if r.match else "MISMATCH"
        rows.append([r.query.label(), format_fraction(r.engine), format_fraction(r.oracle), status])
        out.append({"urn": r.query.urn, "type": r.query.type, "after": r.query.after,
                    "engine": format_fraction(r.engine), "oracle": format_fraction(r.oracle),
                    "method": "enumeration", "status": status})
    return _emit(fmt, header, rows, out)


def render_simulate(rows_, fmt="table", digits=DEFAULT_DIGITS) -> str:
    header = ["query", "closed_form", "frequency", "stderr", "z", "status"]
    rows, out = [], []
    for r in rows_:
        rows.append([r.query.label(), f"{format_fraction(r.exact)} ≈ {render_decimal(r.exact, digits)}"
                     if fmt == "table" else format_fraction(r.exact),
                     _fmt(r.frequency, digits), _fmt(r.stderr, 3), f"{r.z:.3f}", r.status])
        out.append({"urn": r.query.urn, "type": r.query.type, "after": r.query.after,
                    "exact": format_fraction(r.exact), "frequency": r.frequency,
                    "stderr": r.stderr, "z": r.z, "method": "monte-carlo", "status": r.status})
    return _emit(fmt, header, rows, out)


def render_bench(rows_, fmt="table", digits=DEFAULT_DIGITS) -> str:
    header = ["k", "closed_form_s", "enumeration_s", "terms", "states", "note"]
    rows, out = [], []
    for r in rows_:
        rows.append([r.k, _fmt(r.closed_form_s, 3), _fmt(r.enumeration_s, 3),
                     _fmt(r.terms, digits), _fmt(r.states, digits), r.note])
        out.append({"k": r.k, "closed_form_s": r.closed_form_s, "enumeration_s": r.enumeration_s,
                    "terms": r.terms, "states": list(r.states), "note": r.note})
    return _emit(fmt, header, rows, out)


# -- argument handling -------------------------------------------------------


def _sweep(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("sweep needs at least one nonnegative integer")
    return values


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for mismatches here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("file", help="scheme description (JSON)")
    common.add_argument("--format", choices=("table", "csv", "json"), default="table")
    common.add_argument("--digits", type=_positive, default=DEFAULT_DIGITS,
                        help="significant digits for decimal renderings (default: 6)")

    parser = _Parser(
        prog="urnflow", description="Exact ball-draw probabilities for urn transfer schemes."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("compute", parents=[common], help="closed-form probabilities")
    verify = sub.add_parser("verify", parents=[common], help="check against exact enumeration")
    verify.add_argument("--cap", type=_positive, default=None,
                        help="maximum outcome terms to enumerate (default: $URNFLOW_CAP or 10^6)")
    simulate = sub.add_parser("simulate", parents=[common], help="Monte Carlo cross-check")
    simulate.add_argument("--trials", type=_positive, required=True)
    simulate.add_argument("--seed", type=int, required=True)
    simulate.add_argument("--workers", type=_positive, default=1)
    bench = sub.add_parser("bench", parents=[common], help="closed form vs enumeration timing")
    bench.add_argument("--sweep", type=_sweep, required=True, help="k values, e.g. 10,100,1000")
    bench.add_argument("--cap", type=_positive, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = sys.stdout
    try:
        config = parse_scheme(args.file)
        if args.command == "compute":
            out.write(render_compute(cmd_compute(config, args.digits), args.format, args.digits))
            return EXIT_OK
        if args.command == "verify":
            rows = cmd_verify(config, args.cap)
            out.write(render_verify(rows, args.format, args.digits))
            return EXIT_OK if all(r.match for r in rows) else EXIT_MISMATCH
        if args.command == "simulate":
            rows = cmd_simulate(config, args.trials, args.seed, args.workers)
            out.write(render_simulate(rows, args.format, args.digits))
            return EXIT_MISMATCH if any(r.status == "FAIL" for r in rows) else EXIT_OK
        if args.command == "bench":
            rows = cmd_bench(config, args.sweep, args.cap)
            out.write(render_bench(rows, args.format, args.digits))
            return EXIT_OK
    except SchemeError as exc:
        print(f"urnflow: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (engine.InfeasibleTransfer, engine.EmptyUrnDraw) as exc:
        print(f"urnflow: error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except oracle.EnumerationCapExceeded as exc:
        print(f"urnflow: error: {exc}; raise --cap or URNFLOW_CAP", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"urnflow: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
