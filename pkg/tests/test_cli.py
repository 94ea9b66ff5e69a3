import csv
import io
import json
import subprocess
import sys
from decimal import Decimal, localcontext
from fractions import Fraction
from importlib import resources

import pytest
from hypothesis import given
from hypothesis import strategies as st

from urnflow import cli, engine
from urnflow.cli import (
    EXIT_INFEASIBLE,
    EXIT_MISMATCH,
    EXIT_OK,
    EXIT_USAGE,
    cmd_bench,
    cmd_compute,
    cmd_simulate,
    cmd_verify,
    main,
    render_decimal,
)
from urnflow.oracle import EnumerationCapExceeded
from urnflow.scheme import bundled_scheme


def data(name):
    return str(resources.files("urnflow").joinpath(f"data/{name}.json"))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, obj, name="scheme.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj, indent=2))
    return str(path)


# -- decimal rendering -------------------------------------------------------


def test_render_decimal_examples():
    assert render_decimal(Fraction(79, 90)) == "0.877778"
    assert render_decimal(Fraction(79, 90), 3) == "0.878"
    assert render_decimal(Fraction(91, 150), 3) == "0.607"
    assert render_decimal(Fraction(1026180, 3903803), 3) == "0.263"
    assert render_decimal(Fraction(1)) == "1"
    assert render_decimal(Fraction(0)) == "0"
    assert render_decimal(Fraction(1, 8), 2) == "0.12"  # half-even


@given(st.fractions(0, 1, max_denominator=10**9), st.integers(1, 20))
def test_render_decimal_correctly_rounded(x, digits):
    shown = Decimal(render_decimal(x, digits))
    with localcontext() as ctx:
        ctx.prec = digits + 30
        precise = Decimal(x.numerator) / Decimal(x.denominator)
    if precise == 0:
        assert shown == 0
        return
    ulp = Decimal(1).scaleb(precise.adjusted() - digits + 1)
    err = abs(Fraction(shown) - x)
    assert err <= Fraction(ulp) / 2
    assert len(shown.as_tuple().digits) <= digits


# -- compute -----------------------------------------------------------------


def test_compute_exercise1(capsys):
    code, out, _ = run(capsys, "compute", data("exercise1"))
    assert code == EXIT_OK
    assert "79/90 ≈ 0.877778" in out


def test_compute_exercise2_records():
    records = cmd_compute(bundled_scheme("exercise2"))
    assert records[0].exact == Fraction(37, 60)
    assert records[2].exact == Fraction(91, 150)
    for r in records:
        assert r.alpha <= r.exact <= r.beta
        assert r.method == "closed-form"


def test_compute_exercise3_json(capsys):
    code, out, _ = run(capsys, "compute", data("exercise3"), "--format", "json")
    assert code == EXIT_OK
    exact = [r["exact"] for r in json.loads(out)]
    assert exact[3:] == ["1026180/3903803", "1397032/3903803", "1480591/3903803"]
    assert exact[:3] == ["1550/15553", "6694/15553", "7309/15553"]


def test_compute_csv_and_digits(capsys):
    code, out, _ = run(capsys, "compute", data("exercise1"), "--format", "csv", "--digits", "3")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["exact"] == "79/90"
    assert rows[0]["decimal"] == "0.878"


def test_compute_empty_urn_query(tmp_path, capsys):
    path = write(tmp_path, {
        "types": ["w"], "urns": {"a": {"w": 2}, "b": {}},
        "steps": [{"from": "a", "to": "b", "k": 2}],
        "queries": [{"urn": "a", "type": "w"}],
    })
    code, _, err = run(capsys, "compute", path)
    assert code == EXIT_INFEASIBLE
    assert "empty" in err


def test_parse_errors_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{ nope")
    assert run(capsys, "compute", str(bad))[0] == EXIT_USAGE
    assert run(capsys, "compute", str(tmp_path / "missing.json"))[0] == EXIT_USAGE
    path = write(tmp_path, {
        "types": ["w"], "urns": {"a": {"w": 5}, "b": {}},
        "steps": [{"from": "a", "to": "b", "k": 6}],
        "queries": [{"urn": "b", "type": "w"}],
    })
    code, _, err = run(capsys, "compute", path)
    assert code == EXIT_INFEASIBLE
    assert "step 1" in err and "line" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        main(["compute"])
    assert info.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        main(["bench", data("exercise1"), "--sweep", "a,b"])
    assert info.value.code == EXIT_USAGE


# -- verify ------------------------------------------------------------------


def test_verify_tiny_transfer():
    rows = cmd_verify(bundled_scheme("tiny_transfer"))
    assert rows[0].engine == rows[0].oracle == Fraction(11, 20)
    assert rows[0].match


@pytest.mark.parametrize("name", ["tiny_transfer", "tiny_multi", "exercise3_small", "exercise1"])
def test_verify_bundled_fixtures_exit_zero(name, capsys):
    code, out, _ = run(capsys, "verify", data(name))
    assert code == EXIT_OK
    assert "MISMATCH" not in out
    assert out.count("EXACT-MATCH") == len(bundled_scheme(name).queries)


def test_verify_detects_corrupted_engine(monkeypatch, capsys):
    real = engine.transfer

    def corrupted(state, step):
        out = real(state, step)
        dst = out[step.destination]
        if dst.total < 2 or len(dst.fractions) < 2:
            return out
        # shift 1/(2N) of probability between the first two types
        t0, t1 = list(dst.fractions)[:2]
        eps = min(dst.fractions[t0], 1 - dst.fractions[t1]) / 2
        shifted = dict(dst.fractions, **{t0: dst.fractions[t0] - eps, t1: dst.fractions[t1] + eps})
        return out.replace(**{step.destination: engine.UrnComposition(dst.total, shifted)})

    monkeypatch.setattr(engine, "transfer", corrupted)
    code, out, _ = run(capsys, "verify", data("tiny_transfer"))
    assert code == EXIT_MISMATCH
    assert "MISMATCH" in out


def test_verify_cap(monkeypatch, capsys):
    code, _, err = run(capsys, "verify", data("exercise3"))
    assert code == EXIT_USAGE
    assert "cap is 1000000" in err
    monkeypatch.setenv("URNFLOW_CAP", "100")
    with pytest.raises(EnumerationCapExceeded):
        cmd_verify(bundled_scheme("exercise3_small"))
    code, _, _ = run(capsys, "verify", data("exercise3_small"), "--cap", "100000")
    assert code == EXIT_OK


def test_verify_rejects_fractional(tmp_path, capsys):
    path = write(tmp_path, {
        "types": ["w", "b"],
        "urns": {"a": {"total": 3, "fractions": {"w": "1/2", "b": "1/2"}}, "d": {}},
        "steps": [{"from": "a", "to": "d", "k": 1}],
        "queries": [{"urn": "d", "type": "w"}],
    })
    code, _, err = run(capsys, "verify", path)
    assert code == EXIT_USAGE
    assert "non-integer" in err
    assert run(capsys, "compute", path)[0] == EXIT_OK


# -- simulate ----------------------------------------------------------------


def test_simulate_report_and_determinism(capsys):
    code, out1, _ = run(capsys, "simulate", data("tiny_multi"), "--trials", "20000", "--seed", "3",
                        "--format", "json")
    _, out2, _ = run(capsys, "simulate", data("tiny_multi"), "--trials", "20000", "--seed", "3",
                     "--format", "json", "--workers", "2")
    assert code == EXIT_OK
    assert out1 == out2
    rows = json.loads(out1)
    assert rows[0]["exact"] == "7/15"
    assert rows[0]["method"] == "monte-carlo"


def test_simulate_single_trial():
    rows = cmd_simulate(bundled_scheme("tiny_transfer"), 1, 0)
    assert all(r.frequency in (0.0, 1.0) for r in rows)


def test_simulate_pure_scheme(tmp_path):
    from urnflow.scheme import parse_scheme

    path = write(tmp_path, {
        "types": ["w"], "urns": {"a": {"w": 4}, "b": {"w": 1}},
        "steps": [{"from": "a", "to": "b", "k": 3}],
        "queries": [{"urn": "b", "type": "w"}],
    })
    row = cmd_simulate(parse_scheme(path), 1000, 1)[0]
    assert row.frequency == 1.0 and row.z == 0.0 and row.status == "ok"


def test_simulate_flags_wrong_closed_form(monkeypatch, capsys):
    monkeypatch.setattr(engine, "prob_type", lambda urn, t: Fraction(1, 10))
    code, out, _ = run(capsys, "simulate", data("tiny_transfer"), "--trials", "20000", "--seed", "1")
    assert code == EXIT_MISMATCH
    assert "FAIL" in out


# -- bench -------------------------------------------------------------------


def test_bench_term_counts():
    rows = cmd_bench(bundled_scheme("exercise1"), [10, 100, 1000], repeat=2, number=20)
    assert [r.terms for r in rows] == [11, 101, 1001]
    assert all(r.enumeration_s is not None and r.closed_form_s > 0 for r in rows)


def test_bench_chain_growth_and_skips():
    rows = cmd_bench(bundled_scheme("exercise3_small"), [1, 3, 5, 40], cap=10**5, repeat=1, number=5)
    terms = [r.terms for r in rows[:3]]
    assert terms == sorted(terms) and terms[0] < terms[-1]
    assert all(len(r.states) == 2 for r in rows[:3])
    assert rows[3].note == "skipped (infeasible)"
    capped = cmd_bench(bundled_scheme("exercise3_small"), [5], cap=10, repeat=1, number=5)
    assert capped[0].note == "skipped (cap)"


def test_bench_cli_csv(capsys):
    code, out, _ = run(capsys, "bench", data("exercise1"), "--sweep", "10,100", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["terms"] for r in rows] == ["11", "101"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "urnflow", "compute", data("exercise2")],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "91/150" in proc.stdout
