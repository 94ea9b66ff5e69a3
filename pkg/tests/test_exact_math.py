import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from urnflow.exact_math import (
    as_fraction,
    binomial,
    format_fraction,
    lemma_weighted_sum,
    vandermonde_sum,
)
from urnflow.oracle import _binomial_run


def pascal_rows(n_max):
    rows = [[1]]
    for n in range(1, n_max + 1):
        prev = rows[-1]
        rows.append([1] + [prev[i - 1] + prev[i] for i in range(1, n)] + [1])
    return rows


def test_binomial_small_values():
    assert binomial(5, 2) == 10
    assert binomial(0, 0) == 1
    assert all(binomial(n, 0) == 1 for n in range(50))


def test_binomial_zero_above_n():
    assert binomial(3, 4) == 0
    assert binomial(0, 7) == 0


def test_binomial_rejects_negative():
    with pytest.raises(ValueError):
        binomial(-1, 0)
    with pytest.raises(ValueError):
        binomial(4, -2)


def test_binomial_matches_pascal_triangle():
    rows = pascal_rows(60)
    for n in range(61):
        for k in range(n + 1):
            assert binomial(n, k) == rows[n][k]


def test_binomial_pascal_recurrence_to_60():
    for n in range(1, 61):
        for k in range(1, n + 1):
            assert binomial(n, k) == binomial(n - 1, k - 1) + binomial(n - 1, k)


def test_large_binomial_spot_cell():
    big = binomial(15000, 10000)
    log10 = (math.lgamma(15001) - math.lgamma(10001) - math.lgamma(5001)) / math.log(10)
    assert len(str(big)) == math.floor(log10) + 1 == 4145
    assert big == binomial(14999, 9999) + binomial(14999, 10000)


@pytest.mark.parametrize("n, lo, hi", [(0, 0, 0), (7, 0, 7), (40, 13, 29), (11850, 6850, 6900)])
def test_binomial_run_matches_binomial(n, lo, hi):
    assert _binomial_run(n, lo, hi) == [binomial(n, x) for x in range(lo, hi + 1)]


def test_vandermonde_examples():
    assert vandermonde_sum(1, 1, 1) == 2
    # C(3,0)C(2,2) + C(3,1)C(2,1) + C(3,2)C(2,0) = 1 + 6 + 3
    assert vandermonde_sum(3, 2, 2) == 10
    for a in range(6):
        for k in range(8):
            assert vandermonde_sum(a, 0, k) == binomial(a, k)


def test_vandermonde_exhaustive():
    for a in range(13):
        for b in range(13):
            for k in range(a + b + 1):
                assert vandermonde_sum(a, b, k) == binomial(a + b, k)


def test_lemma_examples():
    assert lemma_weighted_sum(1, 1, 1) == 1
    # (1*C(3,1)C(2,1) + 2*C(3,2)C(2,0)) / C(5,2) * 5/3
    assert Fraction(1 * 3 * 2 + 2 * 3 * 1, 10) * Fraction(5, 3) == 2
    assert lemma_weighted_sum(3, 2, 2) == 2


def test_lemma_grid():
    for a in range(1, 9):
        for b in range(9):
            for k in range(1, a + b + 1):
                value = lemma_weighted_sum(a, b, k)
                assert isinstance(value, Fraction)
                assert value == k


@pytest.mark.parametrize("a, b, k", [(0, 3, 1), (2, 1, 4), (2, 1, 0)])
def test_lemma_rejects_bad_arguments(a, b, k):
    with pytest.raises(ValueError):
        lemma_weighted_sum(a, b, k)


fractions_ = st.fractions(max_denominator=10**6)


@given(fractions_, fractions_)
def test_rational_add_sub_roundtrip(p, r):
    assert (p + r) - r == p


@given(st.integers(-(10**30), 10**30), st.integers(1, 10**30))
def test_rational_reduced_positive_denominator(num, den):
    x = Fraction(num, den)
    assert x.denominator > 0
    assert Fraction(x.numerator, x.denominator) == x
    assert math.gcd(x.numerator, x.denominator) == 1


def test_as_fraction():
    assert as_fraction("37/60") == Fraction(37, 60)
    assert as_fraction(3) == Fraction(3)
    assert as_fraction(" 182/300 ") == Fraction(91, 150)
    with pytest.raises(TypeError):
        as_fraction(0.5)
    with pytest.raises(TypeError):
        as_fraction(True)


def test_format_fraction():
    assert format_fraction(Fraction(182, 300)) == "91/150"
    assert format_fraction(Fraction(1)) == "1/1"
