"""Exact integer/rational helpers and the binomial identities behind the closed forms.

Python ``int`` is already arbitrary precision and :class:`fractions.Fraction`
is always kept in lowest terms with a positive denominator, so both are used
directly as the big-integer and big-rational types of the package.
"""

from __future__ import annotations

import math
from fractions import Fraction

BigInt = int
BigRational = Fraction

__all__ = [
    "BigInt",
    "BigRational",
    "as_fraction",
    "binomial",
    "vandermonde_sum",
    "lemma_weighted_sum",
    "format_fraction",
]


def as_fraction(value: int | str | Fraction) -> Fraction:
    """Coerce an int, ``"p/q"`` string or Fraction to a Fraction; floats are refused."""
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"refusing inexact value {value!r}; use an int or a 'p/q' string")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def binomial(n: int, k: int) -> int:
    """C(n, k) for nonnegative ``n`` and ``k``; zero when ``k > n``."""
    if n < 0 or k < 0:
        raise ValueError(f"binomial needs nonnegative arguments, got ({n}, {k})")
    # math.comb returns 0 for k > n and multiplies incrementally (no factorials).
    return math.comb(n, k)


def vandermonde_sum(a: int, b: int, k: int) -> int:
    """Left-hand side of the Vandermonde convolution, summed term by term.

    The caller compares the result against ``binomial(a + b, k)``.
    """
    return sum(binomial(a, i) * binomial(b, k - i) for i in range(k + 1))


def lemma_weighted_sum(a: int, b: int, k: int) -> Fraction:
    """((a+b)/a) * (1/C(a+b,k)) * sum_{i=1..k} i C(a,i) C(b,k-i), evaluated literally.

    Equals ``k`` for every admissible input.
    """
    if a < 1:
        raise ValueError("lemma_weighted_sum needs a >= 1")
    if b < 0:
        raise ValueError("lemma_weighted_sum needs b >= 0")
    if not 1 <= k <= a + b:
        raise ValueError(f"lemma_weighted_sum needs 1 <= k <= a+b, got k={k}, a+b={a + b}")
    weighted = sum(i * binomial(a, i) * binomial(b, k - i) for i in range(1, k + 1))
    return Fraction(a + b, a) * Fraction(weighted, binomial(a + b, k))


def format_fraction(value: Fraction) -> str:
    """Render as ``"p/q"``; integers keep the ``/1`` so the form is uniform."""
    return f"{value.numerator}/{value.denominator}"
