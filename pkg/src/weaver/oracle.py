"""Brute-force ground truth by exhaustive enumeration of choice vectors.

Nothing here shares code paths with :mod:`weaver.core` beyond the choice
vector type: masses are products over individual bits, moments are plain
sums over all ``2**n`` rows.  Everything is exact.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, TextIO

from .core import ChoiceVector
from .errors import DomainError, ResourceError

ENUMERATION_MAX_N = 20
SPLIT_MAX_N = 30


@dataclass(frozen=True)
class EnumerationRow:
    k: int
    bits: ChoiceVector
    conditional_sum: int
    support: Fraction
    prob: Fraction


def _exact_p(p) -> Fraction:
    if isinstance(p, float):
        raise DomainError("the oracle is exact-only; pass p as a Fraction or 'a/b' string")
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise DomainError(f"p = {p} is outside [0, 1]")
    return p


def _check(n: int) -> None:
    if n < 1:
        raise DomainError(f"n = {n} must be positive")
    if n > ENUMERATION_MAX_N:
        raise ResourceError(f"n = {n} exceeds the enumeration cap of {ENUMERATION_MAX_N}")


def enumerate_rows(n: int, p) -> Iterator[EnumerationRow]:
    """Yield one row per choice vector, ordered by ``k``; nothing is materialized."""
    p = _exact_p(p)
    _check(n)
    d = (1 << n) - 1
    for k in range(1 << n):
        b = ChoiceVector(n, k)
        prob = Fraction(1)
        cond = 0
        for i, bit in zip(range(n), b.bits):
            prob *= p if bit else 1 - p
            cond += bit << i  # the i-th sub-sample has 2**i members, all with mean bit
        yield EnumerationRow(k, b, cond, Fraction(cond, d), prob)


def enumerate(n: int, p) -> list[EnumerationRow]:  # noqa: A001 - mirrors the table it reproduces
    return list(enumerate_rows(n, p))


def pmf_oracle(n: int, p) -> list[Fraction]:
    return [row.prob for row in enumerate_rows(n, p)]


def moment_oracle(n: int, p, j: int) -> Fraction:
    """``E[Y_n**j]`` by summing over every row."""
    if j < 1:
        raise DomainError(f"moment order j = {j} must be positive")
    total = Fraction(0)
    for row in enumerate_rows(n, p):
        total += row.prob * row.support**j
    return total


def variance_oracle(n: int, p) -> Fraction:
    m1 = moment_oracle(n, p, 1)
    return moment_oracle(n, p, 2) - m1 * m1


def zero_class_sums(n: int, p) -> list[Fraction]:
    """Mean contributions grouped by the number of zeros ``j = 0 .. n``."""
    sums = [Fraction(0)] * (n + 1)
    for row in enumerate_rows(n, p):
        sums[row.bits.zeros] += row.prob * row.support
    return sums


def mixture_draw_moments(n: int, p, var0, var1) -> tuple[Fraction, Fraction]:
    """Exact mean and variance of the stratum-mean mixture draw, by enumeration.

    Given the choice vector, the draw picks stratum 1 with probability
    ``lam = k / (2**n - 1)`` and returns that stratum's sample mean (mean 0
    or 1, variance ``var / stratum size``).  An empty stratum is never picked.
    """
    var0, var1 = Fraction(var0), Fraction(var1)
    d = (1 << n) - 1
    first = second = Fraction(0)
    for row in enumerate_rows(n, p):
        lam = row.support
        n1, n0 = row.k, d - row.k
        m2 = Fraction(0)
        if n1:
            m2 += lam * (1 + var1 / n1)
        if n0:
            m2 += (1 - lam) * (var0 / n0)
        first += row.prob * lam
        second += row.prob * m2
    return first, second - first * first


def path_mean_moments(n: int, p, var0, var1) -> tuple[Fraction, Fraction]:
    """Exact mean and variance of the arithmetic mean of all ``2**n - 1`` observations."""
    var0, var1 = Fraction(var0), Fraction(var1)
    d = (1 << n) - 1
    first = second = Fraction(0)
    for row in enumerate_rows(n, p):
        n1, n0 = row.k, d - row.k
        cond_var = (n0 * var0 + n1 * var1) / Fraction(d * d)
        first += row.prob * row.support
        second += row.prob * (cond_var + row.support**2)
    return first, second - first * first


def square_split_check(n: int) -> tuple[int, int, bool]:
    """Integer sums ``sum 4**i`` and ``sum 2**j (2**n - 1 - 2**j)`` and whether they add to ``(2**n-1)**2``."""
    if not 1 <= n <= SPLIT_MAX_N:
        raise DomainError(f"n = {n} is outside [1, {SPLIT_MAX_N}]")
    d = (1 << n) - 1
    weaving = sum(1 << (2 * i) for i in range(n))
    mixing = sum((1 << j) * (d - (1 << j)) for j in range(n))
    return weaving, mixing, weaving + mixing == d * d


def table_row(n: int) -> tuple[int, int, int, int]:
    """``(n, (2**n-1)**2, sum 4**i, sum 2**j (2**n-1-2**j))`` by plain loops."""
    weaving, mixing, _ = square_split_check(n)
    return n, ((1 << n) - 1) ** 2, weaving, mixing


CSV_COLUMNS = ("k", "bits", "support_num", "support_den", "prob_num", "prob_den")


def write_enumeration_csv(n: int, p, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in enumerate_rows(n, p):
        writer.writerow(
            (
                row.k,
                row.bits.as_string(),
                row.support.numerator,
                row.support.denominator,
                row.prob.numerator,
                row.prob.denominator,
            )
        )


def enumeration_csv(n: int, p) -> str:
    buf = io.StringIO()
    write_enumeration_csv(n, p, buf)
    return buf.getvalue()
