import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weaver import core
from weaver.errors import DomainError
from weaver.hem import (
    DyadicRational,
    density_diagnostic,
    hem_cdf,
    hem_cdf_bracket,
    hem_moments,
    hem_sample,
    interval_mass,
    interval_masses,
    staircase,
)

probs = st.fractions(min_value=0, max_value=1, max_denominator=40)


def test_dyadic_canonical_form():
    assert DyadicRational(4, 3) == DyadicRational(1, 1)
    assert DyadicRational(0, 5) == DyadicRational(0, 0)
    assert DyadicRational(8, 3) == DyadicRational(1, 0)
    assert DyadicRational.coerce(F(3, 8)).digits() == [0, 1, 1]
    with pytest.raises(DomainError):
        DyadicRational.coerce(F(1, 3))
    with pytest.raises(DomainError):
        DyadicRational(9, 3)


def test_hem_cdf_examples():
    p = F(2, 7)
    q = 1 - p
    assert hem_cdf(p, F(1, 2)) == q
    assert hem_cdf(p, F(5, 8)) == q + p * q**2
    assert hem_cdf(p, 0) == 0 and hem_cdf(p, 1) == 1
    assert hem_cdf(F(1, 2), F(13, 32)) == F(13, 32)


def test_hem_cdf_rejects():
    with pytest.raises(DomainError):
        hem_cdf(F(1, 2), F(5, 4))
    with pytest.raises(DomainError):
        hem_cdf(0.5, F(1, 2))


@given(p=probs, m=st.integers(0, 7), data=st.data())
@settings(max_examples=60, deadline=None)
def test_hem_cdf_matches_finite_cdf(p, m, data):
    k = data.draw(st.integers(1, 1 << m))
    x = F(k, 1 << m)
    for n in range(max(m, 1), max(m, 1) + 7):
        assert core.cdf_eval(n, p, x) == hem_cdf(p, x)


def test_origin_atom_vanishes_in_the_limit():
    # the finite CDF carries an atom (1-p)^n at 0 which the limit loses
    p = F(1, 3)
    assert [core.cdf_eval(n, p, 0) for n in (1, 2)] == [F(2, 3), F(4, 9)]
    assert hem_cdf(p, 0) == 0
    assert hem_cdf(F(0), 0) == 1


def test_interval_mass_examples():
    p = F(1, 3)
    assert interval_mass(p, 2, 1) == (1 - p) * p
    assert interval_mass(p, 1, 0) == 1 - p
    assert interval_mass(F(2, 5), 3, 6) == F(12, 125)
    assert interval_mass(F(2, 5), 3, 6) == hem_cdf(F(2, 5), F(7, 8)) - hem_cdf(F(2, 5), F(6, 8))


@given(p=probs, level=st.integers(0, 8))
@settings(max_examples=40, deadline=None)
def test_interval_masses_refine(p, level):
    parent = interval_masses(p, level)
    child = interval_masses(p, level + 1)
    assert sum(parent) == 1
    assert all(child[2 * k] + child[2 * k + 1] == m for k, m in enumerate(parent))


@given(p=probs, m=st.integers(1, 8), data=st.data())
@settings(max_examples=60, deadline=None)
def test_hem_symmetry(p, m, data):
    x = F(data.draw(st.integers(0, 1 << m)), 1 << m)
    if 0 < p < 1:
        assert hem_cdf(p, x) == 1 - hem_cdf(1 - p, 1 - x)


def test_locality_under_finite_weaving():
    # mass of [k/2^n, (k+1)/2^n) under W(m, p) equals the cascade mass for m >= n
    p, n = F(2, 5), 3
    for m in range(n, n + 4):
        dist = core.pmf_vector(m, p)
        y = dist.support()
        for k in range(1 << n):
            lo, hi = F(k, 1 << n), F(k + 1, 1 << n)
            got = sum((pk for yk, pk in zip(y, dist.probs) if lo <= yk < hi or (hi == 1 and yk == 1)), F(0))
            assert got == interval_mass(p, n, k)


def test_staircase():
    p = F(1, 3)
    table = staircase(p, 3)
    assert len(table) == 9
    assert all(F_ == hem_cdf(p, x) for x, F_ in table)


def test_moments():
    assert hem_moments(F(1, 2)) == (F(1, 2), F(1, 12))
    assert hem_moments(F(0)) == (0, 0)
    assert hem_moments(F(2, 5)) == (F(2, 5), F(2, 25))
    gaps = [core.variance(n, F(2, 5)) - F(2, 25) for n in range(1, 25)]
    assert all(g > 0 for g in gaps)
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


def test_bracket():
    p = F(1, 3)
    lo, hi = hem_cdf_bracket(p, F(1, 3), 10)
    assert lo <= hi
    assert hem_cdf_bracket(p, F(1, 2), 4) == (hem_cdf(p, F(1, 2)),) * 2
    # brackets shrink as the level grows
    widths = [hi - lo for lo, hi in (hem_cdf_bracket(p, F(1, 3), lv) for lv in range(2, 14))]
    assert all(a >= b for a, b in zip(widths, widths[1:]))


def test_density_diagnostic_uniform():
    for n in (1, 5, 30):
        for j in (0, n // 2, n):
            assert density_diagnostic(n, F(1, 2), j) == pytest.approx(math.log1p(-(2.0**-n)), abs=1e-12)


def test_density_diagnostic_divergence():
    p = 0.3
    low = [density_diagnostic(n, p, 0) for n in range(1, 41)]
    high = [density_diagnostic(n, p, n) for n in range(1, 41)]
    assert all(a < b for a, b in zip(low, low[1:]))
    assert all(a > b for a, b in zip(high, high[1:]))
    assert density_diagnostic(10, p, 10) < density_diagnostic(9, p, 9)
    expected = math.log(1023) + 10 * math.log(0.7)
    assert density_diagnostic(10, p, 0) == pytest.approx(expected, rel=1e-13)


def test_density_diagnostic_domain():
    with pytest.raises(DomainError):
        density_diagnostic(3, F(0), 0)
    with pytest.raises(DomainError):
        density_diagnostic(3, 0.5, 4)


def test_hem_sample_truncation():
    rng = np.random.default_rng(7)
    p = F(1, 3)
    x = hem_sample(p, 20, 50_000, rng)
    assert np.all((x > 0) & (x < 1))
    for v in (F(1, 4), F(1, 2), F(5, 8)):
        emp = np.mean(x <= float(v))
        target = float(hem_cdf(p, v))
        assert abs(emp - target) < 4 * math.sqrt(target * (1 - target) / len(x)) + 2.0**-20
    assert abs(x.mean() - 1 / 3) < 0.005
    assert abs(x.var() - 2 / 27) < 0.005
