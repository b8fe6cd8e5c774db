import csv
import io
from fractions import Fraction as F

import pytest

from weaver import core, oracle
from weaver.errors import DomainError, ResourceError


def test_enumeration_last_row():
    p = F(2, 9)
    rows = oracle.enumerate(3, p)
    last = rows[-1]
    assert last.k == 7
    assert last.bits.bits == (1, 1, 1)
    assert last.support == 1
    assert last.prob == p**3


def test_enumeration_degenerate():
    rows = oracle.enumerate(1, F(0))
    assert [(r.k, r.prob) for r in rows] == [(0, 1), (1, 0)]


def test_enumeration_rows_consistent():
    p = F(2, 5)
    rows = oracle.enumerate(4, p)
    assert [r.k for r in rows] == list(range(16))
    assert all(r.conditional_sum == r.k for r in rows)
    assert all(r.support == F(r.k, 15) for r in rows)
    assert sum(r.prob for r in rows) == 1
    assert [r.prob for r in rows] == list(core.pmf_vector(4, p).probs)


def test_enumeration_is_lazy():
    it = oracle.enumerate_rows(20, F(1, 3))
    assert next(it).prob == F(2, 3) ** 20


def test_enumeration_rejects_floats_and_caps():
    with pytest.raises(DomainError):
        oracle.enumerate(3, 0.5)
    with pytest.raises(ResourceError):
        next(oracle.enumerate_rows(21, F(1, 2)))


@pytest.mark.parametrize("n", range(1, 9))
@pytest.mark.parametrize("p", [F(1, 3), F(2, 5), F(9, 10)])
def test_first_moment_is_p(n, p):
    assert oracle.moment_oracle(n, p, 1) == p


def test_moment_examples():
    assert oracle.moment_oracle(2, F(1, 2), 2) == F(7, 18)
    p = F(3, 8)
    assert oracle.moment_oracle(1, p, 5) == p


@pytest.mark.parametrize("n", range(2, 8))
def test_moments_strictly_decrease(n):
    p = F(2, 5)
    m = [oracle.moment_oracle(n, p, j) for j in range(1, 5)]
    assert m[0] > m[1] > m[2] > m[3] > 0


@pytest.mark.parametrize("n", range(1, 13))
def test_enumeration_matches_closed_forms(n):
    for p in (F(1, 3), F(1, 2), F(9, 10)):
        assert oracle.pmf_oracle(n, p) == list(core.pmf_vector(n, p).probs)
        assert oracle.moment_oracle(n, p, 1) == core.mean(n, p)
        assert oracle.variance_oracle(n, p) == core.variance(n, p)


def test_square_split_examples():
    assert oracle.square_split_check(3) == (21, 28, True)
    assert oracle.square_split_check(1) == (1, 0, True)
    assert oracle.square_split_check(6) == (1365, 2604, True)


def test_square_split_all():
    assert all(oracle.square_split_check(n)[2] for n in range(1, 31))
    with pytest.raises(DomainError):
        oracle.square_split_check(31)


def test_two_process_moments_point_components():
    # n = 2, p = 1/2, zero within-population variance
    assert oracle.path_mean_moments(2, F(1, 2), 0, 0) == (F(1, 2), F(5, 36))
    assert oracle.mixture_draw_moments(2, F(1, 2), 0, 0) == (F(1, 2), F(1, 4))


def test_enumeration_csv():
    text = oracle.enumeration_csv(2, F(1, 3))
    assert "\r" not in text
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == list(oracle.CSV_COLUMNS)
    assert rows[2] == ["1", "01", "1", "3", "2", "9"]
    assert len(rows) == 5
