import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from outlierlab import dyck


@pytest.mark.parametrize("k,u,count", [(2, 1, 1), (2, 2, 1), (3, 1, 2), (3, 2, 2), (3, 3, 1)])
def test_return_counts(k, u, count):
    assert dyck.dyck_count_returns(k, u) == count


def test_semilength_three_sums_to_catalan():
    assert sum(dyck.dyck_count_returns(3, u) for u in range(1, 4)) == 5 == dyck.catalan(3)


def test_enumeration_examples():
    assert dyck.enumerate_dyck(1) == ["UD"]
    assert len(dyck.enumerate_dyck(3, returns=1)) == 2
    assert sorted(dyck.enumerate_dyck(3, no_interior_returns=True)) == ["UUDUDD", "UUUDDD"]
    assert dyck.enumerate_dyck(3, returns=2, no_interior_returns=True) == []
    with pytest.raises(ValueError):
        dyck.enumerate_dyck(13)


@pytest.mark.parametrize("k,u", [(0, 1), (3, 0), (3, 4)])
def test_count_domain(k, u):
    with pytest.raises(ValueError):
        dyck.dyck_count_returns(k, u)


@pytest.mark.parametrize("s,p,count", [(1, 2, 1), (2, 2, 1), (2, 3, 2)])
def test_sequence_counts(s, p, count):
    got, bound, ok = dyck.dyck_sequence_bound_check(s, p)
    assert got == count == bound and ok


def test_sequence_examples():
    assert dyck.primitive_sequences(2, 3) == [("UD", "UUDD"), ("UUDD", "UD")]


def test_binomial_sum_examples():
    lhs, rhs, ok = dyck.binomial_sum_check(3, 3)
    assert lhs == 51 and rhs == pytest.approx(60.75) and ok
    lhs, rhs, ok = dyck.binomial_sum_check(1, 2)
    assert lhs == 2 and rhs == 2 and ok
    with pytest.raises(ValueError):
        dyck.binomial_sum_check(3, 1.0)


@pytest.mark.parametrize("L", [1.1, 1.5, 2, 3, 10])
def test_binomial_sum_grid(L):
    for p in range(1, 41):
        assert dyck.binomial_sum_check(p, L)[2]
        assert dyck.alpha_recursion_holds(p, L)


@pytest.mark.parametrize("m,u,value", [(5, 0, 32), (5, 1, 32), (6, 2, 22)])
def test_beta(m, u, value):
    assert dyck.beta(m, u) == value


@pytest.mark.parametrize("d,dt,k,total,closed", [(2, 8, 2, 80, 256 / 3), (4, 4, 3, 320, 2048), (1, 1, 1, 1, 2)])
def test_toy_bound(d, dt, k, total, closed):
    got_total, got_closed, ok = dyck.toy_norm_bound(d, dt, k)
    assert got_total == pytest.approx(total)
    assert got_closed == pytest.approx(closed)
    assert ok


def test_alpha_is_exact():
    assert dyck.alpha(2, 3) == Fraction(1, 3) + 1


@given(st.integers(1, 10).flatmap(lambda k: st.tuples(st.just(k), st.integers(1, k))))
def test_formula_matches_enumeration(ku):
    k, u = ku
    assert dyck.dyck_count_returns(k, u) == len(dyck.enumerate_dyck(k, returns=u))


@given(st.integers(1, 30))
def test_catalan_identity(k):
    assert sum(dyck.dyck_count_returns(k, u) for u in range(1, k + 1)) == dyck.catalan(k)
    assert dyck.catalan(k) == math.comb(2 * k, k) - math.comb(2 * k, k + 1)


@given(st.integers(1, 12))
def test_enumerated_words_are_dyck(k):
    words = dyck.enumerate_dyck(min(k, 8))
    for w in words:
        h = 0
        for c in w:
            h += 1 if c == "U" else -1
            assert h >= 0
        assert h == 0
    assert len(set(words)) == len(words)


@given(st.floats(1.01, 50), st.integers(1, 40))
def test_toy_bound_holds(ratio, k):
    assert dyck.toy_norm_bound(3.0, 3.0 * ratio, k)[2]
