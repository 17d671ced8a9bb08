from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import naive_mul
from ramseries.series import (
    PowerSeries,
    kronecker_mul,
    ps_compose_qpower,
    ps_inverse,
    ps_mul,
    ps_nth_root,
    ps_pow,
    ps_product_family,
)

ints = st.integers(-10**12, 10**12)
fracs = st.fractions(min_value=-1000, max_value=1000, max_denominator=50)


@st.composite
def series(draw, order=None, unit=False, elems=fracs):
    n = draw(st.integers(0, 25)) if order is None else order
    cs = draw(st.lists(elems, min_size=n + 1, max_size=n + 1))
    if unit:
        cs[0] = Fraction(1)
    return PowerSeries(cs, n)


@st.composite
def series_triple(draw):
    n = draw(st.integers(0, 20))
    return tuple(draw(series(n)) for _ in range(3))


# -- Kronecker kernel ---------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(st.lists(ints, max_size=40), st.lists(ints, max_size=40), st.integers(0, 60))
def test_kronecker_matches_naive(a, b, n):
    want = [int(x) for x in naive_mul([Fraction(x) for x in a], [Fraction(x) for x in b], n)]
    want += [0] * (n + 1 - len(want))
    assert kronecker_mul(a, b, n) == want


def test_kronecker_huge_coefficients():
    a = [3 ** 500, -(7 ** 400), 1]
    b = [-(2 ** 1000), 5]
    assert kronecker_mul(a, b, 3) == [int(x) for x in naive_mul(a, b, 3)]


# -- ring axioms --------------------------------------------------------------

@settings(max_examples=150, deadline=None)
@given(series_triple())
def test_ring_axioms(t):
    a, b, c = t
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == PowerSeries([], a.order)
    assert a * PowerSeries.one(a.order) == a


@settings(max_examples=150, deadline=None)
@given(series(), series())
def test_mul_matches_naive_and_truncates(a, b):
    n = min(a.order, b.order)
    c = ps_mul(a, b)
    assert c.order == n
    assert list(c.coeffs) == naive_mul(a.coeffs, b.coeffs, n)


@settings(max_examples=150, deadline=None)
@given(series(), st.integers(0, 6))
def test_pow_is_repeated_product(a, k):
    want = PowerSeries.one(a.order)
    for _ in range(k):
        want = want * a
    assert ps_pow(a, k) == want


# -- inverse and roots -------------------------------------------------------

@settings(max_examples=150, deadline=None)
@given(series(elems=fracs))
def test_inverse_round_trip(a):
    if a.coeffs[0] == 0:
        with pytest.raises(ZeroDivisionError):
            ps_inverse(a)
        return
    assert a * ps_inverse(a) == PowerSeries.one(a.order)


@settings(max_examples=120, deadline=None)
@given(series(unit=True), st.integers(1, 8))
def test_root_power_round_trip(a, h):
    r = ps_nth_root(a, h)
    assert r.coeffs[0] == 1
    assert ps_pow(r, h) == a


@settings(max_examples=120, deadline=None)
@given(series(unit=True), st.integers(2, 6), st.integers(1, 3), st.sampled_from([Fraction(1), Fraction(64), Fraction(16, 81)]))
def test_shifted_root(a, h, m, c):
    # c^h q^(m h) (unit)  ->  c q^m (unit root); known order drops by m (h - 1)
    lead = c ** h
    b = (a * lead).shift(m * h)
    r = ps_nth_root(b, h)
    assert r.valuation() == m
    assert r.coeffs[m] == c
    back = ps_pow(r, h)
    k = min(back.order, b.order)
    assert back.truncate(k) == b.truncate(k)


def test_root_errors():
    with pytest.raises(ValueError):
        ps_nth_root(PowerSeries([0, 1, 1], 2), 2)  # valuation not divisible
    with pytest.raises(ValueError):
        ps_nth_root(PowerSeries([2, 1], 1), 2)  # 2 is not a rational square
    with pytest.raises(ValueError):
        ps_nth_root(PowerSeries([1], 0), 0)


@settings(max_examples=100, deadline=None)
@given(series(), st.integers(1, 5))
def test_compose_qpower(a, p):
    b = ps_compose_qpower(a, p)
    assert b.order == a.order
    for k in range(a.order + 1):
        assert b.coeffs[k] == (a.coeffs[k // p] if k % p == 0 else 0)


def test_product_family_euler_pentagonal():
    # prod (1 - q^n) = sum (-1)^k q^(k(3k-1)/2), k over all integers
    n = 60

    def factor(k):
        return PowerSeries([1] + [0] * (k - 1) + [-1], n) if k <= n else PowerSeries([1], n)

    got = ps_product_family(factor, n)
    want = [0] * (n + 1)
    for k in range(-10, 11):
        e = k * (3 * k - 1) // 2
        if 0 <= e <= n:
            want[e] += (-1) ** k
    assert list(got.coeffs) == want


def test_product_family_rejects_bad_factor():
    with pytest.raises(ValueError):
        ps_product_family(lambda k: PowerSeries([1, 1], 5), 5)


def test_index_beyond_order():
    with pytest.raises(IndexError):
        PowerSeries([1, 2], 1)[2]
