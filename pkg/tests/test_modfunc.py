from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import naive_mul
from ramseries.modfunc import evaluate_x, level_info, modular_unit, modular_x

S_OF = {4: 2, 2: 4, 3: 3}


def naive_div(a, b, n):
    out = []
    for k in range(n + 1):
        acc = a[k] - sum(out[i] * b[k - i] for i in range(k))
        out.append(acc / b[0])
    return out


def theta_x4(n):
    """16 q T^4 / theta3^4 with T = sum q^(k(k+1)), theta3 = sum over Z of q^(k^2)."""
    T = [Fraction(0)] * (n + 1)
    k = 0
    while k * (k + 1) <= n:
        T[k * (k + 1)] += 1
        k += 1
    th3 = [Fraction(0)] * (n + 1)
    k = 0
    while k * k <= n:
        th3[k * k] += 1 if k == 0 else 2
        k += 1
    T4 = naive_mul(naive_mul(T, T, n), naive_mul(T, T, n), n)
    th4 = naive_mul(naive_mul(th3, th3, n), naive_mul(th3, th3, n), n)
    ratio = naive_div(T4, th4, n - 1)
    return [Fraction(0)] + [16 * c for c in ratio]


def test_level_info():
    assert level_info(4).s == 2
    assert level_info(2).hyp_params == (Fraction(1, 2), Fraction(1, 4), Fraction(3, 4))
    assert not level_info(1).parametrized
    assert level_info(1).note
    with pytest.raises(ValueError):
        level_info(5)


def test_x4_matches_theta_quotient():
    n = 60
    assert list(modular_x(4, n).coeffs) == theta_x4(n)


def test_leading_coefficients():
    assert modular_x(4, 3).coeffs[:3] == (0, 16, -128)
    assert modular_x(2, 2).coeffs[:2] == (0, 64)
    assert modular_x(3, 2).coeffs[:2] == (0, 27)


def test_unit_cache_truncation_consistent():
    long = modular_unit(2, 80)
    assert modular_unit(2, 30) == long.truncate(30)


def test_unit_errors():
    with pytest.raises(ValueError):
        modular_unit(1, 5)
    with pytest.raises(ValueError):
        modular_unit(2, -1)
    with pytest.raises(ValueError):
        modular_x(2, 0)


@pytest.mark.parametrize("level", [2, 3, 4])
@settings(max_examples=40, deadline=None)
@given(st.fractions(min_value=Fraction(1, 1000), max_value=Fraction(1, 2), max_denominator=1000))
def test_x_inverts_hypergeometric_nome(level, qf):
    # q = exp(-(2 pi / sqrt(level)) F(1 - x) / F(x)), F = 2F1(1/s, 1 - 1/s; 1; .)
    s = S_OF[level]
    with mpmath.workprec(160):
        q = mpmath.mpf(qf.numerator) / qf.denominator
        x = evaluate_x(level, q)
        a = mpmath.mpf(1) / s

        def F(t):
            return mpmath.hyp2f1(a, 1 - a, 1, t)

        back = mpmath.exp(-2 * mpmath.pi / mpmath.sqrt(level) * F(1 - x) / F(x))
        assert abs(back - q) < mpmath.mpf(2) ** -100


@pytest.mark.parametrize("level", [2, 3, 4])
def test_series_and_product_agree_inside_radius(level):
    n = 120
    xs = modular_x(level, n)
    with mpmath.workprec(200):
        q = mpmath.mpf(1) / 200
        partial = sum(mpmath.mpf(c.numerator) / c.denominator * q ** k for k, c in enumerate(xs.coeffs))
        assert abs(partial - evaluate_x(level, q)) < mpmath.mpf(10) ** -50


def test_evaluate_x_rejects_outside_disc():
    with pytest.raises(ValueError):
        evaluate_x(2, mpmath.mpf(1))
    with pytest.raises(ValueError):
        evaluate_x(1, mpmath.mpf("0.1"))
