import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import GF
from sympy.polys.matrices import DomainMatrix

from conftest import naive_mul
from ramseries import kernels
from ramseries.linsolve import (
    rational_reconstruction,
    solve_bareiss,
    solve_multimodular,
    word_primes,
)

BACKENDS = kernels.available_backends()
PRIMES = [2147483647, 2147483629, 1000003, 101, 7]

prime = st.sampled_from(PRIMES)


def test_compiled_backend_is_selected_when_built():
    assert kernels.BACKEND in BACKENDS
    assert "python" in BACKENDS


@pytest.mark.parametrize("name", sorted(BACKENDS))
@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 2**31), max_size=30), st.lists(st.integers(0, 2**31), max_size=30),
       st.integers(0, 40), prime)
def test_convolve_mod_oracle(name, a, b, n, p):
    got = BACKENDS[name].convolve_mod(a, b, n, p)
    want = [int(x) % p for x in naive_mul(a, b, n)]
    want += [0] * (n + 1 - len(want))
    assert list(got) == want


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 2**31 - 2), min_size=12, max_size=12),
       st.lists(st.integers(0, 2**31 - 2), min_size=12, max_size=12), st.integers(1, 3), prime)
def test_monomial_matrix_backend_parity(u, v, dpol, p):
    mats = [list(map(list, b.monomial_matrix_mod(u, v, dpol, 12, p))) for b in BACKENDS.values()]
    assert all(m == mats[0] for m in mats)
    # column order: degree 1 (u, v), degree 2 (u^2, uv, v^2), ...
    assert [row[0] for row in mats[0]] == [x % p for x in u]
    assert [row[1] for row in mats[0]] == [x % p for x in v]


@st.composite
def matrices(draw):
    r = draw(st.integers(1, 8))
    c = draw(st.integers(1, 8))
    return [draw(st.lists(st.integers(-50, 50), min_size=c, max_size=c)) for _ in range(r)]


@pytest.mark.parametrize("name", sorted(BACKENDS))
@settings(max_examples=100, deadline=None)
@given(matrices(), prime)
def test_row_reduce_matches_sympy(name, mat, p):
    red, piv = BACKENDS[name].row_reduce_mod(mat, p)
    dm = DomainMatrix([[GF(p)(x) for x in row] for row in mat], (len(mat), len(mat[0])), GF(p))
    ref, ref_piv = dm.rref()
    assert list(piv) == list(ref_piv)
    want = [[int(x) % p for x in row] for row in ref.to_Matrix().tolist()[: len(ref_piv)]]
    assert [[int(x) % p for x in row] for row in red] == want


# -- reconstruction and solvers -----------------------------------------------

@settings(max_examples=150, deadline=None)
@given(st.integers(-10**8, 10**8), st.integers(1, 10**8))
def test_rational_reconstruction_exact_recovery(num, den):
    x = Fraction(num, den)
    m = 1
    for p in word_primes():
        m *= p
        if m > 2 * (10**8) ** 2 * 4:
            break
    a = x.numerator * pow(x.denominator, -1, m) % m
    assert rational_reconstruction(a, m) == x


def test_rational_reconstruction_needs_enough_modulus():
    a = 123456 * pow(7891, -1, 10007) % 10007
    got = rational_reconstruction(a, 10007)
    # some small fraction has this residue, just not the one we encoded
    assert got != Fraction(123456, 7891)
    assert got is None or got.numerator * pow(got.denominator, -1, 10007) % 10007 == a


def test_word_primes_decreasing_and_prime():
    from sympy import isprime

    ps = []
    for p in word_primes():
        ps.append(p)
        if len(ps) == 20:
            break
    assert ps == sorted(ps, reverse=True)
    assert all(isprime(p) for p in ps)
    assert ps[0] == 2**31 - 1


@st.composite
def systems(draw):
    n = draw(st.integers(1, 5))
    A = [draw(st.lists(st.integers(-20, 20), min_size=n, max_size=n)) for _ in range(n)]
    # strict diagonal dominance keeps A invertible
    for i in range(n):
        A[i][i] = 101 + sum(abs(v) for v in A[i])
    x = draw(st.lists(st.fractions(min_value=-100, max_value=100, max_denominator=30), min_size=n, max_size=n))
    return A, x


@settings(max_examples=100, deadline=None)
@given(systems())
def test_bareiss_and_multimodular_agree(sys_):
    A, x = sys_
    n = len(x)
    den = 1
    for v in x:
        den = math.lcm(den, v.denominator)
    rhs = [sum(Fraction(a) * v for a, v in zip(row, x)) * den for row in A]
    aug = [row + [int(r)] for row, r in zip(A, rhs)]
    sol = solve_bareiss(aug, n)
    assert [s / den for s in sol] == x

    def build(p):
        return [[c % p for c in row] for row in aug]

    def verify(cand):
        return all(sum(Fraction(a) * c for a, c in zip(row, cand)) == row[-1] for row in aug)

    msol, stats = solve_multimodular(build, n, verify)
    assert [s / den for s in msol] == x
    assert stats.primes_used >= 1
