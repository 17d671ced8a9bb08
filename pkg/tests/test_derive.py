import json
from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from ramseries.derive import (
    ChainError,
    DerivationError,
    RootError,
    SeriesCertificate,
    alpha_beta_chain,
    derive,
    diagonal_poly,
    digits_to_bits,
    implicit_derivatives,
    multiplier,
    singular_candidates,
)
from ramseries.modeq import BivariatePoly
from ramseries.numerics import QuadraticSurd

U, V = sympy.symbols("u v")

S_OF = {4: 2, 2: 4, 3: 3}

# Ramanujan's classical series, written as sum t_n (a + b n) z^n = 1/pi
CLASSICAL = {
    (4, 3): ("1/4", (Fraction(1, 4), 0, 0), (Fraction(3, 2), 0, 0)),
    (4, 7): ("1/64", (Fraction(5, 16), 0, 0), (Fraction(21, 8), 0, 0)),
    (2, 3): ("1/9", (0, Fraction(1, 6), 3), (0, Fraction(4, 3), 3)),
    (2, 5): ("1/81", (0, Fraction(2, 9), 2), (0, Fraction(20, 9), 2)),
    (3, 5): ("4/125", (0, Fraction(8, 45), 3), (0, Fraction(22, 15), 3)),
}


def surd(t):
    a, b, D = t
    return QuadraticSurd.from_parts(a, b, D)


def mp_series(s, z, a, b, prec=200):
    """sum t_n (a + b n) z^n via mpmath's generalized hypergeometric function."""
    with mpmath.workprec(prec):
        p = [mpmath.mpf(1) / 2, mpmath.mpf(1) / s, 1 - mpmath.mpf(1) / s]
        f = mpmath.hyper(p, [1, 1], z)
        df = p[0] * p[1] * p[2] * mpmath.hyper([x + 1 for x in p], [2, 2], z)
        return a * f + b * z * df


def sympy_poly(P):
    return sum(sympy.Rational(c) * U ** i * V ** j for (i, j), c in P.coeffs.items())


def test_digits_to_bits():
    assert digits_to_bits(100) == 365
    assert digits_to_bits(1000) == 3354


# -- implicit differentiation ---------------------------------------------------

@st.composite
def curves(draw):
    """A random integer polynomial through a random rational point."""
    terms = {}
    for i in range(4):
        for j in range(4 - i):
            if (i, j) != (0, 0) and draw(st.booleans()):
                terms[(i, j)] = draw(st.integers(-9, 9))
    terms.setdefault((0, 1), draw(st.integers(1, 9)))
    u0 = draw(st.fractions(min_value=-3, max_value=3, max_denominator=7))
    v0 = draw(st.fractions(min_value=-3, max_value=3, max_denominator=7))
    c0 = -sum(c * u0 ** i * v0 ** j for (i, j), c in terms.items())
    terms[(0, 0)] = c0
    return BivariatePoly({k: Fraction(v) for k, v in terms.items() if v}), u0, v0


@settings(max_examples=100, deadline=None)
@given(curves())
def test_implicit_derivatives_match_sympy(data):
    P, u0, v0 = data
    expr = sympy_poly(P)
    if sympy.diff(expr, V).subs({U: u0, V: v0}) == 0:
        with pytest.raises(ChainError):
            implicit_derivatives(P, u0, v0)
        return
    d1, d2 = implicit_derivatives(P, u0, v0)
    want1 = sympy.idiff(expr, V, U).subs({U: u0, V: v0})
    want2 = sympy.idiff(expr, V, U, 2).subs({U: u0, V: v0})
    assert d1 == Fraction(int(sympy.fraction(want1)[0]), int(sympy.fraction(want1)[1]))
    assert d2 == Fraction(int(sympy.fraction(want2)[0]), int(sympy.fraction(want2)[1]))


# -- alpha, beta chain ------------------------------------------------------------

@pytest.mark.parametrize("h", [2, 4, 8])
@pytest.mark.parametrize("u0", [Fraction(1, 3), Fraction(1, 5), Fraction(2, 7)])
def test_chain_matches_numeric_differentiation(h, u0):
    # along v(u) = 1/4 - (u - u0)/2 + 3 (u - u0)^2 / 2, alpha the smaller root of t^2 - S t + u^h
    v0, dv0, ddv0 = Fraction(1, 4), Fraction(-1, 2), Fraction(3)
    chain = alpha_beta_chain(u0, v0, dv0, ddv0, h)
    with mpmath.workprec(200):
        def S(u):
            t = u - mpmath.mpf(u0.numerator) / u0.denominator
            v = mpmath.mpf(1) / 4 - t / 2 + 3 * t * t / 2
            return u ** h - v ** h + 1

        def alpha(u):
            return (S(u) - mpmath.sqrt(S(u) ** 2 - 4 * u ** h)) / 2

        def beta(u):
            return (S(u) + mpmath.sqrt(S(u) ** 2 - 4 * u ** h)) / 2

        x = mpmath.mpf(u0.numerator) / u0.denominator
        tol = mpmath.mpf(10) ** -40
        for got, f, k in [(chain.alpha0, alpha, 0), (chain.beta0, beta, 0), (chain.dalpha0, alpha, 1),
                          (chain.dbeta0, beta, 1), (chain.ddalpha0, alpha, 2), (chain.ddbeta0, beta, 2)]:
            val = QuadraticSurd._coerce(got).evaluate(200).value
            assert abs(val - mpmath.diff(f, x, k)) < tol


def test_chain_rejects_complex_pair():
    with pytest.raises(ChainError):
        alpha_beta_chain(Fraction(9, 10), Fraction(1, 10), -1, 0, 2)


# -- candidates and errors --------------------------------------------------------

def test_diagonal_poly(me_small):
    assert diagonal_poly(me_small[(4, 3)]).coeffs == (-1, 2)
    assert diagonal_poly(me_small[(4, 3)], -1).coeffs == (-1,)
    with pytest.raises(RootError):
        diagonal_poly(BivariatePoly({(1, 0): 1, (0, 1): -1}))


def test_candidate_order(me_2_29):
    cands = singular_candidates(me_2_29, "pos", 200)
    us = [c.u0.real for c in cands if c.zeta == 1]
    assert us == sorted(us)
    assert cands[0].exact == Fraction(1, 19602)
    alts = singular_candidates(me_2_29, "alt", 200)
    assert alts and all(c.U < 0 for c in alts)
    assert [abs(c.U) for c in alts] == sorted(abs(c.U) for c in alts)


def test_no_alternating_candidates(me_small):
    with pytest.raises(RootError):
        derive(me_small[(4, 3)], "alt")


def test_divergent_alternating_point(me_small):
    with pytest.raises(ChainError) as info:
        derive(me_small[(3, 5)], "alt")
    assert info.value.step == "certificate"


def test_root_value_not_a_root(me_2_29):
    with pytest.raises(RootError):
        derive(me_2_29, "pos", root="1/2")
    with pytest.raises(RootError):
        derive(me_2_29, "pos", root="abc")
    with pytest.raises(RootError):
        derive(me_2_29, "pos", root=99)


def test_errors_share_a_base():
    assert issubclass(RootError, DerivationError) and issubclass(ChainError, DerivationError)


# -- certificates against independent oracles ------------------------------------

@pytest.mark.parametrize("key", sorted(CLASSICAL))
def test_classical_series(me_small, key):
    cert = derive(me_small[key], "pos").certificate
    z, a, b = CLASSICAL[key]
    assert cert.z.exact == Fraction(z)
    assert cert.a.exact == surd(a)
    assert cert.b.exact == surd(b)
    val = mp_series(cert.s, Fraction(z), *(surd(t).evaluate(200).value for t in (a, b)))
    with mpmath.workprec(200):
        assert abs(val - 1 / mpmath.pi) < mpmath.mpf(10) ** -50


@pytest.mark.parametrize("key", sorted(CLASSICAL))
def test_multiplier_is_hypergeometric_ratio(me_small, key):
    d = derive(me_small[key], "pos")
    s = S_OF[key[0]]
    with mpmath.workprec(200):
        alpha = d.certificate.alpha0.at(200).value
        a = mpmath.mpf(1) / s
        ratio = mpmath.hyp2f1(a, 1 - a, 1, alpha) / mpmath.hyp2f1(a, 1 - a, 1, 1 - alpha)
        assert abs(ratio - d.certificate.m0.at(200).value) < mpmath.mpf(10) ** -50
        assert d.nome_residual < mpmath.mpf(2) ** -96


def test_level3_irrational_point(me_small):
    # (3, 7) has an irrational u0; the chain runs numerically and recognition recovers surds
    d = derive(me_small[(3, 7)], "pos", precision_bits=300)
    assert not d.point.exact_chain
    cert = d.certificate
    assert all(getattr(cert, k).exact is not None for k in "zab")
    with mpmath.workprec(300):
        val = mp_series(3, cert.z.at(300).value, cert.a.at(300).value, cert.b.at(300).value, 300)
        assert abs(val - 1 / mpmath.pi) < mpmath.mpf(10) ** -80


def test_golden_chain(pos_2_29):
    pt = pos_2_29.point
    assert pt.u0 == Fraction(1, 19602)
    assert pt.dv0 == -1
    assert pt.ddv0 == Fraction(352119040, 9801)
    assert pt.dalpha0 == pt.dbeta0 == Fraction(1, 9801)
    assert pt.ddalpha0 == QuadraticSurd.from_parts(Fraction(-176059520, 96059601), Fraction(67432, 94743), 29)
    assert pt.m0 == QuadraticSurd.from_parts(0, Fraction(1, 29), 29)
    assert pt.dm0 == Fraction(-8824, 29)


def test_multiplier_identity(pos_2_29):
    pt = pos_2_29.point
    from ramseries.derive import ChainValues

    chain = ChainValues(pt.alpha0, pt.beta0, pt.dalpha0, pt.dbeta0, pt.ddalpha0, pt.ddbeta0)
    m0, dm0 = multiplier(chain, 29)
    assert 29 * m0 * m0 == pt.dalpha0 / pt.dbeta0
    assert dm0 == pt.dm0


def test_alternating_2_29(alt_2_29):
    cert = alt_2_29.certificate
    assert cert.sign == "alt"
    assert cert.z.exact == QuadraticSurd(-542267, 71825, 11063808, 57)
    assert str(cert.a.exact) == "(7331 - 513*sqrt(57))/18816*sqrt(3)"
    assert str(cert.b.exact) == "(20995 - 65*sqrt(57))/4704*sqrt(3)"
    with mpmath.workprec(400):
        val = mp_series(4, cert.z.at(400).value, cert.a.at(400).value, cert.b.at(400).value, 400)
        assert abs(val - 1 / mpmath.pi) < mpmath.mpf(10) ** -100


# -- certificate serialization ---------------------------------------------------

def test_certificate_round_trip(pos_2_29, alt_2_29):
    for d in (pos_2_29, alt_2_29):
        cert = d.certificate
        again = SeriesCertificate.loads(cert.dumps())
        assert again.dumps() == cert.dumps()
        for k in "zab":
            assert getattr(again, k).exact == getattr(cert, k).exact
            assert getattr(again, k).numeric.close_to(getattr(cert, k).numeric, 2.0 ** (-cert.precision_bits + 4))


@pytest.mark.parametrize("field, value", [("sign", "neg"), ("s", 3), ("precision_bits", 32)])
def test_certificate_rejects_bad_fields(pos_2_29, field, value):
    data = json.loads(pos_2_29.certificate.dumps())
    data[field] = value
    with pytest.raises(ValueError):
        SeriesCertificate.from_json(data)


def test_certificate_identifier(pos_2_29):
    assert pos_2_29.certificate.identifier == "level2-p29-pos"
    assert pos_2_29.certificate.source["root"]
