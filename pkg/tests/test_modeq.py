import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ramseries import kernels
from ramseries.modeq import (
    BivariatePoly,
    ModularEquation,
    ShapeError,
    check_equation,
    equation_shape,
    evaluate_on_series,
    is_symmetric,
    russell_series,
    solve_modular_equation,
)
from ramseries.modfunc import modular_x
from ramseries.series import PowerSeries, ps_compose_qpower, ps_pow

LINEAR = BivariatePoly({(1, 0): 1, (0, 1): 1, (0, 0): -1})


@pytest.mark.parametrize(
    "level, p, h, dpol",
    [(4, 3, 4, 1), (4, 7, 8, 1), (4, 5, 2, 3), (4, 23, 8, 3), (2, 3, 4, 2), (2, 29, 2, 15),
     (2, 7, 4, 4), (3, 5, 6, 2), (3, 7, 2, 8), (3, 11, 6, 4)],
)
def test_equation_shape_table(level, p, h, dpol):
    shape = equation_shape(level, p)
    assert (shape.h, shape.dpol, shape.sb) == (h, dpol, dpol * (dpol + 1))
    assert shape.conjectural == (level == 2)


@pytest.mark.parametrize("level, p", [(4, 2), (3, 3), (2, 2), (5, 3), (4, 9), (2, 1)])
def test_equation_shape_rejects(level, p):
    with pytest.raises(ShapeError):
        equation_shape(level, p)


@pytest.mark.parametrize("level, p", [(4, 3), (2, 5), (3, 5), (2, 29)])
def test_russell_series_identities(level, p):
    shape = equation_shape(level, p)
    n = 80
    u, v = russell_series(level, p, shape.h, n)
    beta = modular_x(level, n)
    alpha = ps_compose_qpower(beta, p)
    assert ps_pow(u, shape.h) == (alpha * beta).truncate(n)
    assert ps_pow(v, shape.h) == ((1 - alpha) * (1 - beta)).truncate(n)


def test_classical_level4_from_raw_expansion():
    # u + v - 1 = O(q^100) straight from x4 and fourth/eighth roots
    for p, h in [(3, 4), (7, 8)]:
        u, v = russell_series(4, p, h, 100)
        total = u + v - 1
        assert not any(total.coeffs)


@pytest.mark.parametrize("key", [(4, 3), (4, 7)])
def test_classical_solutions(me_small, key):
    me = me_small[key]
    assert me.P == LINEAR
    assert me.verified


@pytest.mark.parametrize("key", [(4, 5), (2, 3), (2, 5), (3, 5), (3, 7)])
def test_methods_and_backends_agree(me_small, key):
    me = me_small[key]
    assert solve_modular_equation(*key, method="bareiss").P == me.P
    for backend in kernels.available_backends().values():
        assert solve_modular_equation(*key, backend=backend).P == me.P


@pytest.mark.parametrize("key", [(4, 3), (4, 5), (4, 7), (2, 3), (2, 5), (3, 5), (3, 7)])
def test_identity_depth_and_perturbation(me_small, key):
    me = me_small[key]
    order, updated = check_equation(me, 40)
    assert order == me.shape.sb + 40
    assert updated.verified_order >= order
    for (i, j) in list(me.P.coeffs)[:3]:
        bumped = dict(me.P.coeffs)
        bumped[(i, j)] = bumped[(i, j)] + 1
        bad = ModularEquation(me.shape, BivariatePoly(bumped), me.verified_order)
        first, worse = check_equation(bad, 40)
        assert first <= (i + j) * me.shape.u_valuation + 1
        assert worse.verified_order < first


def test_check_equation_rejects_nonpositive_order(me_small):
    with pytest.raises(ValueError):
        check_equation(me_small[(4, 3)], 0)


def test_level2_symmetric(me_small):
    for key in [(2, 3), (2, 5)]:
        assert is_symmetric(me_small[key].P)
    assert not is_symmetric(BivariatePoly({(2, 0): 1, (0, 0): -1}))


def test_level2_p29_shape(me_2_29):
    P = me_2_29.P
    assert P.degree == 15
    assert is_symmetric(P)
    assert P.is_integral()
    assert len(P.coeffs) == 136
    assert me_2_29.verified and me_2_29.conjectural_shape


# -- evaluate_on_series -------------------------------------------------------

@st.composite
def bipoly(draw):
    deg = draw(st.integers(1, 4))
    coeffs = {}
    for i in range(deg + 1):
        for j in range(deg + 1 - i):
            if draw(st.booleans()):
                coeffs[(i, j)] = draw(st.fractions(min_value=-50, max_value=50, max_denominator=6))
    coeffs[(0, 0)] = Fraction(-1)
    return BivariatePoly(coeffs)


fracs = st.fractions(min_value=-20, max_value=20, max_denominator=9)


@settings(max_examples=100, deadline=None)
@given(bipoly(), st.lists(fracs, min_size=12, max_size=12), st.lists(fracs, min_size=12, max_size=12))
def test_evaluate_on_series_is_positive_multiple(P, uc, vc):
    u, v = PowerSeries(uc, 11), PowerSeries(vc, 11)
    direct = PowerSeries([], 11)
    for (i, j), c in P.coeffs.items():
        direct = direct + ps_pow(u, i) * ps_pow(v, j) * c
    got = evaluate_on_series(P, u, v)
    k = next((k for k, x in enumerate(direct.coeffs) if x), None)
    if k is None:
        assert not any(got)
        return
    scale = Fraction(got[k]) / direct.coeffs[k]
    assert scale > 0
    assert [Fraction(x) for x in got] == [c * scale for c in direct.coeffs]


# -- serialization ------------------------------------------------------------

def test_json_round_trip(me_small):
    for me in me_small.values():
        again = ModularEquation.from_json(json.loads(me.dumps()))
        assert again == me


def test_json_rejects_inconsistent(me_small):
    data = me_small[(2, 5)].to_json()
    bad_h = dict(data, h=data["h"] + 1)
    with pytest.raises(ValueError):
        ModularEquation.from_json(bad_h)
    bad_deg = dict(data, degree=data["degree"] + 1)
    with pytest.raises(ValueError):
        ModularEquation.from_json(bad_deg)


def test_unknown_method():
    with pytest.raises(ValueError):
        solve_modular_equation(4, 3, method="gauss")


@pytest.mark.slow
@pytest.mark.parametrize("p", [37, 41, 43])
def test_level2_symmetry_sweep(p):
    me = solve_modular_equation(2, p)
    assert is_symmetric(me.P)
    assert check_equation(me, 40)[0] == me.shape.sb + 40
