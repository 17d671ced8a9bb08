"""Univariate integer polynomials and real-root isolation.

Roots are isolated with a Sturm sequence over exact rationals and refined by
exact dyadic bisection, so every reported digit is rigorous.  Rational roots
are then recognized exactly: a rational root of an integer polynomial has a
denominator dividing the leading coefficient, so once the isolating interval
is narrower than 1/(2 lc^2) the best approximation with denominator <= |lc|
is the only candidate, and it is confirmed by exact evaluation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import mpmath

from .numerics import HPReal


@dataclass(frozen=True)
class UnivariatePoly:
    """Integer coefficients, index = exponent, leading coefficient nonzero."""

    coeffs: tuple[int, ...]

    def __init__(self, coeffs: Sequence):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        if not cs:
            raise ValueError("zero polynomial")
        den = math.lcm(*(c.denominator for c in cs))
        object.__setattr__(self, "coeffs", tuple(int(c * den) for c in cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "UnivariatePoly":
        if self.degree == 0:
            raise ValueError("derivative of a constant is the zero polynomial")
        return UnivariatePoly([k * c for k, c in enumerate(self.coeffs)][1:])

    def content(self) -> int:
        return math.gcd(*self.coeffs)

    def primitive(self) -> "UnivariatePoly":
        g = self.content()
        sign = -1 if self.coeffs[-1] < 0 else 1
        return UnivariatePoly([sign * c // g for c in self.coeffs])

    def __str__(self):
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c:
                terms.append(f"{c}" + ("" if k == 0 else "*u" if k == 1 else f"*u^{k}"))
        return " + ".join(terms).replace("+ -", "- ")


# -- exact polynomial arithmetic over Q (lists of Fractions, low to high) --

def _trim(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def _divmod(a: list, b: list) -> tuple[list, list]:
    a = [Fraction(x) for x in a]
    b = _trim([Fraction(x) for x in b])
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    lead = b[-1]
    while len(_trim(a)) >= len(b):
        shift = len(a) - len(b)
        f = a[-1] / lead
        q[shift] = f
        for i, c in enumerate(b):
            a[i + shift] -= f * c
        a.pop()
    return q, _trim(a)


def _gcd(a: list, b: list) -> list:
    a = _trim([Fraction(x) for x in a])
    b = _trim([Fraction(x) for x in b])
    while b:
        _, r = _divmod(a, b)
        a, b = b, r
    return [c / a[-1] for c in a] if a else a


def squarefree_part(poly: UnivariatePoly) -> UnivariatePoly:
    """poly / gcd(poly, poly'), made primitive."""
    if poly.degree < 1:
        return poly
    g = _gcd(list(poly.coeffs), list(poly.derivative().coeffs))
    q, r = _divmod(list(poly.coeffs), g)
    assert not r
    return UnivariatePoly(q).primitive()


def repeated_part(poly: UnivariatePoly) -> Optional[UnivariatePoly]:
    """gcd(poly, poly'), or None when poly is square-free."""
    if poly.degree < 1:
        return None
    g = _gcd(list(poly.coeffs), list(poly.derivative().coeffs))
    return None if len(g) <= 1 else UnivariatePoly(g)


def sturm_sequence(poly: UnivariatePoly) -> list[list[Fraction]]:
    seq = [[Fraction(c) for c in poly.coeffs], [Fraction(c) for c in poly.derivative().coeffs]]
    while True:
        _, r = _divmod(seq[-2], seq[-1])
        if not r:
            break
        seq.append([-c for c in r])
    return seq


def _eval(a: list, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def _sign_changes(seq, x: Fraction) -> int:
    signs = [s for s in ((_eval(p, x) > 0) - (_eval(p, x) < 0) for p in seq) if s]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def _isolate(seq, lo: Fraction, hi: Fraction) -> list[tuple[Fraction, Fraction]]:
    """Intervals (a, b] each holding exactly one root of the square-free seq[0]."""
    out = []
    stack = [(lo, hi, _sign_changes(seq, lo) - _sign_changes(seq, hi))]
    while stack:
        a, b, n = stack.pop()
        if n == 0:
            continue
        if n == 1:
            out.append((a, b))
            continue
        m = (a + b) / 2
        vm = _sign_changes(seq, m)
        stack.append((m, b, vm - _sign_changes(seq, b)))
        stack.append((a, m, _sign_changes(seq, a) - vm))
    return sorted(out)


def _bisect(f: UnivariatePoly, a: Fraction, b: Fraction, width: Fraction) -> tuple[Fraction, Fraction]:
    """Shrink an isolating interval (a, b] to width <= ``width``."""
    fb = f(b)
    if fb == 0:
        return b, b
    sb = fb > 0
    while b - a > width:
        m = (a + b) / 2
        fm = f(m)
        if fm == 0:
            return m, m
        if (fm > 0) == sb:
            b = m
        else:
            a = m
    return a, b


@dataclass(frozen=True)
class RootRecord:
    value: HPReal
    exact: Optional[Fraction]
    multiplicity_hint: str  # "simple" | "multiple"


def _best_rational(a: Fraction, b: Fraction, max_den: int) -> Optional[Fraction]:
    mid = (a + b) / 2
    cand = mid.limit_denominator(max_den)
    return cand if a <= cand <= b else None


def real_roots(poly: UnivariatePoly, lo, hi, precision_bits: int) -> list[RootRecord]:
    """All real roots in the open interval (lo, hi), ascending."""
    lo, hi = Fraction(lo), Fraction(hi)
    if not lo < hi:
        raise ValueError("need lo < hi")
    if poly.degree < 1:
        return []
    sqf = squarefree_part(poly)
    rep = repeated_part(poly)
    if rep is not None:
        # square-free, roots = the multiple roots of poly
        g = _gcd(list(sqf.coeffs), list(rep.coeffs))
        rep = UnivariatePoly(g) if len(g) > 1 else None
    seq = sturm_sequence(sqf)
    lc = abs(sqf.coeffs[-1])
    need = Fraction(1, 2 * lc * lc)
    out = []
    for a, b in _isolate(seq, lo, hi):
        if b == hi and sqf(hi) == 0:
            # the root sits on the excluded endpoint
            continue
        a, b = _bisect(sqf, a, b, min(need, Fraction(1, 1 << (precision_bits + 4))))
        exact = None
        if a == b:
            exact = a
        else:
            cand = _best_rational(a, b, lc)
            if cand is not None and sqf(cand) == 0:
                exact = cand
        if exact is not None:
            value = HPReal.from_rational(exact, precision_bits)
        else:
            value = HPReal.from_rational((a + b) / 2, precision_bits)
        multiple = rep is not None and (
            rep(exact) == 0 if exact is not None else _changes_sign(rep, a, b)
        )
        out.append(RootRecord(value, exact, "multiple" if multiple else "simple"))
    return out


def _changes_sign(f: UnivariatePoly, a: Fraction, b: Fraction) -> bool:
    fa, fb = f(a), f(b)
    return fa == 0 or fb == 0 or (fa > 0) != (fb > 0)


def complex_roots(poly: UnivariatePoly, precision_bits: int) -> list:
    """All complex roots of the square-free part, as mpmath numbers at the given precision."""
    sqf = squarefree_part(poly)
    if sqf.degree < 1:
        return []
    with mpmath.workprec(precision_bits + 32):
        coeffs = [mpmath.mpf(c) for c in reversed(sqf.coeffs)]
        roots = mpmath.polyroots(coeffs, maxsteps=400, extraprec=2 * precision_bits + 64)
    return list(roots)
