"""q-expansions of the level 4, 2 and 3 modular functions x(q).

    x4 = 16 q prod ((1 + q^2n) / (1 + q^(2n-1)))^8
    x2 = 64 q E / (1 + 64 q E),   E = prod (1 + q^n)^24
    x3 = 27 q E / (1 + 27 q E),   E = prod (1 + q^n + q^2n)^12

Each is ``c * q * unit(q)`` with ``unit(0) = 1``; :func:`modular_unit`
returns that unit, which is what the modular-equation solver consumes (it
keeps full order through the q -> q^p substitution).
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

from .series import PowerSeries, ps_inverse, ps_mul, ps_pow, ps_product_family

LEADING = {4: 16, 2: 64, 3: 27}


@dataclass(frozen=True)
class LevelInfo:
    level: int
    s: int
    hyp_params: tuple[Fraction, Fraction, Fraction]
    parametrized: bool

    @property
    def note(self) -> str:
        return "" if self.parametrized else "no modular-function parametrization available"


_S_OF_LEVEL = {4: 2, 3: 3, 2: 4, 1: 6}


def level_info(level: int) -> LevelInfo:
    """The (level, s) pair with 4 sin^2(pi/s) = level, and (1/2, 1/s, 1 - 1/s)."""
    if level not in _S_OF_LEVEL:
        raise ValueError(f"level must be one of 1, 2, 3, 4 (got {level})")
    s = _S_OF_LEVEL[level]
    return LevelInfo(
        level=level,
        s=s,
        hyp_params=(Fraction(1, 2), Fraction(1, s), 1 - Fraction(1, s)),
        parametrized=level in LEADING,
    )


def _family(exps, order: int) -> PowerSeries:
    """prod_n (1 + sum_e q^(e(n))) for the exponent maps in ``exps``."""

    def factor(n: int) -> PowerSeries:
        cs = [0] * (order + 1)
        cs[0] = 1
        for e in exps:
            k = e(n)
            if k <= order:
                cs[k] += 1
        return PowerSeries(cs, order)

    return ps_product_family(factor, order)


def _compute_unit(level: int, order: int) -> PowerSeries:
    if level == 4:
        num = _family([lambda n: 2 * n], order)
        den = _family([lambda n: 2 * n - 1], order)
        return ps_pow(ps_mul(num, ps_inverse(den)), 8)
    if level == 2:
        e = ps_pow(_family([lambda n: n], order), 24)
    else:
        e = ps_pow(_family([lambda n: n, lambda n: 2 * n], order), 12)
    c = LEADING[level]
    denom = 1 + (e * c).shift(1).truncate(order)
    return ps_mul(e, ps_inverse(denom))


_cache: dict[tuple[int, int], PowerSeries] = {}
_lock = threading.Lock()


def modular_unit(level: int, order: int) -> PowerSeries:
    """``x_level(q) / (c q)`` to the given order (memoized, thread-safe)."""
    if level == 1:
        raise ValueError("level 1 has no modular-function parametrization")
    if level not in LEADING:
        raise ValueError(f"level must be 2, 3 or 4 (got {level})")
    if order < 0:
        raise ValueError("order must be non-negative")
    key = (level, order)
    with _lock:
        hit = _cache.get(key)
        if hit is None:
            # reuse any longer expansion already computed
            longer = [n for (lv, n) in _cache if lv == level and n > order]
            if longer:
                hit = _cache[(level, min(longer))].truncate(order)
    if hit is None:
        hit = _compute_unit(level, order)
    with _lock:
        _cache.setdefault(key, hit)
        return _cache[key]


def modular_x(level: int, order: int) -> PowerSeries:
    """q-expansion of x_level through q^order (zero constant term)."""
    if order < 1:
        raise ValueError("order must be at least 1")
    unit = modular_unit(level, order - 1)
    return (unit * LEADING[level]).shift(1)


def _numeric_product(exps, q, eps):
    """prod_n (1 + sum_e q^(e(n))), stopping once the factors are 1 within eps."""
    import mpmath

    acc = mpmath.mpf(1)
    n = 1
    while True:
        terms = [q ** e(n) for e in exps]
        acc *= 1 + sum(terms)
        if max(abs(t) for t in terms) < eps:
            return acc
        n += 1


def evaluate_x(level: int, q):
    """Numeric x_level(q) for real or complex ``|q| < 1`` at the current mpmath precision.

    Uses the infinite products directly: the q-expansions of x_2 and x_3
    have poles near q = -1/64 and q = -1/27 and do not converge beyond them.
    """
    import mpmath

    if level not in LEADING:
        raise ValueError(f"level must be 2, 3 or 4 (got {level})")
    if not abs(q) < 1:
        raise ValueError("need |q| < 1")
    if q == 0:
        return mpmath.mpf(0)
    eps = mpmath.mpf(2) ** (-mpmath.mp.prec - 16)
    if level == 4:
        num = _numeric_product([lambda n: 2 * n], q, eps)
        den = _numeric_product([lambda n: 2 * n - 1], q, eps)
        return 16 * q * (num / den) ** 8
    if level == 2:
        e = _numeric_product([lambda n: n], q, eps) ** 24
    else:
        e = _numeric_product([lambda n: n, lambda n: 2 * n], q, eps) ** 12
    t = LEADING[level] * q * e
    return t / (1 + t)
