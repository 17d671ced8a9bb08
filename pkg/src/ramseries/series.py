"""Truncated power series in q with exact rational coefficients.

A :class:`PowerSeries` of order N knows the coefficients of q^0..q^N; all
higher coefficients are unknown.  Every binary operation truncates to the
smaller order of its operands.

Multiplication packs the integer numerators into one big integer per operand
(Kronecker substitution) so the convolution runs inside CPython's bigint
multiply rather than a Python double loop.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

__all__ = [
    "PowerSeries",
    "ps_mul",
    "ps_inverse",
    "ps_nth_root",
    "ps_compose_qpower",
    "ps_product_family",
    "ps_pow",
    "kronecker_mul",
]


# ---------------------------------------------------------------------------
# integer convolution kernel
# ---------------------------------------------------------------------------

def _pack(values: Sequence[int], width_bytes: int) -> int:
    """sum(values[i] * 2**(8*width_bytes*i)) for signed values."""
    raw = b"".join(v.to_bytes(width_bytes, "little", signed=True) for v in values)
    packed = int.from_bytes(raw, "little")
    # two's-complement slots borrowed 2**(slot width) from the next slot up
    neg = [1 if v < 0 else 0 for v in values]
    if any(neg):
        borrow = b"".join(b.to_bytes(width_bytes, "little") for b in [0] + neg[:-1])
        packed -= int.from_bytes(borrow, "little") + (neg[-1] << (8 * width_bytes * len(values)))
    return packed


def kronecker_mul(a: Sequence[int], b: Sequence[int], n: int) -> list[int]:
    """Coefficients 0..n of the product of two integer polynomials."""
    a = list(a[: n + 1])
    b = list(b[: n + 1])
    while a and a[-1] == 0:
        a.pop()
    while b and b[-1] == 0:
        b.pop()
    if not a or not b:
        return [0] * (n + 1)
    bits_a = max(abs(x) for x in a).bit_length()
    bits_b = max(abs(x) for x in b).bit_length()
    terms = min(len(a), len(b))
    width_bits = bits_a + bits_b + terms.bit_length() + 2
    wb = (width_bits + 7) // 8
    prod = _pack(a, wb) * _pack(b, wb)
    nout = min(n + 1, len(a) + len(b) - 1)
    half = 1 << (8 * wb - 1)
    offset = int.from_bytes((half.to_bytes(wb, "little")) * nout, "little")
    raw = ((prod + offset) & ((1 << (8 * wb * nout)) - 1)).to_bytes(wb * nout, "little")
    out = [
        int.from_bytes(raw[k * wb:(k + 1) * wb], "little") - half for k in range(nout)
    ]
    return out + [0] * (n + 1 - nout)


def _integerize(coeffs: Sequence[Fraction]) -> tuple[list[int], int]:
    den = 1
    for c in coeffs:
        d = c.denominator
        if d != 1 and den % d:
            den = den * d // math.gcd(den, d)
    if den == 1:
        return [c.numerator for c in coeffs], 1
    return [c.numerator * (den // c.denominator) for c in coeffs], den


# ---------------------------------------------------------------------------
# PowerSeries
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PowerSeries:
    """Coefficients ``coeffs[k]`` of q^k for k = 0..order."""

    coeffs: tuple[Fraction, ...]
    order: int

    def __init__(self, coeffs: Iterable, order: int | None = None):
        cs = [c if isinstance(c, Fraction) else Fraction(c) for c in coeffs]
        if order is None:
            order = len(cs) - 1
        if order < 0:
            raise ValueError("series order must be non-negative")
        cs = cs[: order + 1] + [Fraction(0)] * (order + 1 - len(cs))
        object.__setattr__(self, "coeffs", tuple(cs))
        object.__setattr__(self, "order", order)

    # -- constructors -----------------------------------------------------
    @classmethod
    def one(cls, order: int) -> "PowerSeries":
        return cls([1], order)

    @classmethod
    def monomial(cls, c, k: int, order: int) -> "PowerSeries":
        return cls([0] * k + [c], order) if k <= order else cls([], order)

    @classmethod
    def _from_ints(cls, ints: Sequence[int], den: int, order: int) -> "PowerSeries":
        if den == 1:
            return cls._raw([Fraction(x) for x in ints], order)
        return cls._raw([Fraction(x, den) for x in ints], order)

    @classmethod
    def _raw(cls, coeffs: list[Fraction], order: int) -> "PowerSeries":
        obj = object.__new__(cls)
        object.__setattr__(obj, "coeffs", tuple(coeffs))
        object.__setattr__(obj, "order", order)
        return obj

    # -- basic views ------------------------------------------------------
    def __getitem__(self, k: int) -> Fraction:
        if k > self.order:
            raise IndexError(f"coefficient of q^{k} unknown beyond order {self.order}")
        return self.coeffs[k]

    def valuation(self) -> int | None:
        """Lowest exponent with a nonzero coefficient, None if all known ones vanish."""
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return None

    def truncate(self, order: int) -> "PowerSeries":
        if order > self.order:
            raise ValueError(f"cannot extend order {self.order} to {order}")
        return PowerSeries._raw(list(self.coeffs[: order + 1]), order)

    def shift(self, k: int) -> "PowerSeries":
        """Multiply by q^k (k >= 0); the known order grows by k."""
        return PowerSeries._raw([Fraction(0)] * k + list(self.coeffs), self.order + k)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def evaluate(self, q):
        """Horner evaluation of the truncated polynomial at a number ``q``."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * q + (c if isinstance(q, Fraction) else _to_number(c, q))
        return acc

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, PowerSeries):
            other = PowerSeries([other], self.order)
        n = min(self.order, other.order)
        return PowerSeries._raw([a + b for a, b in zip(self.coeffs[: n + 1], other.coeffs[: n + 1])], n)

    __radd__ = __add__

    def __neg__(self):
        return PowerSeries._raw([-c for c in self.coeffs], self.order)

    def __sub__(self, other):
        if not isinstance(other, PowerSeries):
            other = PowerSeries([other], self.order)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PowerSeries):
            return ps_mul(self, other)
        c = Fraction(other)
        return PowerSeries._raw([c * x for x in self.coeffs], self.order)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        return ps_pow(self, k)

    def __eq__(self, other):
        if not isinstance(other, PowerSeries):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.order, self.coeffs))

    def __repr__(self):
        terms = []
        for k, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" if k == 0 else f"{c}*q^{k}")
            if len(terms) == 6:
                terms.append("...")
                break
        body = " + ".join(terms) if terms else "0"
        return f"PowerSeries({body} + O(q^{self.order + 1}))"


def _to_number(c: Fraction, like):
    try:
        return type(like)(c.numerator) / c.denominator
    except TypeError:
        return c.numerator / c.denominator


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def ps_mul(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    """Cauchy product truncated to ``min(order(a), order(b))``."""
    n = min(a.order, b.order)
    ia, da = _integerize(a.coeffs[: n + 1])
    ib, db = _integerize(b.coeffs[: n + 1])
    return PowerSeries._from_ints(kronecker_mul(ia, ib, n), da * db, n)


def ps_pow(a: PowerSeries, k: int) -> PowerSeries:
    if k < 0:
        return ps_pow(ps_inverse(a), -k)
    out = PowerSeries.one(a.order)
    base = a
    while k:
        if k & 1:
            out = ps_mul(out, base)
        k >>= 1
        if k:
            base = ps_mul(base, base)
    return out


def _sparse_mul_ints(acc: list[int], sparse: dict[int, int], n: int) -> list[int]:
    out = [0] * (n + 1)
    for e, c in sparse.items():
        if e > n:
            continue
        if c == 1:
            for k in range(n + 1 - e):
                out[k + e] += acc[k]
        else:
            for k in range(n + 1 - e):
                out[k + e] += c * acc[k]
    return out


def ps_inverse(a: PowerSeries) -> PowerSeries:
    """Multiplicative inverse; the constant term must be nonzero.

    Newton iteration b <- b (2 - a b), doubling the correct order each step.
    """
    c0 = a.coeffs[0]
    if c0 == 0:
        raise ZeroDivisionError("series with zero constant term has no inverse")
    n = a.order
    b = PowerSeries([1 / c0], 0)
    k = 0
    while k < n:
        k = min(2 * k + 1, n)
        ak = a.truncate(k)
        bk = PowerSeries(b.coeffs, k)
        b = ps_mul(bk, 2 - ps_mul(ak, bk))
    return b


def _exact_root(x: Fraction, h: int) -> Fraction | None:
    if x < 0 and h % 2 == 0:
        return None
    sign = -1 if x < 0 else 1
    num, den = abs(x.numerator), x.denominator
    rn, rd = _iroot(num, h), _iroot(den, h)
    if rn ** h == num and rd ** h == den:
        return sign * Fraction(rn, rd)
    return None


def _iroot(n: int, h: int) -> int:
    if n < 2:
        return n
    x = int(round(n ** (1.0 / h))) if n.bit_length() < 1000 else 1 << (n.bit_length() // h + 1)
    # Newton refine
    while True:
        y = ((h - 1) * x + n // x ** (h - 1)) // h
        if y >= x:
            break
        x = y
    while x ** h > n:
        x -= 1
    while (x + 1) ** h <= n:
        x += 1
    return x


def _unit_root(a: PowerSeries, h: int) -> PowerSeries:
    """h-th root of a series with constant term 1, by Newton iteration.

    y <- ((h-1) y + a y^(1-h)) / h, doubling the correct order each step.
    """
    n = a.order
    y = PowerSeries([1], 0)
    k = 0
    while k < n:
        k = min(2 * k + 1, n)
        ak = a.truncate(k)
        yk = PowerSeries(y.coeffs, k)
        corr = ps_mul(ak, ps_inverse(ps_pow(yk, h - 1)))
        y = (yk * (h - 1) + corr) * Fraction(1, h)
    return y


def ps_nth_root(a: PowerSeries, h: int) -> PowerSeries:
    """The h-th root of ``a``.

    ``a`` is either a unit series with constant term 1 (root has constant
    term 1), or ``c * q^(m*h) * (1 + ...)`` with ``c`` an exact rational h-th
    power, in which case the root is ``c^(1/h) * q^m * (unit root)``.  In
    the shifted case the known order drops to ``order(a) - m*(h-1)``.
    """
    if h <= 0:
        raise ValueError("root index must be positive")
    if h == 1:
        return a
    val = a.valuation()
    if val is None:
        raise ValueError("cannot take a root of a series with no known nonzero term")
    if val % h:
        raise ValueError(f"valuation {val} not divisible by root index {h}")
    lead = a.coeffs[val]
    c = _exact_root(lead, h)
    if c is None:
        raise ValueError(f"leading coefficient {lead} is not an exact rational {h}-th power")
    m = val // h
    unit_order = a.order - val
    unit = PowerSeries._raw([x / lead for x in a.coeffs[val:]], unit_order)
    root = _unit_root(unit, h) * c
    return root.shift(m) if m else root


def ps_compose_qpower(a: PowerSeries, p: int) -> PowerSeries:
    """Substitute q -> q^p.

    The result keeps ``order(a)`` as its order, even though the substituted
    series is known further; callers that need more order pass a longer input.
    """
    if p <= 0:
        raise ValueError("exponent must be positive")
    n = a.order
    out = [Fraction(0)] * (n + 1)
    for k in range(n // p + 1):
        out[k * p] = a.coeffs[k]
    return PowerSeries._raw(out, n)


def ps_product_family(factor: Callable[[int], PowerSeries], order: int) -> PowerSeries:
    """prod_{n=1..order} factor(n), truncated to ``order``.

    Each factor must be 1 + O(q^n); factors with n > order cannot touch the
    known coefficients and are not evaluated.  Sparse factors (at most a
    handful of nonzero terms) are multiplied in linear time.
    """
    acc, den = [1] + [0] * order, 1
    for n in range(1, order + 1):
        f = factor(n)
        if f.order < order:
            raise ValueError(f"factor({n}) has order {f.order} < {order}")
        f = f.truncate(order)
        if f.coeffs[0] != 1 or any(f.coeffs[1:n]):
            raise ValueError(f"factor({n}) is not of the form 1 + O(q^{n})")
        ints, fden = _integerize(f.coeffs)
        nz = {k: c for k, c in enumerate(ints) if c}
        if len(nz) <= 8:
            acc = _sparse_mul_ints(acc, nz, order)
        else:
            acc = kronecker_mul(acc, ints, order)
        den *= fden
    return PowerSeries._from_ints(acc, den, order)
