"""Exact and high-precision scalars.

Exact rationals are :class:`fractions.Fraction`.  High-precision reals are
:class:`HPReal`, a precision-tagged wrapper around an ``mpmath`` float.
Quadratic surds ``(p + q*sqrt(D))/r`` are :class:`QuadraticSurd`, which also
carries field arithmetic inside a fixed ``Q(sqrt(D))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Union

import mpmath
from sympy import factorint

Rational = Union[int, Fraction]

MIN_PI_BITS = 64


# ---------------------------------------------------------------------------
# HPReal
# ---------------------------------------------------------------------------

def _as_mpf(x, prec: int) -> mpmath.mpf:
    with mpmath.workprec(prec):
        if isinstance(x, Fraction):
            return mpmath.mpf(x.numerator) / x.denominator
        return mpmath.mpf(x)


@dataclass(frozen=True)
class HPReal:
    """A real number held to ``precision_bits`` bits, rounded to nearest.

    Binary operations run at the smaller of the operand precisions; plain
    ints and Fractions adopt the precision of the other operand.  Equality
    comparisons need an explicit tolerance (:meth:`close_to`).
    """

    value: mpmath.mpf
    precision_bits: int

    def __post_init__(self):
        if self.precision_bits <= 0:
            raise ValueError("precision_bits must be positive")
        object.__setattr__(self, "value", _as_mpf(self.value, self.precision_bits))

    @classmethod
    def from_rational(cls, x: Rational, precision_bits: int) -> "HPReal":
        return cls(_as_mpf(Fraction(x), precision_bits), precision_bits)

    @classmethod
    def from_string(cls, text: str, precision_bits: int) -> "HPReal":
        with mpmath.workprec(precision_bits):
            return cls(mpmath.mpf(text), precision_bits)

    def _binary(self, other, op):
        if isinstance(other, HPReal):
            prec = min(self.precision_bits, other.precision_bits)
            rhs = other.value
        elif isinstance(other, (int, Fraction)):
            prec = self.precision_bits
            rhs = _as_mpf(other, prec + 64)
        else:
            return NotImplemented
        with mpmath.workprec(prec):
            return HPReal(op(self.value, rhs), prec)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._binary(other, lambda a, b: b / a)

    def __neg__(self):
        return HPReal(-self.value, self.precision_bits)

    def __abs__(self):
        return HPReal(abs(self.value), self.precision_bits)

    def __lt__(self, other):
        return self.value < (other.value if isinstance(other, HPReal) else _as_mpf(other, self.precision_bits))

    def __gt__(self, other):
        return self.value > (other.value if isinstance(other, HPReal) else _as_mpf(other, self.precision_bits))

    def sign(self) -> int:
        return int(mpmath.sign(self.value))

    def close_to(self, other, tol) -> bool:
        """``|self - other| < tol`` with ``tol`` a number or HPReal."""
        diff = abs(self - other)
        bound = tol.value if isinstance(tol, HPReal) else _as_mpf(tol, self.precision_bits)
        return diff.value < bound

    def to_fraction(self) -> Fraction:
        """The exact binary rational stored in ``value``."""
        man, exp = self.value.man_exp
        # mpmath reports the magnitude of the mantissa
        man, exp = int(man) * self.sign(), int(exp)
        if exp >= 0:
            return Fraction(man << exp)
        return Fraction(man, 1 << -exp)

    def decimal_digits(self) -> int:
        return max(1, int(self.precision_bits * math.log10(2)))

    def to_decimal(self, digits: Optional[int] = None) -> str:
        digits = digits or self.decimal_digits()
        with mpmath.workprec(self.precision_bits):
            return mpmath.nstr(self.value, digits, strip_zeros=False, min_fixed=-math.inf, max_fixed=math.inf)

    def __float__(self):
        return float(self.value)

    def __repr__(self):
        return f"HPReal({self.to_decimal(min(30, self.decimal_digits()))}, {self.precision_bits} bits)"


def hp_sqrt(x: HPReal) -> HPReal:
    """Square root, correctly rounded at the precision of ``x``."""
    if x.value < 0:
        raise ValueError("hp_sqrt of a negative number")
    with mpmath.workprec(x.precision_bits):
        return HPReal(mpmath.sqrt(x.value), x.precision_bits)


# ---------------------------------------------------------------------------
# pi oracle: Machin-type arctangent sums with binary splitting
# ---------------------------------------------------------------------------

MACHIN = ((16, 5), (-4, 239))
# Takano (1982): pi = 48 atan(1/49) + 128 atan(1/57) - 20 atan(1/239) + 48 atan(1/110443)
TAKANO = ((48, 49), (128, 57), (-20, 239), (48, 110443))


def _arctan_split(a: int, b: int, x2: int):
    """Binary splitting for sum_{n=a}^{b-1} (-1)^n / ((2n+1) x^(2n)).

    Returns ``(P, Q, B, T)``; the partial sum is ``T / (B * Q)``.
    """
    if b - a == 1:
        p = -1 if a else 1
        q = x2 if a else 1
        return p, q, (2 * a + 1), p
    m = (a + b) // 2
    p1, q1, b1, t1 = _arctan_split(a, m, x2)
    p2, q2, b2, t2 = _arctan_split(m, b, x2)
    return p1 * p2, q1 * q2, b1 * b2, b2 * q2 * t1 + b1 * p1 * t2


def _arctan_inv_fixed(x: int, bits: int) -> int:
    """floor-ish of atan(1/x) * 2**bits, error below a few units."""
    # terms needed: x^(2n+1) > 2^bits
    nterms = int(bits / (2 * math.log2(x))) + 2
    _, q, bb, t = _arctan_split(0, nterms, x * x)
    return (t << bits) // (bb * q * x)


def _pi_fixed(formula, bits: int) -> int:
    guard = 16
    total = sum(c * _arctan_inv_fixed(x, bits + guard) for c, x in formula)
    return total >> guard


@lru_cache(maxsize=32)
def _pi_cached(precision_bits: int, formula_name: str) -> HPReal:
    formula = MACHIN if formula_name == "machin" else TAKANO
    work = precision_bits + 16
    fixed = _pi_fixed(formula, work)
    with mpmath.workprec(precision_bits):
        return HPReal(mpmath.mpf((fixed, -work)), precision_bits)


def compute_pi(precision_bits: int, formula: str = "machin") -> HPReal:
    """pi to ``precision_bits`` bits from a Machin-type arctangent identity.

    ``formula`` is ``"machin"`` (16 atan 1/5 - 4 atan 1/239) or ``"takano"``.
    Never touches any hypergeometric 1/pi series.
    """
    if precision_bits < MIN_PI_BITS:
        raise ValueError(f"compute_pi needs at least {MIN_PI_BITS} bits, got {precision_bits}")
    if formula not in ("machin", "takano"):
        raise ValueError(f"unknown pi formula {formula!r}")
    return _pi_cached(precision_bits, formula)


# ---------------------------------------------------------------------------
# Square-free parts
# ---------------------------------------------------------------------------

def squarefree_decomposition(n: int) -> tuple[int, int]:
    """Return ``(s, k)`` with ``n = s * k**2`` and ``s`` square-free (sign kept in ``s``)."""
    if n == 0:
        return 0, 0
    sign = -1 if n < 0 else 1
    s, k = 1, 1
    for prime, e in factorint(abs(n)).items():
        k *= prime ** (e // 2)
        if e % 2:
            s *= prime
    return sign * s, k


def is_squarefree(n: int) -> bool:
    return n > 0 and squarefree_decomposition(n)[1] == 1


def rational_sqrt(x: Fraction) -> Optional[Fraction]:
    """Exact square root of a non-negative rational, or None."""
    x = Fraction(x)
    if x < 0:
        return None
    n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if n * n == x.numerator and d * d == x.denominator:
        return Fraction(n, d)
    return None


# ---------------------------------------------------------------------------
# QuadraticSurd
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticSurd:
    """The number ``(p + q*sqrt(D)) / r`` in normal form.

    ``r > 0``, ``gcd(p, q, r) = 1``, ``D`` square-free and ``D = 0`` exactly
    when ``q = 0``.  Arithmetic is closed inside one field ``Q(sqrt(D))``;
    rationals mix with any field.
    """

    p: int
    q: int
    r: int
    D: int

    def __post_init__(self):
        p, q, r, D = self.p, self.q, self.r, self.D
        if r == 0:
            raise ZeroDivisionError("surd denominator is zero")
        if D < 0:
            raise ValueError("negative radicand")
        if q == 0 or D == 0:
            q, D = 0, 0
        else:
            s, k = squarefree_decomposition(D)
            q *= k
            D = s
            if D == 1:
                p, q, D = p + q, 0, 0
        if r < 0:
            p, q, r = -p, -q, -r
        g = math.gcd(math.gcd(p, q), r)
        object.__setattr__(self, "p", p // g)
        object.__setattr__(self, "q", q // g)
        object.__setattr__(self, "r", r // g)
        object.__setattr__(self, "D", D)

    # -- construction -----------------------------------------------------
    @classmethod
    def from_parts(cls, a: Rational, b: Rational = 0, D: int = 0) -> "QuadraticSurd":
        """``a + b*sqrt(D)`` with rational ``a`` and ``b``."""
        a, b = Fraction(a), Fraction(b)
        if b == 0:
            D = 0
        r = a.denominator * b.denominator // math.gcd(a.denominator, b.denominator)
        return cls(int(a * r), int(b * r), r, D)

    @classmethod
    def rational(cls, x: Rational) -> "QuadraticSurd":
        return cls.from_parts(x)

    @classmethod
    def sqrt_of(cls, x: Rational) -> "QuadraticSurd":
        """``sqrt(x)`` for a non-negative rational ``x``."""
        x = Fraction(x)
        if x < 0:
            raise ValueError("square root of a negative rational")
        # sqrt(n/d) = sqrt(n*d)/d
        return cls(0, 1, x.denominator, x.numerator * x.denominator) if x else cls(0, 0, 1, 0)

    # -- views ------------------------------------------------------------
    @property
    def a(self) -> Fraction:
        return Fraction(self.p, self.r)

    @property
    def b(self) -> Fraction:
        return Fraction(self.q, self.r)

    def is_rational(self) -> bool:
        return self.q == 0

    def to_fraction(self) -> Fraction:
        if self.q:
            raise ValueError(f"{self} is irrational")
        return Fraction(self.p, self.r)

    def conjugate(self) -> "QuadraticSurd":
        return QuadraticSurd(self.p, -self.q, self.r, self.D)

    def norm(self) -> Fraction:
        return self.a ** 2 - self.D * self.b ** 2

    # -- arithmetic -------------------------------------------------------
    @staticmethod
    def _coerce(x) -> "QuadraticSurd":
        if isinstance(x, QuadraticSurd):
            return x
        if isinstance(x, (int, Fraction)):
            return QuadraticSurd.from_parts(x)
        return NotImplemented

    def _common_D(self, other: "QuadraticSurd") -> int:
        if self.D and other.D and self.D != other.D:
            raise ValueError(f"surds from different fields: sqrt({self.D}) and sqrt({other.D})")
        return self.D or other.D

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        D = self._common_D(other)
        return QuadraticSurd.from_parts(self.a + other.a, self.b + other.b, D)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticSurd(-self.p, -self.q, self.r, self.D)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        D = self._common_D(other)
        a1, b1, a2, b2 = self.a, self.b, other.a, other.b
        return QuadraticSurd.from_parts(a1 * a2 + D * b1 * b2, a1 * b2 + a2 * b1, D)

    __rmul__ = __mul__

    def inverse(self) -> "QuadraticSurd":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero surd")
        return QuadraticSurd.from_parts(self.a / n, -self.b / n, self.D)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = QuadraticSurd.rational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def sign(self) -> int:
        """Exact sign of ``a + b*sqrt(D)``."""
        a, b = self.a, self.b
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sb == 0 or sa == sb:
            return sa or sb
        if sa == 0:
            return sb
        # opposite signs: compare a^2 with D b^2
        c = a * a - self.D * b * b
        return sa if c > 0 else (sb if c < 0 else 0)

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return (self.p, self.q, self.r, self.D) == (other.p, other.q, other.r, other.D)

    def __hash__(self):
        return hash((self.p, self.q, self.r, self.D))

    def sqrt(self) -> Optional["QuadraticSurd"]:
        """Exact square root inside the same field (or a rational's surd), else None."""
        if self.sign() < 0:
            return None
        if self.q == 0:
            return QuadraticSurd.sqrt_of(self.a)
        x, y, D = self.a, self.b, self.D
        # (s + t sqrt D)^2 = x + y sqrt D  =>  s^2 + D t^2 = x, 2 s t = y
        disc = rational_sqrt(x * x - D * y * y)
        if disc is None:
            return None
        for s2 in ((x + disc) / 2, (x - disc) / 2):
            s = rational_sqrt(s2)
            if s:
                cand = QuadraticSurd.from_parts(s, y / (2 * s), D)
                if cand.sign() < 0:
                    cand = -cand
                if cand * cand == self:
                    return cand
        return None

    # -- rendering --------------------------------------------------------
    def evaluate(self, precision_bits: int) -> HPReal:
        work = precision_bits + 32
        with mpmath.workprec(work):
            val = (mpmath.mpf(self.p) + mpmath.mpf(self.q) * mpmath.sqrt(self.D)) / self.r
        return HPReal(val, precision_bits)

    def to_json(self) -> dict:
        return {"p": str(self.p), "q": str(self.q), "r": str(self.r), "D": str(self.D)}

    @classmethod
    def from_json(cls, data: dict) -> "QuadraticSurd":
        return cls(int(data["p"]), int(data["q"]), int(data["r"]), int(data["D"]))

    def __str__(self):
        if self.q == 0:
            return str(Fraction(self.p, self.r))
        rad = f"sqrt({self.D})"
        qpart = rad if self.q == 1 else ("-" + rad if self.q == -1 else f"{self.q}*{rad}")
        if self.p == 0:
            num = qpart
        else:
            num = f"{self.p} + {qpart}" if self.q > 0 else f"{self.p} - {qpart.lstrip('-')}"
            if self.r != 1:
                num = f"({num})"
        return num if self.r == 1 else f"{num}/{self.r}"


# ---------------------------------------------------------------------------
# Recognition
# ---------------------------------------------------------------------------

def _convergents(x: Fraction):
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    while True:
        a = x.numerator // x.denominator
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        yield Fraction(h1, k1)
        frac = x - a
        if frac == 0:
            return
        x = 1 / frac


def rational_reconstruct(x: HPReal, max_denominator: int) -> Optional[Fraction]:
    """Smallest-denominator continued-fraction convergent of ``x`` matching it.

    A convergent ``p/q`` with ``q <= max_denominator`` is accepted when
    ``|x - p/q| < 2**(-precision+8) * max(1, |x|)``; otherwise None.
    """
    prec = x.precision_bits
    if max_denominator < 1:
        raise ValueError("max_denominator must be positive")
    if max_denominator.bit_length() * 2 > prec - 8:
        raise ValueError(
            f"max_denominator {max_denominator} too large for {prec}-bit input"
        )
    exact = x.to_fraction()
    tol = Fraction(1, 1 << (prec - 8)) * max(1, abs(exact))
    for conv in _convergents(exact):
        if conv.denominator > max_denominator:
            return None
        if abs(exact - conv) < tol:
            return conv
    return None


def _surd_matches(surd: QuadraticSurd, x: HPReal) -> bool:
    prec = x.precision_bits
    scale = max(Fraction(1), abs(x.to_fraction()))
    tol = HPReal.from_rational(scale / (1 << max(1, prec - 12)), prec)
    return surd.evaluate(prec + 16).close_to(x, tol)


def recognize_surd(
    x: HPReal, candidate_D: Iterable[int], max_denominator: int
) -> Optional[QuadraticSurd]:
    """Identify ``x`` as ``(p + q*sqrt(D))/r`` for the first matching candidate ``D``.

    Order: rational (D = 0), then for each ``D`` in order: ``x/sqrt(D)``
    rational, then a general integer relation among ``(x, 1, sqrt(D))`` with
    coefficients bounded by ``max_denominator``.  Every hit is re-evaluated
    and must agree with ``x`` to ``2**(-precision+12)`` relative.
    """
    prec = x.precision_bits
    q = rational_reconstruct(x, max_denominator)
    if q is not None:
        surd = QuadraticSurd.rational(q)
        if _surd_matches(surd, x):
            return surd
    for D in candidate_D:
        if D <= 1 or not is_squarefree(D):
            continue
        root = hp_sqrt(HPReal.from_rational(D, prec))
        ratio = rational_reconstruct(x / root, max_denominator)
        if ratio is not None:
            surd = QuadraticSurd.from_parts(0, ratio, D)
            if _surd_matches(surd, x):
                return surd
        with mpmath.workprec(prec):
            rel = mpmath.pslq(
                [x.value, mpmath.mpf(1), root.value],
                tol=mpmath.mpf(2) ** (-(prec * 7) // 8),
                maxcoeff=max_denominator,
                maxsteps=20000,
            )
        if rel and rel[0] != 0:
            c0, c1, c2 = (int(c) for c in rel)
            surd = QuadraticSurd(-c1, -c2, c0, D)
            if _surd_matches(surd, x):
                return surd
    return None


def quadratic_radicand(x: HPReal, max_coefficient: int) -> Optional[int]:
    """Square-free radicand of the field of a real quadratic irrational ``x``.

    Finds an integer relation ``A x^2 + B x + C = 0`` and returns the
    square-free part of ``B^2 - 4AC``; None if ``x`` looks rational or no
    relation is found.
    """
    prec = x.precision_bits
    with mpmath.workprec(prec):
        rel = mpmath.pslq(
            [x.value ** 2, x.value, mpmath.mpf(1)],
            tol=mpmath.mpf(2) ** (-(prec * 7) // 8),
            maxcoeff=max_coefficient,
            maxsteps=50000,
        )
        if not rel or rel[0] == 0:
            return None
        A, B, C = (int(c) for c in rel)
        resid = abs(A * x.value ** 2 + B * x.value + C)
        if resid > mpmath.mpf(2) ** (-prec + 16) * (abs(A) + abs(B) + abs(C)) * max(1, abs(x.value)) ** 2:
            return None
    s, _ = squarefree_decomposition(B * B - 4 * A * C)
    return s if s > 1 else None


# ---------------------------------------------------------------------------
# surd * sqrt(k)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScaledSurd:
    """``surd * sqrt(k)`` with square-free ``k > 1`` not absorbed into the surd.

    Covers numbers of biquadratic fields such as ``(7 - 5*sqrt(57)) * sqrt(3)``.
    Build with :func:`scaled_surd`, which returns a plain surd when possible.
    """

    surd: QuadraticSurd
    k: int

    def evaluate(self, precision_bits: int) -> HPReal:
        base = self.surd.evaluate(precision_bits + 16)
        with mpmath.workprec(precision_bits + 32):
            val = base.value * mpmath.sqrt(self.k)
        return HPReal(val, precision_bits)

    def sign(self) -> int:
        return self.surd.sign()

    def to_json(self) -> dict:
        out = self.surd.to_json()
        out["k"] = str(self.k)
        return out

    def __str__(self):
        inner = str(self.surd)
        if self.surd.p and self.surd.q:
            inner = f"({inner})" if self.surd.r == 1 else inner
        return f"{inner}*sqrt({self.k})"


Exact = Union[QuadraticSurd, ScaledSurd]


def scaled_surd(surd: QuadraticSurd, k: int) -> Exact:
    """``surd * sqrt(k)`` in the simplest available representation."""
    if k < 1:
        raise ValueError("k must be positive")
    s, c = squarefree_decomposition(k)
    surd = surd * c
    if s == 1:
        return surd
    if surd.q == 0:
        return QuadraticSurd.from_parts(0, surd.a, s)
    if surd.p == 0:
        # b sqrt(D) sqrt(s) = b sqrt(D s)
        return QuadraticSurd.from_parts(0, surd.b, surd.D * s)
    if surd.D == s:
        return QuadraticSurd.from_parts(surd.b * s, surd.a, s)
    return ScaledSurd(surd, s)


def exact_from_json(data: dict) -> Exact:
    surd = QuadraticSurd.from_json(data)
    k = int(data.get("k", 1))
    return surd if k == 1 else scaled_surd(surd, k)


def sqrt_exact(x: QuadraticSurd, extra_radicands: Iterable[int] = ()) -> Optional[Exact]:
    """Exact ``sqrt(x)`` for ``x >= 0`` as a surd, or a surd times ``sqrt(k)``."""
    x = QuadraticSurd._coerce(x)
    if x.sign() < 0:
        return None
    root = x.sqrt()
    if root is not None:
        return root
    for k in extra_radicands:
        if k <= 1 or not is_squarefree(k):
            continue
        root = (x / k).sqrt()
        if root is not None:
            # sqrt(x) = sqrt(x/k) * sqrt(k)
            return scaled_surd(root, k)
    return None


def mul_sqrt(x: QuadraticSurd, y: QuadraticSurd, extra_radicands: Iterable[int] = ()) -> Optional[Exact]:
    """Exact ``x * sqrt(y)`` for surds x and y >= 0, or None."""
    x, y = QuadraticSurd._coerce(x), QuadraticSurd._coerce(y)
    root = sqrt_exact(y, extra_radicands)
    if root is None:
        return None
    if isinstance(root, ScaledSurd):
        try:
            return scaled_surd(x * root.surd, root.k)
        except ValueError:
            return None
    try:
        return x * root
    except ValueError:
        pass
    # different fields: only x in Q(sqrt D1) times a pure sqrt(D2) has a form
    if root.p == 0:
        return scaled_surd(x * root.b, root.D)
    if x.p == 0:
        return scaled_surd(root * x.b, x.D)
    return None
