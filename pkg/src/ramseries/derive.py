"""Ramanujan-series parameters from a modular equation at a singular point.

At the point where beta = 1 - alpha we have u^h = v^h, so the candidates
are the points (u0, zeta*u0) on P = 0 with zeta = +1 or -1.  Along the
branch v(u) through such a point, alpha and beta are the roots of

    t^2 - S t + Pr,    S = u^h - v^h + 1,  Pr = u^h,

and differentiating S and Pr twice gives alpha', beta', alpha'', beta''.
The multiplier m and its derivative follow from

    m^2 = (1/d) * beta(1 - beta) / (alpha(1 - alpha)) * alpha' / beta',

and the series parameters are

    z = 4 alpha0 beta0
    b = (1 - 2 alpha0) * sqrt(N),  N = 4d/l (z > 0) or 4d/l - 1 (z < 0)
    a = -2 alpha0 beta0 * (m0' / alpha0') * d / sqrt(l).

When u0 is rational the whole chain is carried out exactly in Q(sqrt(D)).
Otherwise (irrational or imaginary u0) the chain runs in high-precision
complex arithmetic and exact forms of z, a and b are recognized afterwards.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import mpmath

from .modeq import BivariatePoly, ModularEquation
from .modfunc import evaluate_x, level_info
from .numerics import (
    Exact,
    HPReal,
    QuadraticSurd,
    ScaledSurd,
    compute_pi,
    exact_from_json,
    mul_sqrt,
    quadratic_radicand,
    recognize_surd,
    scaled_surd,
    sqrt_exact,
    squarefree_decomposition,
)
from .roots import UnivariatePoly, complex_roots, real_roots, squarefree_part

log = logging.getLogger(__name__)

__all__ = [
    "DerivationError",
    "RootError",
    "ChainError",
    "diagonal_poly",
    "real_roots",
    "implicit_derivatives",
    "alpha_beta_chain",
    "multiplier",
    "ChainValues",
    "SingularPoint",
    "RootCandidate",
    "singular_candidates",
    "singular_point",
    "CertValue",
    "SeriesCertificate",
    "derive",
    "Derivation",
    "derive_certificate",
    "nome",
    "digits_to_bits",
]

MAX_DENOMINATOR = 10 ** 40


class DerivationError(Exception):
    """Base class; ``step`` names the stage that failed."""

    step = "derive"

    def __init__(self, message: str, step: Optional[str] = None):
        super().__init__(message)
        if step:
            self.step = step


class RootError(DerivationError):
    step = "root"


class ChainError(DerivationError):
    step = "chain"


def digits_to_bits(digits: int) -> int:
    return math.ceil(digits * math.log2(10)) + 32


# ---------------------------------------------------------------------------
# exact building blocks
# ---------------------------------------------------------------------------

def _poly_of(me) -> BivariatePoly:
    return me.P if isinstance(me, ModularEquation) else me


def diagonal_poly(me, zeta: int = 1) -> UnivariatePoly:
    """P(u, zeta*u) as an integer polynomial (denominators cleared)."""
    coeffs = _poly_of(me).diagonal(zeta)
    if not any(coeffs):
        raise RootError(f"P(u, {zeta}*u) vanishes identically")
    return UnivariatePoly(coeffs)


def _eval_partials(P: BivariatePoly, u, v):
    """P_u, P_v, P_uu, P_uv, P_vv at (u, v)."""
    return tuple(P.partial(du, dv).evaluate(u, v) for du, dv in ((1, 0), (0, 1), (2, 0), (1, 1), (0, 2)))


def implicit_derivatives(me, u0, v0):
    """``(v'(u0), v''(u0))`` for the branch of P = 0 through (u0, v0).

    Works for exact inputs (int, Fraction, surds) and for mpmath numbers.
    """
    P = _poly_of(me)
    Pu, Pv, Puu, Puv, Pvv = _eval_partials(P, u0, v0)
    if Pv == 0:
        raise ChainError("P_v vanishes at the point: singular branch", "implicit_derivatives")
    dv = -Pu / Pv
    ddv = -(Puu + 2 * Puv * dv + Pvv * dv * dv) / Pv
    return dv, ddv


@dataclass(frozen=True)
class ChainValues:
    alpha0: object
    beta0: object
    dalpha0: object
    dbeta0: object
    ddalpha0: object
    ddbeta0: object


def _chain(u0, v0, dv0, ddv0, h: int, sqrt):
    S = u0 ** h - v0 ** h + 1
    Pr = u0 ** h
    disc = S * S - 4 * Pr
    if disc == 0:
        raise ChainError("alpha0 = beta0 (degenerate point, z = 1)", "alpha_beta_chain")
    root = sqrt(disc)
    alpha = (S - root) / 2
    beta = (S + root) / 2
    S1 = h * u0 ** (h - 1) - h * v0 ** (h - 1) * dv0
    P1 = h * u0 ** (h - 1)
    S2 = h * (h - 1) * u0 ** (h - 2) - h * (h - 1) * v0 ** (h - 2) * dv0 * dv0 - h * v0 ** (h - 1) * ddv0
    P2 = h * (h - 1) * u0 ** (h - 2)
    gap = beta - alpha
    da = (P1 - alpha * S1) / gap
    db = S1 - da
    dda = (P2 - 2 * da * db - alpha * S2) / gap
    ddb = S2 - dda
    return ChainValues(alpha, beta, da, db, dda, ddb), disc


def alpha_beta_chain(u0, v0, dv0, ddv0, h: int = 2) -> ChainValues:
    """alpha, beta and their first two u-derivatives at a rational point.

    alpha0 is the smaller root.  Raises ChainError for a double root and for
    a complex pair.
    """
    u0, v0, dv0, ddv0 = (Fraction(x) for x in (u0, v0, dv0, ddv0))

    def sqrt(disc):
        if disc < 0:
            raise ChainError("alpha0, beta0 are complex: not a valid singular point", "alpha_beta_chain")
        return QuadraticSurd.sqrt_of(disc)

    values, _ = _chain(u0, v0, dv0, ddv0, h, sqrt)
    return values


def _log_derivative(c: ChainValues):
    """m'/m at the point."""
    a, b, da, db, dda, ddb = c.alpha0, c.beta0, c.dalpha0, c.dbeta0, c.ddalpha0, c.ddbeta0
    return (db / b - db / (1 - b) - da / a + da / (1 - a) + dda / da - ddb / db) / 2


def _m_squared(c: ChainValues, d: int):
    a, b = c.alpha0, c.beta0
    return (b * (1 - b)) / (a * (1 - a)) * c.dalpha0 / (c.dbeta0 * d)


def multiplier(chain: ChainValues, d: int) -> tuple[Exact, Exact]:
    """Exact ``(m0, m0')`` from an exact chain."""
    if chain.dbeta0 == 0 or chain.dalpha0 == 0:
        raise ChainError("alpha'0 or beta'0 vanishes", "multiplier")
    if not (0 < chain.alpha0 < 1 and 0 < chain.beta0 < 1):
        raise ChainError("alpha0, beta0 not in (0, 1)", "multiplier")
    m2 = _m_squared(chain, d)
    if QuadraticSurd._coerce(m2).sign() <= 0:
        raise ChainError("m0^2 is not positive: wrong branch or root", "multiplier")
    # at beta = 1 - alpha the ratio beta(1-beta)/(alpha(1-alpha)) is 1
    if chain.alpha0 + chain.beta0 == 1 and d * m2 != chain.dalpha0 / chain.dbeta0:
        raise ChainError("d*m0^2 differs from alpha'0/beta'0", "multiplier")
    m0 = sqrt_exact(m2)
    dm0 = mul_sqrt(_log_derivative(chain), m2)
    if m0 is None or dm0 is None:
        raise ChainError(f"m0^2 = {m2} has no quadratic square root", "multiplier")
    return m0, dm0


# ---------------------------------------------------------------------------
# singular points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootCandidate:
    """A point (u0, zeta*u0) on P = 0 with U = u0^h real and below 1/4."""

    zeta: int
    u0: object  # mpmath mpc at working precision
    exact: Optional[Fraction]
    U: object  # mpmath mpf
    label: str

    @property
    def sign(self) -> str:
        return "pos" if self.U > 0 else "alt"


@dataclass(frozen=True)
class SingularPoint:
    """Chain values at a candidate point.

    Exact fields are Fractions or surds, or None when the chain ran
    numerically; ``numeric`` holds every value as an mpmath number.
    """

    candidate: RootCandidate
    u0: Optional[object]
    v0: Optional[object]
    dv0: Optional[object]
    ddv0: Optional[object]
    alpha0: Optional[object]
    beta0: Optional[object]
    dalpha0: Optional[object]
    dbeta0: Optional[object]
    ddalpha0: Optional[object]
    ddbeta0: Optional[object]
    m0: Optional[object]
    dm0: Optional[object]
    numeric: dict = field(default_factory=dict)
    work_bits: int = 0

    @property
    def exact_chain(self) -> bool:
        return self.alpha0 is not None


def _newton_polish(poly: UnivariatePoly, x, steps: int = 8):
    dp = poly.derivative()
    for _ in range(steps):
        f, g = poly(x), dp(x)
        if g == 0:
            break
        x = x - f / g
    return x


GUARD_BITS = 128


def _work_bits(precision_bits: int) -> int:
    return max(precision_bits, 640) + GUARD_BITS


def singular_candidates(me: ModularEquation, sign: str, precision_bits: int,
                        zetas: tuple[int, ...] = (1, -1)) -> list[RootCandidate]:
    """Candidate points for the given sign, in policy order.

    pos: real roots u0 of P(u, zeta*u) in (0, 1), increasing, zeta = +1 first.
    alt: roots with u0^h real and negative, by increasing |u0^h|.
    """
    if sign not in ("pos", "alt"):
        raise ValueError(f"sign must be pos or alt (got {sign!r})")
    h = me.h
    work = _work_bits(precision_bits)
    out: list[RootCandidate] = []
    for zeta in zetas:
        try:
            diag = diagonal_poly(me, zeta)
        except RootError:
            continue
        if diag.degree < 1:
            continue
        if sign == "pos":
            for rec in real_roots(diag, 0, 1, work):
                with mpmath.workprec(work):
                    u0 = mpmath.mpc(rec.value.value)
                    U = rec.value.value ** h
                if U >= mpmath.mpf(1) / 4:
                    continue
                label = str(rec.exact) if rec.exact is not None else rec.value.to_decimal(30)
                out.append(RootCandidate(zeta, u0, rec.exact, U, label))
            continue
        sqf = squarefree_part(diag)
        with mpmath.workprec(work):
            tol = mpmath.mpf(2) ** (-work // 2)
            for r in complex_roots(diag, work):
                r = _newton_polish(sqf, mpmath.mpc(r))
                if r.imag < 0:
                    continue  # conjugate of another root
                U = r ** h
                if abs(U.imag) > tol * max(1, abs(U)):
                    continue
                U = U.real
                if not U < 0:
                    continue
                label = _complex_label(r)
                out.append(RootCandidate(zeta, r, None, U, label))
    if sign == "alt":
        out.sort(key=lambda c: (abs(c.U), c.zeta < 0, c.u0.real))
    return out


def _complex_label(r) -> str:
    im = mpmath.nstr(r.imag, 20) + "i"
    if r.real == 0:
        return im
    sep = "" if im.startswith("-") else "+"
    return f"{mpmath.nstr(r.real, 20)}{sep}{im}"


def singular_point(me: ModularEquation, cand: RootCandidate, precision_bits: int) -> SingularPoint:
    """Run the chain at a candidate point (exactly when u0 is rational)."""
    h, d = me.h, me.p
    work = _work_bits(precision_bits)
    numeric: dict = {}
    if cand.exact is not None:
        u0 = cand.exact
        v0 = cand.zeta * u0
        if me.P.evaluate(u0, v0) != 0:
            raise RootError(f"P({u0}, {v0}) != 0")
        dv0, ddv0 = implicit_derivatives(me, u0, v0)
        ch = alpha_beta_chain(u0, v0, dv0, ddv0, h)
        m0 = dm0 = None
        try:
            m0, dm0 = multiplier(ch, d)
        except ChainError:
            m0 = dm0 = None
        exact = dict(u0=u0, v0=v0, dv0=dv0, ddv0=ddv0, alpha0=ch.alpha0, beta0=ch.beta0,
                     dalpha0=ch.dalpha0, dbeta0=ch.dbeta0, ddalpha0=ch.ddalpha0,
                     ddbeta0=ch.ddbeta0, m0=m0, dm0=dm0)
        with mpmath.workprec(work):
            for k, v in exact.items():
                if v is not None:
                    numeric[k] = mpmath.mpc(_to_mp(v, work))
            if m0 is None:
                _numeric_multiplier(numeric, d)
        return SingularPoint(cand, **exact, numeric=numeric, work_bits=work)
    with mpmath.workprec(work):
        u0 = cand.u0
        v0 = cand.zeta * u0
        Pn = _MPPoly(me.P)
        if abs(Pn.evaluate(u0, v0)) > mpmath.mpf(2) ** (-work // 2):
            raise RootError(f"({cand.label}) is not on P = 0")
        dv0, ddv0 = implicit_derivatives(Pn, u0, v0)
        ch, disc = _chain(u0, v0, dv0, ddv0, h, mpmath.sqrt)
        numeric.update(u0=u0, v0=v0, dv0=dv0, ddv0=ddv0, alpha0=ch.alpha0, beta0=ch.beta0,
                       dalpha0=ch.dalpha0, dbeta0=ch.dbeta0, ddalpha0=ch.ddalpha0, ddbeta0=ch.ddbeta0)
        _numeric_multiplier(numeric, d)
    return SingularPoint(cand, *([None] * 12), numeric=numeric, work_bits=work)


def _numeric_multiplier(numeric: dict, d: int) -> None:
    c = ChainValues(*(numeric[k] for k in ("alpha0", "beta0", "dalpha0", "dbeta0", "ddalpha0", "ddbeta0")))
    if c.dalpha0 == 0 or c.dbeta0 == 0:
        raise ChainError("alpha'0 or beta'0 vanishes", "multiplier")
    m0 = mpmath.sqrt(_m_squared(c, d))
    numeric["m0"] = m0
    numeric["dm0"] = m0 * _log_derivative(c)
    numeric["L"] = _log_derivative(c)


class _MPPoly:
    """P with coefficients converted to mpf on evaluation (for complex points)."""

    def __init__(self, P: BivariatePoly):
        self.P = P
        self._cache = {}

    def partial(self, du: int = 0, dv: int = 0):
        key = (du, dv)
        if key not in self._cache:
            self._cache[key] = _MPPoly(self.P.partial(du, dv))
        return self._cache[key]

    def evaluate(self, u, v):
        acc = mpmath.mpc(0)
        for (i, j), c in self.P.coeffs.items():
            cf = mpmath.mpf(c) if isinstance(c, int) else mpmath.mpf(c.numerator) / c.denominator
            acc += cf * u ** i * v ** j
        return acc


def _to_mp(x, work: int):
    if isinstance(x, (QuadraticSurd, ScaledSurd)):
        return x.evaluate(work).value
    x = Fraction(x)
    return mpmath.mpf(x.numerator) / x.denominator


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CertValue:
    numeric: HPReal
    exact: Optional[Exact] = None

    def to_json(self, digits: int) -> dict:
        return {"numeric": self.numeric.to_decimal(digits),
                "exact": None if self.exact is None else self.exact.to_json()}

    @classmethod
    def from_json(cls, data: dict, precision_bits: int) -> "CertValue":
        exact = None if data.get("exact") is None else exact_from_json(data["exact"])
        return cls(HPReal.from_string(str(data["numeric"]), precision_bits), exact)

    def at(self, precision_bits: int) -> HPReal:
        """The value at the requested precision; exact forms allow any precision."""
        if self.exact is not None:
            return self.exact.evaluate(precision_bits)
        return self.numeric


def _digits_of(bits: int) -> int:
    # enough digits that the decimal string round-trips at ``bits``
    return math.ceil(bits * math.log10(2)) + 2


@dataclass(frozen=True)
class SeriesCertificate:
    level: int
    s: int
    degree: int
    sign: str
    z: CertValue
    a: CertValue
    b: CertValue
    nome_q: HPReal
    precision_bits: int
    source: dict
    alpha0: Optional[CertValue] = None
    m0: Optional[CertValue] = None

    @property
    def identifier(self) -> str:
        return f"level{self.level}-p{self.degree}-{self.sign}"

    def to_json(self) -> dict:
        digits = _digits_of(self.precision_bits)
        out = {
            "level": self.level,
            "s": self.s,
            "degree": self.degree,
            "sign": self.sign,
            "z": self.z.to_json(digits),
            "a": self.a.to_json(digits),
            "b": self.b.to_json(digits),
            "nome_q": self.nome_q.to_decimal(digits),
            "precision_bits": self.precision_bits,
            "source": dict(self.source),
        }
        if self.alpha0 is not None:
            out["alpha0"] = self.alpha0.to_json(digits)
        if self.m0 is not None:
            out["m0"] = self.m0.to_json(digits)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1) + "\n"

    @classmethod
    def from_json(cls, data: dict) -> "SeriesCertificate":
        bits = int(data["precision_bits"])
        if bits < 64:
            raise ValueError("precision_bits must be at least 64")
        sign = data["sign"]
        if sign not in ("pos", "alt"):
            raise ValueError(f"bad sign {sign!r}")
        level = int(data["level"])
        s = int(data["s"])
        if level_info(level).s != s:
            raise ValueError(f"s = {s} does not match level {level}")
        opt = {k: CertValue.from_json(data[k], bits) for k in ("alpha0", "m0") if data.get(k)}
        return cls(
            level=level, s=s, degree=int(data["degree"]), sign=sign,
            z=CertValue.from_json(data["z"], bits),
            a=CertValue.from_json(data["a"], bits),
            b=CertValue.from_json(data["b"], bits),
            nome_q=HPReal.from_string(str(data["nome_q"]), bits),
            precision_bits=bits,
            source={str(k): str(v) for k, v in dict(data.get("source", {})).items()},
            **opt,
        )

    @classmethod
    def loads(cls, text: str) -> "SeriesCertificate":
        return cls.from_json(json.loads(text))

    @classmethod
    def load(cls, path) -> "SeriesCertificate":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())


def _radicand(level: int, d: int, sign: str) -> Fraction:
    N = Fraction(4 * d, level)
    return N if sign == "pos" else N - 1


def _extra_radicands(level: int, d: int, others=()) -> list[int]:
    cands = []
    for n in (level, d, 2, 3, level * d, *others):
        n = int(n)
        if n <= 1:
            continue
        s, _ = squarefree_decomposition(n)
        if s > 1 and s not in cands:
            cands.append(s)
    # square-free divisors of the candidates
    for n in list(cands):
        for p in range(2, n + 1):
            if n % p == 0 and p not in cands and all(p % k for k in range(2, math.isqrt(p) + 1)):
                cands.append(p)
    return cands


def nome(level: int, d: int, sign: str, precision_bits: int) -> HPReal:
    N = _radicand(level, d, sign)
    with mpmath.workprec(precision_bits + 32):
        pi = compute_pi(precision_bits + 32).value
        q = mpmath.exp(-pi * mpmath.sqrt(mpmath.mpf(N.numerator) / N.denominator))
        if sign == "alt":
            q = -q
    return HPReal(q, precision_bits)


def nome_residual(level: int, alpha0, q: HPReal, bits: int = 192):
    """|alpha0 - x_level(q)| relative to |alpha0|, at ``bits`` precision."""
    with mpmath.workprec(bits):
        x = evaluate_x(level, mpmath.mpf(q.value))
        a = mpmath.mpf(alpha0.real if isinstance(alpha0, mpmath.mpc) else alpha0)
        return abs(a - x) / max(abs(a), mpmath.mpf(2) ** (-bits))


def _exact_params(point: SingularPoint, level: int, d: int, sign: str):
    """Exact (z, a, b) from an exact chain; entries may be None."""
    N = _radicand(level, d, sign)
    alpha, beta = point.alpha0, point.beta0
    z = 4 * alpha * beta
    b = mul_sqrt(beta - alpha, QuadraticSurd.rational(N))
    a = None
    if point.m0 is not None:
        m2 = _m_squared(ChainValues(point.alpha0, point.beta0, point.dalpha0, point.dbeta0,
                                    point.ddalpha0, point.ddbeta0), d)
        X = -2 * alpha * beta * _log_derivative(ChainValues(
            point.alpha0, point.beta0, point.dalpha0, point.dbeta0,
            point.ddalpha0, point.ddbeta0)) / point.dalpha0 * d
        # a = X * m0 / sqrt(l) = X * sqrt(m0^2 / l)
        a = mul_sqrt(X, m2 / level, _extra_radicands(level, d))
    return QuadraticSurd._coerce(z), a, b


def _recognize(value, radicands: list[int], bits: int) -> Optional[QuadraticSurd]:
    # the chain keeps GUARD_BITS guard bits; only trust the rest
    return recognize_surd(HPReal(value, bits - GUARD_BITS), radicands, MAX_DENOMINATOR)


def _recognize_params(numeric: dict, level: int, d: int, sign: str, bits: int):
    """Exact (z, a, b) for a numeric chain via integer-relation recognition."""
    with mpmath.workprec(bits):
        z = numeric["z"]
        a = numeric["a"]
    N = _radicand(level, d, sign)
    extra = _extra_radicands(level, d, (N.numerator * N.denominator,))
    zD = quadratic_radicand(HPReal(z, bits - GUARD_BITS), 10 ** 20)
    radicands = ([zD] if zD else []) + extra
    ze = _recognize(z, radicands, bits)
    if ze is None:
        return None, None, None
    ze_q = QuadraticSurd._coerce(ze)
    D = ze_q.D
    ks = _extra_radicands(level, d, (N.numerator * N.denominator, D or 1))
    # b^2 = (1 - z) N exactly
    be = sqrt_exact((1 - ze_q) * N, ks)
    if be is not None:
        # a usually lives in the same field as b
        inner = be.surd if isinstance(be, ScaledSurd) else be
        for r in (inner.D, getattr(be, "k", 0)):
            if r > 1 and r not in ks:
                ks.insert(0, r)
    ae = None
    for k in [1] + ks:
        with mpmath.workprec(bits):
            scaled = a / mpmath.sqrt(k)
        hit = _recognize(scaled, [D] if D else [], bits)
        if hit is not None:
            ae = scaled_surd(hit, k)
            break
    return ze_q, ae, be


def _real(x, what: str, tol):
    if isinstance(x, mpmath.mpc):
        if abs(x.imag) > tol * max(1, abs(x)):
            raise ChainError(f"{what} is not real", "certificate")
        return x.real
    return x


def _build(me: ModularEquation, point: SingularPoint, sign: str, precision_bits: int,
           equation_file: str) -> SeriesCertificate:
    level, d = me.level, me.p
    work = point.work_bits
    N = _radicand(level, d, sign)
    info = level_info(level)
    if point.exact_chain:
        z_ex, a_ex, b_ex = _exact_params(point, level, d, sign)
        if a_ex is None:
            raise ChainError("m0 is not available at this point", "multiplier")
        with mpmath.workprec(work):
            z, a, b = (e.evaluate(work).value for e in (z_ex, a_ex, b_ex))
    else:
        nm = point.numeric
        with mpmath.workprec(work):
            tol = mpmath.mpf(2) ** (-work // 2)
            alpha, beta = nm["alpha0"], nm["beta0"]
            z = _real(4 * alpha * beta, "z", tol)
            b = _real((beta - alpha) * mpmath.sqrt(mpmath.mpf(N.numerator) / N.denominator), "b", tol)
            a = _real(-2 * alpha * beta * (nm["dm0"] / nm["dalpha0"]) * d / mpmath.sqrt(level), "a", tol)
            nm = dict(nm, z=z, a=a, b=b)
        z_ex, a_ex, b_ex = _recognize_params(nm, level, d, sign, work)
    with mpmath.workprec(work):
        if not abs(z) < 1:
            raise ChainError(f"|z| = {mpmath.nstr(abs(z), 10)} >= 1: series does not converge", "certificate")
        if (z > 0) != (sign == "pos") or z == 0:
            raise ChainError(f"z has the wrong sign for a {sign} series", "certificate")
        if not b > 0:
            raise ChainError("b is not positive", "certificate")
    bits = precision_bits

    def cv(num, ex):
        return CertValue(HPReal(num, bits) if ex is None else ex.evaluate(bits), ex)

    extras = {}
    if sign == "pos":
        with mpmath.workprec(work):
            m0 = _real(point.numeric["m0"], "m0", mpmath.mpf(2) ** (-work // 2))
            alpha0 = _real(point.numeric["alpha0"], "alpha0", mpmath.mpf(2) ** (-work // 2))
        if not 0 < m0 < 1:
            raise ChainError("m0 not in (0, 1)", "multiplier")
        extras["alpha0"] = cv(alpha0, point.alpha0 if point.exact_chain else None)
        extras["m0"] = cv(m0, point.m0 if point.exact_chain else None)
    root_label = point.candidate.label
    if point.candidate.zeta == -1:
        root_label += ", v0=-u0"
    return SeriesCertificate(
        level=level, s=info.s, degree=d, sign=sign,
        z=cv(z, z_ex), a=cv(a, a_ex), b=cv(b, b_ex),
        nome_q=nome(level, d, sign, bits),
        precision_bits=bits,
        source={"equation_file": equation_file, "root": root_label},
        **extras,
    )


@dataclass(frozen=True)
class Derivation:
    certificate: SeriesCertificate
    point: SingularPoint
    candidates: tuple
    rejected: tuple  # (label, reason)
    nome_residual: object


def derive(me: ModularEquation, sign: str = "pos", root: Union[None, int, str, Fraction] = None,
           precision_bits: int = 200, zetas: tuple[int, ...] = (1, -1),
           equation_file: str = "", nome_check: bool = True) -> Derivation:
    """Locate the singular point and emit the certificate, with diagnostics.

    ``root`` is None (automatic policy), a candidate index, or a value
    (exact rational or decimal string) of u0.
    """
    if not me.verified:
        log.warning("equation only verified through q^%d", me.verified_order)
    cands = singular_candidates(me, sign, precision_bits, zetas)
    if root is not None:
        chosen = [_pick(cands, root, me, sign)]
    else:
        chosen = cands
    if not chosen:
        raise RootError(f"no {sign} singular-point candidates for (level {me.level}, p {me.p})")
    rejected = []
    last_err: Optional[DerivationError] = None
    for cand in chosen:
        try:
            point = singular_point(me, cand, precision_bits)
            cert = _build(me, point, sign, precision_bits, equation_file)
        except DerivationError as exc:
            rejected.append((cand.label, f"{exc.step}: {exc}"))
            last_err = exc
            continue
        with mpmath.workprec(192):
            res = nome_residual(me.level, point.numeric["alpha0"], cert.nome_q)
        if nome_check and root is None and res > mpmath.mpf(2) ** -96:
            rejected.append((cand.label, f"nome: alpha0 differs from x(q) (relative {mpmath.nstr(res, 5)})"))
            continue
        return Derivation(cert, point, tuple(cands), tuple(rejected), res)
    if root is not None and last_err is not None:
        raise last_err
    raise ChainError(
        "no candidate passed the chain checks: " + "; ".join(f"{l} ({r})" for l, r in rejected),
        "certificate",
    )


def _pick(cands: list[RootCandidate], root, me: ModularEquation, sign: str) -> RootCandidate:
    if isinstance(root, int) and not isinstance(root, bool):
        if not 0 <= root < len(cands):
            raise RootError(f"root index {root} out of range (0..{len(cands) - 1})")
        return cands[root]
    try:
        value = Fraction(str(root))
    except (ValueError, ZeroDivisionError):
        raise RootError(f"cannot parse root value {root!r}") from None
    for c in cands:
        if c.exact is not None and c.exact == value:
            return c
    for c in cands:
        with mpmath.workprec(128):
            u = c.u0.real
            if c.u0.imag == 0 and abs(u - mpmath.mpf(value.numerator) / value.denominator) <= mpmath.mpf(10) ** -12 * max(1, abs(u)):
                return c
    raise RootError(f"{root} is not a {sign} singular-point root of P(u, +-u)")


def derive_certificate(me: ModularEquation, root=None, sign: str = "pos", precision_bits: int = 200,
                       equation_file: str = "") -> SeriesCertificate:
    return derive(me, sign, root, precision_bits, equation_file=equation_file).certificate
