"""Numerical certification of derived series against an independent pi.

``hyp2f1`` evaluates F(x) = 2F1(1/s, 1 - 1/s; 1; x).  For x <= 1/2 it sums
the Gauss series; closer to 1 it uses the logarithmic expansion in 1 - x
(the c = a + b connection formula)

    F(x) = sin(pi a)/pi * sum_n (a)_n (1-a)_n / n!^2 * (h_n - log(1 - x)) (1 - x)^n,
    h_n = 2 psi(n+1) - psi(a+n) - psi(1-a+n),

so points like beta0 = 1 - 10^-8 cost no more than points near 0.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import mpmath

from .derive import SeriesCertificate, digits_to_bits
from .numerics import HPReal, compute_pi

MARGIN_DIGITS = 5
MIN_DIGITS = 10

__all__ = [
    "hyp2f1",
    "hyp2f1_agm",
    "sum_ramanujan",
    "verify_certificate",
    "VerificationReport",
    "MARGIN_DIGITS",
    "MIN_DIGITS",
]

_S_VALUES = (2, 3, 4, 6)


def _h0(s: int):
    """2 psi(1) - psi(1/s) - psi(1 - 1/s), from Gauss's digamma theorem."""
    ln2, ln3 = mpmath.log(2), mpmath.log(3)
    return {2: 4 * ln2, 3: 3 * ln3, 4: 6 * ln2, 6: 4 * ln2 + 3 * ln3}[s]


def _sin_pi_over(s: int):
    return {2: mpmath.mpf(1), 3: mpmath.sqrt(3) / 2, 4: mpmath.sqrt(2) / 2, 6: mpmath.mpf(1) / 2}[s]


def _coerce_x(x, prec: int):
    if isinstance(x, HPReal):
        return x.value
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def hyp2f1(s: int, x, precision_bits: int) -> HPReal:
    """2F1(1/s, 1 - 1/s; 1; x) for 0 <= x < 1, absolute error below 2^(-precision_bits + 8)."""
    if s not in _S_VALUES:
        raise ValueError(f"s must be one of {_S_VALUES} (got {s})")
    work = precision_bits + 32
    with mpmath.workprec(work):
        x = _coerce_x(x, work)
        if not 0 <= x < 1:
            raise ValueError("hyp2f1 needs 0 <= x < 1")
        eps = mpmath.mpf(2) ** (-precision_bits + 8) / 4
        a = Fraction(1, s)
        if x <= mpmath.mpf(1) / 2:
            total = _gauss_series(a, x, eps)
        else:
            total = _log_series(s, a, 1 - x, eps, work)
    return HPReal(total, precision_bits)


def _gauss_series(a: Fraction, x, eps):
    # every term ratio (n+a)(n+1-a)/(n+1)^2 * x is below x, so the tail
    # after term n is at most |t_{n+1}| / (1 - x)
    term = mpmath.mpf(1)
    total = mpmath.mpf(0)
    n = 0
    while True:
        total += term
        ratio = (n + a) * (n + 1 - a) / Fraction((n + 1) ** 2)
        term = term * (mpmath.mpf(ratio.numerator) / ratio.denominator) * x
        n += 1
        if abs(term) / (1 - x) < eps:
            return total


def _log_series(s: int, a: Fraction, y, eps, work: int):
    L = -mpmath.log(y)
    h = _h0(s)
    c = mpmath.mpf(1)  # (a)_n (1-a)_n / n!^2, decreasing
    yn = mpmath.mpf(1)
    total = mpmath.mpf(0)
    n = 0
    while True:
        total += c * (h + L) * yn
        ratio = (n + a) * (n + 1 - a) / Fraction((n + 1) ** 2)
        c = c * (mpmath.mpf(ratio.numerator) / ratio.denominator)
        h = h + mpmath.mpf(2) / (n + 1) - 1 / (a.numerator / mpmath.mpf(a.denominator) + n) \
            - 1 / (1 - a.numerator / mpmath.mpf(a.denominator) + n)
        yn = yn * y
        n += 1
        # tail: h_m + L <= A + 2 (m - n) / n for m >= n, c_m <= c_n
        A = h + L
        tail = c * yn * (A / (1 - y) + 2 * y / (n * (1 - y) ** 2))
        if tail < eps:
            break
    pi = compute_pi(work).value
    return _sin_pi_over(s) / pi * total


def hyp2f1_agm(x, precision_bits: int) -> HPReal:
    """2F1(1/2, 1/2; 1; x) = 1 / agm(1, sqrt(1 - x)); an independent check for s = 2."""
    with mpmath.workprec(precision_bits + 32):
        x = _coerce_x(x, precision_bits + 32)
        return HPReal(1 / mpmath.agm(1, mpmath.sqrt(1 - x)), precision_bits)


def sum_ramanujan(cert: SeriesCertificate, precision_bits: int) -> tuple[HPReal, int]:
    """Sum t_n (a + b n) z^n to absolute error 2^(-precision_bits + 8).

    t_n = (1/2)_n (1/s)_n (1 - 1/s)_n / n!^3 is kept as an exact rational.
    Its ratio is below 1, so the tail after term N is bounded by
    |t_{N+1} z^{N+1}| (|a| + |b| (N+1)) / (1 - |z|)^2.
    """
    work = precision_bits + 32
    s = cert.s
    with mpmath.workprec(work):
        z, a, b = (v.at(work).value for v in (cert.z, cert.a, cert.b))
        if not abs(z) < 1:
            raise ValueError("|z| >= 1: the series diverges")
        eps = mpmath.mpf(2) ** (-precision_bits + 8)
        t = Fraction(1)
        zn = mpmath.mpf(1)
        total = mpmath.mpf(0)
        n = 0
        while True:
            total += (mpmath.mpf(t.numerator) / t.denominator) * (a + b * n) * zn
            t *= Fraction((2 * n + 1) * (s * n + 1) * (s * n + s - 1), 2 * s * s * (n + 1) ** 3)
            zn *= z
            n += 1
            tail = abs(mpmath.mpf(t.numerator) / t.denominator * zn) * (abs(a) + abs(b) * n) / (1 - abs(z)) ** 2
            if tail < eps:
                break
    return HPReal(total, precision_bits), n


@dataclass(frozen=True)
class VerificationReport:
    certificate_id: str
    digits_requested: int
    precision_bits: int
    terms_used: int
    residual: HPReal
    passed: bool
    consistent: bool = True
    multiplier_residual: Optional[HPReal] = None
    notes: tuple = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return self.passed and self.consistent

    def to_json(self) -> dict:
        return {
            "certificate_id": self.certificate_id,
            "digits_requested": self.digits_requested,
            "precision_bits": self.precision_bits,
            "terms_used": self.terms_used,
            "residual": _short(self.residual),
            "pass": self.passed,
            "consistent": self.consistent,
            "multiplier_residual": None if self.multiplier_residual is None else _short(self.multiplier_residual),
            "notes": list(self.notes),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1) + "\n"

    def summary(self) -> str:
        lines = [
            f"certificate   {self.certificate_id}",
            f"digits        {self.digits_requested} ({self.precision_bits} bits)",
            f"terms         {self.terms_used}",
            f"|S - 1/pi|    {_short(self.residual)}",
        ]
        if self.multiplier_residual is not None:
            lines.append(f"multiplier    |m0 - F(alpha0)/F(beta0)| = {_short(self.multiplier_residual)}")
        lines.extend(f"note          {n}" for n in self.notes)
        lines.append(f"result        {'PASS' if self.ok else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _short(x: HPReal) -> str:
    with mpmath.workprec(64):
        return mpmath.nstr(x.value, 6, min_fixed=1, max_fixed=0) if x.value else "0"


def _consistency(cert: SeriesCertificate) -> list[str]:
    problems = []
    bits = cert.precision_bits
    named = [("z", cert.z), ("a", cert.a), ("b", cert.b), ("alpha0", cert.alpha0), ("m0", cert.m0)]
    for name, cv in named:
        if cv is None or cv.exact is None:
            continue
        ex = cv.exact.evaluate(bits + 16)
        with mpmath.workprec(bits + 16):
            tol = mpmath.mpf(2) ** (-bits + 12) * max(1, abs(ex.value))
            if abs(ex.value - cv.numeric.value) > tol:
                problems.append(f"{name}: exact form disagrees with the numeric value")
    return problems


def _values_for(cert: SeriesCertificate, bits: int, notes: list[str]) -> SeriesCertificate:
    """Drop exact forms that disagree with the numeric values (numeric wins)."""
    from dataclasses import replace

    from .derive import CertValue

    out = {}
    for name in ("z", "a", "b"):
        cv = getattr(cert, name)
        if cv.exact is not None:
            with mpmath.workprec(cert.precision_bits + 16):
                ex = cv.exact.evaluate(cert.precision_bits + 16).value
                if abs(ex - cv.numeric.value) > mpmath.mpf(2) ** (-cert.precision_bits + 12) * max(1, abs(ex)):
                    out[name] = CertValue(cv.numeric, None)
                    continue
        elif bits > cert.precision_bits:
            notes.append(f"{name} has no exact form; only {cert.precision_bits} bits available")
    return replace(cert, **out) if out else cert


def multiplier_residual(cert: SeriesCertificate, precision_bits: int = 128) -> Optional[HPReal]:
    """|m0 - F(alpha0)/F(1 - alpha0)| when the certificate carries alpha0 and m0."""
    if cert.alpha0 is None or cert.m0 is None:
        return None
    alpha0 = cert.alpha0.at(precision_bits + 32)
    with mpmath.workprec(precision_bits + 32):
        beta0 = 1 - alpha0.value
    fa = hyp2f1(cert.s, alpha0, precision_bits + 16)
    fb = hyp2f1(cert.s, beta0, precision_bits + 16)
    m0 = cert.m0.at(precision_bits + 32)
    with mpmath.workprec(precision_bits):
        return HPReal(abs(m0.value - fa.value / fb.value), precision_bits)


def verify_certificate(cert: SeriesCertificate, digits: int) -> VerificationReport:
    """Compare the certificate's series with 1/pi at ``digits`` decimal digits."""
    if digits < MIN_DIGITS:
        raise ValueError(f"digits must be at least {MIN_DIGITS}")
    bits = digits_to_bits(digits)
    notes: list[str] = []
    problems = _consistency(cert)
    notes.extend(problems)
    usable = _values_for(cert, bits, notes)
    total, terms = sum_ramanujan(usable, bits)
    pi = compute_pi(bits + 32)
    with mpmath.workprec(bits + 32):
        residual = HPReal(abs(total.value - 1 / pi.value), bits)
        passed = bool(residual.value < mpmath.mpf(10) ** (-digits + MARGIN_DIGITS))
    mres = None
    if cert.sign == "pos":
        try:
            mres = multiplier_residual(cert)
        except ValueError as exc:
            notes.append(f"multiplier check skipped: {exc}")
    return VerificationReport(
        certificate_id=cert.identifier,
        digits_requested=digits,
        precision_bits=bits,
        terms_used=terms,
        residual=residual,
        passed=passed,
        consistent=not problems,
        multiplier_residual=mres,
        notes=tuple(notes),
    )
