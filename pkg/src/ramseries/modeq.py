"""Russell-form modular equations P(u, v) = 0 of levels 2, 3, 4 and prime degree.

With alpha = x(q^p), beta = x(q), the auxiliary series are

    u = (alpha * beta)^(1/h),   v = ((1 - alpha)(1 - beta))^(1/h)

and P is the polynomial of total degree ``dpol`` with constant term -1 that
annihilates (u(q), v(q)).  Its coefficients are found from the q-expansion
coefficients 0..sb-1 and then checked exactly through q^(sb+guard-1).
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from . import kernels
from .linsolve import (
    InconsistentSystemError,
    SolveError,
    UnderdeterminedSystemError,
    solve_bareiss,
    solve_multimodular,
)
from .modfunc import LEADING, modular_unit
from .series import PowerSeries, _integerize, kronecker_mul, ps_compose_qpower, ps_mul, ps_nth_root

log = logging.getLogger(__name__)

DEFAULT_GUARD = 30

__all__ = [
    "ShapeError",
    "SeriesOrderError",
    "SolveError",
    "InconsistentSystemError",
    "UnderdeterminedSystemError",
    "EquationShape",
    "BivariatePoly",
    "ModularEquation",
    "equation_shape",
    "russell_series",
    "solve_modular_equation",
    "check_equation",
    "is_symmetric",
]


class ShapeError(ValueError):
    """(level, p) violates the hypotheses of the level's existence statement."""


class SeriesOrderError(SolveError):
    pass


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % k for k in range(2, math.isqrt(n) + 1))


@dataclass(frozen=True)
class EquationShape:
    level: int
    p: int
    h: int
    dpol: int
    sb: int
    guard: int = DEFAULT_GUARD

    @property
    def conjectural(self) -> bool:
        """Level 2 rests on a conjecture; levels 3 and 4 on theorems."""
        return self.level == 2

    @property
    def u_valuation(self) -> int:
        return (self.p + 1) // self.h

    @property
    def nunknowns(self) -> int:
        return self.dpol * (self.dpol + 3) // 2


def equation_shape(level: int, p: int, guard: int = DEFAULT_GUARD) -> EquationShape:
    """Root exponent h, degree dpol and solve order sb = dpol (dpol + 1)."""
    if level not in (2, 3, 4):
        raise ShapeError(f"level must be 2, 3 or 4 (got {level})")
    if guard < 0:
        raise ShapeError("guard order must be non-negative")
    if not _is_prime(p):
        raise ShapeError(f"degree {p} is not prime")
    if level == 4:
        if p == 2:
            raise ShapeError("level 4 (Russell's theorem) requires an odd prime")
        val = Fraction(p + 1, 8)
        h, dpol = 8 // val.denominator, val.numerator
    elif level == 3:
        if p <= 3:
            raise ShapeError("level 3 (Chan-Liaw theorem) requires a prime p > 3")
        val = Fraction(p + 1, 3)
        h, dpol = 6 // val.denominator, val.numerator
    else:
        if p == 2:
            raise ShapeError("level 2 conjecture requires an odd prime")
        val = Fraction(p + 1, 4)
        h, dpol = 4 // val.denominator, (p + 1) // 2
    if (p + 1) % h:
        raise ShapeError(f"h = {h} does not divide p + 1 = {p + 1}")
    return EquationShape(level, p, h, dpol, dpol * (dpol + 1), guard)


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BivariatePoly:
    """Sparse P(u, v) = sum c[i, j] u^i v^j; zero coefficients are not stored."""

    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (i, j), c in self.coeffs.items():
            c = Fraction(c)
            if c:
                clean[(int(i), int(j))] = c.numerator if c.denominator == 1 else c
        object.__setattr__(self, "coeffs", clean)

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.coeffs), default=0)

    def __getitem__(self, key) -> Fraction:
        return self.coeffs.get(key, 0)

    def monomials(self) -> list[tuple[int, int, Fraction]]:
        """Nonzero terms sorted by (total degree, u-exponent)."""
        return sorted(((i, j, c) for (i, j), c in self.coeffs.items()), key=lambda t: (t[0] + t[1], t[0]))

    def is_integral(self) -> bool:
        return all(isinstance(c, int) for c in self.coeffs.values())

    def evaluate(self, u, v):
        return sum(c * u ** i * v ** j for (i, j), c in self.coeffs.items())

    def partial(self, du: int = 0, dv: int = 0) -> "BivariatePoly":
        out = {}
        for (i, j), c in self.coeffs.items():
            if i < du or j < dv:
                continue
            f = math.perm(i, du) * math.perm(j, dv)
            out[(i - du, j - dv)] = c * f
        return BivariatePoly(out)

    def diagonal(self, zeta: int = 1) -> list:
        """Coefficients of P(u, zeta*u), index = exponent."""
        deg = self.degree
        out = [0] * (deg + 1)
        for (i, j), c in self.coeffs.items():
            out[i + j] += c * zeta ** j
        return out

    def __str__(self):
        parts = []
        for i, j, c in reversed(self.monomials()):
            mono = "*".join(x for x in (f"u^{i}" if i > 1 else "u" if i else "", f"v^{j}" if j > 1 else "v" if j else "") if x)
            if not mono:
                parts.append(f"{c}")
            elif c in (1, -1):
                parts.append(mono if c == 1 else f"-{mono}")
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ") or "0"


def is_symmetric(P: BivariatePoly) -> bool:
    return all(P[(j, i)] == c for (i, j), c in P.coeffs.items())


# ---------------------------------------------------------------------------
# u(q), v(q)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16)
def russell_series(level: int, p: int, h: int, order: int) -> tuple[PowerSeries, PowerSeries]:
    """Exact u(q), v(q) through q^order."""
    c = LEADING[level]
    y = modular_unit(level, order)
    y_p = ps_compose_qpower(y, p)
    w = ps_mul(y_p, y)  # alpha * beta / (c^2 q^(p+1))
    # u = (c^2 q^(p+1) w)^(1/h); taking the root of the unit keeps full order
    lead = ps_nth_root(PowerSeries([c * c], 0).shift(p + 1), h)  # c^(2/h) q^((p+1)/h)
    u = ps_nth_root(w, h)
    u = (u * lead.coeffs[-1]).shift(lead.order).truncate(order)
    alpha = (y_p * c).shift(p).truncate(order)
    beta = (y * c).shift(1).truncate(order)
    v = ps_nth_root(ps_mul(1 - alpha, 1 - beta), h)
    return u, v


def _monomial_order(dpol: int) -> list[tuple[int, int]]:
    """Graded lexicographic with u > v: u, v, u^2, uv, v^2, ..."""
    return [(i, k - i) for k in range(1, dpol + 1) for i in range(k, -1, -1)]


def _residues(s: PowerSeries, n: int, p: int) -> Optional[list[int]]:
    out = []
    for c in s.coeffs[:n]:
        d = c.denominator % p
        if d == 0:
            return None
        out.append(c.numerator * pow(d, -1, p) % p)
    return out


def evaluate_on_series(P: BivariatePoly, u: PowerSeries, v: PowerSeries) -> list[int]:
    """Integer multiple L * P(u(q), v(q)) through the common order, L > 0.

    The scaling clears the denominators of u and v, so only integer
    convolutions are needed; vanishing is unaffected.
    """
    n = min(u.order, v.order)
    ui, du = _integerize(u.coeffs[: n + 1])
    vi, dv = _integerize(v.coeffs[: n + 1])
    coeff_den = 1
    for c in P.coeffs.values():
        if isinstance(c, Fraction):
            coeff_den = coeff_den * c.denominator // math.gcd(coeff_den, c.denominator)
    umax = max((i for i, _ in P.coeffs), default=0)
    vmax = max((j for _, j in P.coeffs), default=0)
    upow = [[1] + [0] * n]
    for _ in range(umax):
        upow.append(kronecker_mul(upow[-1], ui, n))
    # Horner in v: total = sum_j acc_j * dv^(vmax - j) * v^j
    total = None
    for j in range(vmax, -1, -1):
        acc = [0] * (n + 1)
        for i in range(umax + 1):
            c = P[(i, j)]
            if not c:
                continue
            scale = int(c * coeff_den) * du ** (umax - i)
            row = upow[i]
            for k in range(n + 1):
                if row[k]:
                    acc[k] += scale * row[k]
        if total is None:
            total = acc
            continue
        total = kronecker_mul(total, vi, n)
        f = dv ** (vmax - j)
        for k in range(n + 1):
            if acc[k]:
                total[k] += f * acc[k]
    return total


def _first_nonzero(vals: list[int]) -> Optional[int]:
    return next((k for k, x in enumerate(vals) if x), None)


# ---------------------------------------------------------------------------
# ModularEquation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModularEquation:
    shape: EquationShape
    P: BivariatePoly
    verified_order: int
    integral: bool = True

    @property
    def level(self) -> int:
        return self.shape.level

    @property
    def p(self) -> int:
        return self.shape.p

    @property
    def h(self) -> int:
        return self.shape.h

    @property
    def conjectural_shape(self) -> bool:
        return self.shape.conjectural

    @property
    def verified(self) -> bool:
        return self.verified_order >= self.shape.sb + self.shape.guard - 1

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "p": self.p,
            "h": self.h,
            "degree": self.P.degree,
            "constant": str(self.P[(0, 0)]),
            "monomials": [
                {"i": i, "j": j, "c": str(c)} for i, j, c in self.P.monomials() if (i, j) != (0, 0)
            ],
            "verified_order": self.verified_order,
            "conjectural_shape": self.conjectural_shape,
            "integral": self.integral,
            "sb": self.shape.sb,
            "guard": self.shape.guard,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1) + "\n"

    @classmethod
    def from_json(cls, data: dict) -> "ModularEquation":
        shape = equation_shape(int(data["level"]), int(data["p"]), int(data.get("guard", DEFAULT_GUARD)))
        if int(data["h"]) != shape.h:
            raise ValueError(f"h = {data['h']} inconsistent with (level, p) = ({shape.level}, {shape.p})")
        coeffs = {(0, 0): Fraction(data["constant"])}
        for m in data["monomials"]:
            coeffs[(int(m["i"]), int(m["j"]))] = Fraction(m["c"])
        P = BivariatePoly(coeffs)
        if P.degree != int(data["degree"]):
            raise ValueError("stated degree does not match the monomials")
        return cls(shape, P, int(data["verified_order"]), bool(data.get("integral", P.is_integral())))

    @classmethod
    def load(cls, path) -> "ModularEquation":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())


def _verify_order(shape: EquationShape, P: BivariatePoly, order: int) -> Optional[int]:
    u, v = russell_series(shape.level, shape.p, shape.h, order)
    return _first_nonzero(evaluate_on_series(P, u, v))


def solve_modular_equation(
    level: int,
    p: int,
    guard: int = DEFAULT_GUARD,
    method: str = "multimodular",
    backend=None,
) -> ModularEquation:
    """Find P(u, v) for (level, p) and verify it through q^(sb + guard - 1).

    ``method`` is ``"multimodular"`` (default) or ``"bareiss"``.  The
    solution is normalized by the constant term -1; if it is not integral
    the coefficients stay rational and ``integral`` is False.
    """
    shape = equation_shape(level, p, guard)
    if shape.dpol * shape.u_valuation >= shape.sb:
        raise SeriesOrderError(
            f"solve order {shape.sb} does not reach u^{shape.dpol} (valuation {shape.dpol * shape.u_valuation})"
        )
    check_order = shape.sb + shape.guard - 1
    u, v = russell_series(level, p, shape.h, max(check_order, shape.sb - 1))
    monos = _monomial_order(shape.dpol)
    ncols = len(monos)
    nrows = shape.sb

    def to_poly(sol) -> BivariatePoly:
        coeffs = {(0, 0): -1}
        coeffs.update({m: c for m, c in zip(monos, sol)})
        return BivariatePoly(coeffs)

    def verify(sol) -> bool:
        total = evaluate_on_series(to_poly(sol), u.truncate(check_order), v.truncate(check_order))
        return not any(total)

    if method == "multimodular":
        kern = backend or kernels

        def build_rows(prime: int):
            ur = _residues(u, nrows, prime)
            vr = _residues(v, nrows, prime)
            if ur is None or vr is None:
                return None
            mat = kern.monomial_matrix_mod(ur, vr, shape.dpol, nrows, prime)
            rows = [list(r) + [1 if k == 0 else 0] for k, r in enumerate(mat)]
            return rows

        sol, stats = solve_multimodular(build_rows, ncols, verify, backend=kern)
        log.info("(%d, %d): %d primes", level, p, stats.primes_used)
    elif method == "bareiss":
        # integer matrix: scale column (i, j) by du^i dv^j
        ui, du = _integerize(u.coeffs[:nrows])
        vi, dv = _integerize(v.coeffs[:nrows])
        n = nrows - 1
        upow, vpow = [[1] + [0] * n], [[1] + [0] * n]
        for _ in range(shape.dpol):
            upow.append(kronecker_mul(upow[-1], ui, n))
            vpow.append(kronecker_mul(vpow[-1], vi, n))
        L = du ** shape.dpol * dv ** shape.dpol
        cols = [kronecker_mul(upow[i], vpow[j], n) for i, j in monos]
        aug = [[col[k] * du ** (shape.dpol - i) * dv ** (shape.dpol - j) for col, (i, j) in zip(cols, monos)]
               + [L if k == 0 else 0] for k in range(nrows)]
        sol = solve_bareiss(aug, ncols)
        if not verify(sol):
            raise InconsistentSystemError(
                f"solution of the first {nrows} equations fails at higher order"
            )
    else:
        raise ValueError(f"unknown method {method!r}")

    P = to_poly(sol)
    return ModularEquation(shape, P, check_order, P.is_integral())


def check_equation(me: ModularEquation, extra_order: int) -> tuple[int, ModularEquation]:
    """Recheck P(u, v) through q^(sb + extra_order).

    Returns ``(order, updated)``: the first q-exponent with a nonzero
    coefficient, or the checked order when everything vanishes, together
    with the equation carrying the updated ``verified_order``.
    """
    if extra_order < 1:
        raise ValueError("extra_order must be positive")
    order = me.shape.sb + extra_order
    bad = _verify_order(me.shape, me.P, order)
    if bad is None:
        return order, replace(me, verified_order=max(order, me.verified_order))
    return bad, replace(me, verified_order=min(me.verified_order, bad - 1))
