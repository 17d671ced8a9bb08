"""Exact solution of the overdetermined integer systems produced by the solver.

Two routes:

* :func:`solve_multimodular` reduces the system modulo word-size primes,
  row-reduces with the selected kernel backend, lifts by CRT and rational
  reconstruction, and hands each candidate to a caller-supplied exact check.
* :func:`solve_bareiss` performs fraction-free elimination over the integers.
  It is exact without any check but only practical for small systems.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from . import kernels

log = logging.getLogger(__name__)


class SolveError(Exception):
    """The linear system has no unique solution."""


class InconsistentSystemError(SolveError):
    pass


class UnderdeterminedSystemError(SolveError):
    def __init__(self, nullity: int, message: str = ""):
        self.nullity = nullity
        super().__init__(message or f"linear system underdetermined (nullity {nullity})")


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17):  # deterministic below 3.4e14
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def word_primes(start: int = (1 << 31) - 1):
    """Primes below 2**31 in decreasing order (deterministic sequence)."""
    n = start
    while n > 2:
        if _is_probable_prime(n):
            yield n
        n -= 2 if n % 2 else 1


def rational_reconstruction(a: int, m: int) -> Optional[Fraction]:
    """r/s with r = a*s mod m, |r|, s <= sqrt(m/2); None if none exists."""
    a %= m
    bound = math.isqrt(m // 2)
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    if math.gcd(r1, abs(s1)) != 1:
        return None
    return Fraction(r1, s1)


def _residue(x: Fraction, p: int) -> Optional[int]:
    d = x.denominator % p
    if d == 0:
        return None
    return x.numerator * pow(d, -1, p) % p


@dataclass
class ModularSolveStats:
    primes_used: int = 0
    primes_skipped: int = 0
    candidates_checked: int = 0


def solve_multimodular(
    build_rows: Callable[[int], Optional[list[list[int]]]],
    ncols: int,
    verify: Callable[[list[Fraction]], bool],
    max_primes: int = 400,
    backend=None,
) -> tuple[list[Fraction], ModularSolveStats]:
    """Solve ``A x = rhs`` for a system only available modulo primes.

    ``build_rows(p)`` returns the augmented matrix mod ``p`` (last column is
    the right-hand side) or None if ``p`` divides a denominator.  ``verify``
    is the mandatory exact check of a lifted candidate.
    """
    row_reduce = (backend or kernels).row_reduce_mod
    stats = ModularSolveStats()
    modulus = 1
    residues: Optional[list[int]] = None
    previous: Optional[list[Fraction]] = None
    failures: list[tuple[str, int]] = []
    for p in word_primes():
        if stats.primes_used + stats.primes_skipped >= max_primes:
            break
        mat = build_rows(p)
        if mat is None:
            stats.primes_skipped += 1
            continue
        rows, pivots = row_reduce(mat, p)
        if pivots and pivots[-1] == ncols:
            failures.append(("inconsistent", len(pivots) - 1))
        elif len(pivots) < ncols:
            failures.append(("rank", len(pivots)))
        else:
            sol = [rows[i][ncols] for i in range(ncols)]
            stats.primes_used += 1
            if residues is None:
                residues, modulus = sol, p
            else:
                # CRT merge
                inv = pow(modulus, -1, p)
                residues = [
                    r + modulus * (((s - r) * inv) % p) for r, s in zip(residues, sol)
                ]
                modulus *= p
            cand = [rational_reconstruction(r, modulus) for r in residues]
            if all(c is not None for c in cand):
                if cand == previous:
                    stats.candidates_checked += 1
                    if verify(cand):
                        log.debug("multimodular solve: %d primes", stats.primes_used)
                        return cand, stats
                previous = cand
            else:
                previous = None
            continue
        stats.primes_skipped += 1
        if len(failures) >= 3 and stats.primes_used == 0:
            kinds = {k for k, _ in failures}
            if kinds == {"inconsistent"}:
                raise InconsistentSystemError("linear system is inconsistent modulo every tried prime")
            best = max(r for _, r in failures)
            raise UnderdeterminedSystemError(ncols - best)
    raise SolveError(f"no verified solution after {max_primes} primes")


def solve_bareiss(aug: Sequence[Sequence[int]], ncols: int) -> list[Fraction]:
    """Fraction-free elimination on an integer augmented matrix.

    Rows are processed in order, pivots chosen as the first row with a
    nonzero entry in the current column.
    """
    m = [list(map(int, row)) for row in aug]
    nr = len(m)
    width = ncols + 1
    # strip row contents, then column contents (x_k is rescaled at the end)
    for row in m:
        g = math.gcd(*row)
        if g > 1:
            row[:] = [x // g for x in row]
    colscale = []
    for k in range(ncols):
        g = math.gcd(*(row[k] for row in m)) or 1
        if g > 1:
            for row in m:
                row[k] //= g
        colscale.append(g)
    prev = 1
    r = 0
    pivots = []
    for c in range(width):
        if r == nr:
            break
        sel = next((i for i in range(r, nr) if m[i][c]), None)
        if sel is None:
            continue
        m[r], m[sel] = m[sel], m[r]
        piv = m[r][c]
        for i in range(r + 1, nr):
            f = m[i][c]
            row_i = m[i]
            row_r = m[r]
            for k in range(c, width):
                row_i[k] = (piv * row_i[k] - f * row_r[k]) // prev
        prev = piv
        pivots.append(c)
        r += 1
    if pivots and pivots[-1] == ncols:
        raise InconsistentSystemError("linear system is inconsistent")
    if len(pivots) < ncols:
        raise UnderdeterminedSystemError(ncols - len(pivots))
    x = [Fraction(0)] * ncols
    for i in range(ncols - 1, -1, -1):
        acc = Fraction(m[i][ncols])
        for k in range(i + 1, ncols):
            if m[i][k]:
                acc -= m[i][k] * x[k]
        x[i] = acc / m[i][i]
    return [xi / g for xi, g in zip(x, colscale)]
