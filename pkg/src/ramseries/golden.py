"""Embedded reference data and the self-test suite built on it."""
from __future__ import annotations

import json
import re
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

import mpmath

from .modeq import BivariatePoly

_TERM = re.compile(r"^([+-]?)(\d*)\*?\((.*)\)$")
_MONO = re.compile(r"^(?:u(?:\^(\d+))?)?\*?(?:v(?:\^(\d+))?)?$")


def _monomial(text: str) -> tuple[int, int]:
    text = text.strip()
    m = _MONO.match(text)
    if not text or m is None:
        raise ValueError(f"bad monomial {text!r}")
    i = 0 if "u" not in text else int(m.group(1) or 1)
    j = 0 if "v" not in text else int(m.group(2) or 1)
    return i, j


def parse_orbit_poly(text: str) -> BivariatePoly:
    """Parse lines like ``-15*(u^14+v^14)``: a coefficient times a sum of monomials.

    A bare integer line is the constant term; a trailing ``;`` is ignored.
    """
    coeffs: dict = {}
    for raw in text.splitlines():
        line = raw.strip().rstrip(";").replace(" ", "")
        if not line:
            continue
        if re.fullmatch(r"[+-]?\d+", line):
            coeffs[(0, 0)] = coeffs.get((0, 0), 0) + int(line)
            continue
        m = _TERM.match(line)
        if m is None:
            raise ValueError(f"cannot parse line {raw!r}")
        sign, digits, body = m.groups()
        c = int(digits or 1) * (-1 if sign == "-" else 1)
        for mono in body.split("+"):
            key = _monomial(mono)
            coeffs[key] = coeffs.get(key, 0) + c
    return BivariatePoly(coeffs)


def _data_dir(path: Optional[str]) -> Path:
    if path is not None:
        return Path(path)
    return Path(str(resources.files("ramseries") / "data"))


def load_golden(path: Optional[str] = None) -> dict:
    d = _data_dir(path)
    data = json.loads((d / "golden.json").read_text())
    data["equation"]["P"] = parse_orbit_poly((d / data["equation"]["file"]).read_text())
    return data


def golden_equation_poly(path: Optional[str] = None) -> BivariatePoly:
    return load_golden(path)["equation"]["P"]


def surd_from(entry):
    """A golden value: a rational string or {"a", "b", "D"} for a + b*sqrt(D)."""
    from .numerics import QuadraticSurd

    if isinstance(entry, dict):
        return QuadraticSurd.from_parts(Fraction(entry["a"]), Fraction(entry["b"]), int(entry["D"]))
    return Fraction(entry)


def _same(x, y) -> bool:
    from .numerics import QuadraticSurd

    return QuadraticSurd._coerce(x) == QuadraticSurd._coerce(y)


# ---------------------------------------------------------------------------
# self test
# ---------------------------------------------------------------------------

def selftest_items(path: Optional[str] = None) -> list[tuple[str, Callable[[], Optional[str]]]]:
    """(name, check) pairs; a check returns None on success or a message."""
    from .derive import derive, digits_to_bits
    from .modeq import ModularEquation, equation_shape, solve_modular_equation
    from .verify import hyp2f1, verify_certificate

    g = load_golden(path)
    state: dict = {}

    def equation():
        eq = g["equation"]
        me = solve_modular_equation(eq["level"], eq["p"])
        state["me"] = me
        if me.h != eq["h"] or me.P.degree != eq["degree"]:
            return f"shape h={me.h}, degree={me.P.degree}"
        if me.P != eq["P"]:
            diff = sorted(set(me.P.coeffs.items()) ^ set(eq["P"].coeffs.items()))
            return f"{len(diff)} coefficient(s) differ, first at u^{diff[0][0][0]} v^{diff[0][0][1]}"
        return None

    def chain():
        me = state.get("me")
        if me is None:
            eq = g["equation"]
            me = ModularEquation(equation_shape(eq["level"], eq["p"]), eq["P"], 0)
        d = derive(me, "pos", root=Fraction(g["chain"]["u0"]), precision_bits=digits_to_bits(50))
        state["derivation"] = d
        pt = d.point
        for name, want in g["chain"].items():
            got = getattr(pt, name)
            if got is None or not _same(got, surd_from(want)):
                return f"{name} = {got}, expected {surd_from(want)}"
        return None

    def series():
        d = state.get("derivation")
        if d is None:
            return "no derivation available"
        cert = d.certificate
        for name in ("z", "a", "b"):
            want = surd_from(g["series"][name])
            got = getattr(cert, name).exact
            if got is None or not _same(got, want):
                return f"{name} = {got}, expected {want}"
        ratio = cert.a.exact / cert.b.exact
        if not _same(ratio, Fraction(g["series"]["a_over_b"])):
            return f"a/b = {ratio}"
        return None

    def verification():
        d = state.get("derivation")
        if d is None:
            return "no derivation available"
        rep = verify_certificate(d.certificate, 50)
        if not rep.ok:
            return f"residual {rep.residual}"
        want = g["series"]["multiplier_decimal"]
        cert = d.certificate
        alpha = cert.alpha0.at(160)
        with mpmath.workprec(128):
            ratio = hyp2f1(cert.s, alpha, 128).value / hyp2f1(cert.s, 1 - alpha, 128).value
            got = mpmath.nstr(ratio, len(want) - 2)
        if got != want:
            return f"F(alpha0)/F(beta0) = {got}, expected {want}"
        return None

    def classical():
        for item in g["classical"]:
            me = solve_modular_equation(item["level"], item["p"])
            want = BivariatePoly({tuple(map(int, k.split(","))): Fraction(v) for k, v in item["P"].items()})
            if me.h != item["h"] or me.P != want:
                return f"level {item['level']}, p {item['p']}: got {me.P} with h = {me.h}"
        return None

    return [
        ("modular equation (2, 29)", equation),
        ("derivative chain at the rational singular point", chain),
        ("series parameters z, a, b", series),
        ("numerical verification and multiplier", verification),
        ("classical level-4 equations", classical),
    ]


def run_selftest(path: Optional[str] = None, write=print) -> Optional[str]:
    """Run the golden suite in order; returns the first failing item name, or None."""
    try:
        items = selftest_items(path)
    except (OSError, ValueError, KeyError) as exc:
        write(f"FAIL  golden data: {exc}")
        return "golden data"
    for name, check in items:
        try:
            msg = check()
        except Exception as exc:  # a crash is a failure of that item
            msg = f"{type(exc).__name__}: {exc}"
        if msg is not None:
            write(f"FAIL  {name}: {msg}")
            return name
        write(f"PASS  {name}")
    return None
