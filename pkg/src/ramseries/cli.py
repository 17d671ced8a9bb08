"""Command-line interface: modeq, derive, verify, pipeline, selftest.

Exit codes
    0  success
    1  verification failed (verify, pipeline, selftest)
    2  bad input: shape error, unknown root, malformed file, digits too small
    3  solve inconsistency or failure of the derivation chain
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import kernels
from .derive import (
    ChainError,
    Derivation,
    DerivationError,
    RootError,
    SeriesCertificate,
    derive,
    diagonal_poly,
    digits_to_bits,
    real_roots,
)
from .linsolve import SolveError
from .modeq import DEFAULT_GUARD, ModularEquation, ShapeError, solve_modular_equation
from .verify import MIN_DIGITS, VerificationReport, verify_certificate

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_SOLVE = 0, 1, 2, 3


class StageError(Exception):
    def __init__(self, stage: str, code: int, message: str):
        super().__init__(message)
        self.stage = stage
        self.code = code


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# ---------------------------------------------------------------------------
# shared stages
# ---------------------------------------------------------------------------

def _backend(name: str):
    if name == "auto":
        return None
    if name == "python":
        return kernels.python_backend
    if name == "cython":
        if kernels.BACKEND != "cython":
            raise StageError("modeq", EXIT_INPUT, "compiled kernels are not available in this build")
        return None
    raise StageError("modeq", EXIT_INPUT, f"unknown backend {name!r}")


def stage_modeq(level: int, prime: int, guard: int, method: str = "multimodular",
                backend: str = "auto") -> ModularEquation:
    try:
        return solve_modular_equation(level, prime, guard, method=method, backend=_backend(backend))
    except ShapeError as exc:
        raise StageError("modeq", EXIT_INPUT, str(exc)) from None
    except SolveError as exc:
        raise StageError("modeq", EXIT_SOLVE, str(exc)) from None


def _zetas(branch: str) -> tuple[int, ...]:
    return {"auto": (1, -1), "plus": (1,), "minus": (-1,)}[branch]


def stage_derive(me: ModularEquation, sign: str, root, bits: int, branch: str,
                 equation_file: str) -> Derivation:
    try:
        return derive(me, sign, root, bits, zetas=_zetas(branch), equation_file=equation_file)
    except RootError as exc:
        raise StageError("derive", EXIT_INPUT, f"{exc.step}: {exc}") from None
    except (ChainError, DerivationError) as exc:
        raise StageError("derive", EXIT_SOLVE, f"{exc.step}: {exc}") from None


def _signs(sign: str) -> list[str]:
    return ["pos", "alt"] if sign == "both" else [sign]


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def _factor_string(me: ModularEquation, zeta: int) -> str:
    """Factored P(u, zeta*u), e.g. (19602*u - 1)*(198*u + 1)^2."""
    import sympy

    u = sympy.Symbol("u")
    poly = diagonal_poly(me, zeta)
    expr = sum(int(c) * u ** k for k, c in enumerate(poly.coeffs))
    content, factors = sympy.factor_list(expr)
    factors = sorted(factors, key=lambda f: (sympy.degree(f[0], u), [abs(int(c)) for c in sympy.Poly(f[0], u).all_coeffs()]))
    parts = [f"({sympy.sstr(sympy.expand(f)).replace('**', '^')})" + (f"^{k}" if k > 1 else "") for f, k in factors]
    head = "" if content == 1 else ("-" if content == -1 else f"{content}*")
    return head + "*".join(parts)


def chain_lines(d: Derivation, me: ModularEquation) -> list[str]:
    """The derivation in proof order: equation, P(u,u), root, alpha, v', v'', alpha', alpha'', m, m', z, b, a."""
    pt = d.point
    cert = d.certificate
    zeta = pt.candidate.zeta
    lines = []
    vname = "u" if zeta == 1 else "-u"
    try:
        lines.append(f"P(u, {vname}) = {_factor_string(me, zeta)}")
    except Exception:  # factorization is cosmetic
        lines.append(f"P(u, {vname}) = {diagonal_poly(me, zeta)}")
    lines.append(f"root          u0 = {pt.candidate.label}, v0 = {'u0' if zeta == 1 else '-u0'}")
    for label, name in (("alpha0", "alpha0"), ("beta0", "beta0"), ("v'0", "dv0"), ("v''0", "ddv0"),
                        ("alpha'0", "dalpha0"), ("beta'0", "dbeta0"), ("alpha''0", "ddalpha0"),
                        ("beta''0", "ddbeta0"), ("m0", "m0")):
        lines.append(f"{label:<14}{_value(pt, name)}")
    if pt.exact_chain and pt.m0 is not None:
        lines.append(f"{'1/m0^2':<14}{_inv_square(pt.m0)}")
    lines.append("m'0".ljust(14) + _value(pt, "dm0"))
    for name in ("z", "b", "a"):
        cv = getattr(cert, name)
        shown = str(cv.exact) if cv.exact is not None else cv.numeric.to_decimal(30)
        lines.append(f"{name:<14}{shown}")
    if cert.a.exact is not None and cert.b.exact is not None:
        try:
            ratio = cert.a.exact / cert.b.exact
            if getattr(ratio, "q", 1) == 0:
                lines.append(f"{'a/b':<14}{ratio}")
        except (TypeError, ValueError, AttributeError):
            pass
    return lines


def _inv_square(m0) -> str:
    return str(1 / (m0 * m0))


def _value(pt, name: str) -> str:
    exact = getattr(pt, name)
    if exact is not None:
        return str(exact)
    import mpmath

    v = pt.numeric.get(name)
    if v is None:
        return "-"
    with mpmath.workprec(128):
        if isinstance(v, mpmath.mpc) and v.imag == 0:
            v = v.real
        return mpmath.nstr(v, 25)


def _equation_summary(me: ModularEquation) -> list[str]:
    return [
        f"level {me.level}, degree p = {me.p}, h = {me.h}",
        f"P(u, v) of total degree {me.P.degree} with {len(me.P.coeffs)} terms"
        + (", symmetric" if all(me.P[(j, i)] == c for (i, j), c in me.P.coeffs.items()) else ""),
        f"verified through q^{me.verified_order}"
        + (" (level-2 shape is conjectural)" if me.conjectural_shape else ""),
    ]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_modeq(args) -> int:
    try:
        me = stage_modeq(args.level, args.prime, args.guard, args.method, args.backend)
    except StageError as exc:
        _err(f"modeq: {exc}")
        return exc.code
    text = me.dumps()
    if args.out:
        _write(args.out, text)
        print("\n".join(_equation_summary(me)))
    else:
        sys.stdout.write(text)
        _err("\n".join(_equation_summary(me)))
    return EXIT_OK


def _parse_root(args):
    if args.root_index is not None:
        return args.root_index
    if args.root_value is not None:
        try:
            Fraction(args.root_value)
        except (ValueError, ZeroDivisionError):
            raise StageError("derive", EXIT_INPUT, f"cannot parse root value {args.root_value!r}") from None
        return args.root_value
    return None


def _load_equation(path: str) -> ModularEquation:
    try:
        return ModularEquation.load(path)
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise StageError("derive", EXIT_INPUT, f"cannot read equation {path}: {exc}") from None


def _cert_paths(out: Optional[str], signs: list[str]) -> dict:
    if out is None:
        return {s: None for s in signs}
    if len(signs) == 1:
        return {signs[0]: out}
    p = Path(out)
    stem = p.name[: -len(p.suffix)] if p.suffix else p.name
    return {s: str(p.with_name(f"{stem}.{s}{p.suffix or '.json'}")) for s in signs}


def cmd_derive(args) -> int:
    if args.digits < 1:
        _err("derive: --digits must be positive")
        return EXIT_INPUT
    try:
        me = _load_equation(args.eq)
        root = _parse_root(args)
        signs = _signs(args.sign)
        results = [stage_derive(me, s, root, digits_to_bits(args.digits), args.branch, args.eq) for s in signs]
    except StageError as exc:
        _err(f"{exc.stage}: {exc}")
        return exc.code
    paths = _cert_paths(args.out, signs)
    if args.out:
        for d in results:
            _write(paths[d.certificate.sign], d.certificate.dumps())
    else:
        if len(results) == 1:
            sys.stdout.write(results[0].certificate.dumps())
        else:
            sys.stdout.write(json.dumps([d.certificate.to_json() for d in results], indent=1) + "\n")
    report = sys.stdout if args.out else sys.stderr
    for d in results:
        print(f"[{d.certificate.sign}]", file=report)
        print("\n".join(chain_lines(d, me)), file=report)
    return EXIT_OK


def _load_certificate(path: str) -> SeriesCertificate:
    try:
        return SeriesCertificate.load(path)
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise StageError("verify", EXIT_INPUT, f"cannot read certificate {path}: {exc}") from None


def cmd_verify(args) -> int:
    if args.digits < MIN_DIGITS:
        _err(f"verify: --digits must be at least {MIN_DIGITS}")
        return EXIT_INPUT
    try:
        cert = _load_certificate(args.cert)
        report = verify_certificate(cert, args.digits)
    except StageError as exc:
        _err(f"verify: {exc}")
        return exc.code
    except ValueError as exc:
        _err(f"verify: {exc}")
        return EXIT_INPUT
    sys.stdout.write(report.summary())
    if args.out:
        _write(args.out, report.dumps())
    return EXIT_OK if report.ok else EXIT_FAIL


def pipeline_report(me: ModularEquation, derivations: list[Derivation], reports: list[VerificationReport],
                    roots: list[str]) -> dict:
    def chain_json(d: Derivation) -> dict:
        pt = d.point
        return {name: _value(pt, name) for name in
                ("u0", "v0", "dv0", "ddv0", "alpha0", "beta0", "dalpha0", "dbeta0",
                 "ddalpha0", "ddbeta0", "m0", "dm0")}

    return {
        "equation": {
            "level": me.level, "p": me.p, "h": me.h, "degree": me.P.degree,
            "verified_order": me.verified_order, "conjectural_shape": me.conjectural_shape,
        },
        "roots_found": roots,
        "derivations": [
            {
                "sign": d.certificate.sign,
                "chosen_root": d.point.candidate.label,
                "branch": "v0 = u0" if d.point.candidate.zeta == 1 else "v0 = -u0",
                "rejected": [{"root": r, "reason": why} for r, why in d.rejected],
                "chain": chain_json(d),
                "certificate": d.certificate.to_json(),
            }
            for d in derivations
        ],
        "verification": [r.to_json() for r in reports],
    }


def cmd_pipeline(args) -> int:
    if args.digits < MIN_DIGITS:
        _err(f"pipeline: --digits must be at least {MIN_DIGITS}")
        return EXIT_INPUT
    outdir = Path(args.out) if args.out else None
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
    lines: list[str] = []
    try:
        me = stage_modeq(args.level, args.prime, args.guard)
        eq_file = str(outdir / "equation.json") if outdir else f"level{args.level}_p{args.prime}.json"
        if outdir is not None:
            me.save(eq_file)
        lines.extend(["== modular equation"] + _equation_summary(me))
        roots = [r.exact if r.exact is not None else r.value.to_decimal(20)
                 for r in real_roots(diagonal_poly(me, 1), 0, 1, 128)]
        roots = [str(r) for r in roots]
        derivations = []
        for s in _signs(args.sign):
            d = stage_derive(me, s, None, digits_to_bits(args.digits), "auto", eq_file)
            derivations.append(d)
    except StageError as exc:
        sys.stdout.write("\n".join(lines) + ("\n" if lines else ""))
        _err(f"{exc.stage}: {exc}")
        return exc.code
    reports = []
    for d in derivations:
        lines.append(f"== {d.certificate.sign} series")
        lines.extend(chain_lines(d, me))
        rep = verify_certificate(d.certificate, args.digits)
        reports.append(rep)
        lines.append("-- verification")
        lines.extend(rep.summary().rstrip("\n").splitlines())
        if outdir is not None:
            d.certificate.save(outdir / f"certificate.{d.certificate.sign}.json")
    report = pipeline_report(me, derivations, reports, roots)
    if outdir is not None:
        (outdir / "report.json").write_text(json.dumps(report, indent=1) + "\n")
    sys.stdout.write("\n".join(lines) + "\n")
    if not all(r.ok for r in reports):
        _err("verify: at least one certificate failed")
        return EXIT_FAIL
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .golden import run_selftest

    failed = run_selftest(args.golden_dir)
    if failed is not None:
        _err(f"selftest: failed at '{failed}'")
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ramseries", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("modeq", help="find the modular equation P(u, v) = 0")
    p.add_argument("--level", type=int, required=True, choices=(2, 3, 4))
    p.add_argument("--prime", type=int, required=True)
    p.add_argument("--guard", type=int, default=DEFAULT_GUARD, help="extra verification orders")
    p.add_argument("--method", choices=("multimodular", "bareiss"), default="multimodular")
    p.add_argument("--backend", choices=("auto", "cython", "python"), default="auto")
    p.add_argument("--out", help="write the equation JSON here (default: stdout)")
    p.set_defaults(func=cmd_modeq)

    p = sub.add_parser("derive", help="derive series certificates from an equation")
    p.add_argument("--eq", required=True, help="equation JSON written by modeq")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--root-index", type=int, help="index into the candidate list for the sign")
    g.add_argument("--root-value", help="u0 as a rational or decimal")
    p.add_argument("--sign", choices=("pos", "alt", "both"), required=True)
    p.add_argument("--branch", choices=("auto", "plus", "minus"), default="auto",
                   help="v0 = +u0, v0 = -u0, or both in that order")
    p.add_argument("--digits", type=int, default=50)
    p.add_argument("--out", help="certificate JSON path (with --sign both: NAME.pos.json, NAME.alt.json)")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("verify", help="check a certificate against 1/pi")
    p.add_argument("--cert", required=True)
    p.add_argument("--digits", type=int, required=True)
    p.add_argument("--out", help="also write the report JSON here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pipeline", help="modeq -> derive -> verify")
    p.add_argument("--level", type=int, required=True, choices=(2, 3, 4))
    p.add_argument("--prime", type=int, required=True)
    p.add_argument("--sign", choices=("pos", "alt", "both"), default="pos")
    p.add_argument("--digits", type=int, required=True)
    p.add_argument("--guard", type=int, default=DEFAULT_GUARD)
    p.add_argument("--out", help="directory for equation, certificates and report")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("selftest", help="run the embedded golden suite")
    p.add_argument("--golden-dir", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
