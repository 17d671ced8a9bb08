"""Compare the compiled and pure-Python modular kernels.

    python benchmarks/bench_kernels.py [--level 2 --prime 29] [--repeat 3]

Times the three kernels on the system of the given modular equation (one
prime), then the complete multi-modular solve with each backend.
"""
import argparse
import time

from ramseries import kernels
from ramseries.modeq import _residues, equation_shape, russell_series, solve_modular_equation

PRIME = (1 << 31) - 1


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--level", type=int, default=2)
    ap.add_argument("--prime", type=int, default=29)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--skip-solve", action="store_true")
    args = ap.parse_args()

    shape = equation_shape(args.level, args.prime)
    u, v = russell_series(args.level, args.prime, shape.h, shape.sb + shape.guard - 1)
    ur = _residues(u, shape.sb, PRIME)
    vr = _residues(v, shape.sb, PRIME)
    backends = kernels.available_backends()
    print(f"level {args.level}, p {args.prime}: {shape.sb} rows x {shape.nunknowns} unknowns")
    print(f"backends: {', '.join(sorted(backends))}")

    rows = {}
    for name, mod in sorted(backends.items()):
        mat = mod.monomial_matrix_mod(ur, vr, shape.dpol, shape.sb, PRIME)
        aug = [list(r) + [1 if k == 0 else 0] for k, r in enumerate(mat)]
        rows[name] = {
            "convolve_mod": best_of(lambda: mod.convolve_mod(ur, vr, shape.sb - 1, PRIME), args.repeat),
            "monomial_matrix_mod": best_of(
                lambda: mod.monomial_matrix_mod(ur, vr, shape.dpol, shape.sb, PRIME), args.repeat),
            "row_reduce_mod": best_of(lambda: mod.row_reduce_mod(aug, PRIME), args.repeat),
        }
    if not args.skip_solve:
        for name, mod in sorted(backends.items()):
            rows[name]["full solve"] = best_of(
                lambda: solve_modular_equation(args.level, args.prime, backend=mod), 1)

    names = sorted(rows)
    print(f"{'kernel':<22}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for k in rows[names[0]]:
        line = f"{k:<22}" + "".join(f"{rows[n][k]:>11.4f}s" for n in names)
        if "cython" in rows and "python" in rows:
            line += f"{rows['python'][k] / rows['cython'][k]:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
