"""Pure-Python versions of the word-size modular kernels.

Same contracts as the compiled module; used when the extension is not built.
"""
from __future__ import annotations

BACKEND = "python"


def convolve_mod(a, b, n: int, p: int) -> list[int]:
    a = [int(x) for x in a[: n + 1]]
    b = [int(x) for x in b[: n + 1]]
    out = [0] * (n + 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        lim = n + 1 - i
        for j, y in enumerate(b[:lim]):
            out[i + j] += x * y
    return [c % p for c in out]


def monomial_matrix_mod(u, v, dpol: int, nrows: int, p: int) -> list[list[int]]:
    n = nrows - 1
    uu = [int(x) % p for x in u[:nrows]] + [0] * max(0, nrows - len(u))
    vv = [int(x) % p for x in v[:nrows]] + [0] * max(0, nrows - len(v))
    one = [1] + [0] * n
    upow, vpow = [one], [one]
    for _ in range(dpol):
        upow.append(convolve_mod(upow[-1], uu, n, p))
        vpow.append(convolve_mod(vpow[-1], vv, n, p))
    columns = []
    for k in range(1, dpol + 1):
        for i in range(k, -1, -1):
            j = k - i
            if i == 0:
                columns.append(vpow[j])
            elif j == 0:
                columns.append(upow[i])
            else:
                columns.append(convolve_mod(upow[i], vpow[j], n, p))
    return [list(row) for row in zip(*columns)]


def row_reduce_mod(mat, p: int) -> tuple[list[list[int]], list[int]]:
    m = [[int(x) % p for x in row] for row in mat]
    nr = len(m)
    nc = len(m[0]) if m else 0
    pivots: list[int] = []
    r = 0
    for c in range(nc):
        if r == nr:
            break
        sel = next((i for i in range(r, nr) if m[i][c]), None)
        if sel is None:
            continue
        m[r], m[sel] = m[sel], m[r]
        inv = pow(m[r][c], -1, p)
        prow = [(x * inv) % p for x in m[r]]
        m[r] = prow
        for i in range(nr):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], prow)]
        pivots.append(c)
        r += 1
    return m[:r], pivots
