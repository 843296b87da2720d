"""Small dense linear algebra over F with PadicScalar entries.

Matrices are tuples of row tuples. Vectors are tuples. Everything is exact.
"""

from __future__ import annotations

from .padic import PadicScalar


def zero(p):
    return PadicScalar(p, 0, 0, 1, "F0", _normalized=True)


def one(p):
    return PadicScalar(p, 1, 0, 1, "F0", _normalized=True)


def const(p, c) -> PadicScalar:
    if isinstance(c, PadicScalar):
        return c
    return PadicScalar.from_parts(p, c)


def identity(n, p):
    return tuple(tuple(one(p) if i == j else zero(p) for j in range(n)) for i in range(n))


def zeros(r, c, p):
    return tuple(tuple(zero(p) for _ in range(c)) for _ in range(r))


def diag(entries, p):
    n = len(entries)
    return tuple(tuple(const(p, entries[i]) if i == j else zero(p) for j in range(n))
                 for i in range(n))


def from_rows(rows, p):
    return tuple(tuple(const(p, x) for x in row) for row in rows)


def vec(entries, p):
    return tuple(const(p, x) for x in entries)


def transpose(A):
    return tuple(zip(*A))


def conj(A):
    return tuple(tuple(x.conj() for x in row) for row in A)


def dagger(A):
    return transpose(conj(A))


def columns(A):
    return [tuple(col) for col in zip(*A)]


def from_columns(cols):
    return tuple(zip(*cols))


def mul(A, B):
    Bt = list(zip(*B))
    out = []
    for row in A:
        out_row = []
        for col in Bt:
            acc = row[0] * col[0]
            for k in range(1, len(row)):
                if row[k].na or row[k].nb:
                    acc = acc + row[k] * col[k]
            out_row.append(acc)
        out.append(tuple(out_row))
    return tuple(out)


def mat_vec(A, v):
    out = []
    for row in A:
        acc = row[0] * v[0]
        for k in range(1, len(row)):
            acc = acc + row[k] * v[k]
        out.append(acc)
    return tuple(out)


def vec_mat(w, A):
    """Row vector times matrix."""
    return mat_vec(transpose(A), w)


def add(A, B):
    return tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(A, B))


def sub(A, B):
    return tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(A, B))


def scale(c, A):
    return tuple(tuple(c * a for a in row) for row in A)


def vadd(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vsub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vscale(c, v):
    return tuple(c * a for a in v)


def dot(u, v):
    acc = u[0] * v[0]
    for a, b in zip(u[1:], v[1:]):
        acc = acc + a * b
    return acc


def power(A, k):
    n = len(A)
    p = A[0][0].p
    if k < 0:
        return power(inverse(A), -k)
    R = identity(n, p)
    B = A
    while k:
        if k & 1:
            R = mul(R, B)
        B = mul(B, B)
        k >>= 1
    return R


def trace(A):
    acc = A[0][0]
    for i in range(1, len(A)):
        acc = acc + A[i][i]
    return acc


def _eliminate(A, rhs_cols=None):
    """Gauss-Jordan; returns (det, reduced rhs) and raises ZeroDivisionError if singular."""
    n = len(A)
    M = [list(row) + ([] if rhs_cols is None else list(rhs_cols[i])) for i, row in enumerate(A)]
    p = A[0][0].p
    det = one(p)
    for c in range(n):
        piv = None
        best = None
        for r in range(c, n):
            x = M[r][c]
            if not x.is_zero():
                v = x.val
                if best is None or v < best:
                    piv, best = r, v
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        pv = M[c][c]
        det = det * pv
        inv = pv.inv()
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c:
                f = M[r][c]
                if not f.is_zero():
                    M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return det, [row[n:] for row in M]


def det(A):
    n = len(A)
    if n == 0:
        raise ValueError("empty matrix")
    if n == 1:
        return A[0][0]
    if n == 2:
        return A[0][0] * A[1][1] - A[0][1] * A[1][0]
    try:
        d, _ = _eliminate(A)
    except ZeroDivisionError:
        return zero(A[0][0].p)
    return d


def inverse(A):
    n = len(A)
    p = A[0][0].p
    _, R = _eliminate(A, identity(n, p))
    return tuple(tuple(r) for r in R)


def solve(A, b):
    """Solve A x = b."""
    _, R = _eliminate(A, [(x,) for x in b])
    return tuple(r[0] for r in R)


def is_integral(A) -> bool:
    return all(x.is_integral() for row in A for x in row)


def min_val(A):
    return min(x.val for row in A for x in row)


def real_imag(A):
    """Split A = A0 + sqrt(delta) A1 with A0, A1 over F0."""
    p = A[0][0].p
    re = tuple(tuple(PadicScalar(p, x.na, 0, x.den, "F0") for x in row) for row in A)
    im = tuple(tuple(PadicScalar(p, x.nb, 0, x.den, "F0") for x in row) for row in A)
    return re, im


def charpoly(A):
    """Coefficients [c0, ..., c_{n-1}, 1] of det(T - A), via Faddeev-LeVerrier."""
    n = len(A)
    p = A[0][0].p
    coeffs = [None] * (n + 1)
    coeffs[n] = one(p)
    M = zeros(n, n, p)
    I = identity(n, p)
    for k in range(1, n + 1):
        M = add(mul(A, M), scale(coeffs[n - k + 1], I))
        coeffs[n - k] = -trace(mul(A, M)) / k
    return tuple(coeffs)


def rank(vectors) -> int:
    """Rank over F of a list of vectors."""
    rows = [list(v) for v in vectors]
    if not rows:
        return 0
    r = 0
    ncols = len(rows[0])
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if not rows[i][c].is_zero()), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = rows[r][c].inv()
        for i in range(len(rows)):
            if i != r and not rows[i][c].is_zero():
                f = rows[i][c] * inv
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
    return r
