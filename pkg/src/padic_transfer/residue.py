"""Residue fields F_p and F_{p^2} and their finite-dimensional subspaces.

Elements of F_{p^2} = F_p(sqrt(delta)) are encoded as the integer a + p*b.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, product

from .padic import PadicScalar, _frac_residue, nonresidue


class ResidueField:
    def __init__(self, p: int, degree: int):
        if degree not in (1, 2):
            raise ValueError("degree must be 1 or 2")
        self.p = p
        self.degree = degree
        self.q = p**degree
        q = self.q
        d = nonresidue(p)

        def split(x):
            return x % p, x // p

        def enc(a, b):
            return (a % p) + p * (b % p)

        self.add = [[enc(split(x)[0] + split(y)[0], split(x)[1] + split(y)[1]) for y in range(q)]
                    for x in range(q)]
        self.mul = [[enc(split(x)[0] * split(y)[0] + d * split(x)[1] * split(y)[1],
                         split(x)[0] * split(y)[1] + split(x)[1] * split(y)[0])
                     for y in range(q)] for x in range(q)]
        self.neg = [enc(-split(x)[0], -split(x)[1]) for x in range(q)]
        self.inv = [0] * q
        for x in range(1, q):
            self.inv[x] = next(y for y in range(1, q) if self.mul[x][y] == 1)
        self.sub = [[self.add[x][self.neg[y]] for y in range(q)] for x in range(q)]

    def reduce(self, x: PadicScalar) -> int:
        if x.is_zero():
            return 0
        if x.val < 0:
            raise ValueError("cannot reduce a non-integral element")
        a, j = _frac_residue(x.na, x.den, self.p, 1)
        b, _ = _frac_residue(x.nb, x.den, self.p, 1)
        assert j == 0
        if self.degree == 1 and b:
            raise ValueError("element does not reduce into F_p")
        return a + self.p * b

    def lift(self, r: int) -> PadicScalar:
        return PadicScalar(self.p, r % self.p, r // self.p, 1)

    def mat_vec(self, M, v):
        mul, add = self.mul, self.add
        out = []
        for row in M:
            acc = 0
            for a, b in zip(row, v):
                if a and b:
                    acc = add[acc][mul[a][b]]
            out.append(acc)
        return tuple(out)

    def rref(self, vectors):
        """Reduced row echelon basis of the span, as a tuple of tuples."""
        rows = [list(v) for v in vectors]
        if not rows:
            return ()
        ncols = len(rows[0])
        r = 0
        for c in range(ncols):
            piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
            if piv is None:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            iv = self.inv[rows[r][c]]
            rows[r] = [self.mul[iv][x] for x in rows[r]]
            for i in range(len(rows)):
                if i != r and rows[i][c]:
                    f = rows[i][c]
                    rows[i] = [self.sub[a][self.mul[f][b]] for a, b in zip(rows[i], rows[r])]
            r += 1
        return tuple(tuple(row) for row in rows[:r])

    def in_span(self, basis_rref, v) -> bool:
        v = list(v)
        for row in basis_rref:
            c = next(i for i, x in enumerate(row) if x)
            if v[c]:
                f = v[c]
                v = [self.sub[a][self.mul[f][b]] for a, b in zip(v, row)]
        return not any(v)

    def kernel(self, M, ncols):
        """Basis of {w : M w = 0}."""
        R = self.rref(M) if M else ()
        pivots = [next(i for i, x in enumerate(row) if x) for row in R]
        free = [c for c in range(ncols) if c not in pivots]
        basis = []
        for f in free:
            w = [0] * ncols
            w[f] = 1
            for row, pc in zip(R, pivots):
                w[pc] = self.neg[row[f]]
            basis.append(tuple(w))
        return basis

    def subspaces(self, d):
        return _subspaces(self.p, self.degree, d)


@lru_cache(maxsize=None)
def residue_field(p, degree) -> ResidueField:
    return ResidueField(p, degree)


@lru_cache(maxsize=None)
def _subspaces(p, degree, d):
    """All subspaces of k^d as RREF bases, ordered by dimension."""
    q = p**degree
    out = []
    for r in range(d + 1):
        for pivots in combinations(range(d), r):
            free_slots = [(i, c) for i, pc in enumerate(pivots) for c in range(pc + 1, d)
                          if c not in pivots]
            for values in product(range(q), repeat=len(free_slots)):
                rows = [[0] * d for _ in range(r)]
                for i, pc in enumerate(pivots):
                    rows[i][pc] = 1
                for (i, c), x in zip(free_slots, values):
                    rows[i][c] = x
                out.append(tuple(tuple(row) for row in rows))
    return tuple(out)
