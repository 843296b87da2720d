"""Hermitian spaces over F and O_F-lattices in them.

Lattices are kept in a canonical Hermite normal form: an upper triangular
basis (columns) with diagonal entries p^k and entries above each pivot reduced
to canonical representatives modulo that pivot. Two lattices are equal iff
their normal forms agree, so the normal form doubles as a hash key.
"""

from __future__ import annotations

from functools import cached_property

from . import matrix as mx
from .padic import PadicScalar
from .residue import residue_field


class DegenerateGram(ValueError):
    pass


class ParityMismatch(ValueError):
    pass


class EnumerationBudgetExceeded(RuntimeError):
    pass


class NotALattice(ValueError):
    pass


class HermitianSpace:
    """F^n with the hermitian form (x, y) = y^dagger G x (linear in x)."""

    def __init__(self, gram, p=None):
        if p is not None:
            gram = mx.from_rows(gram, p)
        gram = tuple(tuple(r) for r in gram)
        self.gram = gram
        self.n = len(gram)
        self.p = gram[0][0].p
        if mx.dagger(gram) != gram:
            raise ValueError("Gram matrix is not hermitian")
        d = mx.det(gram)
        if d.is_zero():
            raise DegenerateGram("degenerate hermitian form")
        self.det = d

    def form(self, x, y):
        G = self.gram
        acc = None
        for i in range(self.n):
            yi = y[i].conj()
            if yi.is_zero():
                continue
            for j in range(self.n):
                t = yi * G[i][j] * x[j]
                acc = t if acc is None else acc + t
        return acc if acc is not None else mx.zero(self.p)

    def norm(self, x):
        return self.form(x, x)

    @property
    def sign(self) -> int:
        return self.det.eta()

    @property
    def split(self) -> bool:
        return self.sign == 1

    def scaled(self, c) -> "HermitianSpace":
        return HermitianSpace(mx.scale(mx.const(self.p, c), self.gram))

    def __eq__(self, other):
        return isinstance(other, HermitianSpace) and self.gram == other.gram

    def __hash__(self):
        return hash(self.gram)

    def __repr__(self):
        return f"HermitianSpace(n={self.n}, p={self.p}, split={self.split})"


def hnf_columns(cols, n, p):
    """Canonical upper triangular basis of the O_F-span of the given column vectors."""
    active = [list(c) for c in cols if any(not x.is_zero() for x in c)]
    result = [None] * n
    pivots = [0] * n
    for i in range(n - 1, -1, -1):
        best = None
        bv = None
        for c in active:
            x = c[i]
            if not x.is_zero():
                v = x.val
                if bv is None or v < bv:
                    best, bv = c, v
        if best is None:
            raise NotALattice("generators do not span a full-rank lattice")
        active.remove(best)
        piv = best[i]
        u = PadicScalar.uniformizer(p, bv) / piv
        best = [x * u for x in best]
        piv = best[i]
        nxt = []
        for c in active:
            x = c[i]
            if not x.is_zero():
                f = x / piv
                c = [a - f * b for a, b in zip(c, best)]
            if any(not a.is_zero() for a in c[:i]):
                nxt.append(c)
        active = nxt
        result[i] = best
        pivots[i] = bv
    for j in range(n):
        col = result[j]
        for i in range(j - 1, -1, -1):
            x = col[i]
            if x.is_zero():
                continue
            r = x.mod_pk(pivots[i])
            if r != x:
                f = (x - r) / result[i][i]
                ci = result[i]
                col = [a - f * ci[k] if k <= i else a for k, a in enumerate(col)]
        result[j] = col
    return tuple(tuple(c) for c in result), tuple(pivots)


class HermitianLattice:
    """An O_F-lattice of full rank in a hermitian space."""

    def __init__(self, space: HermitianSpace, generators, _normal=None):
        self.space = space
        if _normal is not None:
            self.cols, self.pivots = _normal
        else:
            self.cols, self.pivots = hnf_columns(list(generators), space.n, space.p)

    @classmethod
    def from_basis_matrix(cls, space, B):
        return cls(space, mx.columns(B))

    @classmethod
    def standard(cls, space):
        return cls(space, mx.columns(mx.identity(space.n, space.p)))

    @cached_property
    def key(self):
        return tuple(x.key() for j, c in enumerate(self.cols) for x in c[: j + 1])

    def __eq__(self, other):
        return isinstance(other, HermitianLattice) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"HermitianLattice(pivots={self.pivots})"

    @property
    def n(self):
        return self.space.n

    @property
    def p(self):
        return self.space.p

    @cached_property
    def basis(self):
        """Basis matrix whose columns are the lattice basis."""
        return mx.from_columns(self.cols)

    @cached_property
    def basis_inv(self):
        return mx.inverse(self.basis)

    @cached_property
    def gram(self):
        B = self.basis
        return mx.mul(mx.mul(mx.dagger(B), self.space.gram), B)

    @property
    def log_covolume(self) -> int:
        """v(det B), the index relative to O_F^n (may be negative)."""
        return sum(self.pivots)

    def coords(self, x):
        """Coordinates of x in the lattice basis (back substitution)."""
        n = self.n
        c = [None] * n
        for i in range(n - 1, -1, -1):
            acc = x[i]
            for j in range(i + 1, n):
                if not self.cols[j][i].is_zero():
                    acc = acc - self.cols[j][i] * c[j]
            c[i] = acc / self.cols[i][i]
        return tuple(c)

    def contains(self, x) -> bool:
        return all(a.is_integral() for a in self.coords(x))

    def contains_lattice(self, other: "HermitianLattice") -> bool:
        if other.log_covolume < self.log_covolume:
            return False
        return all(self.contains(c) for c in other.cols)

    def __le__(self, other):
        return other.contains_lattice(self)

    def relative_index(self, other: "HermitianLattice") -> int:
        """[other : self] as an O_F-length when self is inside other (signed in general)."""
        return self.log_covolume - other.log_covolume

    def __add__(self, other):
        return HermitianLattice(self.space, list(self.cols) + list(other.cols))

    def intersect(self, other):
        return (self.dual() + other.dual()).dual()

    def scale(self, c):
        c = mx.const(self.p, c)
        return HermitianLattice(self.space, [mx.vscale(c, col) for col in self.cols])

    def scale_pi(self, k):
        return self.scale(PadicScalar.uniformizer(self.p, k))

    def conj(self):
        return HermitianLattice(self.space, [tuple(x.conj() for x in c) for c in self.cols])

    def apply(self, g):
        return HermitianLattice(self.space, [mx.mat_vec(g, c) for c in self.cols])

    def in_space(self, space):
        return HermitianLattice(space, None, (self.cols, self.pivots))

    def tau_stable(self) -> bool:
        return all(x.is_real() for c in self.cols for x in c)

    def is_stable(self, g) -> bool:
        return all(self.contains(mx.mat_vec(g, c)) for c in self.cols)

    def dual(self) -> "HermitianLattice":
        # x in L^dual  iff  B^dagger G x is integral
        M = mx.mul(mx.dagger(self.basis), self.space.gram)
        return HermitianLattice(self.space, mx.columns(mx.inverse(M)))

    def is_integral(self) -> bool:
        return mx.is_integral(self.gram)

    def vertex_type(self):
        """t with L in L^dual in pi^-1 L of index t, or None when L is not a vertex lattice."""
        G = self.gram
        if not mx.is_integral(G):
            return None
        Ginv = mx.inverse(G)
        if not all(x.is_zero() or x.val >= -1 for row in Ginv for x in row):
            return None
        return int(mx.det(G).val)

    def valuation(self):
        return mx.min_val(self.gram)


def standard_space_and_lattice(n, t, p, split=None):
    """Space with Gram diag(pi,..,pi,1,..,1) (t copies of pi) and L = O_F^n of type t."""
    if not 0 <= t <= n:
        raise ValueError("need 0 <= t <= n")
    if split is not None and split != (t % 2 == 0):
        raise ParityMismatch(f"no type {t} vertex lattice in a {'split' if split else 'nonsplit'}"
                             " space")
    space = HermitianSpace(mx.diag([p] * t + [1] * (n - t), p))
    return space, HermitianLattice.standard(space)


def nearby_space(n, t, p):
    """Space of the opposite parity: Gram diag(pi^{t+1}, 1, ..., 1)."""
    return HermitianSpace(mx.diag([p ** (t + 1)] + [1] * (n - 1), p))


# enumeration ----------------------------------------------------------------


def _op_residues(lam, ops, k):
    out = []
    H, Hinv = lam.basis, lam.basis_inv
    for op in ops:
        A = mx.mul(mx.mul(Hinv, op), H)
        if not mx.is_integral(A):
            raise ValueError("lattice is not stable under the operator")
        if k.degree == 1:
            re, im = mx.real_imag(A)
            out.append(tuple(tuple(k.reduce(x) for x in row) for row in re))
            out.append(tuple(tuple(k.reduce(x) for x in row) for row in im))
        else:
            out.append(tuple(tuple(k.reduce(x) for x in row) for row in A))
    return out


def _children(lam, hi, ops, k):
    """Stable lattices L' with lam < L' <= pi^-1 lam and L' <= hi, with dim(L'/lam)."""
    n = lam.n
    C = tuple(hi.coords(c) for c in lam.cols)  # columns of hi^-1 H
    Cbar = [[k.reduce(C[j][i]) for j in range(n)] for i in range(n)]
    K = k.kernel(Cbar, n)
    if not K:
        return
    residues = _op_residues(lam, ops, k) if ops else []
    inv_p = PadicScalar(lam.p, 1, 0, lam.p, "F0", _normalized=True)
    H = lam.basis
    d = len(K)
    for S in k.subspaces(d):
        if not S:
            continue
        W = []
        for row in S:
            w = [0] * n
            for coeff, kv in zip(row, K):
                if coeff:
                    w = [k.add[a][k.mul[coeff][b]] for a, b in zip(w, kv)]
            W.append(tuple(w))
        if residues:
            Wr = k.rref(W)
            if not all(k.in_span(Wr, k.mat_vec(R, w)) for R in residues for w in W):
                continue
        gens = list(lam.cols)
        for w in W:
            lifted = tuple(k.lift(x) for x in w)
            gens.append(mx.vscale(inv_p, mx.mat_vec(H, lifted)))
        yield HermitianLattice(lam.space, gens), len(W)


def stable_lattices_between(lo, hi, ops=(), real=False, prune=None, max_index=None,
                            budget=None):
    """All lattices L with lo <= L <= hi stable under every operator in ops.

    With ``real=True`` only tau-stable lattices are produced (lo and hi must be
    tau-stable and the operators are split into their F0 components). ``prune``
    must be a predicate inherited by sublattices; lattices failing it are not
    reported and not expanded. Search proceeds upward from lo one layer
    (L' <= pi^-1 L) at a time; every stable lattice is reached because
    L intersected with pi^-1 L_i is again stable.
    """
    if not hi.contains_lattice(lo):
        return []
    k = residue_field(lo.p, 1 if real else 2)
    if prune is not None and not prune(lo):
        return []
    seen = {lo.key: (lo, 0)}
    frontier = [(lo, 0)]
    generated = 0
    while frontier:
        nxt = []
        for lam, idx in frontier:
            if max_index is not None and idx >= max_index:
                continue
            for child, step in _children(lam, hi, ops, k):
                generated += 1
                if budget is not None and generated > budget:
                    raise EnumerationBudgetExceeded(f"more than {budget} candidate lattices")
                if max_index is not None and idx + step > max_index:
                    continue
                if child.key in seen:
                    continue
                if prune is not None and not prune(child):
                    seen[child.key] = None
                    continue
                seen[child.key] = (child, idx + step)
                nxt.append((child, idx + step))
        frontier = nxt
    return [entry[0] for entry in seen.values() if entry is not None]


def enumerate_between(A, B, predicate=None, budget=None):
    """All O_F-lattices between A and B satisfying predicate."""
    out = stable_lattices_between(A, B, budget=budget)
    return [L for L in out if predicate is None or predicate(L)]


def lattice_from_vectors(space, vectors, ops=()):
    """O_F-span of the orbit of vectors under the monoid generated by ops (must be full rank)."""
    gens = list(vectors)
    L = HermitianLattice(space, gens)
    while True:
        more = list(L.cols) + [mx.mat_vec(g, c) for g in ops for c in L.cols]
        L2 = HermitianLattice(space, more)
        if L2 == L:
            return L
        L = L2


def layer_lattices(L, t_dim, ops=(), real=False):
    """Stable lattices L <= L' <= pi^-1 L with [L' : L] = t_dim."""
    hi = L.scale_pi(-1)
    return [M for M in stable_lattices_between(L, hi, ops, real, max_index=t_dim)
            if L.relative_index(M) == t_dim]
