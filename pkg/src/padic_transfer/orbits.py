"""Orbits on the symmetric side and the unitary side, their invariants and matching.

Symmetric side: triples (gamma, u1, u2) with gamma in S_n(F0) = {gamma gamma_bar = 1},
u1 a column vector and u2 a row vector over F0, acted on by GL_n(F0).
Unitary side: pairs (g, u) with g unitary for a hermitian space V and u in V.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import matrix as mx
from .lattices import HermitianLattice, HermitianSpace
from .padic import PadicScalar


class NotRegularSemisimple(ValueError):
    pass


class RetryBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class SymTriple:
    gamma: tuple
    u1: tuple
    u2: tuple

    @property
    def n(self):
        return len(self.gamma)

    @property
    def p(self):
        return self.gamma[0][0].p

    def is_in_S(self) -> bool:
        return mx.mul(self.gamma, mx.conj(self.gamma)) == mx.identity(self.n, self.p)

    def is_real_vectors(self) -> bool:
        return all(x.is_real() for x in self.u1 + self.u2)

    def krylov(self):
        """Matrix with columns gamma^i u1."""
        cols = [self.u1]
        for _ in range(self.n - 1):
            cols.append(mx.mat_vec(self.gamma, cols[-1]))
        return mx.from_columns(cols)

    def moment(self, k: int):
        return mx.dot(self.u2, mx.mat_vec(mx.power(self.gamma, k), self.u1))

    def hankel(self):
        m = [self.moment(k) for k in range(2 * self.n - 1)]
        return tuple(tuple(m[i + j] for j in range(self.n)) for i in range(self.n))

    def is_rs(self) -> bool:
        return not mx.det(self.hankel()).is_zero()

    def act(self, h) -> "SymTriple":
        hi = mx.inverse(h)
        return SymTriple(mx.mul(mx.mul(h, self.gamma), hi), mx.mat_vec(h, self.u1),
                         mx.vec_mat(self.u2, hi))


@dataclass(frozen=True)
class UnitaryPair:
    space: HermitianSpace
    g: tuple
    u: tuple

    @property
    def n(self):
        return len(self.g)

    def is_unitary(self) -> bool:
        g = self.g
        return mx.mul(mx.mul(mx.dagger(g), self.space.gram), g) == self.space.gram

    def krylov(self):
        cols = [self.u]
        for _ in range(self.n - 1):
            cols.append(mx.mat_vec(self.g, cols[-1]))
        return mx.from_columns(cols)

    def moment(self, k: int):
        return self.space.form(mx.mat_vec(mx.power(self.g, k), self.u), self.u)

    def is_rs(self) -> bool:
        return not mx.det(self.krylov()).is_zero()

    def act(self, h) -> "UnitaryPair":
        return UnitaryPair(self.space, mx.mul(mx.mul(h, self.g), mx.inverse(h)),
                           mx.mat_vec(h, self.u))


@dataclass(frozen=True)
class InvariantRecord:
    charpoly: tuple
    moments: tuple

    def to_json(self):
        return {"charpoly": [c.to_json() for c in self.charpoly],
                "moments": [m.to_json() for m in self.moments]}


def invariants(x) -> InvariantRecord:
    mat = x.gamma if isinstance(x, SymTriple) else x.g
    cp = mx.charpoly(mat)
    return InvariantRecord(cp, tuple(x.moment(k) for k in range(x.n)))


def matches(a, b) -> bool:
    return invariants(a) == invariants(b)


def matching_gram(a: SymTriple):
    """Gram matrix in the basis g^i u of the hermitian space carrying the matching pair."""
    n = a.n
    m = {k: a.moment(k) for k in range(-(n - 1), n)}
    return tuple(tuple(m[j - i] for j in range(n)) for i in range(n))


def matching_space(a: SymTriple) -> str:
    if not a.is_rs():
        raise NotRegularSemisimple("matching needs a regular semisimple triple")
    return "split" if HermitianSpace(matching_gram(a)).split else "nonsplit"


def unitary_from_triple(a: SymTriple) -> UnitaryPair:
    """The matching pair: V with the moment Gram, g = companion of gamma, u = e_0."""
    if not a.is_rs():
        raise NotRegularSemisimple("matching needs a regular semisimple triple")
    W = a.krylov()
    g = mx.mul(mx.mul(mx.inverse(W), a.gamma), W)
    n, p = a.n, a.p
    u = tuple(mx.one(p) if i == 0 else mx.zero(p) for i in range(n))
    return UnitaryPair(HermitianSpace(matching_gram(a)), g, u)


def transfer_factor(a: SymTriple, L: HermitianLattice | None = None) -> int:
    """eta(det(gamma^i u1)) with coordinates taken in a basis of L (default O_F^n)."""
    W = a.krylov()
    if L is not None:
        W = mx.mul(L.basis_inv, W)
    d = mx.det(W)
    if d.is_zero():
        raise NotRegularSemisimple("u1 is not cyclic for gamma")
    return d.eta()


def transfer_factor_group(gamma, e, L: HermitianLattice | None = None) -> int:
    return transfer_factor(SymTriple(gamma, e, e), L)


# sampling ----------------------------------------------------------------------


def _rand_OF(rng, p, spread=2):
    return PadicScalar(p, rng.randint(-spread, spread), rng.randint(-spread, spread), 1)


def random_S_element(n, p, rng, integral=True, tries=1000):
    """gamma = B * conj(B)^-1; B in GL_n(O_F) when integral, otherwise any invertible B."""
    for _ in range(tries):
        B = tuple(tuple(_rand_OF(rng, p) for _ in range(n)) for _ in range(n))
        d = mx.det(B)
        if d.is_zero() or (integral and d.val != 0):
            continue
        return mx.mul(B, mx.inverse(mx.conj(B)))
    raise RetryBudgetExceeded("could not sample an element of S_n")


def _rand_real_vec(rng, p, n, spread):
    out = []
    for _ in range(n):
        a = rng.randint(-spread, spread)
        if rng.random() < 0.3:
            a *= p
        out.append(PadicScalar(p, a, 0, 1, "F0"))
    return tuple(out)


def random_sym_triple(n, p, rng, integral=True, max_box=None, spread=None, tries=2000):
    """Random regular semisimple triple; max_box bounds v(det Hankel)."""
    spread = spread or p
    for _ in range(tries):
        gamma = random_S_element(n, p, rng, integral)
        u1 = _rand_real_vec(rng, p, n, spread)
        u2 = _rand_real_vec(rng, p, n, spread)
        a = SymTriple(gamma, u1, u2)
        d = mx.det(a.hankel())
        if d.is_zero():
            continue
        if max_box is not None and not (0 <= d.val <= max_box):
            continue
        return a
    raise RetryBudgetExceeded("no regular semisimple triple found")


def random_matching_pair(n, t, seed=None, p=3, nearby=False, max_box=4, integral=True,
                         tries=5000):
    """A triple whose matching space has the parity of a type-t vertex lattice (or the
    opposite parity when nearby=True), with its matching unitary pair."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    want_split = (t % 2 == 0) != nearby
    for _ in range(tries):
        a = random_sym_triple(n, p, rng, integral, max_box)
        b = unitary_from_triple(a)
        if b.space.split == want_split:
            return a, b
    raise RetryBudgetExceeded("no triple with the requested matching space")


def last_basis_vector(n, p):
    return tuple(mx.one(p) if i == n - 1 else mx.zero(p) for i in range(n))


def group_triple(gamma) -> SymTriple:
    """(gamma, e, e*) for the last basis vector e; rs for it is rs for gamma in the group sense."""
    e = last_basis_vector(len(gamma), gamma[0][0].p)
    return SymTriple(gamma, e, e)


def random_group_element(n, p, rng, integral=True, max_box=None, tries=2000):
    """Random gamma' in S_n that is regular semisimple relative to the last basis vector."""
    for _ in range(tries):
        gamma = random_S_element(n, p, rng, integral)
        d = mx.det(group_triple(gamma).hankel())
        if d.is_zero():
            continue
        if max_box is not None and not (0 <= d.val <= max_box):
            continue
        return gamma
    raise RetryBudgetExceeded("no regular semisimple group element found")
