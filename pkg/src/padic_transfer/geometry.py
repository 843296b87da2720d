"""Closed-form geometric quantities.

Three regimes: rank-one cycle lengths, intersection numbers for pairs (g, u) whose
order O_F[g] is an etale maximal order split into rank-one blocks, and the
Bruhat-Tits tree of the split rank-two hermitian plane with the vertical
multiplicities of the Z and Y cycles along its projective lines.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import matrix as mx
from .lattices import (
    HermitianLattice,
    HermitianSpace,
    ParityMismatch,
    stable_lattices_between,
)
from .orbits import RetryBudgetExceeded, SymTriple, UnitaryPair
from .padic import PadicScalar


class RegimeMismatch(ValueError):
    pass


class SearchExhausted(RuntimeError):
    pass


class NonUnique(AssertionError):
    pass


def z_length_rank1(t0: int, v: int) -> int:
    """Length of Z(u) in rank one: max(0, (v - t0 + 1) / 2) for v = v((u, u))."""
    if t0 not in (0, 1):
        raise ValueError("rank one types are 0 and 1")
    if (v - t0 + 1) % 2:
        raise ParityMismatch("v((u,u)) must have the parity of t0 + 1 in the nearby space")
    return max(0, (v - t0 + 1) // 2)


# etale maximal orders ---------------------------------------------------------


@dataclass(frozen=True)
class MaxOrderBlock:
    v: int
    split: bool
    f: int = 1

    @property
    def a(self) -> int:
        return 0 if self.split else 1


@dataclass(frozen=True)
class MaxOrderDecomposition:
    blocks: tuple

    def __post_init__(self):
        for b in self.blocks:
            if b.f != 1:
                raise NotImplementedError("only residue degree one blocks are supported")
            if b.f % 2 == 0:
                raise ValueError("residue degrees are odd")

    @property
    def n(self) -> int:
        return sum(b.f for b in self.blocks)

    @property
    def split(self) -> bool:
        """Whether the whole space (product of the blocks) is split."""
        return sum(b.f for b in self.blocks if not b.split) % 2 == 0

    def dual(self) -> "MaxOrderDecomposition":
        """Blocks after rescaling the form by -pi: valuations shift by one, splitness flips."""
        return MaxOrderDecomposition(tuple(MaxOrderBlock(b.v + 1, not b.split, b.f)
                                           for b in self.blocks))

    @classmethod
    def from_pair(cls, b: UnitaryPair) -> "MaxOrderDecomposition":
        """Decomposition of a pair with g and the Gram matrix both diagonal."""
        n, G, g = b.n, b.space.gram, b.g
        for i in range(n):
            for j in range(n):
                if i != j and not (G[i][j].is_zero() and g[i][j].is_zero()):
                    raise RegimeMismatch("pair is not block diagonal")
        res = [g[i][i] for i in range(n)]
        for i in range(n):
            for j in range(i):
                if (res[i] - res[j]).val < 1:
                    continue
                raise RegimeMismatch("eigenvalues collide mod pi: O_F[g] is not maximal")
        blocks = []
        for i in range(n):
            norm = G[i][i] * b.u[i].norm()
            if norm.is_zero():
                raise RegimeMismatch("isotropic block component")
            blocks.append(MaxOrderBlock(int(norm.val), G[i][i].val % 2 == 0))
        return cls(tuple(blocks))

    def admissible_types(self, t):
        """Per-block types (t_i) for each choice of the distinguished block i0."""
        out = []
        for i0, b0 in enumerate(self.blocks):
            ts = []
            for i, b in enumerate(self.blocks):
                if i == i0:
                    ts.append(b.f if b.split else 0)
                else:
                    ts.append(0 if b.split else b.f)
            if sum(ts) == t:
                out.append((i0, tuple(ts)))
        return out


def int_z_maxorder(dec: MaxOrderDecomposition, t: int | None = None) -> int:
    """Intersection number of Z(u) with the fixed points of g.

    Without t this is the bare sum of the rank-one lengths over all blocks. With t
    only the components with the admissible type pattern contribute, and each
    contributes the length at its distinguished block when every other block
    component lifts (its valuation is at least its type).
    """
    for b in dec.blocks:
        if (b.v + b.a) % 2:
            raise ParityMismatch("v((u_i,u_i)) + a_i must be even")
    if t is None:
        return sum(max(0, (b.v + b.a) // 2) for b in dec.blocks)
    total = 0
    for i0, ts in dec.admissible_types(t):
        if all(b.v >= ti for i, (b, ti) in enumerate(zip(dec.blocks, ts)) if i != i0):
            b = dec.blocks[i0]
            total += max(0, (b.v + b.a) // 2)
    return total


def int_y_maxorder(dec: MaxOrderDecomposition, t: int) -> int:
    """Y-cycle version: the Z-cycle number of the rescaled dual data at type n - t."""
    return int_z_maxorder(dec.dual(), dec.n - t)


def fixed_point_count_maxorder(dec: MaxOrderDecomposition, t: int) -> int:
    """Number of fixed points in the regime where the nonsplit blocks have total degree t - 1."""
    if sum(b.f for b in dec.blocks if not b.split) != t - 1:
        raise RegimeMismatch("needs sum of degrees of nonsplit blocks equal to t - 1")
    return sum(1 for b in dec.blocks if b.f == 1 and b.split)


def _norm_one_units(p):
    """a / conj(a) for units a, one per residue class of norm-one elements."""
    from .cayley import norm_one_reps

    return [xi for _, xi in norm_one_reps(p)]


def diagonal_pair(eigen, gram, u) -> UnitaryPair:
    n = len(eigen)
    p = eigen[0].p
    g = tuple(tuple(eigen[i] if i == j else mx.zero(p) for j in range(n)) for i in range(n))
    G = tuple(tuple(gram[i] if i == j else mx.zero(p) for j in range(n)) for i in range(n))
    return UnitaryPair(HermitianSpace(G), g, tuple(u))


def diagonal_triple(eigen, u1, u2) -> SymTriple:
    n = len(eigen)
    p = eigen[0].p
    g = tuple(tuple(eigen[i] if i == j else mx.zero(p) for j in range(n)) for i in range(n))
    return SymTriple(g, tuple(u1), tuple(u2))


def random_maxorder_sample(n, t, p, rng: random.Random, vmin=-1, vmax=4, tries=1000):
    """Block-diagonal triple on the standard chain of type t whose matching pair lives in
    the nearby space and has an etale maximal order; returns (triple, pair, decomposition)."""
    units = _norm_one_units(p)
    units_z = [k for k in range(-p, p + 1) if k % p]
    if n > len(units):
        raise ValueError("not enough distinct norm-one residues for a maximal order")
    for _ in range(tries):
        eig = rng.sample(units, n)
        u1, u2 = [], []
        for _ in range(n):
            v = rng.randint(vmin, vmax)
            a = rng.randint(0, v - vmin) if v > vmin else 0
            x = PadicScalar(p, rng.choice(units_z), 0, 1, "F0")
            y = PadicScalar(p, rng.choice(units_z), 0, 1, "F0")
            u1.append(x * PadicScalar.uniformizer(p, a))
            u2.append(y * PadicScalar.uniformizer(p, v - a))
        a_trip = diagonal_triple(eig, u1, u2)
        if not a_trip.is_rs():
            continue
        gram = [x * y for x, y in zip(u1, u2)]
        ones = [mx.one(p)] * n
        b = diagonal_pair(eig, gram, ones)
        nearby_split = t % 2 == 1
        if b.space.split != nearby_split:
            continue
        return a_trip, b, MaxOrderDecomposition.from_pair(b)
    raise RetryBudgetExceeded("no block-diagonal sample in the nearby space")


# the split hermitian plane and its tree ------------------------------------------


def hyperbolic_plane(p) -> HermitianSpace:
    z, o = mx.zero(p), mx.one(p)
    return HermitianSpace(((z, o), (o, z)))


@dataclass(frozen=True)
class BTVertex:
    lattice: HermitianLattice

    def __post_init__(self):
        if self.lattice.vertex_type() not in (0, 2):
            raise ValueError("not a vertex of the tree")

    @property
    def type(self) -> int:
        return self.lattice.vertex_type()

    @property
    def key(self):
        return self.lattice.key

    def __repr__(self):
        return f"BTVertex(type={self.type}, key={self.lattice!r})"


class DrinfeldPlane:
    """Bruhat-Tits tree of U(V) for the split plane V with hyperbolic Gram matrix."""

    def __init__(self, p: int, space: HermitianSpace | None = None):
        self.p = p
        self.space = space or hyperbolic_plane(p)
        if self.space.n != 2 or not self.space.split:
            raise ValueError("needs a split hermitian plane")
        self._nbrs = {}

    @property
    def q(self) -> int:
        return self.p

    def vertex(self, L: HermitianLattice) -> BTVertex:
        return BTVertex(L)

    def standard_vertex(self) -> BTVertex:
        return BTVertex(HermitianLattice.standard(self.space))

    def neighbors(self, v: BTVertex):
        if v.key in self._nbrs:
            return self._nbrs[v.key]
        L = v.lattice
        if v.type == 0:
            cands = stable_lattices_between(L.scale_pi(1), L, max_index=1)
            out = [BTVertex(M) for M in cands
                   if L.relative_index(M) == -1 and M.vertex_type() == 2]
        else:
            cands = stable_lattices_between(L, L.dual(), max_index=1)
            out = [BTVertex(M) for M in cands
                   if M.relative_index(L) == -1 and M.vertex_type() == 0]
        out.sort(key=lambda w: w.key)
        self._nbrs[v.key] = out
        return out

    def ball(self, center: BTVertex, r: int):
        """{key: (vertex, distance)} for all vertices within distance r."""
        seen = {center.key: (center, 0)}
        queue = deque([center])
        while queue:
            v = queue.popleft()
            d = seen[v.key][1]
            if d == r:
                continue
            for w in self.neighbors(v):
                if w.key not in seen:
                    seen[w.key] = (w, d + 1)
                    queue.append(w)
        return seen

    def distance(self, a: BTVertex, b: BTVertex, limit: int = 64) -> int:
        """Graph distance by breadth-first search from both ends."""
        if a.key == b.key:
            return 0
        fa, fb = {a.key: 0}, {b.key: 0}
        qa, qb = [a], [b]
        for step in range(limit):
            front, dist, other, src = (qa, fa, fb, "a") if len(qa) <= len(qb) else (qb, fb, fa, "b")
            nxt = []
            for v in front:
                for w in self.neighbors(v):
                    if w.key in dist:
                        continue
                    dist[w.key] = dist[v.key] + 1
                    if w.key in other:
                        return dist[w.key] + other[w.key]
                    nxt.append(w)
            if src == "a":
                qa = nxt
            else:
                qb = nxt
        raise SearchExhausted("distance search exceeded its limit")

    # central lattice and multiplicities

    def normalized(self, u):
        m = self.norm_val(u)
        return mx.vscale(PadicScalar.uniformizer(self.p, -((m + 1) // 2)), u), m

    def norm_val(self, u) -> int:
        n = self.space.norm(u)
        if n.is_zero():
            raise ValueError("isotropic vector")
        return int(n.val)

    def central_lattice(self, u) -> BTVertex:
        """The unique vertex lattice L_u with u1 in L_u^dual but not in pi L_u^dual."""
        u1, m = self.normalized(u)
        G = self.space.gram
        # orthogonal complement of u1
        c = mx.vec_mat(tuple(x.conj() for x in u1), G)  # row with c x = (x, u1)
        w = (-c[1], c[0]) if not c[0].is_zero() or not c[1].is_zero() else None
        k = int(self.space.norm(w).val)
        want = 0 if m % 2 == 0 else -1
        # scale w so that v((w, w)) = want; parities agree because the plane is split
        s = (want - k) // 2
        w = mx.vscale(PadicScalar.uniformizer(self.p, s), w)
        dual = HermitianLattice(self.space, [u1, w])
        L = dual if m % 2 == 0 else dual.scale_pi(1)
        v = BTVertex(L)
        self._check_central(v, u1)
        return v

    def _is_central(self, v: BTVertex, u1) -> bool:
        D = v.lattice.dual()
        return D.contains(u1) and not D.scale_pi(1).contains(u1)

    def _check_central(self, v: BTVertex, u1):
        """Uniqueness among vertices of the same type within distance 2.

        Vertices of the other type can satisfy the membership condition too (for m
        even the type-2 neighbours of L_u do), so the type is part of the definition.
        """
        if not self._is_central(v, u1):
            raise SearchExhausted("constructed lattice is not central")
        for key, (w, d) in self.ball(v, 2).items():
            if d and w.type == v.type and self._is_central(w, u1):
                raise NonUnique("two vertex lattices are central for the same vector")

    def z_multiplicity_membership(self, u, v: BTVertex) -> int:
        """max(max{r : pi^-r u in L^dual}, 0) for u in L, else 0.

        The line attached to L is P(L^dual / pi L^dual), so divisibility of u is
        measured in L^dual; for type 0 this is L itself.
        """
        if not v.lattice.contains(u):
            return 0
        return _membership(u, v.lattice.dual())

    def z_multiplicity_literal(self, u, v: BTVertex) -> int:
        """max(max{r : pi^-r u in L}, 0); differs from the above at type 2 vertices."""
        return _membership(u, v.lattice)

    def z_multiplicity_formula(self, u, v: BTVertex, d: int | None = None) -> int:
        m = self.norm_val(u)
        if d is None:
            d = self.distance(v, self.central_lattice(u))
        if d > m:
            return 0
        return (m - d) // 2 if (m - d) % 2 == 0 else (m + 1 - d) // 2

    def z_multiplicity(self, u, v: BTVertex, d: int | None = None) -> int:
        a = self.z_multiplicity_membership(u, v)
        b = self.z_multiplicity_formula(u, v, d)
        if a != b:
            raise AssertionError(f"Z multiplicity mismatch: membership {a}, distance {b}")
        return a

    def y_multiplicity_membership(self, u, v: BTVertex) -> int:
        """Z multiplicity of u in the rescaled plane (form -pi(.,.)) along the image vertex.

        The image of L is L (type 0) or L^dual (type 2); its dual for the rescaled
        form is pi^-1 times its dual for the original form.
        """
        L = v.lattice
        if not L.contains(u):
            return 0
        image = L if v.type == 0 else L.dual()
        return _membership(u, image.dual().scale_pi(-1))

    def y_multiplicity_formula(self, u, v: BTVertex, d: int | None = None) -> int:
        m = self.norm_val(u)
        if d is None:
            d = self.distance(v, self.central_lattice(u))
        if d > m:
            return 0
        return (m + 2 - d) // 2 if (m - d) % 2 == 0 else (m + 1 - d) // 2

    def y_multiplicity(self, u, v: BTVertex, d: int | None = None) -> int:
        a = self.y_multiplicity_membership(u, v)
        b = self.y_multiplicity_formula(u, v, d)
        if a != b:
            raise AssertionError(f"Y multiplicity mismatch: membership {a}, distance {b}")
        return a

    def horizontal_point(self, u):
        """(L_u, u1): the horizontal part of Z(u) meets the line of L_u at the line of u1."""
        u1, _ = self.normalized(u)
        return self.central_lattice(u), u1

    def pairing_with_line(self, kind: str, u, v: BTVertex) -> int:
        q = self.q
        inL = v.lattice.contains(u)
        if v.type == 0:
            return int(inL) if kind == "Z" else -q * int(inL)
        if kind == "Z":
            return -q * int(inL)
        return int(v.lattice.dual().contains(u))

    def to_dot(self, center: BTVertex, r: int) -> str:
        ball = self.ball(center, r)
        order = sorted(ball, key=lambda k: (ball[k][1], k))
        index = {k: i for i, k in enumerate(order)}
        lines = ["graph bt {"]
        for k in order:
            v, d = ball[k]
            shape = "circle" if v.type == 0 else "box"
            lines.append(f'  v{index[k]} [shape={shape}, label="t{v.type} d{d}"];')
        edges = sorted({(index[k], index[w.key]) for k in order for w in self.neighbors(ball[k][0])
                        if w.key in ball and index[k] < index[w.key]})
        lines += [f"  v{i} -- v{j};" for i, j in edges]
        return "\n".join(lines + ["}"])


def _membership(u, L: HermitianLattice) -> int:
    """max(max{r : pi^-r u in L}, 0)."""
    if not L.contains(u):
        return 0
    r = 0
    while L.contains(mx.vscale(PadicScalar.uniformizer(u[0].p, -(r + 1)), u)):
        r += 1
    return r


def line_function(plane: DrinfeldPlane, C, kind: str):
    """u -> (kind(u), C) for a formal sum C = [(coeff, vertex), ...]."""
    def f(u):
        return sum(c * plane.pairing_with_line(kind, u, v) for c, v in C)

    return f


def line_function_terms(plane: DrinfeldPlane, C, kind: str):
    """The same function as a list of (coefficient, lattice) indicator terms."""
    q = plane.q
    out = []
    for c, v in C:
        if v.type == 0:
            out.append((Fraction(c) * (1 if kind == "Z" else -q), v.lattice))
        elif kind == "Z":
            out.append((Fraction(c) * -q, v.lattice))
        else:
            out.append((Fraction(c), v.lattice.dual()))
    return out


def dual_rescale(space: HermitianSpace, L: HermitianLattice):
    """The space with form -pi(.,.) and L^dual viewed inside it (type n - t)."""
    p = space.p
    new = space.scaled(PadicScalar(p, -p, 0, 1))
    return new, L.dual().in_space(new)


@lru_cache(maxsize=None)
def _tree_cache(p):
    return DrinfeldPlane(p)


def drinfeld_plane(p: int) -> DrinfeldPlane:
    """Shared plane instance (neighbors are memoized on it)."""
    return _tree_cache(p)


# consistency battery -------------------------------------------------------------


def sample_vectors(p, m_max, units=4, exp_max=None):
    """Grid u = (pi^i x, pi^j y) over a few unit residues with 0 <= v((u,u)) <= m_max.

    U(V) is transitive on vectors of a given nonzero norm, so any grid meeting each
    valuation covers every orbit.
    """
    plane = drinfeld_plane(p)
    reps = [PadicScalar(p, a, b, 1) for a in range(p) for b in range(p)]
    us = [r for r in reps if not r.is_zero()][:units]
    top = m_max if exp_max is None else exp_max
    out = []
    for i in range(top + 1):
        for j in range(top + 1):
            for x in us:
                for y in us:
                    u = (x * PadicScalar.uniformizer(p, i), y * PadicScalar.uniformizer(p, j))
                    nrm = plane.space.norm(u)
                    if not nrm.is_zero() and 0 <= nrm.val <= m_max:
                        out.append(u)
    return out


def _z_pairing_from_multiplicities(plane, u, v, Lu, mults):
    """(Z(u), P_L) = [L = L_u] - (q+1) m(u, L) + sum over neighbours of m(u, L')."""
    val = (1 if v.key == Lu.key else 0) - (plane.q + 1) * mults[v.key]
    return val + sum(mults.get(w.key, 0) for w in plane.neighbors(v))


def drinfeld_battery(p=3, m_max=4, units=4, stride=1):
    """Counts of passed and failed checks for the Z and Y multiplicities on the tree."""
    plane = drinfeld_plane(p)
    q = plane.q
    checks = {k: [0, 0] for k in ("containment", "z_formula", "y_formula", "chain", "shift",
                                   "pairing_table", "pairing_intersection")}
    failures = []

    def record(name, ok, info):
        checks[name][0 if ok else 1] += 1
        if not ok and len(failures) < 20:
            failures.append({"check": name, **info})

    pi = PadicScalar.uniformizer(p, 1)
    for u in sample_vectors(p, m_max, units)[::stride]:
        m = plane.norm_val(u)
        Lu = plane.central_lattice(u)
        ball = plane.ball(Lu, m + 2)
        pu = mx.vscale(pi, u)
        mults = {k: plane.z_multiplicity_membership(u, v) for k, (v, _) in ball.items()}
        for key, (v, d) in ball.items():
            info = {"m": m, "d": d, "type": v.type}
            if d > m + 1:
                continue
            inL = v.lattice.contains(u)
            record("containment", inL == (d <= m), info)
            z = mults[key]
            y = plane.y_multiplicity_membership(u, v)
            record("z_formula", z == plane.z_multiplicity_formula(u, v, d), info)
            record("y_formula", y == plane.y_multiplicity_formula(u, v, d), info)
            if inL:
                z2 = plane.z_multiplicity_membership(pu, v)
                record("chain", z <= y <= z2, info)
                record("shift", z2 - z == 1, info)
            table = (1 if v.type == 0 else -q) * int(inL)
            record("pairing_table", plane.pairing_with_line("Z", u, v) == table, info)
            got = _z_pairing_from_multiplicities(plane, u, v, Lu, mults)
            record("pairing_intersection", got == table, info)
    ok = all(bad == 0 for _, bad in checks.values())
    return {"p": p, "m_max": m_max,
            "checks": {k: {"pass": a, "fail": b} for k, (a, b) in checks.items()},
            "failures": failures, "pass": ok}
