"""Orbital integrals as signed lattice counts.

Symmetric side. For a triple x = (gamma, u1, u2) and a test function attached to
a chain L0 <= L0^dual of type t in F0^n, the orbital integral is

    Orb(x, f, s) = omega(x) * sum_{(L1, L2)} (-1)^a X^a,    X = q^{-s},

over tau-stable lattice pairs (L1, L2) in the GL_n(F0)-orbit of (L0, L0^dual)
stable under gamma and satisfying the vector/covector conditions of f, where
a = [L0 : L1]. Unitary side: the number of gamma-stable vertex lattices of the
given type satisfying the vector conditions.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from . import matrix as mx
from .lattices import (
    HermitianLattice,
    HermitianSpace,
    stable_lattices_between,
    standard_space_and_lattice,
)
from .orbits import NotRegularSemisimple, SymTriple, UnitaryPair, transfer_factor
from .padic import LogMultiple, PadicScalar

DEFAULT_BUDGET = 200_000


@dataclass(frozen=True)
class OrbLaurent:
    """omega * sum_a c_a X^a with X = q^{-s}; coefficients stored without omega."""

    coeffs: dict = field(default_factory=dict)
    omega: int = 1

    def __post_init__(self):
        object.__setattr__(self, "coeffs", {a: c for a, c in sorted(self.coeffs.items()) if c})

    @property
    def value0(self) -> int:
        return self.omega * sum(self.coeffs.values())

    @property
    def derivative0(self) -> LogMultiple:
        """d/ds at s = 0, as a multiple of log q."""
        return LogMultiple(Fraction(-self.omega * sum(a * c for a, c in self.coeffs.items())))

    def signed_coeffs(self) -> dict:
        return {a: self.omega * c for a, c in self.coeffs.items()}

    def __eq__(self, other):
        return isinstance(other, OrbLaurent) and self.signed_coeffs() == other.signed_coeffs()

    def __hash__(self):
        return hash(tuple(self.signed_coeffs().items()))

    def evaluate(self, X) -> Fraction:
        return self.omega * sum(Fraction(c) * Fraction(X) ** a for a, c in self.coeffs.items())

    def to_json(self):
        return {"coeffs": {str(a): c for a, c in self.coeffs.items()}, "omega": self.omega,
                "value0": self.value0, "dvalue0_logq": str(self.derivative0.r)}


@dataclass(frozen=True)
class Term:
    """pi^exp * Lambda_which. Symmetric side: which in {1, 2}; unitary side: 'L' or 'Ldual'."""

    exp: int
    which: object


@dataclass(frozen=True)
class TestFunctionDescriptor:
    """Indicator test function attached to a chain of type t.

    Symmetric side: 1_{S(L1, L2)} x 1_{X} x 1_{Y^*} where X is the intersection
    of the vector terms and Y the sum of the covector terms. Unitary side:
    1_{U(L)} x 1_{X} with X the intersection of the vector terms.
    """

    side: str
    t: int
    vector: tuple
    covector: tuple = ()
    name: str = ""

    def to_json(self):
        return {"side": self.side, "t": self.t, "name": self.name,
                "vector": [[x.exp, x.which] for x in self.vector],
                "covector": [[x.exp, x.which] for x in self.covector]}


def f_std(t):
    return TestFunctionDescriptor("S", t, (Term(0, 1),), (Term(0, 2),), "f_std")


def f_std_prime(t):
    return TestFunctionDescriptor("S", t, (Term(0, 2),), (Term(0, 1),), "f_std_prime")


def f_reduced_symmetric(t, eps):
    """Vector in L1 cap pi^eps L2, covector in (L1 + pi^eps L2)^*."""
    return TestFunctionDescriptor("S", t, (Term(0, 1), Term(eps, 2)), (Term(0, 1), Term(eps, 2)),
                                  f"reduced_S(eps={eps})")


def f_unitary(t):
    return TestFunctionDescriptor("U", t, (Term(0, "L"),), (), "1_L")


def f_unitary_dual(t):
    return TestFunctionDescriptor("U", t, (Term(0, "Ldual"),), (), "1_Ldual")


def f_reduced_unitary(t, eps):
    return TestFunctionDescriptor("U", t, (Term(0, "L"), Term(eps, "Ldual")), (),
                                  f"reduced_U(eps={eps})")


def descriptor_from_json(obj) -> TestFunctionDescriptor:
    if isinstance(obj, str):
        raise ValueError("use a named builder for string test functions")
    return TestFunctionDescriptor(obj["side"], int(obj["t"]),
                                  tuple(Term(int(e), w) for e, w in obj.get("vector", [])),
                                  tuple(Term(int(e), w) for e, w in obj.get("covector", [])),
                                  obj.get("name", ""))


NAMED = {"f_std": f_std, "f_std_prime": f_std_prime, "1_L": f_unitary,
         "1_Ldual": f_unitary_dual}


def _sum(lats):
    out = lats[0]
    for L in lats[1:]:
        out = out + L
    return out


def _intersect(lats):
    out = lats[0]
    for L in lats[1:]:
        out = out.intersect(L)
    return out


def _charpoly_integral(mat) -> bool:
    return all(c.is_integral() for c in mx.charpoly(mat))


def _span_orbit(space, vectors, op):
    """O_F[op]-span of the given vectors (op has integral characteristic polynomial)."""
    n = space.n
    gens = []
    for v in vectors:
        w = v
        for _ in range(n):
            gens.append(w)
            w = mx.mat_vec(op, w)
    return HermitianLattice(space, gens)


def symmetric_box(a: SymTriple, f: TestFunctionDescriptor, space):
    """Bounds (lo1, hi1, lo2, hi2) for L1 and L2 forced by f at the triple a."""
    n = a.n
    A = _span_orbit(space, [a.u1], a.gamma)
    # M = {x : u2 gamma^i x integral}
    rows = []
    r = a.u2
    for _ in range(n):
        rows.append(r)
        r = mx.vec_mat(r, a.gamma)
    M = HermitianLattice(space, mx.columns(mx.inverse(tuple(rows))))
    lo = {1: [], 2: []}
    hi = {1: [], 2: []}
    for term in f.vector:
        lo[term.which].append(A.scale_pi(-term.exp))
    for term in f.covector:
        hi[term.which].append(M.scale_pi(-term.exp))
    # L1 <= L2 <= pi^-1 L1
    lo1 = lo[1] + [L.scale_pi(1) for L in lo[2]]
    hi1 = hi[1] + hi[2]
    if not lo1 or not hi1:
        raise ValueError("test function does not bound the lattice L1")
    return _sum(lo1), _intersect(hi1), lo, hi


def _vector_ok(vec, lattices, terms):
    for term in terms:
        if not lattices[term.which].scale_pi(term.exp).contains(vec):
            return False
    return True


def _covector_ok(cov, lattices, terms):
    for term in terms:
        L = lattices[term.which].scale_pi(term.exp)
        for c in L.cols:
            if not mx.dot(cov, c).is_integral():
                return False
    return True


def symmetric_pairs(a: SymTriple, f: TestFunctionDescriptor, budget=DEFAULT_BUDGET):
    """All admissible chains (L1, L2) for the symmetric orbital integral."""
    n, p, t = a.n, a.p, f.t
    space, _ = standard_space_and_lattice(n, t, p)
    if not _charpoly_integral(a.gamma):
        return []
    lo1, hi1, lo, hi = symmetric_box(a, f, space)
    ops = [a.gamma]
    out = []
    for L1 in stable_lattices_between(lo1, hi1, ops, real=True, budget=budget):
        lower = _sum([L1] + lo[2])
        upper = _intersect([L1.scale_pi(-1)] + hi[2])
        base = L1.relative_index(lower)
        if base > t:
            continue
        cands = stable_lattices_between(lower, upper, ops, real=True, max_index=t - base,
                                        budget=budget)
        for L2 in cands:
            if L1.relative_index(L2) != t:
                continue
            lats = {1: L1, 2: L2}
            if _vector_ok(a.u1, lats, f.vector) and _covector_ok(a.u2, lats, f.covector):
                out.append((L1, L2))
    return out


def orb_symmetric(a: SymTriple, f: TestFunctionDescriptor, budget=DEFAULT_BUDGET) -> OrbLaurent:
    if f.side != "S":
        raise ValueError("symmetric-side test function expected")
    if not a.is_rs():
        raise NotRegularSemisimple("orbital integrals need a regular semisimple triple")
    n, p = a.n, a.p
    _, L0 = standard_space_and_lattice(n, f.t, p)
    omega = transfer_factor(a, L0)
    coeffs = defaultdict(int)
    for L1, _ in symmetric_pairs(a, f, budget):
        k = L1.log_covolume - L0.log_covolume
        coeffs[k] += -1 if k % 2 else 1
    return OrbLaurent(dict(coeffs), omega)


def dorb(a: SymTriple, f: TestFunctionDescriptor, budget=DEFAULT_BUDGET) -> LogMultiple:
    return orb_symmetric(a, f, budget).derivative0


def unitary_lattices(b: UnitaryPair, f: TestFunctionDescriptor, budget=DEFAULT_BUDGET):
    """g-stable vertex lattices of type t meeting the vector conditions of f."""
    if f.side != "U":
        raise ValueError("unitary-side test function expected")
    if not b.is_rs():
        raise NotRegularSemisimple("orbital integrals need a regular semisimple pair")
    space, g, t = b.space, b.g, f.t
    if not _charpoly_integral(g):
        return []
    A = _span_orbit(space, [b.u], g)
    lows, highs = [], []
    for term in f.vector:
        Ak = A.scale_pi(-term.exp)
        if term.which == "L":
            lows.append(Ak)
            highs.append(Ak.dual())
        else:
            lows.append(Ak.scale_pi(1))
            highs.append(Ak.dual())
    lo = _sum(lows)
    if not lo.is_integral():
        return []
    hi = _intersect(highs + [lo.dual()])
    excess = int(mx.det(lo.gram).val) - t
    if excess < 0 or excess % 2:
        return []
    found = stable_lattices_between(lo, hi, [g], prune=HermitianLattice.is_integral,
                                    max_index=excess // 2, budget=budget)
    out = []
    for L in found:
        if L.vertex_type() != t:
            continue
        lats = {"L": L, "Ldual": L.dual()}
        if _vector_ok(b.u, lats, f.vector):
            out.append(L)
    return out


def orb_unitary(b: UnitaryPair, f: TestFunctionDescriptor, budget=DEFAULT_BUDGET) -> int:
    return len(unitary_lattices(b, f, budget))


def orb(x, f, budget=DEFAULT_BUDGET):
    if isinstance(x, SymTriple):
        return orb_symmetric(x, f, budget)
    return orb_unitary(x, f, budget)


# group versions via the relative Cayley maps -------------------------------------


def _group_setup(n, t, p):
    """Standard chain of type t; e is the last basis vector, so L = L_flat + O_F e."""
    from .cayley import BlockDecomposition

    space, L = standard_space_and_lattice(n, t, p)
    dec = BlockDecomposition.from_space(space)
    eps = dec.eps
    return space, L, dec, t - eps, eps


def orb_group_symmetric(gp, t, budget=DEFAULT_BUDGET, B=None) -> OrbLaurent:
    """Orb(gamma', 1_{S(L, L^dual)}, s) for the standard chain of type t, by reduction."""
    from .cayley import cayley_raw, cayley_symmetric, find_twist

    n = len(gp)
    p = gp[0][0].p
    if n < 2:
        raise ValueError("group version needs n >= 2")
    _, L, dec, t_flat, eps = _group_setup(n, t, p)
    e = tuple(mx.one(p) if i == n - 1 else mx.zero(p) for i in range(n))
    omega = transfer_factor(SymTriple(gp, e, e), L)
    if not _charpoly_integral(gp):
        return OrbLaurent({}, omega)
    xi = find_twist(dec.blocks(gp)[3])
    g2 = mx.scale(xi, gp)
    gamma, _, _ = cayley_raw(g2, dec)
    if not _charpoly_integral(gamma):
        return OrbLaurent({}, omega)
    image = cayley_symmetric(g2, dec, B)
    res = orb_symmetric(image, f_reduced_symmetric(t_flat, eps), budget)
    return OrbLaurent(res.coeffs, omega)


def reduced_symmetric_image(gp, t, B=None):
    """(twist xi, semi-Lie image, reduced descriptor) used by orb_group_symmetric."""
    from .cayley import cayley_symmetric, find_twist

    n = len(gp)
    _, _, dec, t_flat, eps = _group_setup(n, t, gp[0][0].p)
    xi = find_twist(dec.blocks(gp)[3])
    return xi, cayley_symmetric(mx.scale(xi, gp), dec, B), f_reduced_symmetric(t_flat, eps)


def orb_group_unitary(gp, space: HermitianSpace, t, budget=DEFAULT_BUDGET) -> int:
    """Number of g'-stable lattices L_flat + O_F e with L_flat a type t - v((e,e)) vertex
    lattice of the flat space, by reduction."""
    from .cayley import BlockDecomposition, cayley_unitary, find_twist

    dec = BlockDecomposition.from_space(space)
    eps = dec.eps
    t_flat = t - eps
    xi = find_twist(dec.blocks(gp)[3])
    if not _charpoly_integral(gp):
        return 0
    g, u1 = cayley_unitary(mx.scale(xi, gp), dec)
    return orb_unitary(UnitaryPair(dec.flat_space, g, u1), f_reduced_unitary(t_flat, eps),
                       budget)


# support and boundary ----------------------------------------------------------


def _unit_scalar(p, rng):
    return PadicScalar(p, rng.choice([k for k in range(1, p) if k % p]), 0, 1)


def boundary_triple(gp, c) -> SymTriple:
    """(gamma', e, c e*) with e the last basis vector."""
    n = len(gp)
    p = gp[0][0].p
    e = tuple(mx.one(p) if i == n - 1 else mx.zero(p) for i in range(n))
    return SymTriple(gp, e, mx.vscale(mx.const(p, c), e))


def _support_row(a, t, budget):
    from .orbits import unitary_from_triple

    s = orb_symmetric(a, f_std(t), budget)
    b = unitary_from_triple(a)
    u = orb_unitary(b, f_unitary(t), budget)
    return s, u


def support_profile(n, t, p=3, window=None, samples=4, seed=0, budget=DEFAULT_BUDGET, max_box=4):
    """Orb_U - Orb_S on sampled orbits with prescribed v(u2 u1), plus boundary comparisons.

    Rows with v below v(L) must have both sides zero. At v = v(L) the boundary triple
    (gamma', e, c e*) is compared with the group orbital integral of (L, e), on both sides.
    """
    import random

    from .cayley import BlockDecomposition, matching_group_unitary
    from .orbits import random_group_element, random_sym_triple

    _, L = standard_space_and_lattice(n, t, p)
    vL = int(L.valuation())
    lo, hi = window if window is not None else (vL - 2, vL)
    rng = random.Random(seed)
    rows = []
    for a_val in range(lo, hi + 1):
        for _ in range(samples):
            x = random_sym_triple(n, p, rng, integral=True, max_box=max_box)
            m0 = x.moment(0)
            while m0.is_zero():
                x = random_sym_triple(n, p, rng, integral=True, max_box=max_box)
                m0 = x.moment(0)
            shift = PadicScalar.uniformizer(p, a_val - int(m0.val))
            x = SymTriple(x.gamma, x.u1, mx.vscale(shift, x.u2))
            s, u = _support_row(x, t, budget)
            rows.append({"kind": "generic", "v": a_val, "orb_S": s.value0, "orb_U": u,
                         "difference": u - s.value0,
                         "vanishing_required": a_val <= vL - 1})
        if a_val != vL or n < 2:
            continue
        for _ in range(samples):
            gp = random_group_element(n, p, rng, integral=True, max_box=max_box)
            c = _unit_scalar(p, rng) * PadicScalar.uniformizer(p, vL)
            x = boundary_triple(gp, c)
            if not x.is_rs():
                continue
            s, u = _support_row(x, t, budget)
            gs = orb_group_symmetric(gp, t, budget)
            space, gu = matching_group_unitary(gp, BlockDecomposition.standard(n, p, c))
            e = tuple(mx.one(p) if i == n - 1 else mx.zero(p) for i in range(n))
            u_direct = orb_unitary(UnitaryPair(space, gu, e), f_unitary(t), budget)
            gu_val = orb_group_unitary(gu, space, t, budget)
            rows.append({"kind": "boundary", "v": a_val, "orb_S": s.value0, "orb_U": u,
                         "difference": u - s.value0,
                         "group_S": gs.to_json(), "semi_lie_equals_group_S": s == gs,
                         "orb_U_direct": u_direct, "group_U": gu_val,
                         "semi_lie_equals_group_U": u_direct == gu_val})
    ok = all(r["difference"] == 0 for r in rows)
    ok = ok and all(r["orb_S"] == 0 and r["orb_U"] == 0 for r in rows if r.get("vanishing_required"))
    ok = ok and all(r["semi_lie_equals_group_S"] and r["semi_lie_equals_group_U"]
                    for r in rows if r["kind"] == "boundary")
    return {"n": n, "t": t, "p": p, "v_L": vL, "window": [lo, hi], "rows": rows, "pass": ok}
