"""Fourier transform and the Weil representation on coset-character functions.

A term (c, a, b, L) is the function x -> c * psi_F((x, b)) * 1_{a + L}(x) on a
hermitian space, with c in a cyclotomic field Q(zeta_{p^k}). The class of finite
sums of such terms is closed under the Fourier transform for the self-dual
measure and under the generators of SL_2 acting through the Weil representation.
"""

from __future__ import annotations

import cmath
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from . import matrix as mx
from .lattices import HermitianLattice, HermitianSpace, NotALattice, hnf_columns
from .padic import PadicScalar, _frac_residue

MAX_DEPTH = 8


class CyclotomicDepthExceeded(ArithmeticError):
    pass


class NonClosedTerm(ArithmeticError):
    pass


class Cyclotomic:
    """Element of Q(zeta_{p^k}) in the power basis zeta^j, 0 <= j < (p-1) p^(k-1)."""

    __slots__ = ("p", "k", "c")

    def __init__(self, p, k=0, coeffs=None):
        if k > MAX_DEPTH:
            raise CyclotomicDepthExceeded(f"depth {k} exceeds {MAX_DEPTH}")
        self.p, self.k = p, k
        self.c = {}
        for j, v in (coeffs or {}).items():
            self._add_power(j, Fraction(v))

    def _add_power(self, j, v):
        if not v:
            return
        N = self.p**self.k
        j %= N
        if self.k == 0:
            j = 0
        else:
            step = self.p ** (self.k - 1)
            if j >= (self.p - 1) * step:
                # zeta^j = -sum_{i=1}^{p-1} zeta^(j - i step)
                for i in range(1, self.p):
                    self._add_power(j - i * step, -v)
                return
        s = self.c.get(j, 0) + v
        if s:
            self.c[j] = s
        else:
            self.c.pop(j, None)

    @classmethod
    def rational(cls, p, x):
        return cls(p, 0, {0: x})

    @classmethod
    def zeta(cls, p, k, j=1):
        return cls(p, k, {j: 1})

    def lift(self, k) -> "Cyclotomic":
        if k < self.k:
            raise ValueError("cannot lower the depth")
        if k == self.k:
            return self
        s = self.p ** (k - self.k)
        return Cyclotomic(self.p, k, {j * s: v for j, v in self.c.items()})

    def _align(self, other):
        if not isinstance(other, Cyclotomic):
            other = Cyclotomic.rational(self.p, other)
        k = max(self.k, other.k)
        return self.lift(k), other.lift(k), k

    def __add__(self, other):
        a, b, k = self._align(other)
        out = Cyclotomic(self.p, k, a.c)
        for j, v in b.c.items():
            out._add_power(j, v)
        return out

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.p, self.k, {j: -v for j, v in self.c.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, Cyclotomic) else -Fraction(other))

    def __mul__(self, other):
        if not isinstance(other, Cyclotomic):
            return Cyclotomic(self.p, self.k, {j: v * Fraction(other) for j, v in self.c.items()})
        a, b, k = self._align(other)
        out = Cyclotomic(self.p, k)
        for i, x in a.c.items():
            for j, y in b.c.items():
                out._add_power(i + j, x * y)
        return out

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.c

    def __eq__(self, other):
        if not isinstance(other, Cyclotomic):
            other = Cyclotomic.rational(self.p, other)
        return (self - other).is_zero()

    def __hash__(self):
        return hash(tuple(sorted(self.lift(MAX_DEPTH).c.items())))

    def __complex__(self):
        N = self.p**self.k
        return sum((float(v) * cmath.exp(2j * cmath.pi * jj / N) for jj, v in self.c.items()), 0j)

    def __repr__(self):
        if not self.c:
            return "0"
        return " + ".join(f"{v}*z{self.p}^{self.k}^{j}" if j else str(v)
                          for j, v in sorted(self.c.items()))


def psi(x: PadicScalar) -> Cyclotomic:
    """Unramified character of level 0 on F0: exp(2 pi i {x}_p)."""
    if not x.is_real():
        raise ValueError("psi is a character of F0")
    if x.is_zero():
        return Cyclotomic.rational(x.p, 1)
    r, j = _frac_residue(x.na, x.den, x.p, 0)
    return Cyclotomic.zeta(x.p, j, r)


def psi_F(z: PadicScalar) -> Cyclotomic:
    """psi composed with the trace of F/F0."""
    return psi(z.trace())


@dataclass(frozen=True)
class CosetTerm:
    coeff: Cyclotomic
    a: tuple
    b: tuple
    lattice: HermitianLattice

    def value(self, space: HermitianSpace, x) -> Cyclotomic:
        if not self.lattice.contains(mx.vsub(x, self.a)):
            return Cyclotomic.rational(space.p, 0)
        return self.coeff * psi_F(space.form(x, self.b))


def _canonical_rep(L: HermitianLattice, x):
    """Representative of x + L with coordinates in the canonical residue set."""
    c = L.coords(x)
    return mx.mat_vec(L.basis, tuple(ci.mod_pk(0) for ci in c))


def _quotient_reps(big: HermitianLattice, small: HermitianLattice):
    """Representatives of big / small, read off the triangular form of small in big's basis."""
    p, n = big.p, big.n
    rel = [big.coords(c) for c in small.cols]
    _, pivots = hnf_columns(rel, n, p)
    digits = [[PadicScalar(p, a, b, 1) for a in range(p**k) for b in range(p**k)] for k in pivots]
    return [mx.mat_vec(big.basis, ds) for ds in product(*digits)]


class CosetCharacterFunction:
    def __init__(self, space: HermitianSpace, terms=()):
        self.space = space
        self.terms = tuple(terms)

    @property
    def p(self):
        return self.space.p

    @classmethod
    def indicator(cls, L: HermitianLattice, coeff=1, a=None):
        space = L.space
        z = tuple(mx.zero(space.p) for _ in range(space.n))
        c = coeff if isinstance(coeff, Cyclotomic) else Cyclotomic.rational(space.p, coeff)
        return cls(space, [CosetTerm(c, a if a is not None else z, z, L)])

    def __add__(self, other):
        return CosetCharacterFunction(self.space, self.terms + other.terms)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return CosetCharacterFunction(self.space, [CosetTerm(t.coeff * c, t.a, t.b, t.lattice)
                                                   for t in self.terms])

    def __call__(self, x) -> Cyclotomic:
        out = Cyclotomic.rational(self.p, 0)
        for t in self.terms:
            out = out + t.value(self.space, x)
        return out

    # normal form

    def _normal_term(self, t: CosetTerm) -> CosetTerm:
        L = t.lattice
        a = _canonical_rep(L, t.a)
        D = L.dual()
        b = _canonical_rep(D, t.b)
        beta = mx.vsub(t.b, b)
        # psi_F((x, b)) = psi_F((x, b_c)) psi_F((a, beta)) on a + L
        c = t.coeff * psi_F(self.space.form(a, beta))
        return CosetTerm(c, a, b, L)

    def normal_form(self) -> dict:
        out = {}
        for t in self.terms:
            n = self._normal_term(t)
            key = (n.lattice.key, tuple(x.key() for x in n.a), tuple(x.key() for x in n.b))
            if key in out:
                prev = out[key]
                out[key] = CosetTerm(prev.coeff + n.coeff, prev.a, prev.b, prev.lattice)
            else:
                out[key] = n
        return {k: v for k, v in out.items() if not v.coeff.is_zero()}

    def refine(self, small: HermitianLattice) -> "CosetCharacterFunction":
        """Rewrite every term on cosets of a common sublattice."""
        terms = []
        for t in self.terms:
            if t.lattice == small:
                terms.append(t)
                continue
            if not t.lattice.contains_lattice(small):
                raise ValueError("refinement lattice must lie in every term lattice")
            for r in _quotient_reps(t.lattice, small):
                terms.append(CosetTerm(t.coeff, mx.vadd(t.a, r), t.b, small))
        return CosetCharacterFunction(self.space, terms)

    def lattices(self):
        return [t.lattice for t in self.terms]

    def equals(self, other: "CosetCharacterFunction") -> bool:
        """Exact comparison through normal forms on a common refinement."""
        diff = self - other
        if not diff.terms:
            return True
        common = diff.terms[0].lattice
        for L in diff.lattices()[1:]:
            common = common.intersect(L)
        return not diff.refine(common).normal_form()

    def first_difference(self, other):
        diff = self - other
        if not diff.terms:
            return None
        common = diff.terms[0].lattice
        for L in diff.lattices()[1:]:
            common = common.intersect(L)
        nf = diff.refine(common).normal_form()
        return next(iter(nf.values()), None)

    def normalized(self) -> "CosetCharacterFunction":
        return CosetCharacterFunction(self.space, list(self.normal_form().values()))

    def reflect(self) -> "CosetCharacterFunction":
        """x -> f(-x)."""
        return CosetCharacterFunction(self.space, [
            CosetTerm(t.coeff, mx.vscale(mx.const(self.p, -1), t.a),
                      mx.vscale(mx.const(self.p, -1), t.b), t.lattice) for t in self.terms])


def volume(L: HermitianLattice) -> Fraction:
    """Self-dual volume: [L^dual : L]^(-1/2) = q^(-index) with q = p."""
    idx = L.relative_index(L.dual())
    return Fraction(L.p) ** (-idx)


def weil_constant(space: HermitianSpace) -> int:
    return space.sign


def fourier(f: CosetCharacterFunction) -> CosetCharacterFunction:
    """F(f)(y) = int f(x) psi_F((x, y)) dx for the self-dual measure."""
    sp = f.space
    terms = []
    for t in f.terms:
        c = t.coeff * volume(t.lattice) * psi_F(sp.form(t.a, t.b))
        terms.append(CosetTerm(c, mx.vscale(mx.const(sp.p, -1), t.b), t.a, t.lattice.dual()))
    return CosetCharacterFunction(sp, terms)


def _unipotent_term(sp: HermitianSpace, t: CosetTerm, s: PadicScalar, max_split: int):
    """Terms of psi(s (x, x)) * t(x)."""
    L = t.lattice
    vL = L.valuation()
    if s.is_zero():
        return [t]
    need = -(int(s.val) + vL)
    k = 0 if need <= 0 else (need + 1) // 2
    if k > max_split:
        raise NonClosedTerm("psi(s (x,x)) is not a character on the cosets within the split cap")
    if k:
        small = L.scale_pi(k)
        pieces = [CosetTerm(t.coeff, mx.vadd(t.a, r), t.b, small) for r in _quotient_reps(L, small)]
    else:
        pieces = [t]
    out = []
    for piece in pieces:
        a = piece.a
        # psi(s (a + l, a + l)) = psi(-s (a, a)) psi_F((x, s a)) when s (l, l) is integral
        c = piece.coeff * psi(-(s * sp.norm(a)))
        out.append(CosetTerm(c, a, mx.vadd(piece.b, mx.vscale(s, a)), piece.lattice))
    return out


def weil_generator(gen: str, f: CosetCharacterFunction, s=None, max_split=3):
    """Action of w = [[0, -1], [1, 0]] (gamma_V times Fourier) or of n(s) (psi(s (x, x)))."""
    sp = f.space
    if gen == "w":
        return fourier(f).scale(weil_constant(sp))
    if gen == "n":
        s = s if isinstance(s, PadicScalar) else PadicScalar(sp.p, Fraction(s).numerator, 0,
                                                             Fraction(s).denominator)
        terms = []
        for t in f.terms:
            terms.extend(_unipotent_term(sp, t, s, max_split))
        return CosetCharacterFunction(sp, terms)
    raise ValueError("generator must be 'w' or 'n'")


def random_coset_term(space: HermitianSpace, rng: random.Random, spread=1):
    """A random term on a random lattice of small index around the standard one."""
    p = space.p

    def rand_vec(k):
        return tuple(PadicScalar(p, rng.randint(-4, 4), rng.randint(-4, 4), p**k)
                     for _ in range(space.n))

    try:
        L = HermitianLattice(space, [rand_vec(rng.randint(0, spread)) for _ in range(space.n)])
    except NotALattice:
        L = HermitianLattice.standard(space)
    c = Cyclotomic(p, 1, {rng.randrange(p): rng.randint(1, 3)})
    return CosetTerm(c, rand_vec(rng.randint(0, 2)), rand_vec(rng.randint(0, 2)), L)


# checks --------------------------------------------------------------------------


def dual_relation_check(L: HermitianLattice, samples=100, seed=0):
    """w.1_L = gamma_V vol(L) 1_{L^dual}, and omega_{L^dual} = gamma_V omega_L on samples."""
    from .orbits import random_sym_triple, transfer_factor

    sp = L.space
    gv = weil_constant(sp)
    lhs = weil_generator("w", CosetCharacterFunction.indicator(L))
    rhs = CosetCharacterFunction.indicator(L.dual(), gv * volume(L))
    fourier_ok = lhs.equals(rhs)
    rng = random.Random(seed)
    bad = 0
    for _ in range(samples):
        a = random_sym_triple(sp.n, sp.p, rng, integral=rng.random() < 0.7)
        if transfer_factor(a, L.dual()) != gv * transfer_factor(a, L):
            bad += 1
    return {"type": L.vertex_type(), "gamma_V": gv, "vol": str(volume(L)),
            "fourier_ok": fourier_ok, "omega_samples": samples, "omega_failures": bad,
            "pass": fourier_ok and bad == 0}


def local_modularity_check(plane, C, t=1):
    """w.f_L(C) = (-q)^-t f_{L^dual}(C) for a formal line sum C = [(coeff, vertex), ...]."""
    from .geometry import line_function_terms

    sp = plane.space
    q = plane.q

    def build(kind):
        f = CosetCharacterFunction(sp)
        for c, L in line_function_terms(plane, C, kind):
            f = f + CosetCharacterFunction.indicator(L, c)
        return f

    fz, fy = build("Z"), build("Y")
    lhs = weil_generator("w", fz)
    rhs = fy.scale(Fraction(-q) ** (-t))
    ok = lhs.equals(rhs)
    return {"lines": len(C), "pass": ok,
            "first_difference": None if ok else repr(lhs.first_difference(rhs))}
