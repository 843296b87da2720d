"""Relative Cayley maps reducing rank-n group orbits to rank-(n-1) semi-Lie orbits.

Coordinates: V = V_flat + F e with e the last basis vector, orthogonal to V_flat.
An endomorphism is written in blocks [[a, b], [c, d]] (symmetric side) or
[[t, u], [w, d]] (unitary side) with a, t acting on V_flat.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from . import matrix as mx
from .lattices import HermitianSpace
from .orbits import SymTriple, UnitaryPair
from .padic import PadicScalar, nonresidue


class SingularCayley(ZeroDivisionError):
    pass


class NotIntegral(ValueError):
    pass


class SearchExhausted(RuntimeError):
    pass


class BadTwist(ValueError):
    pass


TwistSearchExhausted = SearchExhausted


@dataclass(frozen=True)
class BlockDecomposition:
    """V = V_flat + F e with e = last basis vector and (e, e) = ee."""

    n: int
    ee: PadicScalar
    flat_gram: tuple | None = None

    @classmethod
    def from_space(cls, space: HermitianSpace) -> "BlockDecomposition":
        n, G = space.n, space.gram
        if any(not G[i][n - 1].is_zero() for i in range(n - 1)):
            raise ValueError("last basis vector is not orthogonal to the rest")
        flat = tuple(tuple(G[i][j] for j in range(n - 1)) for i in range(n - 1))
        return cls(n, G[n - 1][n - 1], flat)

    @classmethod
    def standard(cls, n, p, ee=1):
        return cls(n, mx.const(p, ee))

    @property
    def eps(self) -> int:
        """v((e, e))."""
        return int(self.ee.val)

    @property
    def flat_space(self) -> HermitianSpace:
        return HermitianSpace(self.flat_gram)

    def blocks(self, M):
        m = self.n - 1
        a = tuple(tuple(M[i][j] for j in range(m)) for i in range(m))
        b = tuple(M[i][m] for i in range(m))
        c = tuple(M[m][j] for j in range(m))
        return a, b, c, M[m][m]

    def assemble(self, a, b, c, d):
        m = self.n - 1
        rows = [tuple(a[i]) + (b[i],) for i in range(m)]
        rows.append(tuple(c) + (d,))
        return tuple(rows)


def _outer(col, row):
    return tuple(tuple(x * y for y in row) for x in col)


def _one_minus(d):
    s = 1 - d
    if s.is_zero():
        raise SingularCayley("1 - d vanishes")
    return s


def cayley_raw(M, dec: BlockDecomposition):
    """(a + bc/(1-d), b/(1-d), c/(1-d)) for M = [[a, b], [c, d]]."""
    a, b, c, d = dec.blocks(M)
    s = _one_minus(d).inv()
    b1 = mx.vscale(s, b)
    c1 = mx.vscale(s, c)
    return mx.add(a, _outer(b1, c)), b1, c1


def cayley_unitary(gp, dec: BlockDecomposition):
    """c_U(g') = (g, u1) with g = t + uw/(1-d), u1 = u/(1-d)."""
    g, u1, _ = cayley_raw(gp, dec)
    return g, u1


def cayley_unitary_twisted(gp, xi, dec: BlockDecomposition):
    return cayley_unitary(mx.scale(xi, gp), dec)


def w1_functional(g, u1, dec: BlockDecomposition):
    """Row vector of x -> (g x, u1) / (e, e)."""
    G = dec.flat_gram
    m = dec.n - 1
    inv = dec.ee.inv()
    # (g x, u1) = u1^dagger G g x
    row = mx.vec_mat(tuple(x.conj() for x in u1), G)
    row = mx.vec_mat(row, g)
    return tuple(inv * row[j] for j in range(m))


def cayley_unitary_inverse(g, u1, d, dec: BlockDecomposition):
    """The unique g' with c_U(g') = (g, u1) and lower right entry d."""
    s = _one_minus(d)
    w = mx.vscale(s, w1_functional(g, u1, dec))
    u = mx.vscale(s, u1)
    t = mx.sub(g, _outer(u1, w))
    return dec.assemble(t, u, w, d)


def unitary_bridge_residuals(g, u1, dec: BlockDecomposition, upto=None):
    """(g^i u1, u1) - (e,e) w1(g^{i-1} u1) for i = 0..n (all zero when the bridge holds)."""
    space = dec.flat_space
    w1 = w1_functional(g, u1, dec)
    n = dec.n
    out = []
    for i in range(0, (upto if upto is not None else n) + 1):
        lhs = space.form(mx.mat_vec(mx.power(g, i), u1), u1)
        rhs = dec.ee * mx.dot(w1, mx.mat_vec(mx.power(g, i - 1), u1))
        out.append(lhs - rhs)
    return out


# twisting elements ----------------------------------------------------------------


def _unit_reps(p):
    d = nonresidue(p)
    for a0, a1 in product(range(p), repeat=2):
        if (a0 * a0 - d * a1 * a1) % p:
            yield PadicScalar(p, a0, a1, 1)


def norm_one_reps(p):
    """xi = a / conj(a) for unit residue representatives a, without repeats (a = 1 first)."""
    seen = []
    for a in sorted(_unit_reps(p), key=lambda a: a != 1):
        xi = a / a.conj()
        if all((xi - s).val < 1 for s in seen):
            seen.append(xi)
            yield a, xi


def _is_twisting(B, gamma):
    try:
        return mx.mul(B, mx.inverse(mx.conj(B))) == gamma
    except ZeroDivisionError:
        return False


def _charpoly_integral(gamma):
    return all(c.is_integral() for c in mx.charpoly(gamma))


def twisting_element(gamma, integral=True):
    """B with gamma = B conj(B)^-1; in O_F[gamma]^x when integral is requested."""
    n = len(gamma)
    p = gamma[0][0].p
    if integral and not _charpoly_integral(gamma):
        raise NotIntegral("gamma has non-integral characteristic polynomial")
    I = mx.identity(n, p)
    for a, xi in norm_one_reps(p):
        M = mx.add(I, mx.scale(xi, gamma))
        det = mx.det(M)
        if det.is_zero() or (integral and det.val != 0):
            continue
        B = mx.scale(a.inv(), M)
        if _is_twisting(B, gamma):
            return B
    if integral:
        return _twisting_by_linear_algebra(gamma)
    raise SearchExhausted("no twisting element of the form a^-1 (1 + xi gamma)")


def _twisting_by_linear_algebra(gamma, box=2):
    """Solve B = gamma conj(B) for B = sum beta_i gamma^i and search small integral combos."""
    n = len(gamma)
    p = gamma[0][0].p
    pw = [mx.identity(n, p)]
    for _ in range(n - 1):
        pw.append(mx.mul(pw[-1], gamma))
    # unknowns (x_i, y_i) with beta_i = x_i + y_i sqrt(delta); equations are F0-linear.
    s = PadicScalar(p, 0, 1, 1)
    basis = []
    for i in range(n):
        for coeff in (mx.one(p), s):
            B = mx.scale(coeff, pw[i])
            basis.append(mx.sub(B, mx.mul(gamma, mx.conj(B))))
    rows = []
    for r in range(n):
        for c in range(n):
            rows.append([PadicScalar(p, v[r][c].na, 0, v[r][c].den) for v in basis])
            rows.append([PadicScalar(p, v[r][c].nb, 0, v[r][c].den) for v in basis])
    kernel = _kernel_F0(rows, 2 * n, p)
    rng = range(-box, box + 1)
    for combo in product(rng, repeat=len(kernel)):
        if not any(combo):
            continue
        coeffs = [mx.zero(p)] * (2 * n)
        for k, vec in zip(combo, kernel):
            coeffs = [c + k * x for c, x in zip(coeffs, vec)]
        B = mx.zeros(n, n, p)
        for i in range(n):
            beta = coeffs[2 * i] + coeffs[2 * i + 1] * s
            B = mx.add(B, mx.scale(beta, pw[i]))
        d = mx.det(B)
        if not d.is_zero() and d.val == 0 and mx.is_integral(B) and _is_twisting(B, gamma):
            return B
    raise SearchExhausted("no integral twisting element found in the search box")


def _kernel_F0(rows, ncols, p):
    """Kernel basis (scaled to be integral and primitive) of a matrix over Q."""
    M = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(M)) if not M[i][c].is_zero()), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = M[r][c].inv()
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and not M[i][c].is_zero():
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    out = []
    for f in (c for c in range(ncols) if c not in pivots):
        v = [mx.zero(p)] * ncols
        v[f] = mx.one(p)
        for row, pc in zip(M, pivots):
            v[pc] = -row[f]
        m = min(x.val for x in v if not x.is_zero())
        scale = PadicScalar.uniformizer(p, -m)
        out.append([x * scale for x in v])
    return out


def cayley_symmetric(gp, dec: BlockDecomposition, B=None, integral=True):
    """c_S'(gamma') = (gamma, B^-1 b1, c1 conj(B)) as a SymTriple."""
    gamma, b1, c1 = cayley_raw(gp, dec)
    if B is None:
        B = twisting_element(gamma, integral=integral)
    elif not _is_twisting(B, gamma):
        raise BadTwist("B conj(B)^-1 differs from gamma")
    b2 = mx.mat_vec(mx.inverse(B), b1)
    c2 = mx.vec_mat(c1, mx.conj(B))
    if not all(x.is_real() for x in b2 + c2):
        raise BadTwist("twisted vectors are not F0-rational")
    return SymTriple(gamma, b2, c2)


def symmetric_bridge_residuals(gp, dec: BlockDecomposition, image: SymTriple):
    """c2 gamma^{i+1} b2 - c1 gamma^i b1 for i = -1..n."""
    gamma, b1, c1 = cayley_raw(gp, dec)
    out = []
    for i in range(-1, dec.n + 1):
        lhs = mx.dot(image.u2, mx.mat_vec(mx.power(gamma, i + 1), image.u1))
        rhs = mx.dot(c1, mx.mat_vec(mx.power(gamma, i), b1))
        out.append(lhs - rhs)
    return out


def find_twist(d):
    """A norm-one xi (xi = 1 preferred) with 1 - xi d a unit."""
    p = d.p
    for _, xi in norm_one_reps(p):
        s = 1 - xi * d
        if not s.is_zero() and s.val == 0:
            return xi
    raise TwistSearchExhausted("no norm-one twist makes 1 - xi d a unit")


def scale_covector(a: SymTriple, c) -> SymTriple:
    return SymTriple(a.gamma, a.u1, mx.vscale(mx.const(a.p, c), a.u2))


def group_invariants(M, dec: BlockDecomposition):
    """Characteristic polynomial and the (e, e)-entries of the powers M^i, i < n."""
    m = dec.n - 1
    entries = tuple(mx.power(M, i)[m][m] for i in range(1, dec.n))
    return mx.charpoly(M), entries


def group_matches(gp_unitary, gp_sym, dec: BlockDecomposition) -> bool:
    return group_invariants(gp_unitary, dec) == group_invariants(gp_sym, dec)


def matching_compatibility(gp_unitary, space: HermitianSpace, gp_sym, B=None) -> bool:
    """Whether c_U(g') matches (e,e).c_S'(gamma') as semi-Lie data."""
    from .orbits import matches

    dec = BlockDecomposition.from_space(space)
    g, u1 = cayley_unitary(gp_unitary, dec)
    image = cayley_symmetric(gp_sym, dec, B)
    return matches(UnitaryPair(dec.flat_space, g, u1), scale_covector(image, dec.ee))


def matching_group_unitary(gp_sym, dec_sym: BlockDecomposition, ee=None, B=None):
    """A unitary g' on V_G + F e matching gamma' when the Cayley image allows it.

    The flat space is the moment space of the twisted image (e,e).c_S'(gamma');
    the returned pair is (space, g').
    """
    from .orbits import unitary_from_triple

    p = gp_sym[0][0].p
    ee = mx.const(p, ee if ee is not None else dec_sym.ee)
    # work with xi gamma' so that 1 - xi d is invertible, then untwist
    xi = find_twist(dec_sym.blocks(gp_sym)[3])
    twisted = mx.scale(xi, gp_sym)
    image = scale_covector(cayley_symmetric(twisted, dec_sym, B, integral=False), ee)
    flat = unitary_from_triple(image)
    n = dec_sym.n
    G = flat.space.gram
    gram = tuple(tuple(G[i]) + (mx.zero(p),) for i in range(n - 1)) + (
        tuple(mx.zero(p) for _ in range(n - 1)) + (ee,),)
    space = HermitianSpace(gram)
    dec = BlockDecomposition.from_space(space)
    d = dec_sym.blocks(twisted)[3]
    return space, mx.scale(xi.conj(), cayley_unitary_inverse(flat.g, flat.u, d, dec))
