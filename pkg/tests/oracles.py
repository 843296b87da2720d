"""Brute-force reference computations used only by the tests.

Nothing here prunes: every lattice in a bounding box is listed by running over
all Hermite normal forms relative to the top lattice, and all conditions are
checked afterwards on the explicit candidates.
"""

from __future__ import annotations

from collections import defaultdict
from itertools import product

from padic_transfer import matrix as mx
from padic_transfer.lattices import HermitianLattice, standard_space_and_lattice
from padic_transfer.orbits import SymTriple, UnitaryPair, transfer_factor
from padic_transfer.padic import PadicScalar


def _reps(p, k, real):
    """Residues modulo p^k in O_F (or in Z_p when real)."""
    r = range(p**k)
    if real:
        return [PadicScalar(p, a, 0, 1) for a in r]
    return [PadicScalar(p, a, b, 1) for a in r for b in r]


def lattices_in_box(space, top: HermitianLattice, depth: int, real: bool):
    """Every lattice L with pi^depth * top <= L <= top, as explicit lattices."""
    n, p = space.n, space.p
    P = top.basis
    out = []
    for ks in product(range(depth + 1), repeat=n):
        slots = [(i, j) for j in range(n) for i in range(j)]
        choices = [_reps(p, ks[i], real) for (i, j) in slots]
        for vals in product(*choices):
            H = [[mx.zero(p)] * n for _ in range(n)]
            for i in range(n):
                H[i][i] = PadicScalar.uniformizer(p, ks[i])
            for (i, j), v in zip(slots, vals):
                H[i][j] = v
            cols = mx.columns(mx.mul(P, tuple(tuple(r) for r in H)))
            out.append(HermitianLattice(space, cols))
    return out


def box_depth(lo: HermitianLattice, top: HermitianLattice) -> int:
    """Least m with pi^m top inside lo."""
    m = 0
    while not lo.contains_lattice(top.scale_pi(m)):
        m += 1
    return m


def lattices_between(space, lo, hi, real):
    if not hi.contains_lattice(lo):
        return []
    return [L for L in lattices_in_box(space, hi, box_depth(lo, hi), real)
            if L.contains_lattice(lo)]


def _orbit_span(space, v, op):
    gens, w = [], v
    for _ in range(space.n):
        gens.append(w)
        w = mx.mat_vec(op, w)
    return HermitianLattice(space, gens)


def _covector_dual(space, rows):
    return HermitianLattice(space, mx.columns(mx.inverse(tuple(rows))))


def _charpoly_integral(m):
    return all(c.is_integral() for c in mx.charpoly(m))


def _in(L, term_exp, v):
    return L.scale_pi(term_exp).contains(v)


def _cov_ok(L, e, cov):
    return all(mx.dot(cov, c).is_integral() for c in L.scale_pi(e).cols)


def oracle_orb_symmetric(a: SymTriple, f):
    """Coefficient map {a: c_a} and omega, by listing all tau-stable lattices in a box."""
    n, p, t = a.n, a.p, f.t
    space, L0 = standard_space_and_lattice(n, t, p)
    omega = transfer_factor(a, L0)
    if not _charpoly_integral(a.gamma):
        return {}, omega
    A = _orbit_span(space, a.u1, a.gamma)
    rows, r = [], a.u2
    for _ in range(n):
        rows.append(r)
        r = mx.vec_mat(r, a.gamma)
    M = _covector_dual(space, rows)
    emin = min(term.exp for term in f.vector)
    emax = max(term.exp for term in f.covector)
    lo = A.scale_pi(1 - emin)
    hi = M.scale_pi(-1 - emax)
    cands = [L for L in lattices_between(space, lo, hi, real=True) if L.is_stable(a.gamma)]
    coeffs = defaultdict(int)
    for L1 in cands:
        for L2 in cands:
            if L1.relative_index(L2) != t:
                continue
            if not (L2.contains_lattice(L1) and L1.scale_pi(-1).contains_lattice(L2)):
                continue
            lats = {1: L1, 2: L2}
            if not all(_in(lats[x.which], x.exp, a.u1) for x in f.vector):
                continue
            if not all(_cov_ok(lats[x.which], x.exp, a.u2) for x in f.covector):
                continue
            k = L1.log_covolume - L0.log_covolume
            coeffs[k] += -1 if k % 2 else 1
    return {k: c for k, c in coeffs.items() if c}, omega


def oracle_orb_unitary(b: UnitaryPair, f):
    space, g = b.space, b.g
    if not _charpoly_integral(g):
        return 0
    A = _orbit_span(space, b.u, g)
    lo = A.scale_pi(1)
    hi = A.dual()
    count = 0
    for L in lattices_between(space, lo, hi, real=False):
        if L.vertex_type() != f.t or not L.is_stable(g):
            continue
        lats = {"L": L, "Ldual": L.dual()}
        if all(_in(lats[x.which], x.exp, b.u) for x in f.vector):
            count += 1
    return count


def _flat(n, p, t):
    """Standard chain of type t in rank n with e the last basis vector."""
    space, L = standard_space_and_lattice(n, t, p)
    eps = 1 if t == n else 0
    fspace, Lf = standard_space_and_lattice(n - 1, t - eps, p)
    return space, L, fspace, Lf, eps


def _extend(Lf: HermitianLattice, space, scale_e):
    """Lf + O_F * pi^scale_e * e inside the rank-n space."""
    n, p = space.n, space.p
    cols = [tuple(c) + (mx.zero(p),) for c in Lf.cols]
    cols.append(tuple(mx.zero(p) for _ in range(n - 1)) + (PadicScalar.uniformizer(p, scale_e),))
    return HermitianLattice(space, cols)


def oracle_orb_group_symmetric(gp, t):
    """Direct count of gamma'-stable chains h(L_flat + O e), h(L_flat^dual + O e/(e,e))."""
    n = len(gp)
    p = gp[0][0].p
    space, L, fspace, Lf, eps = _flat(n, p, t)
    e = tuple(mx.one(p) if i == n - 1 else mx.zero(p) for i in range(n))
    omega = transfer_factor(SymTriple(gp, e, e), L)
    if not _charpoly_integral(gp):
        return {}, omega
    # L1 contains the projection of O_F[gp] e; its rows e* gp^i (i >= 1) bound it above
    span = _orbit_span(space, e, gp)
    lo = HermitianLattice(fspace, [c[: n - 1] for c in span.cols])
    rows, r = [], tuple(mx.zero(p) for _ in range(n - 1)) + (mx.one(p),)
    for _ in range(n - 1):
        r = mx.vec_mat(r, gp)
        rows.append(r[: n - 1])
    hi = _covector_dual(fspace, rows).scale_pi(-1)
    cands = lattices_between(fspace, lo, hi, real=True)
    stab1 = [M for M in cands if _extend(M, space, 0).is_stable(gp)]
    stab2 = [M for M in cands if _extend(M, space, -eps).is_stable(gp)]
    coeffs = defaultdict(int)
    tf = t - eps
    for L1 in stab1:
        for L2 in stab2:
            if L1.relative_index(L2) != tf:
                continue
            if L2.contains_lattice(L1) and L1.scale_pi(-1).contains_lattice(L2):
                k = L1.log_covolume - Lf.log_covolume
                coeffs[k] += -1 if k % 2 else 1
    return {k: c for k, c in coeffs.items() if c}, omega


def oracle_orb_group_unitary(gp, space, t):
    """Direct count of vertex lattices L_flat of type t - v((e,e)) with gp(L_flat + O e) stable."""
    from padic_transfer.cayley import BlockDecomposition

    n = space.n
    p = space.p
    dec = BlockDecomposition.from_space(space)
    fspace = dec.flat_space
    tf = t - dec.eps
    if not _charpoly_integral(gp):
        return 0
    e = tuple(mx.one(p) if i == n - 1 else mx.zero(p) for i in range(n))
    span = _orbit_span(space, e, gp)
    proj = HermitianLattice(fspace, [c[: n - 1] for c in span.cols])
    count = 0
    lo = proj
    hi = proj.dual()
    if not hi.contains_lattice(lo):
        return 0
    for M in lattices_between(fspace, lo, hi, real=False):
        if M.vertex_type() != tf:
            continue
        if _extend(M, space, 0).is_stable(gp):
            count += 1
    return count


def oracle_fourier(f, y):
    """F(f)(y) as a finite sum vol(pi^k N) * sum_{x in N / pi^k N} f(x) psi_F((x, y)).

    N holds the support of f and pi^k N lies in every term lattice and in the
    annihilator of every character and of y, so the integrand is constant on
    the cosets summed over.
    """
    from padic_transfer.weil import Cyclotomic, psi_F, volume

    sp, p = f.space, f.space.p
    gens = [c for t in f.terms for c in t.lattice.cols] + [t.a for t in f.terms]
    N = HermitianLattice(sp, gens)
    B = HermitianLattice(sp, [t.b for t in f.terms] + [y] + list(HermitianLattice.standard(sp).cols))
    M = B.dual()
    for t in f.terms:
        M = M.intersect(t.lattice)
    k = 0
    while not M.contains_lattice(N.scale_pi(k)):
        k += 1
    digits = _reps(p, k, False)
    total = Cyclotomic.rational(p, 0)
    for ds in product(digits, repeat=sp.n):
        x = mx.mat_vec(N.basis, ds)
        fx = f(x)
        if not fx.is_zero():
            total = total + fx * psi_F(sp.form(x, y))
    return total * volume(N.scale_pi(k))
