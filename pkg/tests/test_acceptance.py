"""Acceptance suite: one test per criterion, each recording a pass/fail line."""

import random
import time
from fractions import Fraction

import pytest
from conftest import record

from oracles import (
    oracle_orb_group_symmetric,
    oracle_orb_group_unitary,
    oracle_orb_symmetric,
    oracle_orb_unitary,
)
from padic_transfer import matrix as mx
from padic_transfer.cayley import BlockDecomposition, matching_group_unitary
from padic_transfer.geometry import (
    BTVertex,
    drinfeld_battery,
    drinfeld_plane,
    int_y_maxorder,
    int_z_maxorder,
    random_maxorder_sample,
    z_length_rank1,
)
from padic_transfer.lattices import standard_space_and_lattice
from padic_transfer.orbital import (
    OrbLaurent,
    boundary_triple,
    f_std,
    f_std_prime,
    f_unitary,
    orb_group_symmetric,
    orb_group_unitary,
    orb_symmetric,
    orb_unitary,
    support_profile,
)
from padic_transfer.orbits import (
    SymTriple,
    UnitaryPair,
    random_group_element,
    random_matching_pair,
    random_sym_triple,
    unitary_from_triple,
)
from padic_transfer.padic import PadicScalar
from padic_transfer.weil import (
    CosetCharacterFunction,
    dual_relation_check,
    fourier,
    local_modularity_check,
    random_coset_term,
    volume,
)


def _finish(n, failures, detail):
    record(n, not failures, detail + (f"; first failure {failures[0]}" if failures else ""))
    assert not failures, failures[:5]


def test_criterion_1_rank_one_table():
    start = time.perf_counter()
    failures, count = [], 0
    for p in (3, 5):
        one = PadicScalar(p, 1)
        for t0 in (0, 1):
            for vb in range(-1, 5):
                for vc in range(-1, 5):
                    v = vb + vc
                    if not -2 <= v <= 8:
                        continue
                    c = PadicScalar(p, 2) * PadicScalar.uniformizer(p, vc)
                    a = SymTriple(((one,),), (PadicScalar.uniformizer(p, vb),), (c,))
                    o = orb_symmetric(a, f_std(t0))
                    count += 1
                    if (v - t0) % 2 == 0:
                        want = 1 if v >= t0 else 0
                        if o.value0 != want:
                            failures.append((p, t0, vb, vc, "value", o.value0, want))
                    else:
                        want = -Fraction(max(0, (v - t0 + 1) // 2))
                        if o.value0 != 0 or o.derivative0.r != want:
                            failures.append((p, t0, vb, vc, "dorb", o.derivative0.r, want))
                        if -want != z_length_rank1(t0, v):
                            failures.append((p, t0, v, "length"))
    elapsed = time.perf_counter() - start
    if elapsed >= 10:
        failures.append(("runtime", elapsed))
    _finish(1, failures, f"{count} rank-one cases in {elapsed:.1f}s")


def test_criterion_2_transfer_identity():
    start = time.perf_counter()
    failures, count, nonzero = [], 0, 0
    p = 3
    for n in (1, 2):
        for t in range(n + 1):
            for seed in range(50):
                a, b = random_matching_pair(n, t, 1000 * n + 100 * t + seed, p, max_box=4)
                s = orb_symmetric(a, f_std(t)).value0
                u = orb_unitary(b, f_unitary(t))
                nonzero += u != 0
                if s != u:
                    failures.append(("match", n, t, seed, s, u))
                an, _ = random_matching_pair(n, t, 5000 + 1000 * n + 100 * t + seed, p,
                                             nearby=True, max_box=4)
                sn = orb_symmetric(an, f_std(t)).value0
                if sn != 0:
                    failures.append(("nearby", n, t, seed, sn))
                count += 1
    elapsed = time.perf_counter() - start
    if elapsed >= 600:
        failures.append(("runtime", elapsed))
    _finish(2, failures, f"{count} matching and {count} nearby orbits, {nonzero} nonzero, "
                         f"{elapsed:.1f}s")


def test_criterion_3_cayley_reductions():
    start = time.perf_counter()
    failures, count = [], {2: 0, 3: 0}
    p = 3
    for n, total, box in ((2, 50, 4), (3, 50, 3)):
        rng = random.Random(300 + n)
        for k in range(total):
            t = k % (n + 1)
            gp = random_group_element(n, p, rng, max_box=box)
            reduced = orb_group_symmetric(gp, t)
            coeffs, omega = oracle_orb_group_symmetric(gp, t)
            if reduced != OrbLaurent(coeffs, omega):
                failures.append(("S", n, k, reduced.signed_coeffs(), coeffs, omega))
            ee = p if t == n else 1
            space, gu = matching_group_unitary(gp, BlockDecomposition.standard(n, p, ee))
            if orb_group_unitary(gu, space, t) != oracle_orb_group_unitary(gu, space, t):
                failures.append(("U", n, k))
            count[n] += 1
    elapsed = time.perf_counter() - start
    if elapsed >= 900:
        failures.append(("runtime", elapsed))
    _finish(3, failures, f"{count[2]} inputs at n=2, {count[3]} at n=3, both sides, "
                         f"{elapsed:.1f}s")


def test_criterion_4_maximal_order_atc():
    failures, count = [], 0
    p = 3
    for n, per_t in ((2, 20), (3, 20)):
        rng = random.Random(40 + n)
        for t in range(n + 1):
            for _ in range(per_t):
                a, b, dec = random_maxorder_sample(n, t, p, rng)
                o = orb_symmetric(a, f_std(t))
                o2 = orb_symmetric(a, f_std_prime(t))
                z, y = int_z_maxorder(dec, t), int_y_maxorder(dec, t)
                if o.value0 != 0 or o.derivative0.r != -z:
                    failures.append(("Z", n, t, [(x.v, x.split) for x in dec.blocks],
                                     o.derivative0.r, z))
                if o2.value0 != 0 or o2.derivative0.r != -((-1) ** t) * y:
                    failures.append(("Y", n, t, [(x.v, x.split) for x in dec.blocks],
                                     o2.derivative0.r, y))
                count += 1
    _finish(4, failures, f"{count} block-diagonal samples at n=2,3 (Z and Y variants)")


def test_criterion_5_drinfeld_battery():
    start = time.perf_counter()
    res = drinfeld_battery(3, 4)
    elapsed = time.perf_counter() - start
    failures = list(res["failures"])
    if elapsed >= 300:
        failures.append(("runtime", elapsed))
    total = sum(v["pass"] + v["fail"] for v in res["checks"].values())
    _finish(5, failures, f"{total} checks over m <= 4 in {elapsed:.1f}s")


def test_criterion_6_fourier_weil():
    failures = []
    p = 3
    for n in (1, 2):
        for t in range(n + 1):
            _, L = standard_space_and_lattice(n, t, p)
            F = fourier(CosetCharacterFunction.indicator(L))
            want = CosetCharacterFunction.indicator(L.dual(), Fraction(1, p**t))
            if volume(L) != Fraction(1, p**t) or not F.equals(want):
                failures.append(("F(1_L)", n, t))
            res = dual_relation_check(L, samples=100, seed=n * 10 + t)
            if not res["pass"]:
                failures.append(("dual relation", n, t, res))
    rng = random.Random(6)
    for k in range(100):
        n = 1 + k % 2
        space, _ = standard_space_and_lattice(n, k % (n + 1), p)
        f = CosetCharacterFunction(space, [random_coset_term(space, rng)])
        if not fourier(fourier(f)).equals(f.reflect()):
            failures.append(("reflection", k))
    plane = drinfeld_plane(p)
    lines = 0
    for v, _ in plane.ball(plane.standard_vertex(), 3).values():
        res = local_modularity_check(plane, [(1, v)])
        lines += 1
        if not res["pass"]:
            failures.append(("local modularity", v.type, res["first_difference"]))
    types = {v.type for v, _ in plane.ball(plane.standard_vertex(), 1).values()}
    if types != {0, 2}:
        failures.append(("vertex types", types))
    _finish(6, failures, f"F(1_L) for n<=2, 100 reflections, {lines} single lines, "
                         "omega on 100 samples per lattice")


def test_criterion_7_support_and_boundary():
    failures, rows, boundary = [], 0, 0
    p = 3
    for n in (1, 2):
        for t in range(n + 1):
            rep = support_profile(n, t, p, samples=6, seed=70 + 10 * n + t)
            rows += len(rep["rows"])
            if not rep["pass"]:
                failures.append(("profile", n, t))
    # boundary triples against the brute-force group orbitals
    for n in (2, 3):
        rng = random.Random(77 + n)
        for k in range(12):
            t = k % (n + 1)
            _, L = standard_space_and_lattice(n, t, p)
            vL = int(L.valuation())
            gp = random_group_element(n, p, rng, max_box=3)
            c = PadicScalar(p, rng.choice([1, 2, 4, 5])) * PadicScalar.uniformizer(p, vL)
            x = boundary_triple(gp, c)
            if not x.is_rs():
                continue
            semi = orb_symmetric(x, f_std(t))
            coeffs, omega = oracle_orb_group_symmetric(gp, t)
            if semi != OrbLaurent(coeffs, omega):
                failures.append(("boundary S", n, k, semi.signed_coeffs(), coeffs))
            space, gu = matching_group_unitary(gp, BlockDecomposition.standard(n, p, c))
            e = tuple(mx.one(p) if i == n - 1 else mx.zero(p) for i in range(n))
            semi_u = orb_unitary(UnitaryPair(space, gu, e), f_unitary(t))
            if semi_u != oracle_orb_group_unitary(gu, space, t):
                failures.append(("boundary U", n, k))
            boundary += 1
    _finish(7, failures, f"{rows} profile rows, {boundary} boundary triples vs brute force")


def test_criterion_8_oracle_equivalence():
    failures, count = [], 0
    p = 3
    rng = random.Random(8)
    for k in range(40):
        n = 1 + k % 2
        t = k % (n + 1)
        a = random_sym_triple(n, p, rng, integral=k % 5 != 0, max_box=4)
        for f in (f_std(t), f_std_prime(t)):
            got = orb_symmetric(a, f)
            coeffs, omega = oracle_orb_symmetric(a, f)
            if got != OrbLaurent(coeffs, omega):
                failures.append(("S", k, f.name, got.signed_coeffs(), coeffs))
        b = unitary_from_triple(a)
        if orb_unitary(b, f_unitary(t)) != oracle_orb_unitary(b, f_unitary(t)):
            failures.append(("U", k))
        count += 1
    _finish(8, failures, f"{count} instances with n <= 2, both sides")


@pytest.fixture(autouse=True)
def _no_env_precision(monkeypatch):
    monkeypatch.delenv("PADIC_TRANSFER_PREC", raising=False)
