import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import lattices_between, lattices_in_box
from padic_transfer import matrix as mx
from padic_transfer.lattices import (
    HermitianLattice,
    NotALattice,
    ParityMismatch,
    layer_lattices,
    nearby_space,
    stable_lattices_between,
    standard_space_and_lattice,
)
from padic_transfer.padic import PadicScalar

p = 3


def _random_lattice(space, rng, spread=2):
    while True:
        gens = [tuple(PadicScalar(p, rng.randint(-4, 4), rng.randint(-4, 4), p ** rng.randint(0, spread))
                      for _ in range(space.n)) for _ in range(space.n + 1)]
        try:
            return HermitianLattice(space, gens)
        except NotALattice:
            continue


def _unimodular(n, rng):
    while True:
        U = tuple(tuple(PadicScalar(p, rng.randint(-3, 3), rng.randint(-3, 3)) for _ in range(n))
                  for _ in range(n))
        d = mx.det(U)
        if not d.is_zero() and d.val == 0:
            return U


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_hnf_is_independent_of_generators(seed, n):
    rng = random.Random(seed)
    space, _ = standard_space_and_lattice(n, 0, p)
    L = _random_lattice(space, rng)
    U = _unimodular(n, rng)
    other = HermitianLattice(space, mx.columns(mx.mul(L.basis, U)))
    assert other == L and other.key == L.key
    assert all(L.contains(c) for c in other.cols)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(0, 3))
def test_duality(seed, n, t):
    t = min(t, n)
    rng = random.Random(seed)
    space, _ = standard_space_and_lattice(n, t, p)
    L, M = _random_lattice(space, rng), _random_lattice(space, rng)
    assert L.dual().dual() == L
    assert (L + M).dual() == L.dual().intersect(M.dual())
    assert L.intersect(M) <= L and L <= L + M
    assert L.scale_pi(1).relative_index(L) == n
    assert L.dual().scale_pi(1) == L.scale_pi(-1).dual()


def test_standard_vertex_lattices():
    for n in range(1, 4):
        for t in range(n + 1):
            space, L = standard_space_and_lattice(n, t, p)
            assert L.vertex_type() == t
            assert space.split == (t % 2 == 0)
            assert L.relative_index(L.dual()) == t
            assert L.dual().scale_pi(1) <= L
            assert nearby_space(n, t, p).split != space.split
    with pytest.raises(ParityMismatch):
        standard_space_and_lattice(2, 1, p, split=True)


@pytest.mark.parametrize("n,depth,real", [(1, 2, False), (2, 1, False), (2, 2, True), (3, 1, True)])
def test_enumeration_matches_exhaustive_box(n, depth, real):
    space, L = standard_space_and_lattice(n, 0, p)
    lo = L.scale_pi(depth)
    fast = {M.key for M in stable_lattices_between(lo, L, real=real)}
    slow = {M.key for M in lattices_between(space, lo, L, real)}
    assert len(lattices_in_box(space, L, depth, real)) >= len(slow)
    assert fast == slow


def test_stable_enumeration_matches_filter():
    rng = random.Random(5)
    space, L = standard_space_and_lattice(2, 0, p)
    for _ in range(5):
        g = _unimodular(2, rng)
        lo = L.scale_pi(2)
        fast = {M.key for M in stable_lattices_between(lo, L, ops=(g,))}
        slow = {M.key for M in lattices_between(space, lo, L, real=False) if M.is_stable(g)}
        assert fast == slow


def test_layer_counts_are_grassmannians():
    # dim-k subspaces of F_{q^2}^n
    space, L = standard_space_and_lattice(2, 0, p)
    q2 = p * p
    assert len(layer_lattices(L, 0)) == 1
    assert len(layer_lattices(L, 1)) == q2 + 1
    assert len(layer_lattices(L, 2)) == 1
    # tau-stable ones: subspaces of F_q^2
    assert len(layer_lattices(L, 1, real=True)) == p + 1
