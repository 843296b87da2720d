from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from padic_transfer.padic import (
    LogMultiple,
    PadicScalar,
    PrecisionExhausted,
    ZeroArgument,
    default_precision,
    nonresidue,
    norm_one_sample,
    scalar,
)

P = st.sampled_from([3, 5, 7])


@st.composite
def scalars(draw, p=None, nonzero=False):
    p = p or draw(P)
    a = draw(st.integers(-200, 200))
    b = draw(st.integers(-200, 200))
    if nonzero and a == 0 and b == 0:
        a = 1
    k = draw(st.integers(0, 3))
    unit_den = draw(st.sampled_from([1, 2, 4]))
    return PadicScalar(p, a, b, p**k * unit_den if p != 2 else p**k)


@st.composite
def scalar_pairs(draw, nonzero=False):
    p = draw(P)
    return draw(scalars(p, nonzero)), draw(scalars(p, nonzero))


@given(scalar_pairs(nonzero=True))
def test_valuation_is_multiplicative(xy):
    x, y = xy
    assert (x * y).val == x.val + y.val


@given(scalar_pairs())
def test_ultrametric_inequality(xy):
    x, y = xy
    s = x + y
    if not s.is_zero() and not x.is_zero() and not y.is_zero():
        assert s.val >= min(x.val, y.val)
        if x.val != y.val:
            assert s.val == min(x.val, y.val)


@given(scalars(nonzero=True))
def test_norm_trace_and_conjugation(x):
    assert x.conj().conj() == x
    assert x * x.conj() == x.norm()
    assert x + x.conj() == x.trace()
    assert x.norm().is_real()
    # unramified: v(N x) = 2 v(x)
    assert x.norm().val == 2 * x.val


@given(scalar_pairs(nonzero=True))
def test_eta_is_a_character(xy):
    x, y = xy
    assert (x * y).eta() == x.eta() * y.eta()


@given(scalars(nonzero=True))
def test_inverse(x):
    assert x * x.inv() == 1
    assert x / x == 1


@given(scalars(), st.integers(-2, 3))
def test_mod_pk_is_a_canonical_representative(x, k):
    r = x.mod_pk(k)
    diff = x - r
    assert diff.is_zero() or diff.val >= k
    assert r.mod_pk(k) == r
    # another representative of the same class has the same canonical form
    shifted = x + PadicScalar.uniformizer(x.p, k) * PadicScalar(x.p, 7, 3)
    assert shifted.mod_pk(k) == r


def test_nonresidue():
    for p in (3, 5, 7, 11, 13):
        d = nonresidue(p)
        assert all((y * y - d) % p for y in range(p))


def test_norm_one_sample():
    for seed in range(10):
        xi = norm_one_sample(5, seed)
        assert xi.norm() == 1
    assert norm_one_sample(3, a=1) == 1
    with pytest.raises(ZeroArgument):
        norm_one_sample(3, a=0)


def test_json_round_trip_and_literals():
    x = scalar(3, Fraction(5, 9), 2)
    assert PadicScalar.from_json(x.to_json(60)) == x
    assert PadicScalar.from_json("5/9", 3) == scalar(3, Fraction(5, 9))
    assert PadicScalar.from_json([1, 2], 3) == scalar(3, 1, 2)
    z = PadicScalar.from_json({"p": 3, "val": None, "unit": [0, 0]})
    assert z.is_zero()
    with pytest.raises(ValueError):
        PadicScalar.from_json({"p": 3, "val": 0, "unit": [3, 0]})


def test_tracked_precision_detects_cancellation():
    x = PadicScalar.from_json({"p": 3, "val": 0, "unit": [1, 0], "prec": 10}, track=True)
    y = PadicScalar.from_json({"p": 3, "val": 0, "unit": [1, 0], "prec": 10}, track=True)
    with pytest.raises(PrecisionExhausted):
        _ = x - y
    assert (x * x).absprec == 10


def test_env_precision(monkeypatch):
    monkeypatch.setenv("PADIC_TRANSFER_PREC", "17")
    assert default_precision() == 17
    monkeypatch.delenv("PADIC_TRANSFER_PREC")
    assert default_precision() == 40


def test_log_multiple():
    a = LogMultiple(Fraction(1, 2))
    assert (a + a).r == 1
    assert (a - a).r == 0
    assert (-a).r == Fraction(-1, 2)
    assert a.scale(4).r == 2
    assert a.to_json() == {"log_q_multiple": "1/2"}
