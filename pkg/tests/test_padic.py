import pytest
from hypothesis import given, strategies as st

from prismlab.padic import (
    InexactDivisionError,
    NotInvertibleError,
    PrecisionError,
    TruncatedScalar,
    exact_div_p,
    invert,
    is_prime,
    padic_binom,
    scalar_arith,
    valuation,
)

primes = st.sampled_from([2, 3, 5])


def S(p, v, prec):
    return TruncatedScalar.make(p, v, prec)


@st.composite
def scalars(draw, p=None, prec=None):
    p = p or draw(primes)
    prec = prec if prec is not None else draw(st.integers(1, 12))
    return S(p, draw(st.integers(-(10**12), 10**12)), prec)


def test_add_small():
    assert scalar_arith(S(2, 3, 8), S(2, 5, 8), "add") == S(2, 8, 8)


def test_mul_by_zero_keeps_precision():
    x = S(3, 7, 5) * S(3, 0, 5)
    assert x.is_zero() and x.prec == 5


def test_mul_oracle():
    # (1 + 2^7)(1 - 2^7) = 1 - 2^14
    assert S(2, 1 + 2**7, 8) * S(2, 1 - 2**7, 8) == S(2, 1, 8)


def test_invert_examples():
    assert invert(S(2, 1, 4)) == S(2, 1, 4)
    assert invert(S(2, 3, 4)).residue == 11
    with pytest.raises(NotInvertibleError):
        invert(S(2, 2, 4))


def test_exact_div_examples():
    q = exact_div_p(S(5, 25, 7), 2)
    assert q.residue == 1 and q.prec == 5
    q = exact_div_p(S(2, 6, 6))
    assert q.residue == 3 and q.prec == 5
    with pytest.raises(InexactDivisionError):
        exact_div_p(S(2, 3, 6))
    with pytest.raises(PrecisionError):
        exact_div_p(S(2, 0, 2), 3)


def test_binom_examples():
    assert padic_binom(S(3, 1, 6), 2) == 0
    assert padic_binom(S(3, -1, 6), 2) == 1
    # C(3, 2)/3 = 1
    assert exact_div_p(padic_binom(S(3, 3, 6), 2)) == 1


def test_helpers():
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]
    assert valuation(48, 2) == 4 and valuation(0, 2) is None


def test_json_round_trip():
    x = S(3, 1234, 9)
    assert TruncatedScalar.from_json(3, x.to_json()) == x


@given(st.data())
def test_ring_axioms(data):
    p = data.draw(primes)
    a, b, c = (data.draw(scalars(p)) for _ in range(3))
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a and a + b == b + a
    assert ((a + b) * c).prec == min(a.prec, b.prec, c.prec)


@given(scalars())
def test_inverse_two_sided(a):
    if not a.is_unit():
        return
    b = invert(a)
    assert a * b == 1 and b * a == 1


@given(scalars(), st.integers(0, 5))
def test_div_undoes_mul(a, k):
    b = TruncatedScalar.make(a.p, a.residue * a.p**k, a.prec + k)
    q = exact_div_p(b, k)
    assert q == a and q.prec == a.prec


@given(scalars(prec=10), st.integers(1, 8))
def test_pascal(a, k):
    lhs = padic_binom(a, k)
    rhs = padic_binom(a - 1, k) + padic_binom(a - 1, k - 1)
    assert lhs == rhs
