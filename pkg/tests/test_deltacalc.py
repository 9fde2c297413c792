import pytest
from hypothesis import given, strategies as st

from prismlab.deltacalc import (
    DeltaPolyRing,
    EnvelopeRecursion,
    delta_order_at_most,
    delta_poly,
    gamma_epoly,
    is_good,
    lemma_delta_n,
)
from prismlab.maxring import MaxRing, iota
from prismlab.series import Eisenstein, _int_poly_mul


def test_delta_of_generator():
    R = DeltaPolyRing(3, 4)
    assert delta_poly(R.z(0)) == R.z(1)
    assert delta_poly(R.u()).is_zero()


@pytest.mark.parametrize("p", [3, 5])
def test_delta_of_square(p):
    R = DeltaPolyRing(p, 4)
    z0, z1 = R.z(0), R.z(1)
    assert delta_poly(z0**2) == 2 * z0**p * z1 + p * z1**2


def test_delta_of_Ez():
    R = DeltaPolyRing(2, 4)
    E = R.from_u_poly([-2, 1])
    dE = R.from_u_poly([-3, 2])
    assert delta_poly(E) == dE
    assert delta_poly(E * R.z(0)) == (2 * dE + E**2) * R.z(1) + dE * R.z(0) ** 2


@pytest.mark.parametrize("p,poly", [(2, "u-2"), (3, "u-3"), (3, "u^2-3"), (5, "u-5")])
def test_first_level(p, poly):
    E = Eisenstein.parse(p, poly)
    data = lemma_delta_n(E, 1)
    dE = E.delta_poly()
    while dE[-1] == 0:
        dE.pop()
    Ep = [1]
    for _ in range(p):
        Ep = _int_poly_mul(Ep, list(E.coeffs))
    b1 = [a + b for a, b in zip([p * c for c in dE] + [0] * len(Ep), Ep + [0] * len(dE))]
    while b1 and b1[-1] == 0:
        b1.pop()
    assert data.b_n == b1
    assert data.a[p].u_coefficients() == dE
    assert all(data.a[i].is_zero() for i in range(1, p))
    assert data.ok


@pytest.mark.parametrize("p,poly,n", [(2, "u-2", 2), (2, "u-2", 3), (2, "u^2-2", 3), (3, "u-3", 2), (3, "u-3", 3),
                                      (2, "u-2", 4), (3, "u-3", 4)])
def test_tower(p, poly, n):
    data = lemma_delta_n(Eisenstein.parse(p, poly), n)
    assert data.residual_zero and data.a_p_unit and all(data.a_good)
    assert data.b_recursion_ok and data.b_is_phi_n_E


def test_is_good_examples():
    R = DeltaPolyRing(3, 3)
    assert is_good(R.z(0) ** 3 * R.z(1))
    assert not is_good(R.z(0))
    assert is_good(R.const(0))
    assert delta_order_at_most(R.z(0) * R.z(1), 1) and not delta_order_at_most(R.z(2), 1)


@st.composite
def good_polys(draw, R):
    p = R.p
    f = R.const(0)
    for _ in range(draw(st.integers(1, 3))):
        j = draw(st.integers(0, 1))
        t = R.z(j) ** draw(st.integers(p, p + 1)) * draw(st.integers(-3, 3))
        t = t * R.u() ** draw(st.integers(0, 2))
        if draw(st.booleans()):
            t = t * R.z(draw(st.integers(0, 1)))
        f = f + t
    return f


@given(st.data())
def test_goodness_closed(data):
    p = data.draw(st.sampled_from([2, 3]))
    R = DeltaPolyRing(p, 4)
    f, g = data.draw(good_polys(R)), data.draw(good_polys(R))
    assert is_good(f + g) and is_good(f * g)
    assert is_good(delta_poly(f))


def test_gamma_one_and_p():
    E = Eisenstein.parse(3, "u-3")
    rec = EnvelopeRecursion(E, 10, 10)
    assert gamma_epoly(E, 1, recursion=rec) == rec.ring.z(0)
    ring = MaxRing(E, "z", 8, 10)
    for i in (3, 9):
        assert iota(rec.gamma(i), ring) == ring.gamma(i)


def test_gamma_p_squared_p2():
    E = Eisenstein.parse(2, "u-2")
    ring = MaxRing(E, "z", 10, 8)
    assert iota(gamma_epoly(E, 4), ring) == ring.gamma(4)


@pytest.mark.parametrize("p,poly", [(2, "u-2"), (2, "u^2-2"), (3, "u-3")])
def test_envelope_levels(p, poly):
    E = Eisenstein.parse(p, poly)
    M = 8
    rec = EnvelopeRecursion(E, M + 2, E.e * (M + 2), 5)
    ring = MaxRing(E, "z", M, p**3 + 1)
    R = rec.ring
    for m in range(1, 4):
        lvl = rec.level(m)
        # z_m = nu_m F_m + S_m, where S_m = P_m(X) + p^(p-1) X^p d_m z_m
        assert iota(R.z(m), ring) == iota(lvl.nu * lvl.F + lvl.S, ring)
        for k, coeff in lvl.P.items():
            assert coeff.is_zero() or coeff.depth() <= m - 1
    # F_m is gamma-tilde^m(z) up to the unit in gamma(p^m)
    for m in range(1, 4):
        if p**m < ring.I:
            assert iota(rec.gamma(p**m), ring) == ring.gamma(p**m)


@given(st.data())
def test_iota_commutes_with_frobenius(data):
    p, poly = data.draw(st.sampled_from([(2, "u-2"), (3, "u-3"), (2, "u^2-2")]))
    E = Eisenstein.parse(p, poly)
    R = DeltaPolyRing(p, 3)
    ring = MaxRing(E, "z", 6, 8)
    f = R.const(data.draw(st.integers(-5, 5)))
    for _ in range(data.draw(st.integers(1, 3))):
        t = R.u() ** data.draw(st.integers(0, 2)) * R.z(0) ** data.draw(st.integers(0, 2))
        if data.draw(st.booleans()):
            t = t * R.z(1)
        f = f + t * data.draw(st.integers(-3, 3))
    assert iota(f.frobenius(), ring) == iota(f, ring).frobenius()
    assert iota(f * f, ring) == iota(f, ring) ** 2
