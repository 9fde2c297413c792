from math import factorial

import pytest
from hypothesis import given, strategies as st

from prismlab.galois import GroupElement, act, compose, iplus_reduce, phi_image_form, unit_r
from prismlab.maxring import MaxRing, st_embed
from prismlab.series import Eisenstein

EIS = [(2, "u-2"), (3, "u-3"), (3, "u^2-3")]


def wring(p=3, poly="u-3", M=8, I=8):
    return MaxRing(Eisenstein.parse(p, poly), "w", M, I)


@st.composite
def elements(draw, R):
    om = R.omax
    coeffs = {}
    for i in range(draw(st.integers(0, 2)) + 1):
        terms = {}
        for _ in range(draw(st.integers(1, 3))):
            terms[(draw(st.integers(0, 2)), draw(st.integers(0, om.e - 1)))] = draw(st.integers(-9, 9))
        coeffs[i] = om.element(terms)
    return R.element(coeffs)


group = st.builds(GroupElement, st.integers(-6, 6), st.sampled_from([1, -1, 2, 4, 5, 7]))


def test_composition_law():
    tau = GroupElement.tau()
    assert compose(tau, tau) == GroupElement(2, 1)
    assert compose(GroupElement(0, 5), tau) == GroupElement(5, 5)
    g = GroupElement(3, 7)
    assert compose(g, GroupElement.identity()) == g
    assert compose(GroupElement.identity(), g) == g


def test_parse():
    assert GroupElement.parse("tau^3") == GroupElement(3, 1)
    assert GroupElement.parse("2,5") == GroupElement(2, 5)
    assert GroupElement.parse({"a": 1}) == GroupElement.tau()
    with pytest.raises(ValueError):
        GroupElement.parse("sigma")
    with pytest.raises(ValueError):
        GroupElement(0, 3).check(3)


def test_iplus_examples():
    R = wring()
    f = R.scalar(3) + R.u() + R.gamma(2)
    assert iplus_reduce(f).value.signed() == 3
    assert iplus_reduce(R.E_elem()).value.signed() == -3


def test_identity_acts_trivially():
    R = wring(3, "u^2-3")
    r, r_inv = unit_r(GroupElement.identity(), R)
    assert r == R.one()
    f = R.u() * R.gamma(2) + R.T()
    assert act(GroupElement.identity(), f) == f


def test_r_for_linear_E():
    # E = u - p gives r = 1 + u w and r^{-1} = sum (-1)^k u^k k! gamma_k(w)
    R = wring()
    r, r_inv = unit_r(GroupElement.tau(), R)
    assert r == R.one() + R.u() * R.gen()
    expect = R.zero()
    for k in range(R.I):
        expect = expect + R.u() ** k * R.gamma(k, (-1) ** k * factorial(k))
    assert r_inv == expect
    assert r * r_inv == R.one()


@pytest.mark.parametrize("p,poly", EIS)
def test_tau_on_u_and_y(p, poly):
    R = wring(p, poly)
    tau = GroupElement.tau()
    y = R.y
    assert act(tau, R.u()) == R.u() * (y + 1)
    assert act(tau, y) == y
    assert act(GroupElement(0, 2 if p == 3 else 3), R.u()) == R.u()


@pytest.mark.parametrize("p,poly", EIS)
def test_r_is_g_of_E_over_E(p, poly):
    R = wring(p, poly)
    g = GroupElement(2, 1)
    r, _ = unit_r(g, R)
    assert act(g, R.E_elem()) == r * R.E_elem()


def test_phi_image_form_of_w():
    # phi(w) = nu^{-1} sum_{i=1}^p C(p,i)/p i! gamma_i(y)
    form = phi_image_form(3, {1: [1]})
    assert form.terms[1][1] == {1: 1, 2: 2, 3: 2}
    R = wring()
    assert form.evaluate(R) == R.gen().frobenius()


@pytest.mark.parametrize("p,poly", EIS)
def test_phi_image_form_of_gamma2(p, poly):
    R = wring(p, poly)
    form = phi_image_form(p, {2: [0, 1], 0: [2]})
    f = R.u() * R.gamma(2) + 2
    assert form.evaluate(R) == f.frobenius()


@given(st.data())
def test_semilinear(data):
    p, poly = data.draw(st.sampled_from(EIS))
    R = wring(p, poly, M=6, I=6)
    g = data.draw(group)
    if g.chi % p == 0:
        return
    f1, f2 = data.draw(elements(R)), data.draw(elements(R))
    assert act(g, f1 * f2) == act(g, f1) * act(g, f2)
    assert act(g, f1 + f2) == act(g, f1) + act(g, f2)


@given(st.data())
def test_commutes_with_phi(data):
    p, poly = data.draw(st.sampled_from(EIS))
    R = wring(p, poly, M=6, I=6)
    g = data.draw(group)
    if g.chi % p == 0:
        return
    f = data.draw(elements(R))
    assert act(g, f.frobenius()) == act(g, f).frobenius()


@given(st.data())
def test_action_composes(data):
    p, poly = data.draw(st.sampled_from(EIS))
    R = wring(p, poly, M=6, I=6)
    g, h = data.draw(group), data.draw(group)
    if g.chi % p == 0 or h.chi % p == 0:
        return
    f = data.draw(elements(R))
    assert act(g, act(h, f)) == act(compose(g, h), f)


@given(st.data())
def test_iplus_is_invariant(data):
    p, poly = data.draw(st.sampled_from(EIS))
    R = wring(p, poly, M=6, I=6)
    g = data.draw(group)
    if g.chi % p == 0:
        return
    f = data.draw(elements(R))
    assert iplus_reduce(act(g, f)).value == iplus_reduce(f).value


@given(st.data())
def test_moves_embedded_elements_by_multiples_of_u(data):
    p, poly = data.draw(st.sampled_from(EIS))
    R = wring(p, poly, M=6, I=6)
    g = data.draw(group)
    if g.chi % p == 0:
        return
    f = st_embed(data.draw(elements(R.twin())))
    diff = act(g, f) - f
    assert all(c.divide_by_u()[0] == "ok" for c in diff.coeffs.values())
