import pytest
from hypothesis import given, strategies as st

from prismlab.deltacalc import DeltaPolyRing
from prismlab.filtration import (
    FiltrationReject,
    FiltrationWitness,
    SForm,
    div_by_E,
    e_adic_digits,
    fil_decompose,
    fil_level,
    h0_bound,
    phi_fil_split,
)
from prismlab.maxring import MaxRing
from prismlab.series import Eisenstein


def setup(p, poly, M=8):
    E = Eisenstein.parse(p, poly)
    return E, MaxRing(E, "z", M, 8), DeltaPolyRing(p, 4)


def test_h0_values():
    # p > 2: floor(max(h, (p(h+1)+1)/(p(p-2)))) + 1;  p = 2: 2(h+2) + 1
    assert [h0_bound(3, h) for h in (1, 2, 3)] == [3, 4, 5]
    assert [h0_bound(5, h) for h in (1, 2)] == [2, 3]
    assert [h0_bound(2, h) for h in (1, 2)] == [7, 9]


@pytest.mark.parametrize("h", [1, 2, 3])
def test_E_power_is_in_fil(h):
    E, ring, R = setup(3, "u-3")
    Ep = R.from_u_poly(list(E.coeffs))
    w = fil_decompose(SForm(E, {0: Ep**h}), h, ring)
    assert isinstance(w, FiltrationWitness)
    assert w.decomposition == [(h, R.const(3 ** (h // 3)))]
    assert (w.reassemble().value(ring) - SForm(E, {0: Ep**h}).value(ring)).is_zero()


def test_one_is_rejected():
    E, ring, R = setup(2, "u-2")
    r = fil_decompose(SForm(E, {0: R.const(1)}), 1, ring)
    assert isinstance(r, FiltrationReject) and r.level == 1


@pytest.mark.parametrize("p,poly", [(2, "u-2"), (3, "u-3"), (3, "u^2-3")])
def test_Ep_over_p_times_E(p, poly):
    E, ring, R = setup(p, poly)
    Ep = R.from_u_poly(list(E.coeffs))
    x = SForm(E, {p: Ep})  # (E^p/p) E
    w = fil_decompose(x, p + 1, ring)
    assert isinstance(w, FiltrationWitness)
    assert w.decomposition == [(p + 1, R.const(1))]


def test_div_by_E():
    E, _, R = setup(3, "u^2-3")
    Ep = R.from_u_poly(list(E.coeffs))
    f = R.z(0) * R.u() + 7
    assert div_by_E(f * Ep**2, E, 2) == f
    assert div_by_E(f, E) is None
    digits, rest = e_adic_digits(f * Ep + R.u(), E, 2)
    assert digits[0] == R.u() and rest.is_zero()


def test_split_of_zero():
    E, ring, R = setup(3, "u-3")
    s = phi_fil_split(SForm(E, {}), 4, 1, ring)
    assert s.a.is_zero() if s.a is not None else True
    assert not s.y.terms


def test_split_single_term_p3():
    E, ring, R = setup(3, "u-3")
    m = h0_bound(3, 1) + 1
    s = phi_fil_split(SForm(E, {m: R.const(1)}), m, 1, ring)
    assert s.checked and s.details["y_in_fil"]
    assert min(s.y.terms) >= m + 1


@pytest.mark.parametrize("h", [1, 2])
def test_split_hat_p2(h):
    E, ring, R = setup(2, "u-2")
    m = h0_bound(2, h) + 1
    s = phi_fil_split(SForm(E, {m: R.z(0) + R.u()}, hat=True), m, h, ring)
    assert s.checked and s.details["y_in_fil"]


def test_split_needs_large_m():
    E, ring, R = setup(3, "u-3")
    with pytest.raises(ValueError):
        phi_fil_split(SForm(E, {2: R.const(1)}), 2, 1)


@given(st.data())
def test_decompositions_reassemble(data):
    p, poly = data.draw(st.sampled_from([(2, "u-2"), (3, "u-3"), (3, "u^2-3")]))
    E, ring, R = setup(p, poly)
    Ep = R.from_u_poly(list(E.coeffs))
    i = data.draw(st.integers(1, 4))
    a = R.const(data.draw(st.integers(-5, 5))) + R.z(0) ** data.draw(st.integers(0, 2)) * R.u()
    extra = R.z(0) * data.draw(st.integers(-3, 3))
    x = SForm(E, {0: a * Ep**i, i + 2: extra})
    w = fil_decompose(x, i, ring)
    assert isinstance(w, FiltrationWitness)
    assert (w.reassemble().value(ring) - x.value(ring)).is_zero()
    assert fil_level(x.value(ring), i) == i


@given(st.data())
def test_split_random(data):
    p = data.draw(st.sampled_from([2, 3]))
    E, ring, R = setup(p, f"u-{p}")
    h = data.draw(st.integers(1, 2))
    m = h0_bound(p, h) + 1
    coeff = R.const(data.draw(st.integers(-4, 4))) + R.u() * R.z(0) ** data.draw(st.integers(0, 2))
    terms = {m: coeff}
    if data.draw(st.booleans()):
        terms[m + 1] = R.z(1)
    s = phi_fil_split(SForm(E, terms, hat=p == 2), m, h, ring)
    assert s.checked and s.details["y_in_fil"]
