import pytest
from hypothesis import given, strategies as st

from prismlab.series import (
    Eisenstein,
    OMaxElement,
    OMaxRing,
    SeriesElement,
    _int_poly_mul,
    delta_A,
    frobenius_A,
    is_distinguished,
    omax_c_and_inverse,
    omax_canonicalize,
    parse_polynomial,
    series_arith,
)

EIS = [(2, "u-2"), (2, "u^2-2"), (3, "u-3"), (3, "u^2+3*u-3"), (5, "u^2+5*u+5")]


def ser(p, cs, prec=10, N=12):
    return SeriesElement(p, prec, N, cs)


def test_arith_examples():
    u = ser(2, [0, 1])
    assert u * u == ser(2, [0, 0, 1])
    assert ser(3, [1, 1]) * ser(3, [1, -1]) == ser(3, [1, 0, -1])
    E = ser(2, [-2, 1])
    assert series_arith(E, E, "mul") == ser(2, [4, -4, 1])


def test_frobenius_examples():
    assert frobenius_A(ser(3, [0, 1])) == ser(3, [0, 0, 0, 1])
    assert frobenius_A(ser(3, [7])) == ser(3, [7])
    assert frobenius_A(ser(2, [-2, 1])) == ser(2, [-2, 0, 1])


def test_delta_examples():
    assert delta_A(ser(3, [0, 1])).is_zero()
    p = 3
    assert delta_A(ser(p, [p])) == ser(p, [1 - p ** (p - 1)])
    # ((u^2 - 2) - (u - 2)^2) / 2
    assert delta_A(ser(2, [-2, 1])) == ser(2, [-3, 2])


def test_distinguished():
    assert is_distinguished(ser(2, [-2, 1]))
    assert not is_distinguished(ser(2, [0, 1]))
    assert is_distinguished(ser(3, [-3, 0, 1]))


def test_eisenstein_validation():
    assert Eisenstein.parse(3, "u^2-3").coeffs == (-3, 0, 1)
    assert Eisenstein.parse(3, [-3, 0, 1]) == Eisenstein.parse(3, "[-3, 0, 1]")
    for bad in ("u^2-9", "u^2+u-3", "2*u-3", "u^2+1"):
        with pytest.raises(ValueError):
            Eisenstein.parse(3, bad)
    with pytest.raises(ValueError):
        Eisenstein.parse(4, "u-2")
    assert parse_polynomial("u^3 - 2*u + 5") == [5, -2, 0, 1]


def test_canonicalize_examples():
    E = Eisenstein.parse(2, "u-2")
    om = OMaxRing(E, 10)
    # E^2 = p^2 (E/p)^2
    x = omax_canonicalize(om, [(0, _int_poly_mul([-2, 1], [-2, 1]))])
    assert x.terms == {(2, 0): 4}
    E2 = Eisenstein.parse(2, "u^2-2")
    om2 = OMaxRing(E2, 10)
    # E u (E/p) = p u (E/p)^2
    x = omax_canonicalize(om2, [(1, _int_poly_mul([-2, 0, 1], [0, 1]))])
    assert x.terms == {(2, 1): 2}


def test_c_for_u_minus_2():
    # phi(E)/p = delta(E) + E^p/p = (2u - 3) + 2 (E/p)^2
    E = Eisenstein.parse(2, "u-2")
    om = OMaxRing(E, 12)
    c, ci = omax_c_and_inverse(om)
    assert c == om.from_poly([-3, 2]) + om.T() ** 2 * 2
    # with u = 2T + 2 the canonical form is 1 + 4T + 2T^2
    assert c.terms == {(0, 0): 1, (1, 0): 4, (2, 0): 2}
    assert (c * ci - 1).is_zero()
    # u = 0 sends E/p to E(0)/p = -1, and phi(E)(0) = E(0)
    assert c.at_u_zero() == -1 and c.is_unit()


@pytest.mark.parametrize("p,poly", EIS)
def test_c_is_unit(p, poly):
    E = Eisenstein.parse(p, poly)
    om = OMaxRing(E, 10)
    assert (om.c * om.c_inv - 1).is_zero()
    assert om.c.at_u_zero() == E.unit_constant
    # modulo (u, E/p) only the residue field survives: c is delta(E)(0) there
    assert (om.c.coeff(0, 0) - E.delta_poly()[0]) % p == 0
    assert (om.c - om.from_poly(E.delta_poly())).t_divisible(1)


@pytest.mark.parametrize("p,poly", EIS)
def test_remainder_is_not_frobenius_lift(p, poly):
    om = OMaxRing(Eisenstein.parse(p, poly), 8)
    T = om.T()
    assert (T.frobenius() - T**p).valuation() == 0


def _clear(p, E, raw, L):
    """p^L sum_l f_l (E/p)^l as an integer polynomial in u."""
    total = [0]
    for l, f in raw:
        t = [c * p ** (L - l) for c in f]
        for _ in range(l):
            t = _int_poly_mul(t, list(E.coeffs))
        n = max(len(total), len(t))
        total = [a + b for a, b in zip(total + [0] * (n - len(total)), t + [0] * (n - len(t)))]
    return total


raw_terms = st.lists(
    st.tuples(st.integers(0, 3), st.lists(st.integers(-20, 20), min_size=1, max_size=4)), min_size=1, max_size=4
)


@given(st.sampled_from(EIS), raw_terms)
def test_canonical_form_preserves_value(pe, raw):
    p, poly = pe
    E = Eisenstein.parse(p, poly)
    M = 8
    om = OMaxRing(E, M)
    x = omax_canonicalize(om, raw)
    back = [(l, [x.coeff(l, n) for n in range(E.e)]) for l in range(x.t_degree() + 1)]
    L = max([l for l, _ in raw] + [l for l, _ in back])
    a, b = _clear(p, E, raw, L), _clear(p, E, back, L)
    n = max(len(a), len(b))
    a, b = a + [0] * (n - len(a)), b + [0] * (n - len(b))
    assert all((s - t) % p**M == 0 for s, t in zip(a, b))
    # idempotent
    assert omax_canonicalize(om, back) == x
    assert OMaxElement.from_json(om, x.to_json(), x.prec) == x


series_st = st.builds(
    lambda p, cs: SeriesElement(p, 10, 10, cs), st.sampled_from([2, 3, 5]), st.lists(st.integers(-50, 50), max_size=8)
)


@given(series_st)
def test_frobenius_lifts_pth_power(f):
    p = f.p
    assert (f.frobenius() - f**p).reduce(1).is_zero()


@given(st.sampled_from([2, 3, 5]), st.lists(st.integers(-50, 50), max_size=8), st.lists(st.integers(-50, 50), max_size=8))
def test_delta_axioms(p, a, b):
    f, g = SeriesElement(p, 10, 10, a), SeriesElement(p, 10, 10, b)
    df, dg = f.delta(), g.delta()
    assert ((f * g).delta() - (f**p * dg + g**p * df + p * df * dg)).reduce(9).is_zero()
    from math import comb

    mixed = sum((f**i * g ** (p - i) * (comb(p, i) // p) for i in range(1, p)), SeriesElement(p, 10, 10, []))
    assert ((f + g).delta() - (df + dg - mixed)).reduce(9).is_zero()


@given(st.sampled_from(EIS), raw_terms, raw_terms)
def test_omax_frobenius_is_ring_map(pe, r1, r2):
    p, poly = pe
    om = OMaxRing(Eisenstein.parse(p, poly), 6)
    x, y = omax_canonicalize(om, r1), omax_canonicalize(om, r2)
    assert (x * y).frobenius() == x.frobenius() * y.frobenius()
    assert (x + y).frobenius() == x.frobenius() + y.frobenius()
