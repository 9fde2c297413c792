import random

import pytest
from hypothesis import given, settings, strategies as st

from prismlab.deltacalc import DeltaPolyRing
from prismlab.descent import (
    DescentProblem,
    KisinModuleData,
    _dp_identity,
    _valuation,
    cocycle_check,
    crystalline_test,
    edadic_reconstruct,
    extension_matrix,
    extension_module,
    iplus_identity,
    key_residual,
    make_descent_instance,
    rank1_product,
    solve_descent_fixed_point,
    solve_key_equation,
    tau_power_convergence,
)
from prismlab.filtration import h0_bound
from prismlab.galois import GroupElement
from prismlab.maxring import MaxRing, iota
from prismlab.series import Eisenstein

LINEAR = [(2, "u-2"), (3, "u-3")]


def E_of(p, poly):
    return Eisenstein.parse(p, poly)


def is_identity(X):
    return all(x == (1 if i == j else 0) for i, row in enumerate(X) for j, x in enumerate(row))


def test_module_data_validation():
    E = E_of(3, "u-3")
    km = KisinModuleData.rank1(E, 2)
    km.check()
    assert KisinModuleData.from_json(km.to_json()).A_mat == km.A_mat
    with pytest.raises(ValueError):
        KisinModuleData(E, 1, [[[1]]], [[[1]]]).check()
    extension_module(E).check(10)


@pytest.mark.parametrize("p,poly", LINEAR)
def test_trivial_module(p, poly):
    gm = solve_key_equation(KisinModuleData.trivial(E_of(p, poly), 2), GroupElement.tau(), M=8)
    assert is_identity(gm.X) and gm.residual_zero
    assert crystalline_test(gm) == {"verdict": "crystalline-at-precision"}
    assert all(r["saturated"] for r in tau_power_convergence(gm, 1))


@pytest.mark.parametrize("p,poly", LINEAR + [(3, "u^2-3")])
@pytest.mark.parametrize("m", [1, 2])
def test_rank1_matches_product(p, poly, m):
    gm = solve_key_equation(KisinModuleData.rank1(E_of(p, poly), m), GroupElement.tau(), M=8)
    assert gm.residual_zero
    assert gm.X[0][0] == rank1_product(gm.ring, GroupElement.tau(), m)
    assert iplus_identity(gm)
    assert crystalline_test(gm)["verdict"] == "crystalline-at-precision"


def test_truncated_product_grade():
    gm = solve_key_equation(KisinModuleData.rank1(E_of(3, "u-3"), 1), GroupElement.tau(), M=10)
    diff = gm.X[0][0] - rank1_product(gm.ring, GroupElement.tau(), 1, 6)
    assert diff.is_zero() or _valuation(diff) >= 6


@pytest.mark.parametrize("p,poly", LINEAR)
def test_extension_has_witness(p, poly):
    km = extension_module(E_of(p, poly))
    gm = extension_matrix(km, GroupElement.tau(), 1)
    assert gm.residual_zero and iplus_identity(gm)
    v = crystalline_test(gm)
    assert v["verdict"] == "semistable-witness"
    assert v["entry"] == (0, 1) and v["index"] == 1
    assert v["coefficient"].at_u_zero().residue % p != 0


@pytest.mark.parametrize("p,poly", LINEAR)
def test_split_extension_is_crystalline(p, poly):
    km = extension_module(E_of(p, poly))
    gm = extension_matrix(km, GroupElement.tau(), 0)
    assert crystalline_test(gm)["verdict"] == "crystalline-at-precision"
    solved = solve_key_equation(km, GroupElement.tau(), M=10)
    assert solved.residual_zero
    assert crystalline_test(solved)["verdict"] == "crystalline-at-precision"


def test_key_residual_detects_wrong_matrix():
    km = KisinModuleData.rank1(E_of(3, "u-3"), 1)
    ring = MaxRing(km.E, "w", 8, 8)
    res = key_residual(km, GroupElement.tau(), [[ring.one()]])
    assert not res[0][0].is_zero()


@pytest.mark.parametrize("p,poly", LINEAR)
def test_tau_powers_gain_grade(p, poly):
    gm = solve_key_equation(KisinModuleData.rank1(E_of(p, poly), 1), GroupElement.tau(), M=10)
    rows = tau_power_convergence(gm, 2)
    assert [r["a"] for r in rows] == [1, p, p * p]
    for a, b in zip(rows, rows[1:]):
        if a["saturated"]:
            break
        assert b["grade"] > a["grade"]


def test_cocycle_with_identity():
    km = KisinModuleData.rank1(E_of(3, "u-3"), 1)
    assert cocycle_check(km, GroupElement.identity(), GroupElement.tau(), M=8)
    assert cocycle_check(km, GroupElement.tau(), GroupElement.identity(), M=8)


@settings(max_examples=6)
@given(st.data())
def test_cocycle_relation(data):
    p, poly = data.draw(st.sampled_from(LINEAR))
    chis = [1, 3, 5] if p == 2 else [1, 2, 4]
    g = GroupElement(data.draw(st.integers(-3, 3)), data.draw(st.sampled_from(chis)))
    h = GroupElement(data.draw(st.integers(-3, 3)), data.draw(st.sampled_from(chis)))
    assert cocycle_check(KisinModuleData.rank1(E_of(p, poly), 1), g, h, M=6, I=6)


def _diag_problem(p, h, d=2):
    E = E_of(p, f"u-{p}")
    W = 8 + 4 * h + 8
    R = DeltaPolyRing(p, D=6, K=W, N=E.e * (W + 1))
    Ep = R.from_u_poly(list(E.coeffs))
    Id = _dp_identity(R, d)
    B = [[Ep**h if i == j else R.const(0) for j in range(d)] for i in range(d)]
    return DescentProblem(E, h, B, Id, M=6, N=6), Id


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("h", [0, 1])
def test_reconstruct_identity(p, h):
    prob, Id = _diag_problem(p, h)
    rec = edadic_reconstruct(prob, Id)
    assert rec.residual_zero and is_identity(rec.value)


def test_reconstruct_needs_enough_seed_precision():
    prob, _ = _diag_problem(3, 1)
    R = DeltaPolyRing(3, D=6, K=4)
    with pytest.raises(ValueError):
        edadic_reconstruct(prob, _dp_identity(R, 2))


@pytest.mark.parametrize("p,poly,d,h", [(2, "u-2", 1, 1), (3, "u-3", 2, 1), (3, "u^2-3", 1, 2)])
def test_reconstruction_round_trip(p, poly, d, h):
    inst = make_descent_instance(E_of(p, poly), d, h, random.Random(f"{p}{poly}{d}{h}"), M=8, N=8)
    prob = inst.problem
    Yfp = solve_descent_fixed_point(prob)
    ring = Yfp[0][0].ring
    Ygen = [[iota(x, ring) for x in row] for row in inst.Y]
    rec = edadic_reconstruct(prob, inst.Y)
    assert rec.residual_zero
    assert Yfp == Ygen
    assert rec.value == Ygen
    assert not is_identity(Ygen)
    h0 = h0_bound(p, h)
    assert [lv["level"] for lv in rec.levels] == list(range(h0 + 1, max(prob.N, h0 + 2) + 1))
