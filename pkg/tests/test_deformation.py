import itertools
from fractions import Fraction as Fr

import pytest

from fcrystal.deformation import (SeriesRing, apply_F_univ, build_g_univ, candidate_cuts, check_F_stability,
                                  check_structural_criterion, check_theorem3_hypothesis, deform_report,
                                  normal_form_crystal, series_ring_for, variable_indices)
from fcrystal.errors import CrystalError
from fcrystal.hodgenewton import breakpoints
from fcrystal.obcrystal import OBCrystal, TypeDF, mu_ordinary_polygon
from fcrystal.polygon import LatticePoint
from fcrystal.wittring import make_ring

B2 = make_ring(2, 2, 8)
B3 = make_ring(2, 3, 8)


def universal(t, base, K=3):
    return build_g_univ(t, series_ring_for(t, base, K))


def test_variable_index_set():
    t = TypeDF(3, 2, (1, 2))
    # block 0: l = 3, m in {1, 2}; block 1: l in {2, 3}, m = 1
    assert variable_indices(t) == [(0, 3, 1), (0, 3, 2), (1, 2, 1), (1, 3, 1)]
    assert variable_indices(TypeDF(2, 2, (0, 0))) == []
    assert variable_indices(TypeDF(2, 2, (2, 2))) == []


def test_g_univ_extreme_types_are_identity():
    for f in ((0, 0), (2, 2)):
        U = universal(TypeDF(2, 2, f), B2)
        S = U.series
        assert S.names == []
        for g in U.g_univ:
            assert g == [[S.one, S.zero], [S.zero, S.one]]


def test_g_univ_rank_two():
    t = TypeDF(2, 1, (1,))
    U = universal(t, make_ring(3, 1, 6))
    S = U.series
    (g,) = U.g_univ
    # e_2 spans Fil^1 and moves to e_2 + u e_1; e_1 spans M^0 and is fixed
    assert g == [[S.one, S.var("u0_2_1")], [S.zero, S.one]]


def test_g_univ_reduces_to_identity_and_base():
    t = TypeDF(3, 3, (0, 1, 2))
    U = universal(t, B3)
    S = U.series
    for g in U.g_univ:
        assert [[S.constant_term(x) for x in row] for row in g] == \
            [[S.base.one if a == b else S.base.zero for b in range(3)] for a in range(3)]
    assert U.specialize_zero() == [list(map(list, F)) for F in U.base_crystal.blocks]


def test_mismatched_series_ring_rejected():
    S = series_ring_for(TypeDF(2, 2, (1, 0)), B2, 2)
    with pytest.raises(CrystalError):
        build_g_univ(TypeDF(2, 2, (0, 1)), S)


def test_normal_form_filtration():
    t = TypeDF(3, 2, (1, 2))
    C = normal_form_crystal(B2, t)
    # F_i is divisible by p exactly on e_{i,j}, j > d - f(i)
    R = C.ring
    assert [R.valuation(C.blocks[0][j][j]) for j in range(3)] == [0, 0, 1]
    assert [R.valuation(C.blocks[1][j][j]) for j in range(3)] == [0, 1, 1]
    assert C.sigma_hodge_reduced() == mu_ordinary_polygon(t)


def test_structural_criterion_examples():
    assert check_structural_criterion(TypeDF(2, 3, (2, 1, 0)), 1)
    assert check_structural_criterion(TypeDF(3, 2, (1, 1)), 2)
    assert not check_structural_criterion(TypeDF(3, 2, (1, 2)), 2)


def test_stability_examples():
    U = universal(TypeDF(2, 3, (2, 1, 0)), B3)
    assert check_F_stability(U, 1).stable
    for f in range(3):
        U = universal(TypeDF(2, 2, (f, f)), B2)
        assert all(check_F_stability(U, dp).stable for dp in range(3))
    with pytest.raises(CrystalError):
        check_F_stability(U, 3)


def test_stability_independent_of_K():
    t = TypeDF(3, 2, (1, 2))
    verdicts = {K: [check_F_stability(universal(t, B2, K), dp).stable for dp in range(4)]
                for K in (1, 2, 3)}
    assert verdicts[1] == verdicts[2] == verdicts[3]


@pytest.mark.parametrize("d,r", [(d, r) for d in range(1, 4) for r in range(1, 4)])
def test_criterion_is_sufficient(d, r):
    base = make_ring(2, r, 6)
    for f in itertools.product(range(d + 1), repeat=r):
        t = TypeDF(d, r, f)
        U = universal(t, base)
        for dp in candidate_cuts(t):
            if check_structural_criterion(t, dp):
                assert check_F_stability(U, dp).stable


@pytest.mark.parametrize("d,r", [(2, 2), (3, 2), (3, 3)])
def test_first_breakpoint_always_satisfies_criterion(d, r):
    for f in itertools.product(range(d + 1), repeat=r):
        t = TypeDF(d, r, f)
        cuts = candidate_cuts(t)
        if cuts:
            first = min(d - fi for fi in f if fi < d)
            assert cuts[0] == first
            assert check_structural_criterion(t, first)


def test_series_arithmetic():
    S = SeriesRing(make_ring(3, 1, 5), ["u", "v"], 2)
    u, v = S.var("u"), S.var("v")
    uv = S.mul(u, v)
    assert S.mul(uv, u) == {}
    assert S.add(u, S.neg(u)) == {}
    assert S.frobenius(u) == {}
    S4 = SeriesRing(make_ring(2, 2, 5), ["u"], 4)
    w = S4.var("u")
    assert S4.frobenius(w) == {(2,): S4.base.one}
    assert S4.format(S4.add(S4.one, w)) == "[1, 0] + [1, 0]*u"
    with pytest.raises(CrystalError):
        SeriesRing(S4.base, ["u"], 5)
    with pytest.raises(CrystalError):
        SeriesRing(S4.base, [f"u{k}" for k in range(13)], 2)


def test_apply_F_univ_specializes():
    t = TypeDF(2, 1, (1,))
    base = make_ring(3, 1, 6)
    U = universal(t, base)
    S = U.series
    v = [S.one, S.var("u0_2_1")]
    w = apply_F_univ(U, 0, v)
    # at u = 0 this is F_M applied to e_1
    assert S.constant_term(w[0]) == base.one
    assert all(S.constant_term(x) == base.zero for x in w[1:])


def test_theorem3_hypothesis():
    R = make_ring(2, 2, 40)
    C = normal_form_crystal(R, TypeDF(2, 2, (1, 0)))
    (x,) = breakpoints(C)
    assert check_theorem3_hypothesis(C, x)
    assert check_theorem3_hypothesis(C, LatticePoint(C.h, C.newton().total()))
    # nu = {1, 3/2, 3/2}, mu = {0, 1, 3} with r = 1: x = (1, 1) is not on mu
    Z = make_ring(3, 1, 40)
    gap = OBCrystal.from_ints(Z, 1, 3, [[[0, 27, 0], [1, 0, 0], [0, 0, 3]]])
    with pytest.raises(CrystalError):
        check_theorem3_hypothesis(gap, LatticePoint(1, 1))
    # nu_1 strictly above mu_1 at an eligible point: nu = {1/2, 1/2, 2}, mu = {0, 1, 2}
    above = OBCrystal.from_ints(Z, 1, 3, [[[0, 3, 0], [1, 0, 0], [0, 0, 9]]])
    x = LatticePoint(2, 1)
    assert not check_theorem3_hypothesis(above, x)


def test_deform_report_shape():
    rep = deform_report(TypeDF(3, 2, (1, 2)), B2, 3)
    assert [row["dprime"] for row in rep["cuts"]] == [1, 2]
    assert rep["variables"] == ["u0_3_1", "u0_3_2", "u1_2_1", "u1_3_1"]
    assert rep["cuts"][0]["structural"] and rep["cuts"][0]["F_stable"]
