import random
from dataclasses import replace
from fractions import Fraction as Fr

import pytest

from fcrystal import sigmalinalg as sl
from fcrystal.corpus import random_split_instance
from fcrystal.errors import CrystalError
from fcrystal.hodgenewton import (breakpoints, hn_decompose, hn_eligible, polarized_dual_check,
                                  verify_decomposition)
from fcrystal.obcrystal import OBCrystal, TypeDF, build_elementary, build_mu_ordinary, direct_sum
from fcrystal.polygon import LatticePoint, Polygon
from fcrystal.wittring import make_ring

R = make_ring(3, 2, 40)


def P(*pairs):
    return Polygon.from_pairs((Fr(s), m) for s, m in pairs)


def split_crystal():
    return direct_sum(build_elementary(R, 2, 1, (0, 0)), build_elementary(R, 2, 1, (1, 1)))


def test_breakpoints_examples():
    assert breakpoints(build_elementary(R, 2, 2, (1, 0))) == []
    assert breakpoints(split_crystal()) == [LatticePoint(2, 0)]
    assert breakpoints(split_crystal(), reduced=True) == [LatticePoint(1, 0)]
    three = direct_sum(split_crystal(), build_elementary(R, 2, 1, (2, 1)))
    assert len(breakpoints(three)) == 2


def test_hn_eligible_examples():
    C = build_mu_ordinary(make_ring(2, 3, 40), TypeDF(2, 3, (2, 1, 0)))
    assert all(hn_eligible(C, x) for x in breakpoints(C))
    iso = build_elementary(R, 2, 2, (1, 0))
    assert not hn_eligible(iso, LatticePoint(2, 1))
    # nu = {1, 3/2, 3/2}, mu = {0, 1, 3}: the breakpoint (1, 1) is above mu
    Z = make_ring(3, 1, 40)
    gap = OBCrystal.from_ints(Z, 1, 3, [[[0, 27, 0], [1, 0, 0], [0, 0, 3]]])
    assert breakpoints(gap) == [LatticePoint(1, 1)]
    assert not hn_eligible(gap, LatticePoint(1, 1))
    assert not hn_eligible(gap, LatticePoint(1, 5))


def test_decompose_already_split():
    C = split_crystal()
    D = hn_decompose(C, LatticePoint(2, 0))
    RT = D.C1.ring
    for S, Q in zip(D.sub_bases, D.quotient_bases):
        assert sl.same_lattice(RT, S, sl.int_matrix(RT, [[1], [0]]), D.precision)
        assert sl.same_lattice(RT, Q, sl.int_matrix(RT, [[0], [1]]), D.precision)
    assert D.C1.newton() == P((0, 2)) and D.C2.newton() == P((1, 2))
    assert all(D.report.values())


@pytest.mark.parametrize("seed", range(8))
def test_decompose_conjugated_recovers_summands(seed):
    rng = random.Random(seed)
    inst = random_split_instance(rng)
    C = inst.crystal
    x = LatticePoint(C.r * inst.d_low, inst.d_low * sum(inst.a_low))
    D = hn_decompose(C, x)
    RT = D.C1.ring
    for i in range(C.r):
        ginv = sl.inverse_unimodular(C.ring, inst.g[i])
        truth = sl.mat_lift(RT, [row[:inst.d_low] for row in ginv])
        assert sl.same_lattice(RT, D.sub_bases[i], truth, D.precision)
    nu1, nu2 = C.newton().split_at(x.x1)
    assert (D.C1.newton(), D.C2.newton()) == (nu1, nu2)
    assert D.C1.newton().concat(D.C2.newton()) == C.newton()
    assert D.C1.sigma_hodge().concat(D.C2.sigma_hodge()) == C.sigma_hodge()
    # uniqueness: the per-block computation finds the same lattices
    D2 = hn_decompose(C, x, per_block=True)
    for S1, S2 in zip(D.sub_bases, D2.sub_bases):
        assert sl.same_lattice(RT, S1, S2, D.precision)


def test_decompose_mu_ordinary_two_values():
    C = build_mu_ordinary(make_ring(2, 2, 40), TypeDF(2, 2, (1, 0)))
    (x,) = breakpoints(C)
    D = hn_decompose(C, x)
    assert len(D.C1.newton().slopes) == 1 and len(D.C2.newton().slopes) == 1


def test_decompose_rejects_ineligible():
    with pytest.raises(CrystalError):
        hn_decompose(build_elementary(R, 2, 2, (1, 0)), LatticePoint(2, 1))


def test_verify_catches_mutations():
    rng = random.Random(11)
    inst = random_split_instance(rng, r=2)
    C = inst.crystal
    D = hn_decompose(C, LatticePoint(2 * inst.d_low, inst.d_low * sum(inst.a_low)))
    RT = D.C1.ring
    # swap the roles of sub and quotient in block 0: no longer F-stable
    d = C.d
    wrong = [sl.mat_lift(RT, [[RT.from_int(1) if a == (d - 1 - b) else RT.zero for b in range(inst.d_low)]
                              for a in range(d)])]
    bad = replace(D, sub_bases=[wrong[0]] + D.sub_bases[1:])
    report = verify_decomposition(bad)
    assert not all(report.values())
    truncated = replace(D, sub_bases=[[row[:0] for row in S] for S in D.sub_bases])
    assert verify_decomposition(truncated) == {"ranks": False}


def test_decomposition_json():
    D = hn_decompose(split_crystal(), LatticePoint(2, 0))
    out = D.to_json()
    assert out["point"] == [2, "0"]
    assert out["polygons"]["newton_2"] == P((1, 2)).to_json()
    assert all(out["verification"].values())


def test_polarized_dual_check_examples():
    assert polarized_dual_check(P((0, 2), (1, 2)), LatticePoint(2, 0), 2) == (LatticePoint(2, 0), True)
    nu = P((0, 1), (Fr(1, 2), 2), (1, 1))
    assert polarized_dual_check(nu, LatticePoint(1, 0), 2) == (LatticePoint(3, 1), True)
    # the ordinate is re-read from the polygon
    assert polarized_dual_check(nu, LatticePoint(3, 7), 2) == (LatticePoint(1, 0), True)
    with pytest.raises(CrystalError):
        polarized_dual_check(P((0, 3), (1, 1)), LatticePoint(3, 0), 2)
    with pytest.raises(CrystalError):
        polarized_dual_check(nu, LatticePoint(2, 1), 2)
