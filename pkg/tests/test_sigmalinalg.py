import random
from fractions import Fraction as Fr

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from fcrystal import sigmalinalg as sl
from fcrystal.corpus import random_matrix, random_unimodular
from fcrystal.errors import CrystalError, PrecisionError
from fcrystal.polygon import Polygon, pointwise_sum, preceq
from fcrystal.sigmalinalg import SigmaMatrix
from fcrystal.wittring import make_ring

Z2 = make_ring(2, 1, 30, (-1, 1))
Z3 = make_ring(3, 1, 30, (-1, 1))


def P(*pairs):
    return Polygon.from_pairs((Fr(s), m) for s, m in pairs)


def test_compose_examples():
    R = Z3
    F = SigmaMatrix.from_ints(R, [[1, 2], [0, 3]], 1)
    assert sl.compose(F, SigmaMatrix.identity(R, 2)).same(F)
    G = sl.compose(SigmaMatrix.from_ints(R, [[3, 0], [0, 3]]), SigmaMatrix.from_ints(R, [[1, 0], [0, 3]]))
    assert G.same(SigmaMatrix.from_ints(R, [[3, 0], [0, 9]], 2))
    assert G.twist == 2


def test_compose_rejects_mismatch():
    with pytest.raises(CrystalError):
        sl.compose(SigmaMatrix.identity(Z3, 2), SigmaMatrix.identity(Z3, 3))


def test_hodge_examples():
    assert sl.hodge(SigmaMatrix.from_ints(Z3, [[1, 0, 0], [0, 3, 0], [0, 0, 9]])) == P((0, 1), (1, 1), (2, 1))
    assert sl.hodge(SigmaMatrix.from_ints(Z3, [[0, 3], [1, 0]])) == P((0, 1), (1, 1))
    assert sl.hodge(SigmaMatrix.from_ints(Z3, [[2, 1], [1, 1]])) == Polygon.zero(2)
    with pytest.raises(PrecisionError):
        sl.hodge(SigmaMatrix.from_ints(Z3, [[0, 0], [0, 1]]))


def test_linearize_examples():
    A = [[1, 2], [3, 4]]
    assert sl.linearize(SigmaMatrix.from_ints(Z3, A))[1] == 1
    R2 = make_ring(3, 2, 10, (1, 0, 1))
    F = SigmaMatrix(R2, [[R2.gen, R2.one], [R2.zero, R2.from_int(3)]], 1)
    B, t = sl.linearize(F)
    assert t == 2
    assert B == sl.mat_mul(R2, F.A, sl.mat_frob(R2, F.A, 1))
    R4 = make_ring(2, 4, 10)
    F4 = SigmaMatrix(R4, [[R4.gen]], 2)
    B4, t4 = sl.linearize(F4)
    assert t4 == 2 and B4 == [[R4.mul(R4.gen, R4.frobenius(R4.gen, 2))]]


def test_newton_examples():
    assert sl.newton(SigmaMatrix.from_ints(Z3, [[0, 3], [1, 0]])) == P((Fr(1, 2), 2))
    assert sl.newton(SigmaMatrix.from_ints(Z3, [[1, 0, 0], [0, 3, 0], [0, 0, 27]])) == P((0, 1), (1, 1), (3, 1))
    R2 = make_ring(3, 2, 10, (1, 0, 1))
    F = SigmaMatrix(R2, [[R2.gen, R2.zero], [R2.zero, R2.one]], 1)
    assert sl.newton(F) == Polygon.zero(2)


def test_newton_needs_precision():
    R = make_ring(2, 1, 6, (-1, 1))
    with pytest.raises(PrecisionError):
        sl.newton(SigmaMatrix.from_ints(R, [[16, 0], [0, 8]]))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4))
def test_charpoly_and_smith_against_sympy(seed, n):
    rng = random.Random(seed)
    R = Z2
    A = [[rng.randrange(-20, 20) for _ in range(n)] for _ in range(n)]
    M = sl.int_matrix(R, A)
    cp = sl.charpoly(R, M)
    x = sympy.symbols("x")
    ref = sympy.Poly(sympy.Matrix(A).charpoly(x).as_expr(), x).all_coeffs()
    assert [c[0] for c in cp] == [int(c) % R.modulus for c in ref]
    sf = sl.smith(R, M)
    D = [[R.p_power(sf.exps[i]) if i == j else R.zero for j in range(n)] for i in range(n)]
    if all(e < R.N for e in sf.exps):
        assert sl.mat_mul(R, sf.P, sl.mat_mul(R, M, sf.Q)) == D
        assert sl.mat_mul(R, sf.P, sf.Pinv) == sl.identity(R, n)
        assert sl.mat_mul(R, sf.Q, sf.Qinv) == sl.identity(R, n)
        assert sum(sf.exps) == R.valuation(sl.det(R, M))


def _random_sigma(R, n, rng, max_exp=2):
    U, V = random_unimodular(R, n, rng), random_unimodular(R, n, rng)
    D = [[R.p_power(rng.randint(0, max_exp)) if i == j else R.zero for j in range(n)] for i in range(n)]
    return SigmaMatrix(R, sl.mat_mul(R, U, sl.mat_mul(R, D, V)), 1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([(2, 1), (3, 2), (5, 2), (2, 3)]), st.integers(1, 3))
def test_mazur_and_composition_bound(seed, pm, n):
    rng = random.Random(seed)
    R = make_ring(pm[0], pm[1], 40)
    F, G = _random_sigma(R, n, rng), _random_sigma(R, n, rng)
    assert preceq(sl.newton(F), sl.hodge(F))
    assert preceq(sl.hodge(sl.compose(F, G)), pointwise_sum(sl.hodge(F), sl.hodge(G)))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_newton_invariant_under_conjugation(seed):
    rng = random.Random(seed)
    R = make_ring(3, 2, 40)
    F = _random_sigma(R, 3, rng)
    U = random_unimodular(R, 3, rng)
    assert sl.newton(sl.sigma_conjugate(F, U)) == sl.newton(F)
    B, t = sl.linearize(F)
    assert sl.newton(F).total() * t == R.valuation(sl.det(R, B))
    assert sl.hodge(F).total() == R.valuation(sl.det(R, F.A))


def test_slope_sublattice_diagonal():
    R = Z3
    B = sl.int_matrix(R, [[1, 0], [0, 9]])
    hi = sl.slope_sublattice(R, B, 1, 1)
    assert sl.same_lattice(R, hi.basis, sl.int_matrix(R, [[0], [1]]), hi.accuracy)
    lo = sl.low_slope_sublattice(R, B, 1, 1)
    assert sl.same_lattice(R, lo.basis, sl.int_matrix(R, [[1], [0]]), lo.accuracy)


@pytest.mark.parametrize("seed", range(6))
def test_slope_sublattice_conjugated(seed):
    rng = random.Random(seed)
    R = Z3
    U = random_unimodular(R, 2, rng)
    Uinv = sl.inverse_unimodular(R, U)
    B = sl.mat_mul(R, U, sl.mat_mul(R, sl.int_matrix(R, [[1, 0], [0, 9]]), Uinv))
    hi = sl.slope_sublattice(R, B, 1, 1)
    lo = sl.low_slope_sublattice(R, B, 1, 1)
    assert sl.same_lattice(R, hi.basis, sl.columns(U, [1]), hi.accuracy)
    assert sl.same_lattice(R, lo.basis, sl.columns(U, [0]), lo.accuracy)
    assert sl.is_unimodular(R, sl.hstack(lo.basis, hi.basis))
    for sub in (hi, lo):
        report = sl.verify_sublattice(R, B, sub)
        assert report["saturated"] and report["stable"] and report["rank"] == 1


def test_slope_sublattice_mixed_block():
    R = Z3
    B = sl.int_matrix(R, [[1, 0, 0], [0, 0, 3], [0, 1, 0]])
    hi = sl.slope_sublattice(R, B, Fr(1, 4), 2)
    assert sl.same_lattice(R, hi.basis, sl.int_matrix(R, [[0, 0], [1, 0], [0, 1]]), hi.accuracy)
    assert sl.linear_newton(R.with_precision(hi.accuracy), hi.restricted) == P((Fr(1, 2), 2))
    lo = sl.low_slope_sublattice(R, B, Fr(1, 4), 1)
    assert sl.same_lattice(R, lo.basis, sl.int_matrix(R, [[1], [0], [0]]), lo.accuracy)


def test_slope_sublattice_rejects_bad_threshold():
    R = Z3
    B = sl.int_matrix(R, [[1, 0], [0, 9]])
    with pytest.raises(CrystalError):
        sl.slope_sublattice(R, B, 2, 1)
    with pytest.raises(CrystalError):
        sl.slope_sublattice(R, B, 1, 2)


def test_saturate_divides_out_p():
    R = Z3
    basis, loss = sl.saturate(R, sl.int_matrix(R, [[3], [6]]))
    assert loss == 1
    assert sl.same_lattice(R, basis, sl.int_matrix(R, [[1], [2]]), R.N)


def test_matrix_json_round_trip():
    R = make_ring(3, 2, 10, (1, 0, 1))
    rng = random.Random(3)
    F = SigmaMatrix(R, random_matrix(R, 2, 2, rng), 3)
    assert SigmaMatrix.from_json(R, F.to_json()).same(F)
