"""Hodge-Newton breakpoints and decompositions of crystals of O_B-modules."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import sigmalinalg as sl
from .errors import CrystalError, PrecisionError, VerificationError
from .obcrystal import AUTO_PRECISION_CAP, OBCrystal
from .polygon import LatticePoint, Polygon, dual_point


def breakpoints(C: OBCrystal, reduced: bool = False) -> list:
    """Integral breakpoints of the Newton polygon ``nu`` (height ``r d``).

    With ``reduced=True`` the same points are given on ``nu'`` (abscissa
    divided by ``r``).
    """
    nu_red = C.newton_reduced()
    out = []
    for x in nu_red.breakpoints():
        if x.x2.denominator != 1:
            continue
        out.append(x if reduced else LatticePoint(x.x1 * C.r, x.x2))
    return out


def reduce_point(C: OBCrystal, x: LatticePoint) -> LatticePoint:
    if x.x1 % C.r:
        raise CrystalError(f"abscissa {x.x1} is not divisible by r = {C.r}")
    return LatticePoint(x.x1 // C.r, x.x2)


def inflate_point(C: OBCrystal, x: LatticePoint) -> LatticePoint:
    return LatticePoint(x.x1 * C.r, x.x2)


def _on_and_break(P: Polygon, x: LatticePoint) -> bool:
    if not 0 < x.x1 < P.height or not P.lies_on(x):
        return False
    return P.is_breakpoint(x)


def hn_eligible(C: OBCrystal, x: LatticePoint) -> bool:
    """``x`` is a breakpoint of ``nu`` lying on ``mu-bar``."""
    nu = C.newton()
    if not _on_and_break(nu, x):
        return False
    return C.sigma_hodge().lies_on(x)


@dataclass
class HNDecomposition:
    """Splitting ``M = M_1 + M_2`` at a Hodge-Newton point.

    ``sub_bases[i]`` and ``quotient_bases[i]`` are the column bases of
    ``M_1^(i)`` and ``M_2^(i)`` in the coordinates of the source crystal;
    ``C1`` and ``C2`` are the restricted crystals in those bases.  Everything
    is stated modulo ``p^precision``.
    """

    source: OBCrystal
    point: LatticePoint
    reduced_point: LatticePoint
    threshold: Fraction
    sub_bases: list
    quotient_bases: list
    C1: OBCrystal
    C2: OBCrystal
    precision: int
    working_precision: int
    report: dict = field(default_factory=dict)

    def basis_change(self) -> list:
        return [sl.hstack(S, Q) for S, Q in zip(self.sub_bases, self.quotient_bases)]

    def to_json(self) -> dict:
        R = self.C1.ring
        enc = lambda M: [[R.encode(x) for x in row] for row in M]
        return {
            "point": [self.point.x1, str(self.point.x2)],
            "reduced_point": [self.reduced_point.x1, str(self.reduced_point.x2)],
            "threshold": str(self.threshold),
            "precision": self.precision,
            "working_precision": self.working_precision,
            "sub_bases": [enc(S) for S in self.sub_bases],
            "quotient_bases": [enc(Q) for Q in self.quotient_bases],
            "C1": self.C1.to_json(),
            "C2": self.C2.to_json(),
            "polygons": {
                "newton_1": self.C1.newton().to_json(),
                "newton_2": self.C2.newton().to_json(),
                "sigma_hodge_1": self.C1.sigma_hodge().to_json(),
                "sigma_hodge_2": self.C2.sigma_hodge().to_json(),
            },
            "verification": {k: v for k, v in self.report.items()},
        }


def output_precision(C: OBCrystal) -> int:
    """Precision at which decompositions are stated and verified."""
    return max(C.required_precision(), 2 * C.hodge_total() + 16)


def separating_threshold(nu_red: Polygon, j: int) -> Fraction:
    ex = nu_red.expanded()
    if not ex[j - 1] < ex[j]:
        raise CrystalError(f"reduced abscissa {j} is not a Newton breakpoint")
    return (ex[j - 1] + ex[j]) / 2


def _refine(R, B, S, steps):
    """Power iteration ``S <- saturate(B S)``: each step moves a sublattice
    towards the B-stable one it approximates by the slope gap."""
    loss = 0
    for _ in range(steps):
        S, lo = sl.saturate(R, sl.mat_mul(R, B, S))
        loss = max(loss, lo)
    return S


def _block_sublattices(C: OBCrystal, i: int, j: int, c: Fraction, want: int):
    """Low (rank ``j``) and high (rank ``d - j``) slope sublattices of phi_i."""
    R = C.ring
    B, t = sl.linearize(C.phi(i))
    ct = c * t
    low = sl.low_slope_sublattice(R, B, ct, j)
    high = sl.slope_sublattice(R, B, ct, C.d - j)
    S, Q = low.basis, high.basis
    # the low part is dominant for B, the high part for p^e B^{-1}; iterate
    # until both are pinned down to the wanted accuracy
    e = max(sl.elementary_divisors(R, B))
    scaled_inv = _scaled_inverse(R, B, e)
    acc = min(low.accuracy, high.accuracy)
    for _ in range(64):
        if acc >= want:
            break
        S = _refine(R, B, S, 1)
        Q = _refine(R, scaled_inv, Q, 1)
        acc = _splitting_accuracy(R, B, S, Q)
    return S, Q, acc


def _scaled_inverse(R, B, e):
    sf = sl.smith(R, B)
    d = len(B)
    scaled = [[R.mul(R.p_power(e - sf.exps[k]), x) for x in sf.P[k]] for k in range(d)]
    return sl.mat_mul(R, sf.Q, scaled)


def _splitting_accuracy(R, B, S, Q) -> int:
    """Valuation of the off-diagonal part of ``B`` in the basis ``[S | Q]``
    (0 when the bases do not split the lattice)."""
    G = sl.hstack(S, Q)
    if not sl.is_unimodular(R, G):
        return 0
    Ginv = sl.inverse_unimodular(R, G)
    conj = sl.mat_mul(R, Ginv, sl.mat_mul(R, B, G))
    k, d = len(S[0]), len(B)
    off = sl.block(conj, range(k, d), range(k)) + [row[k:] for row in conj[:k]]
    return min(sl.mat_valuation(R, off), R.N)


def _transport(C: OBCrystal, X0: list) -> list:
    R = C.ring
    out = [X0]
    for i in range(C.r - 1):
        image = sl.mat_mul(R, C.blocks[i], sl.mat_frob(R, out[-1], C.a))
        out.append(sl.saturate(R, image)[0])
    return out


def _attempt(C: OBCrystal, x: LatticePoint, T: int, per_block: bool):
    R, r, d = C.ring, C.r, C.d
    xr = reduce_point(C, x)
    j = xr.x1
    c = separating_threshold(C.newton_reduced(), j)
    margin = sum(max(sl.elementary_divisors(R, F), default=0) for F in C.blocks)
    want = T + margin + 2
    if per_block:
        subs, quots = [], []
        for i in range(r):
            S, Q, _ = _block_sublattices(C, i, j, c, want)
            subs.append(S)
            quots.append(Q)
    else:
        S0, Q0, _ = _block_sublattices(C, 0, j, c, want)
        subs, quots = _transport(C, S0), _transport(C, Q0)
    G = [sl.hstack(S, Q) for S, Q in zip(subs, quots)]
    if not all(sl.is_unimodular(R, g) for g in G):
        raise PrecisionError("sub and quotient bases do not split the lattice", required=2 * R.N)
    split = C.base_change(G)
    RT = R.with_precision(T)
    low = tuple(range(j))
    high = tuple(range(j, d))
    C1 = split.restrict(low).with_precision(T)
    C2 = split.restrict(high).with_precision(T)
    C1 = OBCrystal(RT, r, j, C1.blocks, C.a)
    C2 = OBCrystal(RT, r, d - j, C2.blocks, C.a)
    lift = lambda M: sl.mat_lift(RT, M)
    D = HNDecomposition(
        source=C, point=x, reduced_point=xr, threshold=c,
        sub_bases=[lift(S) for S in subs], quotient_bases=[lift(Q) for Q in quots],
        C1=C1, C2=C2, precision=T, working_precision=R.N)
    return D


def hn_decompose(C: OBCrystal, x: LatticePoint, per_block: bool = False,
                 precision: int | None = None) -> HNDecomposition:
    """Hodge-Newton decomposition of ``C`` at the point ``x`` of ``nu``.

    The low-slope and high-slope sublattices of ``phi_0`` are found by
    kernel stabilization at a threshold strictly between the adjacent Newton
    slopes, then carried to the other blocks by ``F_i`` and saturated.  With
    ``per_block=True`` every block is computed from its own ``phi_i``
    instead.  The working precision doubles until the result verifies.
    """
    if not hn_eligible(C, x):
        raise CrystalError(f"{x} is not a breakpoint of the Newton polygon lying on mu-bar")
    T = max(output_precision(C), precision or 0)
    N = max(C.ring.N, 2 * T)
    last = None
    while N <= AUTO_PRECISION_CAP:
        work = C.with_precision(N)
        try:
            D = _attempt(work, x, T, per_block)
        except PrecisionError as exc:
            last = exc
            N *= 2
            continue
        D.source = C
        D.report = verify_decomposition(D)
        if all(D.report.values()):
            return D
        last = VerificationError("decomposition failed verification", D.report)
        N *= 2
    if isinstance(last, VerificationError):
        raise last
    raise PrecisionError(f"decomposition not reached below precision cap {AUTO_PRECISION_CAP}",
                         required=N)


def verify_decomposition(D: HNDecomposition) -> dict:
    """One named check per defining property; values are booleans."""
    C = D.source.with_precision(D.precision)
    R, r, d = C.ring, C.r, C.d
    j = D.reduced_point.x1
    report = {}
    report["ranks"] = (
        len(D.sub_bases) == r and len(D.quotient_bases) == r
        and all(len(S) == d and all(len(row) == j for row in S) for S in D.sub_bases)
        and all(len(Q) == d and all(len(row) == d - j for row in Q) for Q in D.quotient_bases))
    if not report["ranks"]:
        return report
    G = D.basis_change()
    report["spans_lattice"] = all(sl.is_unimodular(R, g) for g in G)
    stable_sub = stable_quot = report["spans_lattice"]
    if report["spans_lattice"]:
        for i in range(r):
            Ginv = sl.inverse_unimodular(R, G[(i + 1) % r])
            image = sl.mat_mul(R, Ginv, sl.mat_mul(R, C.blocks[i], sl.mat_frob(R, G[i], C.a)))
            if j and d - j:
                if sl.mat_valuation(R, sl.block(image, range(j, d), range(j))) < R.N:
                    stable_sub = False
                if sl.mat_valuation(R, sl.block(image, range(j), range(j, d))) < R.N:
                    stable_quot = False
    report["sub_F_stable"] = stable_sub
    report["quotient_F_stable"] = stable_quot
    nu1, nu2 = D.source.newton().split_at(D.point.x1)
    mu1, mu2 = D.source.sigma_hodge().split_at(D.point.x1)
    try:
        report["newton_1"] = D.C1.newton() == nu1
        report["newton_2"] = D.C2.newton() == nu2
    except PrecisionError:
        report["newton_1"] = report["newton_2"] = False
    report["sigma_hodge_1"] = D.C1.sigma_hodge() == mu1
    report["sigma_hodge_2"] = D.C2.sigma_hodge() == mu2
    return report


def filtration(D: HNDecomposition) -> list:
    """The sub-object view: bases of ``M_1^(i)``."""
    return D.sub_bases


def polarized_dual_check(nu: Polygon, x: LatticePoint, n: int) -> tuple:
    """Partner breakpoint of ``x`` on a self-dual polygon of height ``2n``.

    The ordinate of ``x`` is re-read from ``nu`` before dualizing.  Returns
    the partner point and whether it is a breakpoint of ``nu``.
    """
    if nu.height != 2 * n:
        raise CrystalError(f"polygon has height {nu.height}, expected {2 * n}")
    if nu.dual() != nu:
        raise CrystalError(f"{nu} is not self-dual")
    x = LatticePoint(x.x1, nu.value_at(x.x1))
    if not nu.is_breakpoint(x):
        raise CrystalError(f"{x} is not a breakpoint of {nu}")
    xd = dual_point(x, n)
    return xd, nu.lies_on(xd) and nu.is_breakpoint(xd)
