"""Universal deformation of a mu-ordinary crystal over a truncated power
series ring, and stability of its low-slope filtration."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .errors import CrystalError
from .hodgenewton import hn_eligible
from .obcrystal import OBCrystal, TypeDF, diagonal_crystal
from .polygon import LatticePoint
from .wittring import WittRing

MAX_VARIABLES = 12
MAX_DEGREE = 4


def variable_indices(t: TypeDF) -> list:
    """``(i, l, m)`` with ``1 <= m <= d - f(i) < l <= d``, in lexicographic order."""
    out = []
    for i in range(t.r):
        cut = t.d - t.f[i]
        for l in range(cut + 1, t.d + 1):
            for m in range(1, cut + 1):
                out.append((i, l, m))
    return out


class SeriesRing:
    """``base[[u_1..u_n]]`` truncated above total degree ``K``.

    Elements are dicts from exponent tuples to nonzero base-ring elements.
    The Frobenius lift acts as sigma on coefficients and ``u -> u^p``.
    """

    def __init__(self, base: WittRing, names: list, K: int):
        if not 1 <= K <= MAX_DEGREE:
            raise CrystalError(f"truncation degree must lie in [1, {MAX_DEGREE}]")
        if len(names) > MAX_VARIABLES:
            raise CrystalError(f"at most {MAX_VARIABLES} variables are supported")
        self.base = base
        self.names = list(names)
        self.K = K
        self.n = len(names)
        self.zero = {}
        self.one = {(0,) * self.n: base.one}

    def const(self, a) -> dict:
        return {} if self.base.is_zero(a) else {(0,) * self.n: a}

    def var(self, name) -> dict:
        k = self.names.index(name)
        e = [0] * self.n
        e[k] = 1
        return {tuple(e): self.base.one}

    def add(self, x: dict, y: dict) -> dict:
        R = self.base
        out = dict(x)
        for e, c in y.items():
            s = R.add(out[e], c) if e in out else c
            if R.is_zero(s):
                out.pop(e, None)
            else:
                out[e] = s
        return out

    def neg(self, x: dict) -> dict:
        return {e: self.base.neg(c) for e, c in x.items()}

    def sub(self, x: dict, y: dict) -> dict:
        return self.add(x, self.neg(y))

    def mul(self, x: dict, y: dict) -> dict:
        R, K = self.base, self.K
        out = {}
        for e1, c1 in x.items():
            d1 = sum(e1)
            for e2, c2 in y.items():
                if d1 + sum(e2) > K:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                c = R.mul(c1, c2)
                s = R.add(out[e], c) if e in out else c
                if R.is_zero(s):
                    out.pop(e, None)
                else:
                    out[e] = s
        return out

    def frobenius(self, x: dict) -> dict:
        R, p = self.base, self.base.p
        out = {}
        for e, c in x.items():
            if p * sum(e) > self.K:
                continue
            out[tuple(p * a for a in e)] = R.frobenius(c, 1)
        return out

    def constant_term(self, x: dict):
        return x.get((0,) * self.n, self.base.zero)

    def is_zero(self, x: dict) -> bool:
        return not x

    def format(self, x: dict) -> str:
        if not x:
            return "0"
        terms = []
        for e in sorted(x):
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(self.names, e) if k)
            coeff = self.base.encode(x[e])
            terms.append(f"{coeff}" + (f"*{mono}" if mono else ""))
        return " + ".join(terms)


def series_ring_for(t: TypeDF, base: WittRing, K: int) -> SeriesRing:
    names = [f"u{i}_{l}_{m}" for i, l, m in variable_indices(t)]
    return SeriesRing(base, names, K)


def normal_form_crystal(base: WittRing, t: TypeDF) -> OBCrystal:
    """``F(e_{i,j}) = p^{[j > d - f(i)]} e_{i+1,j}``: the Hodge filtration of
    ``M^(i)`` (the kernel of ``F`` mod p) is spanned by ``e_{i,j}``,
    ``j > d - f(i)``."""
    exps = [[1 if j > t.d - t.f[i] else 0 for j in range(1, t.d + 1)] for i in range(t.r)]
    return diagonal_crystal(base, t.r, exps)


@dataclass
class UniversalData:
    type: TypeDF
    series: SeriesRing
    base_crystal: OBCrystal
    g_univ: list
    F_univ: list

    def specialize_zero(self) -> list:
        """``F_univ`` with every variable set to 0."""
        S = self.series
        return [[[S.constant_term(x) for x in row] for row in F] for F in self.F_univ]


def build_g_univ(t: TypeDF, S: SeriesRing) -> UniversalData:
    """``g^(i)`` fixes ``M^0`` and sends ``e_l`` (``l > d - f(i)``) to
    ``e_l + sum_m u^(i)_{l,m} e_m``.

    The variable ``u^(i)_{l,m}`` therefore sits in row ``m``, column ``l``.
    """
    expected = [f"u{i}_{l}_{m}" for i, l, m in variable_indices(t)]
    if S.names != expected:
        raise CrystalError("series ring variables do not match the type")
    d = t.d
    g = []
    for i in range(t.r):
        M = [[S.one if a == b else S.zero for b in range(d)] for a in range(d)]
        cut = d - t.f[i]
        for l in range(cut + 1, d + 1):
            for m in range(1, cut + 1):
                M[m - 1][l - 1] = S.var(f"u{i}_{l}_{m}")
        g.append(M)
    base = normal_form_crystal(S.base, t)
    F = []
    for i in range(t.r):
        A = [[S.const(x) for x in row] for row in base.blocks[i]]
        F.append(series_mat_mul(S, g[(i + 1) % t.r], A))
    return UniversalData(t, S, base, g, F)


def series_mat_mul(S: SeriesRing, X: list, Y: list) -> list:
    n, k, m = len(X), len(Y), len(Y[0]) if Y else 0
    out = []
    for a in range(n):
        row = []
        for b in range(m):
            acc = S.zero
            for c in range(k):
                if X[a][c] and Y[c][b]:
                    acc = S.add(acc, S.mul(X[a][c], Y[c][b]))
            row.append(acc)
        out.append(row)
    return out


def apply_F_univ(U: UniversalData, i: int, v: list) -> list:
    """``F_univ`` on a column vector of ``M^(i) (x) A``: ``g A phi_A(v)``."""
    S = U.series
    w = [[S.frobenius(x)] for x in v]
    return [row[0] for row in series_mat_mul(S, U.F_univ[i], w)]


def check_structural_criterion(t: TypeDF, x1_reduced: int) -> bool:
    """For every block, ``M_1`` lies in ``M^0`` or ``M^0`` is zero."""
    dp = x1_reduced
    return all(dp <= t.d - fi or fi == t.d for fi in t.f)


@dataclass
class StabilityVerdict:
    stable: bool
    witnesses: list

    def __bool__(self):
        return self.stable

    def to_json(self) -> dict:
        return {"stable": self.stable, "witnesses": self.witnesses}


def check_F_stability(U: UniversalData, dprime: int) -> StabilityVerdict:
    """Whether ``F_univ`` maps ``span(e_{i,j}, j <= d')`` into itself.

    On failure each witness names the block, the matrix position (1-based,
    row outside and column inside the span) and the offending series.
    """
    d = U.type.d
    if not 0 <= dprime <= d:
        raise CrystalError(f"d' = {dprime} outside [0, {d}]")
    S = U.series
    witnesses = []
    for i, F in enumerate(U.F_univ):
        for row, col in product(range(dprime, d), range(dprime)):
            if not S.is_zero(F[row][col]):
                witnesses.append({"block": i, "row": row + 1, "col": col + 1,
                                  "entry": S.format(F[row][col])})
    return StabilityVerdict(not witnesses, witnesses)


def check_theorem3_hypothesis(C: OBCrystal, x: LatticePoint) -> bool:
    """Newton and sigma-invariant Hodge polygons agree up to ``x``.

    At the endpoints the filtration is trivial and the answer is vacuously
    true.
    """
    if x.x1 in (0, C.h):
        return True
    if not hn_eligible(C, x):
        raise CrystalError(f"{x} is not a Hodge-Newton point of this crystal")
    nu1, _ = C.newton().split_at(x.x1)
    mu1, _ = C.sigma_hodge().split_at(x.x1)
    return nu1 == mu1


def candidate_cuts(t: TypeDF) -> list:
    """Reduced breakpoints of the mu-ordinary polygon of type ``t``."""
    from .obcrystal import mu_ordinary_polygon
    return [x.x1 for x in mu_ordinary_polygon(t).breakpoints()]


def deform_report(t: TypeDF, base: WittRing, K: int, cuts=None) -> dict:
    S = series_ring_for(t, base, K)
    U = build_g_univ(t, S)
    cuts = candidate_cuts(t) if cuts is None else list(cuts)
    rows = []
    for dp in cuts:
        verdict = check_F_stability(U, dp)
        rows.append({"dprime": dp,
                     "structural": check_structural_criterion(t, dp),
                     "F_stable": verdict.stable,
                     "witnesses": verdict.witnesses})
    return {"type": t.to_json(), "K": K, "variables": S.names, "cuts": rows}
