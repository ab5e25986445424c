"""Semilinear matrix algebra over a truncated Witt ring.

Matrices are lists of rows of ring elements.  A :class:`SigmaMatrix` pairs a
matrix ``A`` with a twist ``a`` and stands for ``v -> A * sigma^a(v)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import CrystalError, PrecisionError, VerificationError
from .polygon import Polygon
from .wittring import WittRing

# -- plain matrix helpers -----------------------------------------------------


def identity(R: WittRing, n: int) -> list:
    return [[R.one if i == j else R.zero for j in range(n)] for i in range(n)]


def zeros(R: WittRing, n: int, k: int) -> list:
    return [[R.zero] * k for _ in range(n)]


def mat_mul(R: WittRing, A: list, B: list) -> list:
    if not A:
        return []
    inner, cols = len(B), (len(B[0]) if B else 0)
    if len(A[0]) != inner:
        raise CrystalError("dimension mismatch in matrix product")
    m, q = R.m, R.modulus
    if m == 1:
        return [[(sum(row[k][0] * B[k][j][0] for k in range(inner)) % q,)
                 for j in range(cols)] for row in A]
    out = []
    for row in A:
        new = []
        for j in range(cols):
            acc = R.zero
            for k in range(inner):
                a = row[k]
                if any(a):
                    b = B[k][j]
                    if any(b):
                        acc = R.add(acc, R.mul(a, b))
            new.append(acc)
        out.append(new)
    return out


def mat_add(R, A, B):
    return [[R.add(x, y) for x, y in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_sub(R, A, B):
    return [[R.sub(x, y) for x, y in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_frob(R: WittRing, A: list, k: int) -> list:
    if R.m == 1 or k % R.m == 0:
        return A
    return [[R.frobenius(x, k) for x in row] for row in A]


def mat_pow(R: WittRing, A: list, e: int) -> list:
    result, base = identity(R, len(A)), A
    while e:
        if e & 1:
            result = mat_mul(R, result, base)
        e >>= 1
        if e:
            base = mat_mul(R, base, base)
    return result


def transpose(A: list) -> list:
    return [list(col) for col in zip(*A)]


def columns(A: list, idx) -> list:
    return [[row[j] for j in idx] for row in A]


def hstack(A: list, B: list) -> list:
    return [ra + rb for ra, rb in zip(A, B)]


def block(A: list, rows, cols) -> list:
    return [[A[i][j] for j in cols] for i in rows]


def mat_valuation(R: WittRing, A: list) -> int:
    """Minimum entry valuation (``R.N`` for the zero matrix)."""
    v = R.N
    for row in A:
        for x in row:
            if any(x):
                v = min(v, R.valuation(x))
    return v


def mat_lift(R: WittRing, A: list) -> list:
    """Re-embed integer coordinates into ``R`` (raising or lowering precision)."""
    return [[R.lift(x) for x in row] for row in A]


def int_matrix(R: WittRing, rows) -> list:
    return [[R.elem(x) for x in row] for row in rows]


def det(R: WittRing, A: list):
    """Division-free determinant (constant term of the characteristic polynomial)."""
    n = len(A)
    c = charpoly(R, A)[-1]
    return c if n % 2 == 0 else R.neg(c)


# -- Smith form ---------------------------------------------------------------


@dataclass
class SmithForm:
    """``P * A * Q = diag(p^exps)`` with ``P``, ``Q`` unimodular.

    ``exps`` has ``min(rows, cols)`` entries; an entry equal to ``N`` means the
    divisor is zero at the working precision.
    """

    exps: list
    P: list
    Pinv: list
    Q: list
    Qinv: list


def smith(R: WittRing, A: list, transforms: bool = True) -> SmithForm:
    """Smith reduction pivoting on a minimum-valuation entry.

    Ties are broken by lowest (row, column).  Because the pivot has minimal
    valuation in the remaining block, every elimination quotient is determined
    modulo exactly the precision that cancels, so the transforms are exact
    modulo ``p^N``.
    """
    n = len(A)
    k = len(A[0]) if n else 0
    M = [list(row) for row in A]
    P = identity(R, n) if transforms else None
    Pinv = identity(R, n) if transforms else None
    Q = identity(R, k) if transforms else None
    Qinv = identity(R, k) if transforms else None
    exps = []
    N = R.N
    for s in range(min(n, k)):
        best, bi, bj = N, -1, -1
        for i in range(s, n):
            row = M[i]
            for j in range(s, k):
                x = row[j]
                if any(x):
                    v = R.valuation(x)
                    if v < best:
                        best, bi, bj = v, i, j
                        if v == 0:
                            break
            if best == 0:
                break
        if bi < 0:
            exps.extend([N] * (min(n, k) - s))
            break
        v = best
        exps.append(v)
        if bi != s:
            M[s], M[bi] = M[bi], M[s]
            if transforms:
                P[s], P[bi] = P[bi], P[s]
                for row in Pinv:
                    row[s], row[bi] = row[bi], row[s]
        if bj != s:
            for row in M:
                row[s], row[bj] = row[bj], row[s]
            if transforms:
                for row in Q:
                    row[s], row[bj] = row[bj], row[s]
                Qinv[s], Qinv[bj] = Qinv[bj], Qinv[s]
        unit = R.div_p_power(M[s][s], v)
        uinv = R.inverse(unit)
        M[s] = [R.mul(uinv, x) for x in M[s]]
        if transforms:
            P[s] = [R.mul(uinv, x) for x in P[s]]
            for row in Pinv:
                row[s] = R.mul(row[s], unit)
        prow = M[s]
        for i in range(s + 1, n):
            x = M[i][s]
            if any(x):
                c = R.div_p_power(x, v)
                M[i] = [R.sub(a, R.mul(c, b)) for a, b in zip(M[i], prow)]
                if transforms:
                    P[i] = [R.sub(a, R.mul(c, b)) for a, b in zip(P[i], P[s])]
                    for row in Pinv:
                        row[s] = R.add(row[s], R.mul(row[i], c))
        for j in range(s + 1, k):
            x = M[s][j]
            if any(x):
                c = R.div_p_power(x, v)
                M[s][j] = R.zero
                if transforms:
                    for row in Q:
                        row[j] = R.sub(row[j], R.mul(c, row[s]))
                    Qinv[s] = [R.add(a, R.mul(c, b)) for a, b in zip(Qinv[s], Qinv[j])]
    return SmithForm(exps, P, Pinv, Q, Qinv)


def elementary_divisors(R: WittRing, A: list) -> list:
    return smith(R, A, transforms=False).exps


def saturate(R: WittRing, X: list) -> tuple:
    """Basis of the saturation of the column span of ``X`` (d x k).

    Returns ``(basis, loss)`` where ``loss`` is the largest elementary
    divisor exponent of ``X``: the saturation is determined modulo
    ``p^(N - loss)``.
    """
    k = len(X[0]) if X else 0
    sf = smith(R, X)
    if any(e >= R.N for e in sf.exps):
        raise PrecisionError("sublattice degenerates at working precision", required=2 * R.N)
    loss = max(sf.exps, default=0)
    return columns(sf.Pinv, range(k)), loss


def is_unimodular(R: WittRing, A: list) -> bool:
    return all(e == 0 for e in elementary_divisors(R, A))


def inverse_unimodular(R: WittRing, A: list) -> list:
    sf = smith(R, A)
    if any(e != 0 for e in sf.exps):
        raise CrystalError("matrix is not invertible over the ring")
    # P A Q = I  =>  A^{-1} = Q P
    return mat_mul(R, sf.Q, sf.P)


# -- characteristic polynomial -----------------------------------------------


def charpoly(R: WittRing, A: list) -> list:
    """Coefficients ``[1, c_1, ..., c_n]`` of ``det(T - A)`` (Berkowitz).

    Division free, so it is exact modulo ``p^N`` for every prime including
    ``p <= n``.
    """
    n = len(A)
    if n == 0:
        return [R.one]
    poly = [R.one, R.neg(A[n - 1][n - 1])]
    for k in range(n - 2, -1, -1):
        # leading principal block is A[k:, k:]; split off row/col k
        a = A[k][k]
        row = [A[k][j] for j in range(k + 1, n)]
        col = [A[i][k] for i in range(k + 1, n)]
        sub = [r[k + 1:] for r in A[k + 1:]]
        size = n - k
        toe = [R.one, R.neg(a)]
        vec = col
        for _ in range(size - 1):
            s = R.zero
            for x, y in zip(row, vec):
                s = R.add(s, R.mul(x, y))
            toe.append(R.neg(s))
            vec = [_dot(R, r, vec) for r in sub]
        # new poly = Toeplitz(toe) applied to poly
        new = []
        for i in range(size + 1):
            acc = R.zero
            for j in range(min(i, size - 1) + 1):
                if i - j < len(toe):
                    acc = R.add(acc, R.mul(toe[i - j], poly[j]))
            new.append(acc)
        poly = new
    return poly


def _dot(R, u, v):
    acc = R.zero
    for x, y in zip(u, v):
        acc = R.add(acc, R.mul(x, y))
    return acc


def lower_hull_slopes(points: list) -> list:
    """Slopes (as Fractions, with multiplicity) of the lower convex hull of
    ``[(x, y), ...]`` sorted by x; the first and last points are vertices."""
    hull = []
    for pt in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            x3, y3 = pt
            if (y2 - y1) * (x3 - x1) >= (y3 - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    slopes = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        slopes.extend([Fraction(y2 - y1, x2 - x1)] * (x2 - x1))
    return slopes


def linear_newton(R: WittRing, B: list, slack: int = 0) -> Polygon:
    """Newton polygon (eigenvalue valuations) of a linear map.

    Requires ``v(det B) + slack < N``; otherwise raises PrecisionError with the
    precision to retry at.
    """
    n = len(B)
    if n == 0:
        return Polygon()
    cp = charpoly(R, B)
    vals = [R.valuation(c) for c in cp]
    vdet = vals[-1]
    if vdet >= R.N:
        raise PrecisionError(f"determinant vanishes at precision {R.N}", required=2 * R.N)
    if vdet + slack >= R.N:
        raise PrecisionError(f"precision {R.N} below policy {vdet + slack + 1}",
                             required=vdet + slack + 1)
    pts = [(i, v) for i, v in enumerate(vals) if v < R.N]
    return Polygon.from_slopes(lower_hull_slopes(pts))


# -- sigma-linear maps --------------------------------------------------------


@dataclass(frozen=True)
class SigmaMatrix:
    """``v -> A * sigma^twist(v)`` on ``ring^n``."""

    ring: WittRing
    A: list = field(compare=False)
    twist: int = 1

    def __post_init__(self):
        n = len(self.A)
        if any(len(row) != n for row in self.A):
            raise CrystalError("SigmaMatrix needs a square matrix")
        if self.twist < 0:
            raise CrystalError("twist must be nonnegative")

    @property
    def size(self) -> int:
        return len(self.A)

    @classmethod
    def from_ints(cls, ring, rows, twist=1) -> "SigmaMatrix":
        return cls(ring, int_matrix(ring, rows), twist)

    @classmethod
    def identity(cls, ring, n, twist=0) -> "SigmaMatrix":
        return cls(ring, identity(ring, n), twist)

    def with_precision(self, N: int) -> "SigmaMatrix":
        R = self.ring.with_precision(N)
        return SigmaMatrix(R, mat_lift(R, self.A), self.twist)

    def apply(self, v: list) -> list:
        """Image of a column vector."""
        R = self.ring
        sv = [R.frobenius(x, self.twist) for x in v]
        return [_dot(R, row, sv) for row in self.A]

    def same(self, other: "SigmaMatrix") -> bool:
        return (self.ring.same_as(other.ring) and self.twist == other.twist
                and self.A == other.A)

    def to_json(self) -> dict:
        return {"rows": [[list(x) for x in row] for row in self.A], "twist": self.twist}

    @classmethod
    def from_json(cls, ring, obj) -> "SigmaMatrix":
        try:
            rows = obj["rows"] if isinstance(obj, dict) else obj
            twist = int(obj.get("twist", 1)) if isinstance(obj, dict) else 1
            A = [[ring.decode(x) for x in row] for row in rows]
        except (TypeError, ValueError, AttributeError) as exc:
            raise CrystalError(f"malformed matrix JSON: {exc}") from exc
        return cls(ring, A, twist)


def compose(G: SigmaMatrix, H: SigmaMatrix) -> SigmaMatrix:
    """``G o H``: matrix ``A_G * sigma^{a_G}(A_H)``, twist ``a_G + a_H``."""
    if not G.ring.same_as(H.ring) or G.size != H.size:
        raise CrystalError("compose needs matching ring and size")
    R = G.ring
    return SigmaMatrix(R, mat_mul(R, G.A, mat_frob(R, H.A, G.twist)), G.twist + H.twist)


def hodge(Fm: SigmaMatrix) -> Polygon:
    exps = elementary_divisors(Fm.ring, Fm.A)
    if any(e >= Fm.ring.N for e in exps):
        raise PrecisionError(
            f"an elementary divisor is indistinguishable from p^{Fm.ring.N}",
            required=2 * Fm.ring.N)
    return Polygon.from_slopes(exps)


def linearize(Fm: SigmaMatrix) -> tuple:
    """``(B, t)`` with ``t`` minimal such that ``sigma^{a t} = id`` and ``B`` the
    matrix of the linear map ``F^t``."""
    R, a = Fm.ring, Fm.twist
    t = R.m // math.gcd(a, R.m) if a % R.m else 1
    B = Fm.A
    for s in range(1, t):
        B = mat_mul(R, B, mat_frob(R, Fm.A, a * s))
    return B, t


def newton_precision_policy(t: int, hodge_total, n: int) -> int:
    """Minimum precision for Newton polygons: ``t * sum(hodge) + n + 8``."""
    return int(t * hodge_total) + n + 8


def newton(Fm: SigmaMatrix) -> Polygon:
    """Newton polygon of a sigma^a-linear map (slopes per application of F)."""
    B, t = linearize(Fm)
    n = Fm.size
    poly = linear_newton(Fm.ring, B, slack=n + 7)
    return Polygon.from_slopes(s / t for s in poly.expanded())


def sigma_conjugate(Fm: SigmaMatrix, U: list) -> SigmaMatrix:
    """``U^{-1} A sigma^a(U)``: the same map in the basis given by the columns of U."""
    R = Fm.ring
    Uinv = inverse_unimodular(R, U)
    return SigmaMatrix(R, mat_mul(R, Uinv, mat_mul(R, Fm.A, mat_frob(R, U, Fm.twist))), Fm.twist)


# -- slope sublattices --------------------------------------------------------


@dataclass
class Sublattice:
    """Saturated sublattice given by the columns of ``basis``.

    ``accuracy`` is the exponent ``e`` such that the lattice is determined and
    verified modulo ``p^e``.  ``restricted`` is the matrix of the map on the
    sublattice in that basis (at precision ``accuracy``).
    """

    basis: list
    accuracy: int
    restricted: list = None
    power: int = 0


def slope_sublattice(R: WittRing, B: list, c, target_rank: int,
                     min_accuracy: int = 1) -> Sublattice:
    """Saturated sublattice on which the linear map ``B`` has all slopes > c.

    Kernel stabilization: for growing ``n`` take the Smith form
    ``P B^n Q = diag(p^s_i)``; the columns of ``Q`` with ``s_i >= ceil(c n)``
    span an approximation of the sublattice whose error shrinks linearly in
    ``n``.  The result is checked for stability and for its Newton polygon
    before it is returned.
    """
    c = Fraction(c)
    d = len(B)
    if not 0 <= target_rank <= d:
        raise CrystalError(f"target rank {target_rank} outside [0, {d}]")
    slopes = linear_newton(R, B).expanded()
    if c in slopes:
        raise CrystalError(f"threshold {c} is itself a slope of the map")
    high = [s for s in slopes if s > c]
    low = [s for s in slopes if s < c]
    if len(high) != target_rank:
        raise CrystalError(f"{len(high)} slopes exceed {c}, expected {target_rank}")
    if target_rank == 0:
        return Sublattice([[] for _ in range(d)], R.N, [], 0)
    if target_rank == d:
        return Sublattice(identity(R, d), R.N, [list(r) for r in B], 0)
    gap = min(high) - max(low)
    max_hodge = max(elementary_divisors(R, B))
    gamma = d * max_hodge + 4
    n = max(1, math.ceil(2 * gamma / gap))
    cap = 64 * d
    stable_runs, best_err = 0, None
    while n <= cap:
        Bn = mat_pow(R, B, n)
        sf = smith(R, Bn)
        K = min(math.ceil(c * n), R.N)
        hi_idx = [i for i, s in enumerate(sf.exps) if s >= K]
        lo_idx = [i for i, s in enumerate(sf.exps) if s < K]
        if len(hi_idx) == target_rank:
            stable_runs += 1
            acc = min(sf.exps[i] for i in hi_idx) - max(sf.exps[i] for i in lo_idx)
            if stable_runs >= 2 and acc >= min_accuracy:
                sub = _checked_sublattice(R, B, sf, hi_idx, lo_idx, acc, high)
                if sub is not None and sub.accuracy >= min_accuracy:
                    sub.power = n
                    return sub
        else:
            stable_runs = 0
        if max((sf.exps[i] for i in lo_idx), default=0) >= R.N - min_accuracy:
            break
        n *= 2
    best_err = PrecisionError(
        f"slope sublattice not determined to p^{min_accuracy} at precision {R.N}",
        required=2 * R.N)
    raise best_err


def _checked_sublattice(R, B, sf, hi_idx, lo_idx, acc, high_slopes):
    """Verify stability of the candidate and the Newton polygon of the restriction."""
    order = lo_idx + hi_idx
    Q = columns(sf.Q, order)
    Qinv = [sf.Qinv[i] for i in order]
    conj = mat_mul(R, Qinv, mat_mul(R, B, Q))
    k = len(lo_idx)
    leak = block(conj, range(k), range(k, len(order)))
    acc = min(acc, mat_valuation(R, leak))
    if acc < 1:
        return None
    Racc = R.with_precision(acc)
    restricted = mat_lift(Racc, block(conj, range(k, len(order)), range(k, len(order))))
    try:
        got = linear_newton(Racc, restricted)
    except PrecisionError:
        return None
    if got != Polygon.from_slopes(high_slopes):
        return None
    return Sublattice(columns(sf.Q, hi_idx), acc, restricted)


def low_slope_sublattice(R: WittRing, B: list, c, target_rank: int,
                         min_accuracy: int = 1) -> Sublattice:
    """Saturated sublattice on which ``B`` has all slopes < c.

    Uses ``C = p^e B^{-1}`` with ``e`` the largest elementary divisor exponent
    of ``B``: ``C`` is integral with slopes ``e - slope`` and the same
    invariant subspaces.
    """
    d = len(B)
    sf = smith(R, B)
    if any(s >= R.N for s in sf.exps):
        raise PrecisionError("map is not invertible at working precision", required=2 * R.N)
    e = max(sf.exps, default=0)
    # B = Pinv D Qinv  =>  p^e B^{-1} = Q diag(p^{e-s}) P
    scaled = [[R.mul(R.p_power(e - sf.exps[i]), x) for x in sf.P[i]] for i in range(d)]
    C = mat_mul(R, sf.Q, scaled)
    sub = slope_sublattice(R, C, e - Fraction(c), target_rank, min_accuracy)
    if target_rank:
        # restriction of B to the same basis: P S = [I; 0], so X = (P B S)[:k]
        sf2 = smith(R, sub.basis)
        Racc = R.with_precision(sub.accuracy)
        sub.restricted = mat_lift(Racc, mat_mul(R, sf2.P, mat_mul(R, B, sub.basis))[:target_rank])
    return sub


def same_lattice(R: WittRing, X: list, Y: list, precision: int) -> bool:
    """Whether saturated column spans of X and Y agree modulo ``p^precision``."""
    k = len(X[0]) if X else 0
    if (len(Y[0]) if Y else 0) != k:
        return False
    if k == 0:
        return True
    sf = smith(R, X)
    if any(e != 0 for e in sf.exps):
        raise CrystalError("first argument is not saturated")
    PY = mat_mul(R, sf.P, Y)
    rest = PY[k:]
    return not rest or mat_valuation(R, rest) >= precision


def verify_sublattice(R: WittRing, B: list, sub: Sublattice) -> dict:
    """Independent checks on a computed sublattice."""
    S = sub.basis
    k = len(S[0]) if S else 0
    report = {"rank": k}
    if k == 0:
        report.update(saturated=True, stable=True)
        return report
    sf = smith(R, S)
    report["saturated"] = all(e == 0 for e in sf.exps)
    image = mat_mul(R, sf.P, mat_mul(R, B, S))
    out = image[k:]
    report["stable"] = (not out) or mat_valuation(R, out) >= sub.accuracy
    return report


def check_verified(report: dict, what: str):
    bad = [name for name, ok in report.items() if ok is False]
    if bad:
        raise VerificationError(f"{what} failed checks: {', '.join(bad)}", report)
