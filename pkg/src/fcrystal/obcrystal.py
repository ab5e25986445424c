"""sigma^a-F-crystals with an action of an unramified O_B, over a finite field.

The O_B-action splits the module into ``r`` graded pieces ``M^(0..r-1)`` of
rank ``d`` each, and ``F`` restricts to semilinear maps
``F_i : M^(i) -> M^(i+1)`` (indices mod r).  A crystal is stored as those
``r`` matrices.  Lists reported per block are indexed by the *target* block:
entry ``i`` of :meth:`OBCrystal.hodge_blocks` is the relative position of
``M^(i)`` and ``F_{i-1} M^(i-1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import sigmalinalg as sl
from .errors import CrystalError, PrecisionError
from .polygon import Polygon, pointwise_sum
from .sigmalinalg import SigmaMatrix
from .wittring import WittRing, make_ring, ring_from_json

AUTO_PRECISION_CAP = 4096


@dataclass(frozen=True)
class TypeDF:
    """Combinatorial type of a minuscule crystal.

    ``f[i]`` is the number of unit-1 slopes of the relative position at block
    ``i``; ``a`` optionally carries exponents for elementary building blocks.
    """

    d: int
    r: int
    f: tuple
    a: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "f", tuple(int(x) for x in self.f))
        if len(self.f) != self.r:
            raise CrystalError(f"type needs {self.r} values of f, got {len(self.f)}")
        if any(not 0 <= x <= self.d for x in self.f):
            raise CrystalError(f"f values must lie in [0, {self.d}]")
        if self.a is not None:
            object.__setattr__(self, "a", tuple(int(x) for x in self.a))

    def to_json(self) -> dict:
        out = {"d": self.d, "r": self.r, "f": list(self.f)}
        if self.a is not None:
            out["a"] = list(self.a)
        return out


def mu_ordinary_polygon(t: TypeDF) -> Polygon:
    """Reduced sigma-invariant Hodge polygon of type ``t``:
    entries ``a_j = #{i : f(i) > d - j}`` for ``j = 1..d``."""
    return Polygon.from_slopes(
        sum(1 for fi in t.f if fi > t.d - j) for j in range(1, t.d + 1))


@dataclass(frozen=True)
class OBCrystal:
    ring: WittRing
    r: int
    d: int
    blocks: tuple = field(compare=False)
    a: int = 1

    def __post_init__(self):
        R = self.ring
        if self.r < 1 or self.d < 0:
            raise CrystalError("need r >= 1 and d >= 0")
        if R.m % self.r:
            raise CrystalError(f"r = {self.r} must divide the residue degree m = {R.m}")
        if self.a < 1:
            raise CrystalError("twist a must be positive")
        blocks = tuple(self.blocks)
        if len(blocks) != self.r:
            raise CrystalError(f"expected {self.r} blocks, got {len(blocks)}")
        for F in blocks:
            if len(F) != self.d or any(len(row) != self.d for row in F):
                raise CrystalError(f"every block must be {self.d} x {self.d}")
        object.__setattr__(self, "blocks", blocks)

    # -- constructors ----------------------------------------------------------

    @classmethod
    def from_ints(cls, ring, r, d, blocks, a=1) -> "OBCrystal":
        return cls(ring, r, d, tuple(sl.int_matrix(ring, F) for F in blocks), a)

    @property
    def h(self) -> int:
        return self.r * self.d

    def with_precision(self, N: int) -> "OBCrystal":
        R = self.ring.with_precision(N)
        return OBCrystal(R, self.r, self.d, tuple(sl.mat_lift(R, F) for F in self.blocks), self.a)

    def sigma_block(self, i: int) -> SigmaMatrix:
        return SigmaMatrix(self.ring, self.blocks[i % self.r], self.a)

    def check_injective(self):
        for i, F in enumerate(self.blocks):
            if any(e >= self.ring.N for e in sl.elementary_divisors(self.ring, F)):
                raise PrecisionError(f"block {i} is not injective at precision {self.ring.N}",
                                     required=2 * self.ring.N)

    # -- precision policy ---------------------------------------------------------

    def linearization_degree(self) -> int:
        """``t`` for the linearization of phi_i (twist ``r a``)."""
        ra, m = self.r * self.a, self.ring.m
        return m // math.gcd(ra, m) if ra % m else 1

    def hodge_total(self) -> int:
        return sum(sum(sl.elementary_divisors(self.ring, F)) for F in self.blocks)

    def required_precision(self) -> int:
        """Newton policy for phi_0: ``t * (sum of Hodge slopes) + d + 8``."""
        return sl.newton_precision_policy(self.linearization_degree(), self.hodge_total(), self.d)

    def at_policy_precision(self) -> "OBCrystal":
        """This crystal re-embedded at (at least) the Newton policy precision.

        Entries are read as exact integers, so raising precision is a lift.
        """
        need = self.required_precision()
        for _ in range(8):
            if self.ring.N >= need:
                return self
            if need > AUTO_PRECISION_CAP:
                break
            raised = self.with_precision(need)
            need2 = raised.required_precision()
            if need2 <= need:
                return raised
            need = need2
        raise PrecisionError(f"precision policy exceeds cap {AUTO_PRECISION_CAP}", required=need)

    # -- Hodge data -------------------------------------------------------------

    def hodge_blocks(self) -> list:
        """``m_i`` for ``i = 0..r-1``: elementary divisors of ``F_{i-1}``."""
        return [sl.hodge(self.sigma_block(i - 1)) for i in range(self.r)]

    def hodge(self) -> Polygon:
        out = Polygon()
        for m in self.hodge_blocks():
            out = out.concat(m)
        return out

    def sigma_hodge_reduced(self) -> Polygon:
        total = Polygon.zero(self.d)
        for m in self.hodge_blocks():
            total = pointwise_sum(total, m)
        return total

    def sigma_hodge(self) -> Polygon:
        return self.sigma_hodge_reduced().r_inflate(self.r)

    def phi(self, i: int) -> SigmaMatrix:
        """``F_{i+r-1} o ... o F_i`` on ``M^(i)`` (twist ``r a``)."""
        acc = self.sigma_block(i)
        for k in range(1, self.r):
            acc = sl.compose(self.sigma_block(i + k), acc)
        return acc

    def per_block_hodge_of_phi(self) -> list:
        return [sl.hodge(self.phi(i)) for i in range(self.r)]

    # -- Newton data ----------------------------------------------------------------

    def newton_reduced(self, debug_all_blocks: bool = False) -> Polygon:
        nu = sl.newton(self.phi(0)) if self.d else Polygon()
        if debug_all_blocks:
            for i in range(1, self.r):
                other = sl.newton(self.phi(i))
                if other != nu:
                    raise CrystalError(f"Newton polygon of phi_{i} ({other}) differs from phi_0 ({nu})")
        return nu

    def newton(self, debug_all_blocks: bool = False) -> Polygon:
        return self.newton_reduced(debug_all_blocks).r_inflate(self.r)

    def type_of(self) -> TypeDF:
        f = []
        for i, m in enumerate(self.hodge_blocks()):
            if any(s not in (0, 1) for s, _ in m.slopes):
                raise CrystalError(f"block {i} has non-minuscule Hodge polygon {m}")
            f.append(sum(mult for s, mult in m.slopes if s == 1))
        return TypeDF(self.d, self.r, tuple(f))

    # -- structural operations --------------------------------------------------------

    def base_change(self, g) -> "OBCrystal":
        """Change basis of each ``M^(i)`` by the unimodular ``g[i]``:
        ``F_i -> g_{i+1}^{-1} F_i sigma^a(g_i)``."""
        R = self.ring
        if len(g) != self.r:
            raise CrystalError(f"need {self.r} basis changes")
        ginv = []
        for gi in g:
            if not sl.is_unimodular(R, gi):
                raise CrystalError("basis change matrix has non-unit determinant")
            ginv.append(sl.inverse_unimodular(R, gi))
        blocks = tuple(
            sl.mat_mul(R, ginv[(i + 1) % self.r], sl.mat_mul(R, F, sl.mat_frob(R, g[i], self.a)))
            for i, F in enumerate(self.blocks))
        return OBCrystal(R, self.r, self.d, blocks, self.a)

    def restrict(self, rows, cols=None) -> "OBCrystal":
        """Crystal on the coordinate sub-blocks ``rows`` (used after a
        block-diagonalizing base change)."""
        cols = rows if cols is None else cols
        blocks = tuple(sl.block(F, rows, cols) for F in self.blocks)
        return OBCrystal(self.ring, self.r, len(rows), blocks, self.a)

    # -- JSON -----------------------------------------------------------------------

    def to_json(self) -> dict:
        out = self.ring.header()
        out.update(r=self.r, a=self.a, d=self.d,
                   blocks=[[[list(x) for x in row] for row in F] for F in self.blocks])
        return out

    @classmethod
    def from_json(cls, obj) -> "OBCrystal":
        R = ring_from_json(obj)
        try:
            r, d, a = int(obj["r"]), int(obj["d"]), int(obj.get("a", 1))
            blocks = tuple([[R.decode(x) for x in row] for row in F] for F in obj["blocks"])
        except (KeyError, TypeError, ValueError) as exc:
            raise CrystalError(f"malformed crystal JSON: {exc}") from exc
        return cls(R, r, d, blocks, a)


def direct_sum(C1: OBCrystal, C2: OBCrystal) -> OBCrystal:
    if not C1.ring.same_as(C2.ring) or C1.r != C2.r or C1.a != C2.a:
        raise CrystalError("direct sum needs matching ring, r and twist")
    R, d1, d2 = C1.ring, C1.d, C2.d
    blocks = []
    for F, G in zip(C1.blocks, C2.blocks):
        top = [list(row) + [R.zero] * d2 for row in F]
        bottom = [[R.zero] * d1 + list(row) for row in G]
        blocks.append(top + bottom)
    return OBCrystal(R, C1.r, d1 + d2, tuple(blocks), C1.a)


def diagonal_crystal(ring: WittRing, r: int, exps, a: int = 1) -> OBCrystal:
    """Crystal with ``F_i = diag(p^exps[i][j])``."""
    d = len(exps[0]) if exps else 0
    blocks = []
    for row in exps:
        F = [[ring.p_power(row[j]) if i == j else ring.zero for j in range(d)] for i in range(d)]
        blocks.append(F)
    return OBCrystal(ring, r, d, tuple(blocks), a)


def build_elementary(ring: WittRing, r: int, dprime: int, a) -> OBCrystal:
    """``F(e_{i,j}) = p^{a(i)} e_{i+1,j}``: isoclinic of slope ``sum(a)/r``."""
    if len(a) != r:
        raise CrystalError(f"need {r} exponents")
    return diagonal_crystal(ring, r, [[a[i]] * dprime for i in range(r)])


def build_mu_ordinary(ring: WittRing, t: TypeDF) -> OBCrystal:
    """Normal form of the mu-ordinary crystal of type ``t``.

    ``F_i(e_{i,j}) = p^{[j > d - f(i+1)]} e_{i+1,j}``, so the relative position
    at block ``i`` has ``f(i)`` ones and column ``j`` is isoclinic of reduced
    slope ``a_j``.
    """
    d, r = t.d, t.r
    exps = [[1 if j + 1 > d - t.f[(i + 1) % r] else 0 for j in range(d)] for i in range(r)]
    return diagonal_crystal(ring, r, exps)


def default_ring(p: int, r: int, N: int, extension: int = 1) -> WittRing:
    return make_ring(p, r * extension, N)


def policy_ring_for_exponents(p: int, m: int, r: int, d: int, total: int, a: int = 1) -> WittRing:
    """Ring at the precision the Newton and decomposition policies ask for,
    given the total Hodge exponent of a crystal."""
    ra = r * a
    t = m // math.gcd(ra, m) if ra % m else 1
    N = max(sl.newton_precision_policy(t, total, d), 2 * total + 16)
    return make_ring(p, m, N)


def polygons_report(C: OBCrystal, debug_all_blocks: bool = False) -> dict:
    """All polygons of a crystal (used by the CLI and tests)."""
    nu_red = C.newton_reduced(debug_all_blocks)
    out = {
        "newton": nu_red.r_inflate(C.r),
        "newton_reduced": nu_red,
        "hodge": C.hodge(),
        "sigma_hodge": C.sigma_hodge(),
        "sigma_hodge_reduced": C.sigma_hodge_reduced(),
        "hodge_blocks": C.hodge_blocks(),
        "phi_hodge": C.per_block_hodge_of_phi(),
    }
    return out


def slope_fraction(x) -> Fraction:
    return Fraction(x)
