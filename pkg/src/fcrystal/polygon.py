"""Exact polygon calculus for Newton and Hodge polygons.

A polygon of height ``h`` is a multiset of ``h`` nonnegative rational slopes,
read in increasing order.  It is identified with the convex piecewise-linear
function on ``[0, h]`` that starts at the origin and has slope equal to the
k-th smallest entry on ``[k-1, k]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate
from typing import Iterable

from .errors import CrystalError


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise CrystalError("floating point slopes are not accepted")
    return Fraction(x)


@dataclass(frozen=True)
class LatticePoint:
    x1: int
    x2: Fraction

    def __post_init__(self):
        if not isinstance(self.x1, int):
            raise CrystalError(f"abscissa must be an integer, got {self.x1!r}")
        object.__setattr__(self, "x2", _frac(self.x2))

    def __iter__(self):
        yield self.x1
        yield self.x2

    def __repr__(self):
        return f"({self.x1}, {self.x2})"


@dataclass(frozen=True)
class Polygon:
    """Normalized polygon: ``slopes`` is a tuple of ``(slope, multiplicity)``
    with strictly increasing slopes and positive multiplicities."""

    slopes: tuple = ()

    def __post_init__(self):
        prev = None
        for s, mult in self.slopes:
            if not isinstance(s, Fraction) or not isinstance(mult, int):
                raise CrystalError("use Polygon.from_slopes to build polygons")
            if s < 0 or mult < 1 or (prev is not None and s <= prev):
                raise CrystalError(f"not a normalized polygon: {self.slopes}")
            prev = s

    # -- construction -----------------------------------------------------

    @classmethod
    def from_slopes(cls, raw: Iterable) -> "Polygon":
        vals = sorted(_frac(x) for x in raw)
        if vals and vals[0] < 0:
            raise CrystalError(f"negative slope {vals[0]}")
        out = []
        for v in vals:
            if out and out[-1][0] == v:
                out[-1][1] += 1
            else:
                out.append([v, 1])
        return cls(tuple((s, m) for s, m in out))

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "Polygon":
        """Build from ``(slope, multiplicity)`` pairs in any order."""
        raw = []
        for s, mult in pairs:
            if int(mult) < 1:
                raise CrystalError(f"multiplicity must be positive, got {mult}")
            raw.extend([s] * int(mult))
        return cls.from_slopes(raw)

    @classmethod
    def zero(cls, h: int) -> "Polygon":
        return cls(((Fraction(0), h),)) if h else cls()

    # -- basic accessors --------------------------------------------------

    @property
    def height(self) -> int:
        return sum(m for _, m in self.slopes)

    def expanded(self) -> list:
        """All ``h`` slopes, nondecreasing."""
        return [s for s, m in self.slopes for _ in range(m)]

    def total(self) -> Fraction:
        return sum((s * m for s, m in self.slopes), Fraction(0))

    def partial_sums(self) -> list:
        """Values at the integers ``0..h``."""
        return [Fraction(0)] + list(accumulate(self.expanded()))

    def vertices(self) -> list:
        pts = [LatticePoint(0, Fraction(0))]
        x, y = 0, Fraction(0)
        for s, m in self.slopes:
            x += m
            y += s * m
            pts.append(LatticePoint(x, y))
        return pts

    def __len__(self):
        return self.height

    def __str__(self):
        return "{" + ", ".join(f"({s},{m})" for s, m in self.slopes) + "}"

    # -- evaluation -------------------------------------------------------

    def value_at(self, t) -> Fraction:
        t = _frac(t)
        if t < 0 or t > self.height:
            raise CrystalError(f"abscissa {t} outside [0, {self.height}]")
        x, y = 0, Fraction(0)
        for s, m in self.slopes:
            if t <= x + m:
                return y + s * (t - x)
            x += m
            y += s * m
        return y

    def lies_on(self, x: LatticePoint) -> bool:
        return self.value_at(x.x1) == x.x2

    def is_breakpoint(self, x: LatticePoint) -> bool:
        h = self.height
        if not 0 < x.x1 < h:
            raise CrystalError(f"breakpoints need 0 < x1 < {h}, got {x.x1}")
        if not self.lies_on(x):
            raise CrystalError(f"{x} does not lie on {self}")
        ex = self.expanded()
        return ex[x.x1 - 1] < ex[x.x1]

    def breakpoints(self) -> list:
        """Interior vertices; all of them are breakpoints by normalization."""
        return self.vertices()[1:-1]

    def split_at(self, x1: int) -> tuple:
        if not 0 <= x1 <= self.height:
            raise CrystalError(f"split index {x1} outside [0, {self.height}]")
        ex = self.expanded()
        return Polygon.from_slopes(ex[:x1]), Polygon.from_slopes(ex[x1:])

    def concat(self, other: "Polygon") -> "Polygon":
        return Polygon.from_slopes(self.expanded() + other.expanded())

    # -- r-reduction ------------------------------------------------------

    def r_reduce(self, r: int) -> "Polygon":
        if r < 1:
            raise CrystalError("r must be positive")
        for s, m in self.slopes:
            if m % r:
                raise CrystalError(f"multiplicity {m} of slope {s} not divisible by {r}")
        return Polygon(tuple((s * r, m // r) for s, m in self.slopes))

    def r_inflate(self, r: int) -> "Polygon":
        if r < 1:
            raise CrystalError("r must be positive")
        return Polygon(tuple((s / r, m * r) for s, m in self.slopes))

    def dual(self) -> "Polygon":
        """Slopes ``s -> 1 - s``; only defined for slopes in [0, 1]."""
        if self.slopes and self.slopes[-1][0] > 1:
            raise CrystalError("dual polygon needs all slopes in [0, 1]")
        return Polygon.from_pairs((1 - s, m) for s, m in self.slopes)

    # -- JSON -------------------------------------------------------------

    def to_json(self) -> dict:
        return {"slopes": [[s.numerator, s.denominator, m] for s, m in self.slopes]}

    @classmethod
    def from_json(cls, obj) -> "Polygon":
        try:
            rows = obj["slopes"]
            pairs = [(Fraction(int(n), int(d)), int(m)) for n, d, m in rows]
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise CrystalError(f"malformed polygon JSON: {exc}") from exc
        return cls.from_pairs(pairs)


def from_slopes(raw) -> Polygon:
    return Polygon.from_slopes(raw)


def preceq(nu: Polygon, mu: Polygon) -> bool:
    """Dominance order: ``nu`` lies on or above ``mu`` with the same endpoints."""
    if nu.height != mu.height:
        raise CrystalError(f"height mismatch {nu.height} != {mu.height}")
    a, b = nu.partial_sums(), mu.partial_sums()
    return a[-1] == b[-1] and all(x >= y for x, y in zip(a, b))


def pointwise_sum(P: Polygon, Q: Polygon) -> Polygon:
    if P.height != Q.height:
        raise CrystalError(f"height mismatch {P.height} != {Q.height}")
    return Polygon.from_slopes(a + b for a, b in zip(P.expanded(), Q.expanded()))


def dual_point(x: LatticePoint, n: int) -> LatticePoint:
    """Partner of ``x`` under the polarization symmetry of a height-2n polygon.

    A self-dual polygon of height ``2n`` satisfies
    ``P(2n - t) = n - t + P(t)``, so the partner is ``(2n - x1, n - x1 + x2)``.
    The map is an involution.
    """
    if not 0 <= x.x1 <= 2 * n:
        raise CrystalError(f"x1 = {x.x1} outside [0, {2 * n}]")
    return LatticePoint(2 * n - x.x1, n - x.x1 + x.x2)


def dual_polygon(P: Polygon) -> Polygon:
    return P.dual()


def common_points(P: Polygon, Q: Polygon) -> list:
    """Integral abscissae in (0, h) where both polygons take the same value."""
    a, b = P.partial_sums(), Q.partial_sums()
    return [LatticePoint(i, a[i]) for i in range(1, len(a) - 1) if a[i] == b[i]]
