"""Hodge-Newton hypotheses for GL_n and restrictions of scalars of GL_d,
written as inequalities between slope vectors."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate

from .errors import CrystalError
from .obcrystal import OBCrystal
from .polygon import LatticePoint, Polygon, preceq


def _vec(xs) -> tuple:
    out = []
    for x in xs:
        if isinstance(x, float):
            raise CrystalError("floating point entries are not accepted")
        out.append(Fraction(x))
    return tuple(out)


@dataclass(frozen=True)
class GroupData:
    """Newton point ``nu``, cocharacter ``mu`` and a parabolic cut ``j``.

    For ``r > 1`` the vectors are the reduced ones (``nu'`` and ``mu-bar'``).
    ``mu`` may be rational; ``non_minuscule`` records entries outside {0, r}
    or non-integers.
    """

    nu: tuple
    mu: tuple
    j: int
    r: int = 1

    def __post_init__(self):
        nu, mu = _vec(self.nu), _vec(self.mu)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "mu", mu)
        if len(nu) != len(mu):
            raise CrystalError(f"length mismatch {len(nu)} != {len(mu)}")
        if any(a > b for a, b in zip(nu, nu[1:])) or any(a > b for a, b in zip(mu, mu[1:])):
            raise CrystalError("nu and mu must be nondecreasing")
        if not 0 < self.j < len(nu):
            raise CrystalError(f"cut j = {self.j} outside (0, {len(nu)})")
        if self.r < 1:
            raise CrystalError("r must be positive")

    @property
    def n(self) -> int:
        return len(self.nu)

    @property
    def non_minuscule(self) -> bool:
        return any(x not in (0, self.r) for x in self.mu)

    def to_json(self) -> dict:
        enc = lambda v: [[x.numerator, x.denominator] for x in v]
        return {"nu": enc(self.nu), "mu": enc(self.mu), "j": self.j, "r": self.r}

    @classmethod
    def from_json(cls, obj) -> "GroupData":
        def dec(v):
            out = []
            for x in v:
                if isinstance(x, list):
                    num, den = x
                    out.append(Fraction(int(num), int(den)))
                elif isinstance(x, (int, str)):
                    out.append(Fraction(x))
                else:
                    raise CrystalError(f"bad vector entry {x!r}")
            return out
        try:
            return cls(tuple(dec(obj["nu"])), tuple(dec(obj["mu"])), int(obj["j"]), int(obj.get("r", 1)))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise CrystalError(f"malformed group data JSON: {exc}") from exc


def preceq_G(nu, mu) -> bool:
    """Partial sums of ``nu - mu`` are nonnegative and the total vanishes."""
    nu, mu = _vec(nu), _vec(mu)
    if len(nu) != len(mu):
        raise CrystalError(f"length mismatch {len(nu)} != {len(mu)}")
    diffs = list(accumulate(a - b for a, b in zip(nu, mu)))
    return all(s >= 0 for s in diffs) and (not diffs or diffs[-1] == 0)


def _check_cut(n: int, j: int):
    if not 0 < j < n:
        raise CrystalError(f"cut j = {j} outside (0, {n})")


def in_Y_M_plus(nu, j: int) -> bool:
    """Strict separation ``nu_a > nu_b`` for all ``a > j >= b``."""
    nu = _vec(nu)
    _check_cut(len(nu), j)
    return min(nu[j:]) > max(nu[:j])


def kappa_match(nu, mu, j: int) -> bool:
    nu, mu = _vec(nu), _vec(mu)
    if len(nu) != len(mu):
        raise CrystalError(f"length mismatch {len(nu)} != {len(mu)}")
    _check_cut(len(nu), j)
    return sum(nu[:j]) == sum(mu[:j]) and sum(nu[j:]) == sum(mu[j:])


def theorem1_hypotheses(g: GroupData) -> dict:
    """Named hypotheses for the Levi ``GL_j x GL_{n-j}`` and their conjunction."""
    nu, mu, j = g.nu, g.mu, g.j
    levi = preceq_G(nu[:j], mu[:j]) and preceq_G(nu[j:], mu[j:])
    verdict = {
        "preceq_M": levi,
        "kappa_match": kappa_match(nu, mu, j),
        "in_Y_M_plus": in_Y_M_plus(nu, j),
    }
    verdict["all_true"] = all(verdict.values())
    return verdict


def crystal_bridge(C: OBCrystal, x: LatticePoint) -> GroupData:
    """Group data of ``C`` at the point ``x`` of the height ``r d`` polygon."""
    if x.x1 % C.r:
        raise CrystalError(f"abscissa {x.x1} does not reduce: r = {C.r}")
    return GroupData(tuple(C.newton_reduced().expanded()),
                     tuple(C.sigma_hodge_reduced().expanded()), x.x1 // C.r, C.r)


def vector_polygon(v) -> Polygon:
    return Polygon.from_slopes(v)


def preceq_agrees(nu, mu) -> bool:
    """Cross-check of ``preceq_G`` against the polygon order."""
    return preceq_G(nu, mu) == preceq(vector_polygon(nu), vector_polygon(mu))


def verdict_json(g: GroupData) -> dict:
    out = g.to_json()
    out["verdict"] = theorem1_hypotheses(g)
    out["non_minuscule"] = g.non_minuscule
    return out
