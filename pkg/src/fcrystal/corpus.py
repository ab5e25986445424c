"""Seeded random generators for crystals, basis changes and polygons."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from . import sigmalinalg as sl
from .obcrystal import OBCrystal, build_elementary, direct_sum, policy_ring_for_exponents
from .polygon import Polygon
from .wittring import WittRing


def random_elem(R: WittRing, rng: random.Random):
    return tuple(rng.randrange(R.modulus) for _ in range(R.m))


def random_matrix(R: WittRing, n: int, k: int, rng: random.Random) -> list:
    return [[random_elem(R, rng) for _ in range(k)] for _ in range(n)]


def random_unimodular(R: WittRing, n: int, rng: random.Random) -> list:
    while True:
        U = random_matrix(R, n, n, rng)
        if sl.is_unimodular(R, U):
            return U


def random_crystal(rng: random.Random, p: int, r: int, d: int, extension: int = 1,
                   max_exp: int = 2, a: int = 1) -> OBCrystal:
    """``F_i = U_i diag(p^e) V_i`` with random exponents and random
    unimodular ``U_i, V_i``; the ring precision follows the Newton policy."""
    exps = [[rng.randint(0, max_exp) for _ in range(d)] for _ in range(r)]
    total = sum(map(sum, exps))
    R = policy_ring_for_exponents(p, r * extension, r, d, total, a)
    blocks = []
    for row in exps:
        D = [[R.p_power(row[j]) if i == j else R.zero for j in range(d)] for i in range(d)]
        U, V = random_unimodular(R, d, rng), random_unimodular(R, d, rng)
        blocks.append(sl.mat_mul(R, U, sl.mat_mul(R, D, V)))
    return OBCrystal(R, r, d, tuple(blocks), a)


def corpus_parameters(rng: random.Random):
    p = rng.choice((2, 3, 5))
    r = rng.randint(1, 4)
    d = rng.randint(1, 4)
    ext = rng.choice((1, 2))
    return p, r, d, ext


def random_corpus(seed: int, count: int):
    rng = random.Random(seed)
    for _ in range(count):
        p, r, d, ext = corpus_parameters(rng)
        yield random_crystal(rng, p, r, d, ext)


@dataclass
class SplitInstance:
    """``base_change(direct_sum(E_low, E_high), g)`` with its ground truth."""

    crystal: OBCrystal
    g: list
    d_low: int
    d_high: int
    a_low: tuple
    a_high: tuple


def random_split_instance(rng: random.Random, p: int | None = None, r: int | None = None) -> SplitInstance:
    """Two elementary crystals with distinct slopes, glued and conjugated.

    Exponents satisfy ``a_low(i) <= a_high(i)`` for every ``i`` so that the
    forced breakpoint lies on the sigma-invariant Hodge polygon.
    """
    p = p or rng.choice((2, 3, 5))
    r = r or rng.randint(1, 3)
    ext = rng.choice((1, 2))
    while True:
        a_low = tuple(rng.randint(0, 1) for _ in range(r))
        a_high = tuple(x + rng.randint(0, 1) for x in a_low)
        if sum(a_high) > sum(a_low):
            break
    d1, d2 = rng.randint(1, 2), rng.randint(1, 2)
    total = d1 * sum(a_low) + d2 * sum(a_high)
    R = policy_ring_for_exponents(p, r * ext, r, d1 + d2, total)
    # headroom: the glued crystal is only known modulo p^N, which moves the
    # slope sublattices by up to the total Hodge exponent
    R = R.with_precision(R.N + total + 8)
    C0 = direct_sum(build_elementary(R, r, d1, a_low), build_elementary(R, r, d2, a_high))
    g = [random_unimodular(R, d1 + d2, rng) for _ in range(r)]
    return SplitInstance(C0.base_change(g), g, d1, d2, a_low, a_high)


def random_self_dual_polygon(rng: random.Random, max_height: int = 16) -> Polygon:
    """Random polygon of even height ``2n <= max_height`` invariant under
    ``s -> 1 - s``."""
    n = rng.randint(1, max_height // 2)
    half = []
    remaining = 2 * n
    while remaining > 1:
        den = rng.randint(1, 4)
        num = rng.randint(0, den)
        s = Fraction(num, den)
        if s == Fraction(1, 2):
            continue
        # a slope s with multiplicity k pairs with 1 - s with multiplicity k;
        # use the denominator as multiplicity so breakpoints are integral
        k = den * rng.randint(1, 2)
        if 2 * k > remaining:
            break
        half.append((s, k))
        remaining -= 2 * k
    pairs = list(half) + [(1 - s, k) for s, k in half]
    if remaining:
        pairs.append((Fraction(1, 2), remaining))
    return Polygon.from_pairs(pairs)
