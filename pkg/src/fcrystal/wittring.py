"""Truncated unramified extensions W(F_{p^m}) / p^N with a Frobenius lift.

The ring is ``(Z/p^N)[x] / (f)`` for a monic ``f`` that is irreducible mod p.
Elements are tuples of ``m`` integers in ``[0, p^N)``, the coordinates in the
power basis ``1, x, ..., x^{m-1}``.  The Frobenius lift sends ``x`` to the
unique root of ``f`` congruent to ``x^p`` mod p; it is found once by Newton
iteration and stored as an ``m x m`` matrix for each power.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

from .errors import CrystalError, PrecisionError

WittElem = tuple  # length-m tuple of ints mod p^N

MAX_P, MAX_M, MAX_N = 97, 12, 512


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def vp(n: int, p: int, cap: int) -> int:
    """p-adic valuation of an integer, capped at ``cap`` (0 maps to cap)."""
    if n == 0:
        return cap
    v = 0
    while n % p == 0 and v < cap:
        n //= p
        v += 1
    return v


# -- polynomials over F_p (lists of coefficients, low degree first) -----------


def _trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a, b, p):
    a = [c % p for c in a]
    _trim(a)
    inv = pow(b[-1], -1, p)
    while len(a) >= len(b):
        c = a[-1] * inv % p
        shift = len(a) - len(b)
        for i, bc in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bc) % p
        _trim(a)
    return a


def _pmulmod(a, b, f, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _pmod(out, f, p)


def _ppowx(e, f, p):
    """x^e mod (f, p)."""
    result, base = [1], _pmod([0, 1], f, p)
    while e:
        if e & 1:
            result = _pmulmod(result, base, f, p)
        base = _pmulmod(base, base, f, p)
        e >>= 1
    return result


def _pgcd(a, b, p):
    a, b = _trim([c % p for c in a]), _trim([c % p for c in b])
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def _psub(a, b, p):
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)]
    return _trim(out)


def _prime_factors(n):
    out, q = [], 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def is_irreducible_mod_p(poly: Sequence[int], p: int) -> bool:
    """Rabin's test for a monic polynomial (coefficients low degree first)."""
    f = [c % p for c in poly]
    m = len(f) - 1
    if m < 1 or f[-1] != 1:
        return False
    if m == 1:
        return True
    if _psub(_ppowx(p**m, f, p), [0, 1], p):
        return False
    for q in _prime_factors(m):
        g = _pgcd(f, _psub(_ppowx(p ** (m // q), f, p), [0, 1], p), p)
        if len(g) > 1:
            return False
    return True


@lru_cache(maxsize=None)
def default_polynomial(p: int, m: int) -> tuple:
    """Deterministic choice of a monic degree-m polynomial irreducible mod p.

    Searches ``x^m + c_{k} x^k + ... + c_0`` with the fewest low-order terms
    first, so small cases come out as ``x - 1``, ``x^2 + 1`` etc. when possible.
    """
    if m == 1:
        return (-1, 1)
    for width in range(1, m + 1):
        # coefficients c_0..c_{width-1}, lexicographic with c_0 != 0
        total = p**width
        for code in range(total):
            coeffs, c = [], code
            for _ in range(width):
                coeffs.append(c % p)
                c //= p
            if coeffs[0] == 0:
                continue
            poly = coeffs + [0] * (m - width) + [1]
            if is_irreducible_mod_p(poly, p):
                return tuple(poly)
    raise CrystalError(f"no irreducible polynomial of degree {m} mod {p}")  # pragma: no cover


class WittRing:
    """``W(F_{p^m}) / p^N`` presented as ``(Z/p^N)[x]/(f)``."""

    def __init__(self, p: int, m: int, N: int, defining_poly: Sequence[int] | None = None):
        if not is_prime(p):
            raise CrystalError(f"{p} is not prime")
        if m < 1 or N < 1:
            raise CrystalError("residue degree and precision must be positive")
        if defining_poly is None:
            defining_poly = default_polynomial(p, m)
        poly = tuple(int(c) for c in defining_poly)
        if len(poly) != m + 1 or poly[-1] != 1:
            raise CrystalError(f"defining polynomial must be monic of degree {m}")
        if not is_irreducible_mod_p(poly, p):
            raise CrystalError(f"{list(poly)} is reducible mod {p}")
        self.p, self.m, self.N = p, m, N
        self.poly_int = poly
        self.modulus = p**N
        self.defining_poly = tuple(c % self.modulus for c in poly)
        # x^{m+k} mod f, for reducing products
        self._red = []
        cur = [(-c) % self.modulus for c in self.defining_poly[:m]]
        for _ in range(m - 1):
            self._red.append(cur)
            nxt = [0] + cur[:-1]
            top = cur[-1]
            for i in range(m):
                nxt[i] = (nxt[i] - top * self.defining_poly[i]) % self.modulus
            cur = nxt
        self.zero = (0,) * m
        self.one = (1,) + (0,) * (m - 1)
        self.gen = (0, 1) + (0,) * (m - 2) if m > 1 else ((-self.defining_poly[0]) % self.modulus,)
        self.sigma_image = self._lift_frobenius()
        self._sigma_pows = self._frobenius_tables()

    # -- identity ------------------------------------------------------------

    def header(self) -> dict:
        return {"p": self.p, "m": self.m, "precision": self.N,
                "defining_poly": list(self.poly_int)}

    def same_as(self, other: "WittRing") -> bool:
        return (self.p, self.m, self.N, self.defining_poly) == (
            other.p, other.m, other.N, other.defining_poly)

    def with_precision(self, N: int) -> "WittRing":
        return ring_for(self.p, self.m, N, self.poly_int)

    def __repr__(self):
        return f"WittRing(p={self.p}, m={self.m}, N={self.N}, f={list(self.poly_int)})"

    # -- element construction ----------------------------------------------

    def elem(self, coeffs) -> WittElem:
        if isinstance(coeffs, int):
            return self.from_int(coeffs)
        coeffs = list(coeffs)
        if len(coeffs) > self.m:
            raise CrystalError(f"element has {len(coeffs)} coordinates, ring has m={self.m}")
        coeffs += [0] * (self.m - len(coeffs))
        return tuple(int(c) % self.modulus for c in coeffs)

    def from_int(self, n: int) -> WittElem:
        return (n % self.modulus,) + (0,) * (self.m - 1)

    def lift(self, a: WittElem) -> WittElem:
        """Reinterpret the integer coordinates of ``a`` (from another precision)."""
        return tuple(c % self.modulus for c in a)

    # -- arithmetic ----------------------------------------------------------

    def add(self, a: WittElem, b: WittElem) -> WittElem:
        q = self.modulus
        return tuple((x + y) % q for x, y in zip(a, b))

    def sub(self, a: WittElem, b: WittElem) -> WittElem:
        q = self.modulus
        return tuple((x - y) % q for x, y in zip(a, b))

    def neg(self, a: WittElem) -> WittElem:
        q = self.modulus
        return tuple((-x) % q for x in a)

    def scale(self, a: WittElem, n: int) -> WittElem:
        q = self.modulus
        return tuple(x * n % q for x in a)

    def mul(self, a: WittElem, b: WittElem) -> WittElem:
        m, q = self.m, self.modulus
        if m == 1:
            return (a[0] * b[0] % q,)
        prod = [0] * (2 * m - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        out = prod[:m]
        for k in range(m - 1):
            c = prod[m + k]
            if c:
                red = self._red[k]
                for i in range(m):
                    out[i] += c * red[i]
        return tuple(c % q for c in out)

    def pow(self, a: WittElem, e: int) -> WittElem:
        result = self.one
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    def is_zero(self, a: WittElem) -> bool:
        return not any(a)

    def valuation(self, a: WittElem) -> int:
        """Largest v with p^v dividing every coordinate; ``N`` means zero at
        this precision (read it as ">= N")."""
        v = self.N
        for c in a:
            if c:
                v = min(v, vp(c, self.p, v))
                if v == 0:
                    return 0
        return v

    def is_unit(self, a: WittElem) -> bool:
        return self.valuation(a) == 0

    def div_p_power(self, a: WittElem, v: int) -> WittElem:
        """``a / p^v`` for ``a`` divisible by ``p^v``; the top ``v`` digits of
        the result are undetermined and set to zero."""
        d = self.p**v
        return tuple(c // d for c in a)

    def p_power(self, v: int) -> WittElem:
        return self.from_int(self.p**v)

    def inverse(self, a: WittElem) -> WittElem:
        if not self.is_unit(a):
            raise CrystalError("element is not a unit")
        p, m = self.p, self.m
        if m == 1:
            return (pow(a[0], -1, self.modulus),)
        f = [c % p for c in self.defining_poly]
        z = self._inverse_mod_p([c % p for c in a], f)
        two = self.from_int(2)
        prec = 1
        while prec < self.N:
            z = self.mul(z, self.sub(two, self.mul(a, z)))
            prec *= 2
        return z

    def _inverse_mod_p(self, a, f):
        p = self.p
        r0, r1 = _trim(list(f)), _trim(list(a))
        s0, s1 = [], [1]
        while r1:
            q, r = _pdivmod(r0, r1, p)
            r0, r1 = r1, r
            s0, s1 = s1, _psub(s0, _pmul(q, s1, p), p)
        cinv = pow(r0[0], -1, p)
        return self.elem(_pmod([x * cinv for x in s0], f, p))

    # -- Frobenius -------------------------------------------------------------

    def _poly_eval(self, coeffs, y):
        acc = self.zero
        for c in reversed(coeffs):
            acc = self.add(self.mul(acc, y), self.from_int(c))
        return acc

    def _lift_frobenius(self) -> WittElem:
        if self.m == 1:
            return self.gen
        f = self.defining_poly
        df = [i * f[i] for i in range(1, len(f))]
        y = self.pow(self.gen, self.p)
        for _ in range(self.N.bit_length() + 2):
            fy = self._poly_eval(f, y)
            if self.is_zero(fy):
                break
            y = self.sub(y, self.mul(fy, self.inverse(self._poly_eval(df, y))))
        if not self.is_zero(self._poly_eval(f, y)):  # pragma: no cover
            raise PrecisionError("Newton iteration for the Frobenius lift did not converge")
        return y

    def _frobenius_tables(self):
        # table k lists sigma^k(x^j) for j = 0..m-1
        m = self.m
        ident = [self.elem([1 if i == j else 0 for i in range(m)]) for j in range(m)]
        first = [self.one]
        for _ in range(1, m):
            first.append(self.mul(first[-1], self.sigma_image))
        tables = [ident, first]
        for _ in range(2, m):
            tables.append([self._apply_table(first, v) for v in tables[-1]])
        return tables

    def _apply_table(self, table, a):
        q, m = self.modulus, self.m
        out = [0] * m
        for c, col in zip(a, table):
            if c:
                for i in range(m):
                    out[i] += c * col[i]
        return tuple(x % q for x in out)

    def frobenius(self, a: WittElem, k: int = 1) -> WittElem:
        """Apply ``sigma^k``; ``k`` is taken mod m and may be negative."""
        if self.m == 1:
            return a
        k %= self.m
        if k == 0:
            return a
        return self._apply_table(self._sigma_pows[k], a)

    # -- JSON ------------------------------------------------------------------

    def encode(self, a: WittElem) -> list:
        return list(a)

    def decode(self, obj) -> WittElem:
        if isinstance(obj, int):
            return self.from_int(obj)
        if not isinstance(obj, list) or not all(isinstance(c, int) for c in obj):
            raise CrystalError(f"malformed ring element {obj!r}")
        return self.elem(obj)


def _pmul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def _pdivmod(a, b, p):
    a = _trim([c % p for c in a])
    inv = pow(b[-1], -1, p)
    q = [0] * max(0, len(a) - len(b) + 1)
    while len(a) >= len(b):
        c = a[-1] * inv % p
        shift = len(a) - len(b)
        q[shift] = c
        for i, bc in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bc) % p
        _trim(a)
    return _trim(q), a


@lru_cache(maxsize=256)
def ring_for(p: int, m: int, N: int, defining_poly: tuple | None = None) -> WittRing:
    """Cached constructor; rings are immutable so sharing is safe."""
    return WittRing(p, m, N, defining_poly)


def make_ring(p, m, N, defining_poly=None) -> WittRing:
    poly = tuple(defining_poly) if defining_poly is not None else None
    return ring_for(p, m, N, poly)


def ring_from_json(obj) -> WittRing:
    try:
        p, m, N = int(obj["p"]), int(obj["m"]), int(obj["precision"])
        poly = obj.get("defining_poly")
    except (KeyError, TypeError, ValueError) as exc:
        raise CrystalError(f"malformed ring header: {exc}") from exc
    return make_ring(p, m, N, poly)
