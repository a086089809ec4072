"""Arithmetic in the binary field GF(2^k) plus dense univariate polynomials.

Field elements are plain Python ints in [0, 2^k).  Addition is XOR (every
element is its own additive inverse), multiplication is carryless
multiplication reduced modulo a fixed irreducible polynomial.  Fields of
8 or 16 bits precompute log/exp tables; larger fields multiply with a
4-bit windowed carryless product.  Polynomials are dense coefficient
lists, index i holding the coefficient of X^i.
"""

from __future__ import annotations

from typing import Iterable, Sequence

# Low bits of the reduction polynomial X^k + (mask bits), one per supported
# field size.  Each mask is the smallest value making the polynomial
# irreducible over GF(2); irreducibility is rechecked by the test suite.
REDUCTION_MASKS = {
    8: 0x1B,
    16: 0x2B,
    24: 0x1B,
    32: 0x8D,
    40: 0x39,
    48: 0x2D,
    56: 0x95,
    64: 0x1B,
}

_TABLE_LIMIT = 16  # log/exp tables up to this many bits


class Field:
    """GF(2^k) for k in REDUCTION_MASKS.  Use field(bits) to share instances."""

    def __init__(self, bits: int = 64):
        if bits not in REDUCTION_MASKS:
            raise ValueError("unsupported field size %r (pick one of %s)"
                             % (bits, sorted(REDUCTION_MASKS)))
        self.bits = bits
        self.mask = REDUCTION_MASKS[bits]
        self.size = 1 << bits
        self._lowmask = self.size - 1
        self._mask_shifts = tuple(i for i in range(8) if self.mask >> i & 1)
        self._exp: list[int] | None = None
        self._log: list[int] | None = None
        if bits <= _TABLE_LIMIT:
            self._build_tables()

    def __repr__(self) -> str:
        return "Field(bits=%d)" % self.bits

    # -- element arithmetic ------------------------------------------------

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    sub = add  # characteristic 2

    def mul(self, a: int, b: int) -> int:
        if self._log is not None:
            if a == 0 or b == 0:
                return 0
            return self._exp[self._log[a] + self._log[b]]
        return self._reduce(self._clmul(a, b))

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in GF(2^%d)" % self.bits)
        if self._log is not None:
            return self._exp[self.size - 1 - self._log[a]]
        # Extended Euclid over GF(2)[X]; invariant r_i = s_i * a (mod f).
        # f is irreducible, so the remainder chain reaches 1 exactly.
        r0, r1 = (1 << self.bits) | self.mask, a
        s0, s1 = 0, 1
        while r1 != 1:
            d = r0.bit_length() - r1.bit_length()
            if d < 0:
                r0, r1, s0, s1 = r1, r0, s1, s0
                d = -d
            r0 ^= r1 << d
            s0 ^= s1 << d
        return self._reduce(s1)

    def pow(self, a: int, e: int) -> int:
        r = 1
        while e:
            if e & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            e >>= 1
        return r

    def rand(self, rng) -> int:
        return rng.getrandbits(self.bits)

    # -- internals ---------------------------------------------------------

    @staticmethod
    def _clmul(a: int, b: int) -> int:
        """Carryless product of two nonnegative ints (no reduction)."""
        a2 = a << 1
        a4 = a << 2
        a8 = a << 3
        tab = (0, a, a2, a2 ^ a, a4, a4 ^ a, a4 ^ a2, a4 ^ a2 ^ a,
               a8, a8 ^ a, a8 ^ a2, a8 ^ a2 ^ a,
               a8 ^ a4, a8 ^ a4 ^ a, a8 ^ a4 ^ a2, a8 ^ a4 ^ a2 ^ a)
        acc = 0
        shift = 0
        while b:
            acc ^= tab[b & 15] << shift
            b >>= 4
            shift += 4
        return acc

    def _reduce(self, v: int) -> int:
        k = self.bits
        while v >> k:
            hi = v >> k
            v &= self._lowmask
            for s in self._mask_shifts:
                v ^= hi << s
        return v

    def _build_tables(self) -> None:
        n = self.size - 1
        exp = [0] * (2 * n)
        log = [0] * self.size
        for g in range(2, self.size):
            x = 1
            ok = True
            for i in range(n):
                exp[i] = x
                if x == 1 and i:
                    ok = False
                    break
                log[x] = i
                x = self._reduce(self._clmul(x, g))
            if ok and x == 1:
                break
        else:  # pragma: no cover - masks are verified irreducible
            raise AssertionError("no generator found for GF(2^%d)" % self.bits)
        exp[n:2 * n] = exp[:n]
        self._exp, self._log = exp, log


_FIELDS: dict[int, Field] = {}


def field(bits: int = 64) -> Field:
    """Shared Field instance for the given size (table build runs once)."""
    f = _FIELDS.get(bits)
    if f is None:
        f = _FIELDS[bits] = Field(bits)
    return f


# -- dense polynomials -----------------------------------------------------
# Coefficient lists are not auto-trimmed: callers track public degree bounds
# and padding explicitly, so preserving length matters.

def poly_from_roots(fld: Field, roots: Iterable[int]) -> list[int]:
    """Monic product of (X - r) over the roots; empty input gives [1]."""
    coeffs = [1]
    for r in roots:
        nxt = [0] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] ^= c
            nxt[i] ^= fld.mul(c, r)
        coeffs = nxt
    return coeffs


def poly_eval(fld: Field, coeffs: Sequence[int], x: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = fld.mul(acc, x) ^ c
    return acc


def poly_mul(fld: Field, a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                if cb:
                    out[i + j] ^= fld.mul(ca, cb)
    return out


def poly_mul_many(fld: Field, polys: Sequence[Sequence[int]]) -> list[int]:
    out = [1]
    for p in polys:
        out = poly_mul(fld, out, list(p))
    return out


def poly_scale(fld: Field, coeffs: Sequence[int], s: int) -> list[int]:
    return [fld.mul(c, s) for c in coeffs]


def poly_add(a: Sequence[int], b: Sequence[int]) -> list[int]:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] ^= c
    return out


def poly_deg(coeffs: Sequence[int]) -> int:
    """Degree, with deg(0) = -1."""
    for i in range(len(coeffs) - 1, -1, -1):
        if coeffs[i]:
            return i
    return -1


def poly_trim(coeffs: Sequence[int]) -> list[int]:
    d = poly_deg(coeffs)
    return list(coeffs[:d + 1]) if d >= 0 else [0]


def poly_divmod(fld: Field, num: Sequence[int], den: Sequence[int]) -> tuple[list[int], list[int]]:
    den = poly_trim(den)
    dd = poly_deg(den)
    if dd < 0:
        raise ZeroDivisionError("polynomial division by zero")
    rem = poly_trim(num)
    lead_inv = fld.inv(den[dd])
    quo = [0] * max(len(rem) - dd, 1)
    for i in range(poly_deg(rem) - dd, -1, -1):
        c = fld.mul(rem[i + dd], lead_inv)
        if c:
            quo[i] = c
            for j, dc in enumerate(den):
                rem[i + j] ^= fld.mul(c, dc)
    return poly_trim(quo), poly_trim(rem)


def poly_ext_gcd(fld: Field, a: Sequence[int], b: Sequence[int]) -> tuple[list[int], list[int], list[int]]:
    """(g, p, q) with p*a + q*b = g and g monic = gcd(a, b)."""
    r0, r1 = poly_trim(a), poly_trim(b)
    p0, p1 = [1], [0]
    q0, q1 = [0], [1]
    while poly_deg(r1) >= 0:
        quo, rem = poly_divmod(fld, r0, r1)
        r0, r1 = r1, rem
        p0, p1 = p1, poly_add(p0, poly_mul(fld, quo, p1))
        q0, q1 = q1, poly_add(q0, poly_mul(fld, quo, q1))
    lead = r0[poly_deg(r0)] if poly_deg(r0) >= 0 else 1
    li = fld.inv(lead) if lead else 1
    return poly_scale(fld, r0, li), poly_scale(fld, p0, li), poly_scale(fld, q0, li)


def poly_compose_one_plus_x(fld: Field, coeffs: Sequence[int]) -> list[int]:
    """Coefficients of p(1 + X); the complement-roots transform.

    Over characteristic 2 the binomial coefficients reduce by Lucas:
    C(i, j) mod 2 = 1 iff the bits of j are a subset of the bits of i.
    """
    n = len(coeffs)
    out = [0] * n
    for i, c in enumerate(coeffs):
        if c:
            for j in range(i + 1):
                if i & j == j:
                    out[j] ^= c
    return out
