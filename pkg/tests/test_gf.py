"""Field and polynomial layer, cross-checked against a naive reference."""

import random

import pytest

from zkqbf.gf import (
    REDUCTION_MASKS,
    Field,
    field,
    poly_add,
    poly_compose_one_plus_x,
    poly_deg,
    poly_divmod,
    poly_eval,
    poly_ext_gcd,
    poly_from_roots,
    poly_mul,
    poly_mul_many,
    poly_trim,
)


# -- independent reference implementation ----------------------------------

def ref_clmul(a, b):
    acc = 0
    i = 0
    while b >> i:
        if b >> i & 1:
            acc ^= a << i
        i += 1
    return acc


def ref_mod(v, f):
    fl = f.bit_length()
    while v.bit_length() >= fl:
        v ^= f << (v.bit_length() - fl)
    return v


def ref_mul(a, b, bits):
    f = (1 << bits) | REDUCTION_MASKS[bits]
    return ref_mod(ref_clmul(a, b), f)


def ref_powmod(base, e, f):
    r = 1
    while e:
        if e & 1:
            r = ref_mod(ref_clmul(r, base), f)
        base = ref_mod(ref_clmul(base, base), f)
        e >>= 1
    return r


def ref_gcd(a, b):
    while b:
        a, b = b, ref_mod(a, b)
    return a


def test_masks_are_irreducible():
    # x^(2^k) == x mod f, and x^(2^(k/p)) - x coprime to f for prime p | k,
    # is exactly irreducibility of f with deg f = k.
    for bits, mask in REDUCTION_MASKS.items():
        f = (1 << bits) | mask
        assert ref_powmod(2, 1 << bits, f) == 2, bits
        rem = bits
        primes = []
        d = 2
        while d * d <= rem:
            if rem % d == 0:
                primes.append(d)
                while rem % d == 0:
                    rem //= d
            d += 1
        if rem > 1:
            primes.append(rem)
        for p in primes:
            y = ref_powmod(2, 1 << (bits // p), f) ^ 2
            assert ref_gcd(f, y) == 1, (bits, p)


# -- frozen single values ---------------------------------------------------

def test_add_is_xor():
    assert Field.add(7, 6) == 1
    assert Field.add(0x1234, 0x1234) == 0


def test_mul_small():
    for bits in (8, 16, 64):
        assert field(bits).mul(3, 4) == 12


def test_inv_one():
    for bits in (8, 16, 32, 64):
        assert field(bits).inv(1) == 1


def test_inv_zero_raises():
    with pytest.raises(ZeroDivisionError):
        field(8).inv(0)


def test_unsupported_size_raises():
    with pytest.raises(ValueError):
        Field(12)


def test_from_roots_frozen():
    fld = field(8)
    assert poly_from_roots(fld, [3, 4]) == [12, 7, 1]
    assert poly_from_roots(fld, []) == [1]
    assert poly_eval(fld, [12, 7, 1], 3) == 0
    assert poly_eval(fld, [12, 7, 1], 4) == 0


# -- randomized cross-checks -------------------------------------------------

def test_mul_matches_reference():
    rng = random.Random(0xF1E1D)
    for bits in sorted(REDUCTION_MASKS):
        fld = field(bits)
        for _ in range(400):
            a = rng.getrandbits(bits)
            b = rng.getrandbits(bits)
            assert fld.mul(a, b) == ref_mul(a, b, bits)


def test_field_laws():
    rng = random.Random(0xAB1E)
    for bits in (16, 64):
        fld = field(bits)
        for _ in range(10_000):
            a, b, c = (rng.getrandbits(bits) for _ in range(3))
            assert fld.mul(a, b ^ c) == fld.mul(a, b) ^ fld.mul(a, c)
            assert fld.mul(a, b) == fld.mul(b, a)
        for _ in range(10_000):
            a = rng.getrandbits(bits) or 1
            assert fld.mul(a, fld.inv(a)) == 1


def test_pow_and_inv_agree():
    rng = random.Random(77)
    for bits in (8, 32):
        fld = field(bits)
        for _ in range(200):
            a = rng.getrandbits(bits) or 1
            assert fld.pow(a, fld.size - 2) == fld.inv(a)
        assert fld.pow(0, 0) == 1


def test_from_roots_vanishing():
    rng = random.Random(0x9001)
    for bits in (16, 64):
        fld = field(bits)
        for _ in range(50):
            roots = [rng.getrandbits(bits) for _ in range(rng.randrange(1, 9))]
            gamma = poly_from_roots(fld, roots)
            assert len(gamma) == len(roots) + 1
            assert gamma[-1] == 1
            for r in roots:
                assert poly_eval(fld, gamma, r) == 0
            for _ in range(32):
                x = rng.getrandbits(bits)
                assert (poly_eval(fld, gamma, x) == 0) == (x in roots)


def test_mul_many_is_root_concat():
    rng = random.Random(0x414)
    fld = field(16)
    for _ in range(50):
        groups = [[rng.getrandbits(16) for _ in range(rng.randrange(4))]
                  for _ in range(rng.randrange(1, 5))]
        lhs = poly_mul_many(fld, [poly_from_roots(fld, g) for g in groups])
        rhs = poly_from_roots(fld, [r for g in groups for r in g])
        assert lhs == rhs
    assert poly_mul_many(fld, []) == [1]


def test_divmod_roundtrip():
    rng = random.Random(31337)
    fld = field(16)
    for _ in range(200):
        num = [rng.getrandbits(16) for _ in range(rng.randrange(1, 10))]
        den = [rng.getrandbits(16) for _ in range(rng.randrange(1, 6))]
        if poly_deg(den) < 0:
            den[-1] = 1
        quo, rem = poly_divmod(fld, num, den)
        back = poly_add(poly_mul(fld, quo, den), rem)
        assert poly_trim(back) == poly_trim(num)
        assert poly_deg(rem) < poly_deg(den)


def test_ext_gcd_bezout():
    rng = random.Random(0xBE2)
    fld = field(16)
    for _ in range(100):
        a = poly_from_roots(fld, [rng.getrandbits(16) for _ in range(rng.randrange(1, 5))])
        b = poly_from_roots(fld, [rng.getrandbits(16) for _ in range(rng.randrange(1, 5))])
        g, p, q = poly_ext_gcd(fld, a, b)
        lhs = poly_add(poly_mul(fld, p, a), poly_mul(fld, q, b))
        assert poly_trim(lhs) == poly_trim(g)
        assert g[poly_deg(g)] == 1
        _, ra = poly_divmod(fld, a, g)
        _, rb = poly_divmod(fld, b, g)
        assert poly_trim(ra) == [0] and poly_trim(rb) == [0]


def test_compose_one_plus_x():
    rng = random.Random(0xC0)
    fld = field(16)
    for _ in range(100):
        p = [rng.getrandbits(16) for _ in range(rng.randrange(1, 8))]
        pc = poly_compose_one_plus_x(fld, p)
        assert len(pc) == len(p)
        for _ in range(8):
            x = rng.getrandbits(16)
            assert poly_eval(fld, pc, x) == poly_eval(fld, p, 1 ^ x)
        assert poly_compose_one_plus_x(fld, pc) == p


def test_trim_and_deg():
    assert poly_deg([0, 0]) == -1
    assert poly_deg([5]) == 0
    assert poly_trim([1, 2, 0, 0]) == [1, 2]
    assert poly_trim([0]) == [0]
