"""Shared proof gadgets: polynomial identities, bit logic, hidden-read tables.

Everything here runs symmetrically on both roles of an Engine session and
only ever defers assertions (Engine.assert_zero); rejection happens when
the owning stage label is flushed.  The prover-side code is total: fed an
invalid witness it commits whatever it computed and lets the verifier
reject, so mutation tests always reach a verdict instead of crashing.

Clause polynomials are monic with the leading coefficient left implicit:
a clause of bucket width w is committed as the w low coefficients of
prod(X + code_i) padded with zero roots to degree exactly w.  Padding
keeps step shapes independent of true clause sizes, which is what hides
them.
"""

from __future__ import annotations

from .backend import Engine, PROVER
from .gf import poly_from_roots


# -- product/sum identities at a random point ---------------------------------
#
# popeq asserts  sum_t scalar_t * prod(factors_t)  ==  const  evaluated at
# one challenge point.  Factor forms:
#   ("monic", handles)   committed low coefficients, implicit leading 1
#   ("poly", handles)    committed coefficients, no implicit lead
#   ("roots", handles)   product of (X + value) over committed roots
#   ("aff", handle, c)   the single factor X + value + c
#   ("xpow", t)          public X^t, folded into the term's scalar
#   ("const", c)         public scalar, folded into the term's scalar
#   ("eval", handle)     an already-evaluated committed scalar
# Equalities are written one-sided (char 2: move everything left).

def popeq(eng: Engine, label: str, point: int, terms, const: int = 0) -> None:
    mul = eng.fld.mul
    lin = []
    pub = const
    for scalar, factors in terms:
        evals = []
        for f in factors:
            kind = f[0]
            if kind == "xpow":
                evals_scalar = eng.fld.pow(point, f[1])
                scalar = mul(scalar, evals_scalar)
            elif kind == "const":
                scalar = mul(scalar, f[1])
            elif kind == "monic" or kind == "poly":
                coeffs = f[1]
                w = 1
                lterms = []
                for h in coeffs:
                    lterms.append((w, h))
                    w = mul(w, point)
                lead = w if kind == "monic" else 0
                evals.append(eng.lincomb(lterms, const=lead))
            elif kind == "roots":
                for h in f[1]:
                    evals.append(eng.lincomb([(1, h)], const=point))
            elif kind == "aff":
                evals.append(eng.lincomb([(1, f[1])], const=point ^ f[2]))
            elif kind == "eval":
                evals.append(f[1])
            else:
                raise ValueError("unknown factor kind %r" % kind)
        if evals:
            lin.append((scalar, eng.mul_chain(evals)))
        else:
            pub ^= scalar
    eng.assert_zero(label, eng.lincomb(lin, const=pub))
    eng.n_popeq += 1


# -- bit-level gadgets -------------------------------------------------------

def assert_boolean(eng: Engine, h: int, label: str) -> None:
    (sq,) = eng.mul_pairs([(h, h)])
    eng.assert_zero(label, eng.lincomb([(1, sq), (1, h)]))


def bit_decompose(eng: Engine, h: int, nbits: int, label: str) -> list[int]:
    """Committed little-endian bits of h; enforces range [0, 2^nbits)."""
    if eng.role == PROVER:
        v = eng.value_of(h)
        vals = [(v >> i) & 1 for i in range(nbits)]
    else:
        vals = None
    bits = eng.commit_witness(vals, count=nbits)
    sqs = eng.mul_pairs([(b, b) for b in bits])
    for b, s in zip(bits, sqs):
        eng.assert_zero(label, eng.lincomb([(1, b), (1, s)]))
    # bits recompose to h: XOR of disjoint powers of X equals the integer
    terms = [(1 << i, b) for i, b in enumerate(bits)]
    eng.assert_zero(label, eng.lincomb(terms + [(1, h)]))
    return bits


def compare_bits(eng: Engine, a_bits, b_bits, b_public: bool = False):
    """(gt, eq) flags for a vs b, scanned from the most significant bit.

    a_bits are committed bit handles; b_bits are ints when b_public else
    handles.  Both flags are 0/1-valued if the inputs are boolean.
    """
    gt = eng.commit_public(0)
    eq = eng.commit_public(1)
    ab = None
    if not b_public:
        ab = eng.mul_pairs(list(zip(a_bits, b_bits)))
    for i in reversed(range(len(a_bits))):
        a = a_bits[i]
        if b_public:
            if b_bits[i]:
                eqb = a
                win = None  # a AND NOT b is identically 0 here
            else:
                eqb = eng.lincomb([(1, a)], const=1)
                win = a
        else:
            eqb = eng.lincomb([(1, a), (1, b_bits[i])], const=1)
            win = eng.lincomb([(1, a), (1, ab[i])])  # a(1+b) = a + ab
        if win is None:
            (eq,) = eng.mul_pairs([(eq, eqb)])
        else:
            t, eq = eng.mul_pairs([(eq, win), (eq, eqb)])
            gt = eng.lincomb([(1, gt), (1, t)])
    return gt, eq


def assert_less_public(eng: Engine, h: int, bound: int, nbits: int,
                       label: str) -> None:
    """h < bound for a public bound; h is range-checked to nbits first."""
    bits = bit_decompose(eng, h, nbits, label)
    bbits = [(bound >> i) & 1 for i in range(nbits)]
    gt, eq = compare_bits(eng, bits, bbits, b_public=True)
    # strictly below means neither greater nor equal
    eng.assert_zero(label, eng.lincomb([(1, gt), (1, eq)]))


def is_zero_flag(eng: Engine, h: int, label: str) -> int:
    """Committed flag z with z=1 iff value(h)=0, enforced by two relations."""
    if eng.role == PROVER:
        v = eng.value_of(h)
        z = 1 if v == 0 else 0
        iv = 0 if v == 0 else eng.fld.inv(v)
        vals = [z, iv]
    else:
        vals = None
    zh, ivh = eng.commit_witness(vals, count=2)
    p1, p2 = eng.mul_pairs([(zh, h), (ivh, h)])
    eng.assert_zero(label, p1)
    eng.assert_zero(label, eng.lincomb([(1, p2), (1, zh)], const=1))
    return zh


def set_membership(eng: Engine, h: int, values, label: str) -> None:
    """value(h) is one of the public values: prod(h + s) vanishes."""
    evals = [eng.lincomb([(1, h)], const=s) for s in values]
    eng.assert_zero(label, eng.mul_chain(evals))


# -- committed powers and evaluations at committed points -----------------------

def powers_of(eng: Engine, h: int, n: int) -> list[int]:
    """[h^1, ..., h^n] as committed handles."""
    return eng.mul_prefix([h] * n)


def eval_public_poly(eng: Engine, coeffs: list[int], pows: list[int]) -> int:
    """Public polynomial at the committed point whose powers are given."""
    terms = [(c, pows[i - 1]) for i, c in enumerate(coeffs) if i and c]
    const = coeffs[0] if coeffs else 0
    return eng.lincomb(terms, const=const)


def eval_committed_poly(eng: Engine, coeff_handles: list[int],
                        pows: list[int], monic: bool = True) -> int:
    """Committed polynomial at a committed point; one mult per coefficient."""
    w = len(coeff_handles)
    if w == 0:
        return eng.commit_public(1 if monic else 0)
    pairs = [(coeff_handles[i], pows[i - 1]) for i in range(1, w)]
    prods = eng.mul_pairs(pairs)
    terms = [(1, p) for p in prods] + [(1, coeff_handles[0])]
    if monic:
        terms.append((1, pows[w - 1]))
    return eng.lincomb(terms)


# -- clause polynomial commitments ------------------------------------------------

def commit_clause_poly(eng: Engine, codes, width: int,
                       counter: str = "cells") -> list[int]:
    """Commit the w low coefficients of the padded monic clause polynomial.

    The prover truncates oversized root lists instead of failing; the
    resulting polynomial then cannot satisfy the step relations.
    """
    if eng.role == PROVER:
        roots = list(codes)[:width]
        roots += [0] * (width - len(roots))
        vals = poly_from_roots(eng.fld, roots)[:width]
    else:
        vals = None
    handles = eng.commit_witness(vals, count=width)
    eng.extra[counter] = eng.extra.get(counter, 0) + width
    return handles


def public_clause_poly(eng: Engine, codes, width: int) -> list[int]:
    """Same layout for a public clause; free, no witness traffic."""
    roots = list(codes) + [0] * (width - len(codes))
    if len(roots) > width:
        raise ValueError("clause wider than its bucket")
    coeffs = poly_from_roots(eng.fld, roots)[:width]
    return [eng.commit_public(c) for c in coeffs]


def compose_one_plus_x_handles(eng: Engine, coeff_handles: list[int]) -> list[int]:
    """Coefficients of P(X+1) for monic committed P; linear, stays monic."""
    w = len(coeff_handles)
    out = []
    for j in range(w):
        terms = [(1, coeff_handles[i]) for i in range(j, w) if (i & j) == j]
        const = 1 if (w & j) == j else 0
        out.append(eng.lincomb(terms, const=const))
    return out


# -- append-only table with hidden reads ---------------------------------------------

class ZkArray:
    """Committed table; reads hide which entry they touch.

    Entries are payload vectors of fixed length appended at public
    indices.  A read commits a fresh copy of (index, payload); finalize
    proves every read copy matches some entry with a logUp-style rational
    identity.  Per-read challenge weights make repeated reads of one
    entry visible to the count check, which plain multiplicities would
    not be in characteristic 2.

    Challenge order matters: packing and weight challenges come after all
    entries and reads are committed, the prover then commits per-entry
    weight sums, and only then is the evaluation point drawn.

    Reads can carry a public exclusive bound on the hidden index (the
    step-ordering rule for proof buckets); index_bits sizes that compare.
    """

    def __init__(self, eng: Engine, stage: str, width: int,
                 index_bits: int = 0):
        self.eng = eng
        self.stage = stage
        self.width = width
        self.index_bits = index_bits
        self.entries: list[list[int]] = []
        self._reads: list[tuple[int, list[int], int | None]] = []

    def __len__(self) -> int:
        return len(self.entries)

    def append(self, payload_handles) -> int:
        payload = list(payload_handles)
        assert len(payload) == self.width
        self.entries.append(payload)
        return len(self.entries) - 1

    def read(self, index: int | None = None,
             bound: int | None = None) -> tuple[int, list[int]]:
        """Hidden read; index is prover-side only, bound is public or None."""
        eng = self.eng
        if eng.role == PROVER:
            assert index is not None and 0 <= index < len(self.entries)
            vals = [index] + [eng.value_of(h) for h in self.entries[index]]
        else:
            vals = None
        handles = eng.commit_witness(vals, count=1 + self.width)
        off, payload = handles[0], handles[1:]
        self._reads.append((off, payload, index))
        if bound is not None:
            assert self.index_bits > 0
            assert_less_public(eng, off, bound, self.index_bits, self.stage)
        return off, payload

    def finalize(self) -> None:
        eng = self.eng
        n = len(self.entries)
        reads = self._reads
        if n == 0 and not reads:
            return
        assert n > 0, "reads against an empty table"
        mul = eng.fld.mul
        chi, beta, theta = eng.challenge(3)

        # per-entry weight sums, committed before the evaluation point
        if eng.role == PROVER:
            msums = [0] * n
            tp = theta
            for _, _, idx in reads:
                msums[idx] ^= tp
                tp = mul(tp, theta)
            mvals = msums
        else:
            mvals = None
        mh = eng.commit_witness(mvals, count=n)

        (point,) = eng.challenge(1)

        def pack(payload, off_handle=None, off_const=0):
            terms = []
            bp = beta
            for h in payload:
                terms.append((bp, h))
                bp = mul(bp, beta)
            if off_handle is not None:
                terms.append((chi, off_handle))
            return eng.lincomb(terms, const=point ^ off_const)

        # shifted fingerprints point + fp; entry indices are public scalars
        yfp_e = [pack(p, off_const=mul(chi, i))
                 for i, p in enumerate(self.entries)]
        yfp_r = [pack(payload, off_handle=off) for off, payload, _ in reads]

        if eng.role == PROVER:
            def safe_inv(h):
                v = eng.value_of(h)
                return eng.fld.inv(v) if v else 0
            ivals = [safe_inv(h) for h in yfp_r + yfp_e]
        else:
            ivals = None
        invs = eng.commit_witness(ivals, count=len(reads) + n)
        inv_r, inv_e = invs[:len(reads)], invs[len(reads):]

        pairs = [(f, iv) for f, iv in zip(yfp_r + yfp_e, invs)]
        pairs += list(zip(mh, inv_e))
        prods = eng.mul_pairs(pairs)
        unit, weighted = prods[:len(invs)], prods[len(invs):]
        for p in unit:
            eng.assert_zero(self.stage, eng.lincomb([(1, p)], const=1))

        terms = []
        tp = theta
        for iv in inv_r:
            terms.append((tp, iv))
            tp = mul(tp, theta)
        terms += [(1, p) for p in weighted]
        eng.assert_zero(self.stage, eng.lincomb(terms))
        self._reads = []
