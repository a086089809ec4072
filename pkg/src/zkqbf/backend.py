"""Commit-and-prove engine over two backends.

A committed value is a handle into per-role storage.  The cleartext
backend stores plain values on both sides and exists so tests can compare
verdicts against an information-free baseline.  The IT-MAC backend
authenticates each value v as mac = key XOR v*Delta, with Delta held by
the verifier; linear combinations are local, multiplications are proven
in one aggregated check at session end.

Correlated randomness comes from a simulated trusted dealer: both roles
derive the same tape from a seed agreed during the handshake, and each
role's view object exposes only its own share (the prover's view never
hands out Delta or keys).  This stands in for the paper-style offline
preprocessing phase and is honest-but-curious scaffolding, not a hardened
implementation; the MAC algebra downstream is the real thing.

Equality-with-zero assertions are deferred: callers tag each assertion
with a protocol stage label, and flush(label) spends one challenge and
one batched opening on everything pending under that label.  The first
label whose batch fails is reported as the reject stage, which is what
gives mutation tests their stage attribution.
"""

from __future__ import annotations

import hashlib
import random

from .gf import Field, field
from .wire import (
    Channel,
    T_ABORT,
    T_CHAL,
    T_MUL,
    T_MULCHECK,
    T_OPEN,
    T_VERDICT,
    T_WITNESS,
    TransportError,
    pack_elems,
    unpack_elems,
)

PROVER = "prover"
VERIFIER = "verifier"


class SessionAbort(Exception):
    """Session rejected; .stage names the first failing protocol stage."""

    def __init__(self, stage: str):
        super().__init__(stage)
        self.stage = stage


class DealerView:
    """One role's view of the common dealer tape.

    Both roles advance an identical deterministic tape so their shares
    stay correlated; the view's API only hands out the calling role's
    share.  The tape object internally knows everything (it simulates the
    dealer), so this is a discipline boundary, not a security one.
    """

    def __init__(self, seed: bytes, bits: int, role: str):
        digest = hashlib.sha256(seed + b"|dealer-tape").digest()
        self._rng = random.Random(int.from_bytes(digest, "little"))
        self._fld = field(bits)
        self._bits = bits
        self._role = role
        self._tape_delta = self._rng.getrandbits(bits)

    @property
    def delta(self) -> int:
        if self._role != VERIFIER:
            raise RuntimeError("prover view has no Delta")
        return self._tape_delta

    def auth_random(self):
        """Authenticated random value: prover gets (r, mac), verifier the key."""
        r = self._rng.getrandbits(self._bits)
        kr = self._rng.getrandbits(self._bits)
        if self._role == VERIFIER:
            return kr
        return r, kr ^ self._fld.mul(r, self._tape_delta)

    def mask_pair(self):
        """Aggregation mask: prover gets (a0, a1), verifier a0 XOR a1*Delta."""
        a0 = self._rng.getrandbits(self._bits)
        a1 = self._rng.getrandbits(self._bits)
        if self._role == VERIFIER:
            return a0 ^ self._fld.mul(a1, self._tape_delta)
        return a0, a1


class Engine:
    """Protocol engine shared by all checkers.

    One instance per session per role.  Both roles must call the same
    methods in the same order; the message script is a deterministic
    function of public parameters only.  Handles index self.values, which
    holds None on the verifier side under IT-MAC (it never learns witness
    values); macs and keys run parallel to it.
    """

    def __init__(self, role: str, channel: Channel, backend: str = "itmac",
                 bits: int = 64, dealer_seed: bytes = b"", challenge_seed=None):
        if role not in (PROVER, VERIFIER):
            raise ValueError("bad role %r" % role)
        if backend not in ("cleartext", "itmac"):
            raise ValueError("bad backend %r" % backend)
        self.role = role
        self.backend = backend
        self.bits = bits
        self.fld: Field = field(bits)
        self.channel = channel
        self.values: list = []
        self.macs: list[int] = []
        self.keys: list[int] = []
        self._pending: dict[str, list[int]] = {}
        self._triples: list[tuple[int, int, int]] = []
        self.n_witness = 0
        self.n_mults = 0
        self.n_popeq = 0
        self.extra: dict[str, int] = {}
        self._knows_values = role == PROVER or backend == "cleartext"
        if backend == "itmac":
            self.dealer = DealerView(dealer_seed, bits, role)
        else:
            self.dealer = None
        if role == VERIFIER:
            if challenge_seed is None:
                self._rng = random.SystemRandom()
            else:
                self._rng = random.Random(challenge_seed)

    # -- framing helpers ---------------------------------------------------

    def _expect(self, tag: int) -> bytes:
        try:
            got, payload = self.channel.recv()
        except TransportError as e:
            raise SessionAbort("transport") from e
        if got == T_ABORT:
            raise SessionAbort(payload.decode("utf-8", "replace") or "unknown")
        if got != tag:
            raise SessionAbort("transport")
        return payload

    def _expect_elems(self, tag: int, count: int) -> list[int]:
        payload = self._expect(tag)
        if len(payload) != count * (self.bits // 8):
            raise SessionAbort("transport")
        return unpack_elems(self.bits, payload)

    def _reject(self, stage: str):
        self.channel.send(T_ABORT, stage.encode())
        raise SessionAbort(stage)

    def _store(self, value, mac_or_key: int) -> int:
        h = len(self.values)
        self.values.append(value)
        if self.backend == "itmac":
            if self.role == PROVER:
                self.macs.append(mac_or_key)
            else:
                self.keys.append(mac_or_key)
        return h

    # -- commitments ---------------------------------------------------------

    def commit_public(self, value: int) -> int:
        if self.role == VERIFIER and self.backend == "itmac":
            return self._store(value, self.fld.mul(value, self.dealer.delta))
        return self._store(value, 0)

    def commit_witness(self, values=None, count: int | None = None) -> list[int]:
        """Prover passes the values; verifier passes the public count."""
        if self.role == PROVER:
            values = list(values)
            count = len(values)
        assert count is not None
        self.n_witness += count
        if self.backend == "cleartext":
            if self.role == PROVER:
                self.channel.send(T_WITNESS, pack_elems(self.bits, values))
            else:
                values = self._expect_elems(T_WITNESS, count)
            return [self._store(v, 0) for v in values]
        if self.role == PROVER:
            corrections = []
            out = []
            for v in values:
                r, mr = self.dealer.auth_random()
                corrections.append(v ^ r)
                out.append(self._store(v, mr))
            self.channel.send(T_WITNESS, pack_elems(self.bits, corrections))
            return out
        corrections = self._expect_elems(T_WITNESS, count)
        out = []
        for c in corrections:
            kr = self.dealer.auth_random()
            out.append(self._store(None, kr ^ self.fld.mul(c, self.dealer.delta)))
        return out

    # -- local linear algebra -------------------------------------------------

    def lincomb(self, terms, const: int = 0) -> int:
        """terms: iterable of (public coefficient, handle).  No interaction."""
        mul = self.fld.mul
        if self._knows_values:
            v = const
            for a, h in terms:
                v ^= mul(a, self.values[h])
        else:
            v = None
        if self.backend == "cleartext":
            return self._store(v, 0)
        if self.role == PROVER:
            m = 0
            for a, h in terms:
                m ^= mul(a, self.macs[h])
            return self._store(v, m)
        k = mul(const, self.dealer.delta)
        for a, h in terms:
            k ^= mul(a, self.keys[h])
        return self._store(None, k)

    def value_of(self, h: int) -> int:
        v = self.values[h]
        assert v is not None, "value not visible to this role"
        return v

    # -- multiplication -----------------------------------------------------

    def mul_pairs(self, pairs) -> list[int]:
        """Commit the products of committed pairs; one frame, proof deferred."""
        pairs = list(pairs)
        if not pairs:
            return []
        self.n_mults += len(pairs)
        if self.role == PROVER:
            products = [self.fld.mul(self.values[x], self.values[y])
                        for x, y in pairs]
        else:
            products = None
        handles = self._commit_products(products, len(pairs))
        self._triples.extend((x, y, z) for (x, y), z in zip(pairs, handles))
        return handles

    def mul_prefix(self, handles: list[int]) -> list[int]:
        """All running products of the handles; one frame for the batch."""
        if len(handles) <= 1:
            return list(handles)
        self.n_mults += len(handles) - 1
        if self.role == PROVER:
            prefix = []
            acc = self.values[handles[0]]
            for h in handles[1:]:
                acc = self.fld.mul(acc, self.values[h])
                prefix.append(acc)
        else:
            prefix = None
        out = self._commit_products(prefix, len(handles) - 1)
        left = handles[0]
        for nxt, z in zip(handles[1:], out):
            self._triples.append((left, nxt, z))
            left = z
        return [handles[0]] + out

    def mul_chain(self, handles: list[int]) -> int:
        """Product of all the handles, via prefix products in one frame."""
        if not handles:
            return self.commit_public(1)
        return self.mul_prefix(handles)[-1]

    def _commit_products(self, values, count: int) -> list[int]:
        if self.backend == "cleartext":
            if self.role == PROVER:
                self.channel.send(T_MUL, pack_elems(self.bits, values))
            else:
                values = self._expect_elems(T_MUL, count)
            return [self._store(v, 0) for v in values]
        if self.role == PROVER:
            corrections = []
            out = []
            for v in values:
                r, mr = self.dealer.auth_random()
                corrections.append(v ^ r)
                out.append(self._store(v, mr))
            self.channel.send(T_MUL, pack_elems(self.bits, corrections))
            return out
        corrections = self._expect_elems(T_MUL, count)
        out = []
        for c in corrections:
            kr = self.dealer.auth_random()
            out.append(self._store(None, kr ^ self.fld.mul(c, self.dealer.delta)))
        return out

    # -- challenges ------------------------------------------------------------

    def challenge(self, count: int = 1) -> list[int]:
        if self.role == VERIFIER:
            vals = [self._rng.getrandbits(self.bits) for _ in range(count)]
            self.channel.send(T_CHAL, pack_elems(self.bits, vals))
            return vals
        return self._expect_elems(T_CHAL, count)

    # -- deferred zero assertions ------------------------------------------------

    def assert_zero(self, label: str, handle: int) -> None:
        self._pending.setdefault(label, []).append(handle)

    def pending_count(self, label: str) -> int:
        return len(self._pending.get(label, ()))

    def flush(self, label: str) -> None:
        """Batch-check every deferred zero under this label."""
        pending = self._pending.pop(label, [])
        if not pending:
            return
        c = self.challenge(1)[0]
        weights = []
        w = 1
        for h in pending:
            weights.append((w, h))
            w = self.fld.mul(w, c)
        combo = self.lincomb(weights)
        if self.backend == "cleartext":
            if self.role == PROVER:
                self.channel.send(T_OPEN, b"")
            else:
                self._expect(T_OPEN)
                if any(self.values[h] != 0 for h in pending):
                    self._reject(label)
            return
        if self.role == PROVER:
            # opening a zero: the mac must equal the verifier's key
            self.channel.send(T_OPEN, pack_elems(self.bits, [self.macs[combo]]))
        else:
            mac = self._expect_elems(T_OPEN, 1)[0]
            if mac != self.keys[combo]:
                self._reject(label)

    # -- aggregated multiplication proof -------------------------------------------

    def finalize_mults(self) -> None:
        triples = self._triples
        self._triples = []
        if not triples:
            return
        if self.backend == "cleartext":
            if self.role == VERIFIER:
                for x, y, z in triples:
                    if self.fld.mul(self.values[x], self.values[y]) != self.values[z]:
                        self._reject("mult")
            return
        chi = self.challenge(1)[0]
        mul = self.fld.mul
        if self.role == PROVER:
            a0, a1 = self.dealer.mask_pair()
            acc0, acc1 = a0, a1
            w = 1
            for x, y, z in triples:
                mx, my, mz = self.macs[x], self.macs[y], self.macs[z]
                vx, vy = self.values[x], self.values[y]
                acc0 ^= mul(w, mul(mx, my))
                acc1 ^= mul(w, mul(vx, my) ^ mul(vy, mx) ^ mz)
                w = mul(w, chi)
            self.channel.send(T_MULCHECK, pack_elems(self.bits, [acc0, acc1]))
        else:
            acc = self.dealer.mask_pair()
            delta = self.dealer.delta
            w = 1
            for x, y, z in triples:
                bi = mul(self.keys[x], self.keys[y]) ^ mul(self.keys[z], delta)
                acc ^= mul(w, bi)
                w = mul(w, chi)
            a0, a1 = self._expect_elems(T_MULCHECK, 2)
            if acc != a0 ^ mul(a1, delta):
                self._reject("mult")

    # -- session end -----------------------------------------------------------

    def finish(self) -> str:
        """Final verdict exchange; every deferred check must already be flushed."""
        leftovers = [l for l, hs in self._pending.items() if hs]
        assert not leftovers, "unflushed assertion labels: %r" % leftovers
        if self.role == VERIFIER:
            self.channel.send(T_VERDICT, b"accept")
            return "accept"
        payload = self._expect(T_VERDICT)
        if payload != b"accept":
            raise SessionAbort("verdict")
        return "accept"
