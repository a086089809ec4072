"""Commit-and-prove engine: both backends, dealer tape, stage attribution."""

import pytest

from support import run_session
from zkqbf.backend import PROVER, VERIFIER, DealerView
from zkqbf.gf import field
from zkqbf.wire import TamperChannel

BITS = 64
F = field(BITS)


def happy_script(eng):
    xs = eng.commit_witness([3, 5, 7] if eng.role == PROVER else None, count=3)
    one = eng.commit_public(1)

    chain = eng.mul_chain([xs[0], xs[1], xs[2], one])
    expected = F.mul(F.mul(3, 5), 7)
    eng.assert_zero("chain", eng.lincomb([(1, chain)], const=expected))
    if eng.role == PROVER:
        assert eng.value_of(chain) == expected

    (p,) = eng.mul_pairs([(xs[0], xs[1])])
    eng.assert_zero("pairs", eng.lincomb([(1, p)], const=F.mul(3, 5)))

    c = eng.challenge(2)
    combo = eng.lincomb([(c[0], xs[0]), (c[1], xs[1])],
                        const=F.mul(c[0], 3) ^ F.mul(c[1], 5))
    eng.assert_zero("chal", combo)

    for label in ("chain", "pairs", "chal", "never-used"):
        eng.flush(label)
    eng.finalize_mults()
    assert eng.n_witness == 3 and eng.n_mults == 4
    return eng.finish()


@pytest.mark.parametrize("backend", ["cleartext", "itmac"])
def test_happy_path_accepts(backend):
    results, _, _ = run_session(happy_script, backend)
    assert results[PROVER] == ("ok", "accept")
    assert results[VERIFIER] == ("ok", "accept")


@pytest.mark.parametrize("backend", ["cleartext", "itmac"])
def test_false_assertion_rejects_with_stage(backend):
    def script(eng):
        (x,) = eng.commit_witness([3] if eng.role == PROVER else None, count=1)
        # claim x == 4, which is false for the committed 3
        eng.assert_zero("bad-claim", eng.lincomb([(1, x)], const=4))
        eng.flush("bad-claim")
        eng.finalize_mults()
        return eng.finish()

    results, _, _ = run_session(script, backend)
    assert results[PROVER] == ("abort", "bad-claim")
    assert results[VERIFIER] == ("abort", "bad-claim")


@pytest.mark.parametrize("backend", ["cleartext", "itmac"])
def test_first_failing_label_wins(backend):
    def script(eng):
        (x,) = eng.commit_witness([3] if eng.role == PROVER else None, count=1)
        eng.assert_zero("stage-a", eng.lincomb([(1, x)], const=3))
        eng.assert_zero("stage-b", eng.lincomb([(1, x)], const=5))
        eng.assert_zero("stage-c", eng.lincomb([(1, x)], const=6))
        for label in ("stage-a", "stage-b", "stage-c"):
            eng.flush(label)
        eng.finalize_mults()
        return eng.finish()

    results, _, _ = run_session(script, backend)
    assert results[VERIFIER] == ("abort", "stage-b")
    assert results[PROVER] == ("abort", "stage-b")


@pytest.mark.parametrize("backend", ["cleartext", "itmac"])
def test_faked_product_rejected_at_mult(backend):
    def script(eng):
        xs = eng.commit_witness([3, 5] if eng.role == PROVER else None, count=2)
        wrong = F.mul(3, 5) ^ 1
        (z,) = eng.commit_witness([wrong] if eng.role == PROVER else None, count=1)
        eng._triples.append((xs[0], xs[1], z))
        eng.finalize_mults()
        return eng.finish()

    results, _, _ = run_session(script, backend)
    assert results[VERIFIER] == ("abort", "mult")
    assert results[PROVER] == ("abort", "mult")


def test_tampered_witness_frame_rejected():
    def script(eng):
        (x,) = eng.commit_witness([9] if eng.role == PROVER else None, count=1)
        eng.assert_zero("integrity", eng.lincomb([(1, x)], const=9))
        eng.flush("integrity")
        eng.finalize_mults()
        return eng.finish()

    results, _, _ = run_session(
        script, "itmac",
        wrap_prover=lambda ch: TamperChannel(ch, frame_index=0, byte_offset=0))
    assert results[VERIFIER] == ("abort", "integrity")
    assert results[PROVER][0] == "abort"


def test_transcript_deterministic_for_fixed_seeds():
    shapes = []
    payloads = []
    for _ in range(2):
        results, cp, cv = run_session(happy_script, "itmac",
                                      record_payloads=True)
        assert results[VERIFIER] == ("ok", "accept")
        shapes.append((cp.sent_shapes, cv.sent_shapes))
        payloads.append((cp.sent_payloads, cv.sent_payloads))
    assert shapes[0] == shapes[1]
    assert payloads[0] == payloads[1]


def test_witness_values_absent_from_itmac_transcript():
    # one recognizable 8-byte value; its little-endian encoding must not
    # appear in any prover frame because every commitment is masked
    marker = 0xDEADBEEFCAFEF00D

    def script(eng):
        (x,) = eng.commit_witness([marker] if eng.role == PROVER else None,
                                  count=1)
        eng.assert_zero("m", eng.lincomb([(1, x)], const=marker))
        eng.flush("m")
        eng.finalize_mults()
        return eng.finish()

    results, cp, _ = run_session(script, "itmac", record_payloads=True)
    assert results[VERIFIER] == ("ok", "accept")
    blob = b"".join(cp.sent_payloads)
    assert marker.to_bytes(8, "little") not in blob


def test_verifier_values_hidden_under_itmac():
    def script(eng):
        (x,) = eng.commit_witness([5] if eng.role == PROVER else None, count=1)
        if eng.role == VERIFIER:
            assert eng.values[x] is None
        eng.assert_zero("v", eng.lincomb([(1, x)], const=5))
        eng.flush("v")
        eng.finalize_mults()
        return eng.finish()

    results, _, _ = run_session(script, "itmac")
    assert results[VERIFIER] == ("ok", "accept")


def test_dealer_views_are_correlated():
    pv = DealerView(b"s1", BITS, PROVER)
    vv = DealerView(b"s1", BITS, VERIFIER)
    delta = vv.delta
    with pytest.raises(RuntimeError):
        pv.delta
    for _ in range(100):
        r, mac = pv.auth_random()
        key = vv.auth_random()
        assert mac == key ^ F.mul(r, delta)
    a0, a1 = pv.mask_pair()
    b = vv.mask_pair()
    assert b == a0 ^ F.mul(a1, delta)


def test_dealer_seed_changes_tape():
    v1 = DealerView(b"s1", BITS, VERIFIER)
    v2 = DealerView(b"s2", BITS, VERIFIER)
    assert v1.delta != v2.delta


def test_mul_chain_small_cases():
    def script(eng):
        empty = eng.mul_chain([])
        xs = eng.commit_witness([7] if eng.role == PROVER else None, count=1)
        single = eng.mul_chain(xs)
        assert single == xs[0]
        assert eng.mul_pairs([]) == []
        eng.assert_zero("one", eng.lincomb([(1, empty)], const=1))
        eng.flush("one")
        eng.finalize_mults()
        return eng.finish()

    for backend in ("cleartext", "itmac"):
        results, _, _ = run_session(script, backend)
        assert results[VERIFIER] == ("ok", "accept"), results
