"""Committed proof checking: accept paths, stage-attributed rejects, plans."""

import pytest

from support import run_session, verdict
from zkqbf import qres
from zkqbf.certs import QResTrace, Step, parse_trace
from zkqbf.oracle import XOR_GAME_TEXT, corpus, plain_check, search_refutation
from zkqbf.qbf import parse_qdimacs
from zkqbf.wire import TamperChannel

XOR_GAME = parse_qdimacs(XOR_GAME_TEXT)
XOR_GAME_TRACE = parse_trace("p zkqres 3 2 1\n"
                             "5 1 2 2 r 0\n"
                             "6 3 4 2 r 0\n"
                             "7 5 5 0 r 1 0\n")
# same public shape, different derivation: works on the other branch
XOR_GAME_TRACE_ALT = parse_trace("p zkqres 3 2 1\n"
                                 "5 3 4 2 r 0\n"
                                 "6 1 2 2 r 0\n"
                                 "7 5 5 0 r -1 0\n")

UNIT_PAIR = parse_qdimacs("p cnf 1 2\n1 0\n-1 0\n")
UNIT_PAIR_TRACE = parse_trace("p zkqres 1 1 0\n3 1 2 1 r 0\n")
UNIT_PAIR_PROP = parse_trace("p zkprop 1 1 0\n3 1 2 1 r 0\n", "prop")


def run_proof(qbf, trace, backend="itmac", plan=None, wrap_prover=None,
              record_payloads=False, stats_out=None):
    def script(eng):
        t = trace if eng.role == "prover" else None
        stats = qres.check_proof(eng, qbf, trace.kind, len(trace.steps),
                                 trace.width, trace.degree, plan=plan, trace=t)
        if stats_out is not None:
            stats_out[eng.role] = stats
        return stats

    results, cp, cv = run_session(script, backend, wrap_prover=wrap_prover,
                                  record_payloads=record_payloads)
    return verdict(results), cp, cv


@pytest.mark.parametrize("backend", ["cleartext", "itmac"])
def test_fixture_refutation_accepted(backend):
    v, _, _ = run_proof(XOR_GAME, XOR_GAME_TRACE, backend)
    assert v == ("accept",)


@pytest.mark.parametrize("backend", ["cleartext", "itmac"])
def test_lean_degree_zero_path(backend):
    v, _, _ = run_proof(UNIT_PAIR, UNIT_PAIR_TRACE, backend)
    assert v == ("accept",)


def test_propositional_trace_accepted():
    v, _, _ = run_proof(UNIT_PAIR, UNIT_PAIR_PROP)
    assert v == ("accept",)


def test_propositional_trace_must_not_reduce():
    bad = QResTrace("prop", 1, 1, UNIT_PAIR_PROP.steps)
    v, _, _ = run_proof(UNIT_PAIR, bad)
    assert v == ("reject", "plan")


STEPS = XOR_GAME_TRACE.steps


@pytest.mark.parametrize("name,steps,stage", [
    # universal pivot
    ("pivot-univ", (Step(5, 1, 2, 1, ()),) + STEPS[1:], "quantifier"),
    # premise without the pivot literal breaks the containment identity
    ("wrong-premise", (Step(5, 1, 3, 2, ()),) + STEPS[1:], "step-red"),
    # removing a literal that never leaves breaks the Bezout pair
    ("phantom-removal", STEPS[:2] + (Step(7, 5, 5, 0, (-1,)),), "step-res"),
    # removing nothing leaves the final clause non-empty
    ("no-removal", STEPS[:2] + (Step(7, 5, 5, 0, ()),), "final-clause"),
])
def test_mutated_traces_rejected(name, steps, stage):
    bad = QResTrace("qres", XOR_GAME_TRACE.width, XOR_GAME_TRACE.degree, steps)
    v, _, _ = run_proof(XOR_GAME, bad)
    assert v == ("reject", stage), name


def test_reduction_order_enforced():
    # dropping the universal while the inner existential remains
    qbf = parse_qdimacs("p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 2 0\n")
    bad = QResTrace("qres", 2, 1, (Step(3, 1, 1, 0, (1,)),))
    v, _, _ = run_proof(qbf, bad)
    assert v == ("reject", "step-red")


def test_plan_validation_is_public():
    # premise routed to a bucket that has no earlier entries
    plan = qres.BucketPlan((1, 1), (0, 1), ((1, 1),))
    v, _, _ = run_proof(UNIT_PAIR, UNIT_PAIR_TRACE, plan=plan)
    assert v == ("reject", "plan")

    missing = qres.BucketPlan((1,), (0, 0), ())
    assert qres.validate_plan(missing, 2, 1, [1, 1])
    ok = qres.plan_for_trace(UNIT_PAIR, UNIT_PAIR_TRACE)
    assert qres.validate_plan(ok, 2, 1, [1, 1]) == ""


def test_bucketed_plan_same_verdict_fewer_cells():
    tr = search_refutation(XOR_GAME)
    single = qres.plan_for_trace(XOR_GAME, tr)
    chunked = qres.plan_for_trace(XOR_GAME, tr, chunk=2)
    stats = {}
    v1, _, _ = run_proof(XOR_GAME, tr, plan=single, stats_out=stats)
    s_single = stats["verifier"]
    v2, _, _ = run_proof(XOR_GAME, tr, plan=chunked, stats_out=stats)
    s_chunked = stats["verifier"]
    assert v1 == v2 == ("accept",)
    assert s_chunked["cells"] <= s_single["cells"]
    assert s_single["cells"] == single.cells
    assert s_chunked["cells"] == chunked.cells


def test_corpus_refutations_accepted_both_backends():
    n = 0
    for name, qbf in corpus(extra_random=6):
        trace = search_refutation(qbf)
        if trace is None:
            continue
        ok, why = plain_check(qbf, trace)
        assert ok, (name, why)
        for backend in ("cleartext", "itmac"):
            v, _, _ = run_proof(qbf, trace, backend)
            assert v == ("accept",), (name, backend)
        n += 1
    assert n >= 3


def test_transcript_shape_hides_the_derivation():
    logs = []
    for trace in (XOR_GAME_TRACE, XOR_GAME_TRACE_ALT):
        v, cp, cv = run_proof(XOR_GAME, trace, record_payloads=True)
        assert v == ("accept",)
        logs.append((cp.sent_shapes, cv.sent_shapes))
    assert logs[0] == logs[1]


def test_channel_tampering_rejected():
    wrap = lambda ch: TamperChannel(ch, frame_index=6, byte_offset=1)
    v, _, _ = run_proof(XOR_GAME, XOR_GAME_TRACE, wrap_prover=wrap)
    assert v[0] == "reject"


def test_step_count_must_be_positive():
    empty = QResTrace("qres", 1, 0, ())
    v, _, _ = run_proof(UNIT_PAIR, empty)
    assert v == ("reject", "plan")
