"""Cube consensus sessions: initial-cube layer plus the dual step loop."""

import pytest

from support import run_session, verdict
from zkqbf import cube
from zkqbf.certs import CubeTrace, InitialCube, Step, parse_trace
from zkqbf.oracle import NEQ_GAME_TEXT, corpus, plain_check, search_cube_proof
from zkqbf.qbf import parse_qdimacs

NEQ_GAME = parse_qdimacs(NEQ_GAME_TEXT)
NEQ_GAME_CUBES = parse_trace("""\
p zkcube 2 3 2 1
c -1 2 0
w 2 -1 0
c 1 -2 0
w 1 -2 0
3 1 1 0 r 2 0
4 2 2 0 r -2 0
5 4 3 1 r 0
""", "cube")


def run_cubes(qbf, trace, backend="itmac", plan=None):
    def script(eng):
        t = trace if eng.role == "prover" else None
        return cube.check_cube_proof(eng, qbf, len(trace.cubes),
                                     len(trace.steps), trace.width,
                                     trace.degree, plan=plan, trace=t)

    results, cp, cv = run_session(script, backend)
    return verdict(results)


@pytest.mark.parametrize("backend", ["cleartext", "itmac"])
def test_fixture_cube_proof_accepted(backend):
    assert run_cubes(NEQ_GAME, NEQ_GAME_CUBES, backend) == ("accept",)


def test_witness_must_hit_the_clause():
    # second clause claims witness 2, which it does not contain
    bad = CubeTrace(2, 1, (InitialCube((-1, 2), (2, 2)),
                           NEQ_GAME_CUBES.cubes[1]), NEQ_GAME_CUBES.steps)
    assert run_cubes(NEQ_GAME, bad) == ("reject", "init-cube")


def test_contradictory_cube_rejected():
    bad = CubeTrace(2, 1, (InitialCube((-1, 1), (1, -1)),
                           NEQ_GAME_CUBES.cubes[1]), NEQ_GAME_CUBES.steps)
    assert run_cubes(NEQ_GAME, bad) == ("reject", "init-cube")


def test_universal_removal_needs_cube_mode_flags():
    bad = CubeTrace(2, 1, NEQ_GAME_CUBES.cubes,
                    (Step(3, 1, 1, 0, (-1,)),) + NEQ_GAME_CUBES.steps[1:])
    assert run_cubes(NEQ_GAME, bad) == ("reject", "quantifier")


def test_existential_pivot_rejected():
    bad = CubeTrace(2, 1, NEQ_GAME_CUBES.cubes,
                    NEQ_GAME_CUBES.steps[:2] + (Step(5, 4, 3, 2, ()),))
    assert run_cubes(NEQ_GAME, bad) == ("reject", "quantifier")


def test_cube_reduction_order_enforced():
    # dropping the existential while the deeper universal remains
    qbf = parse_qdimacs("p cnf 2 2\ne 1 0\na 2 0\n1 2 0\n1 -2 0\n")
    bad = parse_trace("p zkcube 1 1 2 2\nc 1 2 0\nw 1 1 0\n2 1 1 0 r 1 0\n",
                      "cube")
    ok, why = plain_check(qbf, bad)
    assert not ok and "order" in why
    assert run_cubes(qbf, bad) == ("reject", "step-red")


def test_corpus_cube_proofs_accepted_both_backends():
    n = 0
    for name, qbf in corpus(extra_random=8):
        trace = search_cube_proof(qbf)
        if trace is None:
            continue
        ok, why = plain_check(qbf, trace)
        assert ok, (name, why)
        for backend in ("cleartext", "itmac"):
            v = run_cubes(qbf, trace, backend)
            assert v == ("accept",), (name, backend)
        plan = cube.plan_for_cubes(qbf, trace, chunk=2)
        assert run_cubes(qbf, trace, plan=plan) == ("accept",), name
        n += 1
    assert n >= 2
