"""Strategy sessions: accepts, well-formedness stages, lenient encoding."""

import pytest

from support import run_session, verdict
from zkqbf import strategy as strat
from zkqbf.certs import Gate, QResTrace, Step, Strategy, parse_strategy
from zkqbf.oracle import (
    NEQ_GAME_TEXT,
    XOR_GAME_TEXT,
    check_strategy,
    corpus,
    derive_substitution_refutation,
    eval_qbf,
    synthesize_strategy,
)
from zkqbf.qbf import parse_qdimacs

XOR_GAME = parse_qdimacs(XOR_GAME_TEXT)
NEQ_GAME = parse_qdimacs(NEQ_GAME_TEXT)
GRID_STRATEGY = parse_strategy("p zkstrat herbrand 2 0\n"
                               "g 1 -T -T\n"
                               "g 3 2 2\n")
# same universal moves routed through a canonical auxiliary definition
AUX_STRATEGY = parse_strategy("p zkstrat herbrand 3 1\n"
                              "g 4 2 2\n"
                              "g 3 4 4\n"
                              "g 1 -T -T\n")
GRID_TRACE = derive_substitution_refutation(XOR_GAME, GRID_STRATEGY)[2]


def run_strategy(qbf, kind, strategy, backend="itmac", chunk=0, trace=None,
                 plan=None, num_steps=None, width=None):
    """Session with public params derived from the honest prover's trace."""
    if trace is None:
        _, _, trace = derive_substitution_refutation(qbf, strategy)
    if plan is None:
        plan = strat.plan_for_strategy(qbf, strategy, trace, chunk=chunk)
    pub = dict(kind=kind, num_gates=len(strategy.gates) if strategy else 0,
               num_aux=strategy.aux_count if strategy else 0,
               num_steps=len(trace.steps) if num_steps is None else num_steps,
               width=trace.width if width is None else width, plan=plan)

    def script(eng):
        if eng.role == "prover":
            return strat.verify_strategy(eng, qbf, strategy=strategy,
                                         trace=trace, **pub)
        return strat.verify_strategy(eng, qbf, **pub)

    results, _, _ = run_session(script, backend)
    return verdict(results)


@pytest.mark.parametrize("backend", ["cleartext", "itmac"])
def test_fixture_herbrand_accepted(backend):
    assert run_strategy(XOR_GAME, "herbrand", GRID_STRATEGY, backend) == ("accept",)


@pytest.mark.parametrize("backend", ["cleartext", "itmac"])
def test_skolem_accepted(backend):
    sk = synthesize_strategy(NEQ_GAME, "skolem")
    assert run_strategy(NEQ_GAME, "skolem", sk, backend) == ("accept",)


def test_auxiliary_definitions_accepted():
    ok, why = check_strategy(XOR_GAME, AUX_STRATEGY)
    assert ok, why
    assert run_strategy(XOR_GAME, "herbrand", AUX_STRATEGY) == ("accept",)


G = GRID_STRATEGY.gates


@pytest.mark.parametrize("name,gates,stage", [
    # two gates may not define the same variable
    ("dup-out", (G[0], Gate(G[0].out, G[1].a, G[1].b)), "wf-uniqueness"),
    # outputs must be the strategy player's own variables
    ("opp-out", (G[0], Gate(2, G[1].a, G[1].b)), "wf-uniqueness"),
    ("self-ref", (Gate(1, (1, True), (1, True)), G[1]), "wf-acyclicity"),
    ("fwd-ref", (Gate(1, (3, True), (3, True)), G[1]), "wf-acyclicity"),
    # the move for 1 may not read a variable quantified after it
    ("late-dep", (Gate(1, (2, True), (2, True)), G[1]), "wf-prefix"),
])
def test_malformed_circuits_rejected(name, gates, stage):
    # the prover claims the honest public shape but holds a bad circuit
    bad = Strategy("herbrand", gates, 0)
    v = run_strategy(XOR_GAME, "herbrand", bad, trace=GRID_TRACE)
    assert v == ("reject", stage)


def test_proof_bound_to_committed_circuit():
    # a winning circuit paired with a refutation of a different layout
    other = Strategy("herbrand", (Gate(1, (0, True), (0, True)), G[1]), 0)
    ok, _ = check_strategy(XOR_GAME, other)
    assert ok
    v = run_strategy(XOR_GAME, "herbrand", other, trace=GRID_TRACE)
    assert v[0] == "reject" and v[1] in ("step-red", "step-res", "final-clause")


def test_losing_side_rejected():
    # neq-game is true, so no Herbrand circuit wins; the prover can only
    # fabricate a derivation, here a copy of matrix slot 4 that is a valid
    # step but never reaches the empty clause
    hopeless = Strategy("herbrand", (Gate(1, (0, True), (0, True)),), 0)
    fake = QResTrace("prop", 2, 0, (Step(6, 4, 4, 0, ()),))
    v = run_strategy(NEQ_GAME, "herbrand", hopeless, trace=fake)
    assert v == ("reject", "final-clause")


def test_unknown_input_collapses_to_sentinel():
    """Inputs naming no variable commit as the true sentinel.

    The session then judges the collapsed circuit on its own merits; here
    the collapse of g2 to (3 := T and T) still wins, so the run with a
    refutation of the collapsed layout accepts, and the cleartext oracle
    agrees that the collapsed form is a winner.
    """
    ghost = Strategy("herbrand", (G[0], Gate(3, (9, True), (9, True))), 0)
    collapsed = Strategy("herbrand", (G[0], Gate(3, (0, True), (0, True))), 0)
    ok, _ = check_strategy(XOR_GAME, collapsed)
    assert ok
    trace = derive_substitution_refutation(XOR_GAME, collapsed)[2]
    assert run_strategy(XOR_GAME, "herbrand", ghost, trace=trace) == ("accept",)


def test_missing_strategy_rejected_not_crashed():
    _, _, trace = derive_substitution_refutation(XOR_GAME, GRID_STRATEGY)
    plan = strat.plan_for_strategy(XOR_GAME, GRID_STRATEGY, trace)
    pub = dict(kind="herbrand", num_gates=2, num_aux=0,
               num_steps=len(trace.steps), width=trace.width, plan=plan)

    def script(eng):
        held = None if eng.role == "prover" else None
        return strat.verify_strategy(eng, XOR_GAME, strategy=held,
                                     trace=None if eng.role == "prover" else None,
                                     **pub)

    results, _, _ = run_session(script, "itmac")
    assert verdict(results) == ("reject", "wf-uniqueness")


def test_unknown_kind_raises():
    from zkqbf.backend import Engine
    with pytest.raises(ValueError):
        strat.verify_strategy(None, XOR_GAME, kind="minmax", num_gates=0,
                              num_aux=0, num_steps=1, width=1)


def test_narrow_plan_rejected():
    _, _, trace = derive_substitution_refutation(XOR_GAME, GRID_STRATEGY)
    narrow = strat.single_plan(2, 6 + len(XOR_GAME.clauses), [(0, 0)] * len(trace.steps))
    v = run_strategy(XOR_GAME, "herbrand", GRID_STRATEGY, trace=trace, plan=narrow)
    assert v == ("reject", "plan")


@pytest.mark.parametrize("backend", ["cleartext", "itmac"])
def test_corpus_strategies_accepted(backend):
    n = 0
    for name, qbf in corpus(extra_random=4):
        kind = "skolem" if eval_qbf(qbf) else "herbrand"
        try:
            s = synthesize_strategy(qbf, kind)
        except Exception:
            continue
        ok, why = check_strategy(qbf, s)
        assert ok, (name, why)
        v = run_strategy(qbf, kind, s, backend, chunk=4)
        assert v == ("accept",), (name, v)
        n += 1
    assert n >= 3
