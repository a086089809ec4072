"""Cleartext reference layer: brute-force evaluation, strict certificate
checking, and exhaustive certificate search for tiny instances.

Everything here recomputes from first principles and is deliberately
independent of the interactive checkers, so the two can cross-validate.
The searchers emit certificates in the trace grammars of ``certs``; the
strict checker is at least as demanding as the interactive one, so any
certificate it blesses must also be accepted there.

Strictness notes.  A premise containing the true sentinel is rejected
here even though the committed form tolerates full-width clauses that
drag the sentinel along (they can never shed it, so they never reach the
empty clause).  Reductions may be partial: a removal only has to be
inner to every remaining opposite-quantifier literal, matching the
interactive order checks rather than forcing maximal reduction.
"""

from __future__ import annotations

import itertools
import random
from collections import Counter
from dataclasses import dataclass

from .certs import (
    CodeSpace,
    CubeTrace,
    Gate,
    InitialCube,
    QResTrace,
    Step,
    Strategy,
    TOP_VAR,
    substitution_layout,
)
from .qbf import Qbf, parse_qdimacs
from .qres import lenient_views, quant_flags_for

MAX_EVAL_VARS = 24

XOR_GAME_TEXT = """\
c forall x1 exists x2 forall x3: xor-ish matrix, false
p cnf 3 4
a 1 0
e 2 0
a 3 0
1 2 3 0
1 -2 -3 0
-1 2 -3 0
-1 -2 3 0
"""

NEQ_GAME_TEXT = """\
c forall u exists x: x must differ from u, true
p cnf 2 2
a 1 0
e 2 0
1 2 0
-1 -2 0
"""


class OracleError(ValueError):
    """Instance too large for brute force, or a searcher misuse."""


# -- evaluation ----------------------------------------------------------------

def eval_qbf(qbf: Qbf) -> bool:
    """Game value of the instance by exhaustive play, capped at 24 variables."""
    if len(qbf.rank) > MAX_EVAL_VARS:
        raise OracleError("%d quantified variables exceed the brute-force cap %d"
                          % (len(qbf.rank), MAX_EVAL_VARS))
    order = [v for _, block in qbf.prefix for v in block]
    clauses = [frozenset(cl) for cl in qbf.clauses]

    def rec(i: int, live: list[frozenset[int]]) -> bool:
        if not live:
            return True
        if any(not cl for cl in live):
            return False
        v = order[i]
        exist = qbf.quant[v] == "e"
        for lit in (v, -v):
            nxt = [cl - {-lit} for cl in live if lit not in cl]
            if rec(i + 1, nxt) == exist:
                return exist
        return not exist

    return rec(0, clauses)


def _false_under(lits, asg: dict[int, bool]) -> bool:
    return all(not asg[abs(l)] if l > 0 else asg[abs(l)] for l in lits)


# -- strict trace replay -------------------------------------------------------

@dataclass
class StepView:
    """Cleartext view of one derivation step, as code sets."""
    step: Step
    prem_a: frozenset[int]
    prem_b: frozenset[int]
    pivot_code: int  # 0 on copy steps
    resolvent: frozenset[int]  # before reduction
    removed_codes: tuple[int, ...]
    result: frozenset[int]


_PIVOT_QUANT = {"qres": "e", "cube": "a"}
_REMOVED_QUANT = {"qres": "a", "cube": "e"}


def replay_steps(initial: list[frozenset[int]], steps, space: CodeSpace,
                 mode: str, width: int) -> tuple[list[StepView], str]:
    """Re-derive every step under the strict rules.

    Returns (views, reason); reason is empty on success and views then
    cover every step.  mode is 'qres', 'cube', or 'prop'.
    """
    if mode not in ("qres", "cube", "prop"):
        raise ValueError("unknown replay mode %r" % mode)
    seq = list(initial)
    views: list[StepView] = []
    for st in steps:
        if st.new_id != len(seq) + 1:
            return views, ("step %d does not follow the %d earlier clauses"
                           % (st.new_id, len(seq)))
        a, b = seq[st.prem_a - 1], seq[st.prem_b - 1]
        for pid, prem in ((st.prem_a, a), (st.prem_b, b)):
            if 1 in prem:
                return views, ("step %d resolves premise %d, which is satisfied "
                               "by the true sentinel" % (st.new_id, pid))
        if st.is_copy:
            pc, resolvent = 0, a
        else:
            if st.pivot not in space.rank:
                return views, "step %d pivots on unquantified variable %d" % (st.new_id, st.pivot)
            pc = space.code(st.pivot)
            want = _PIVOT_QUANT.get(mode)
            if want and space.quant_of_code(pc) != want:
                return views, ("step %d pivots on variable %d of the wrong "
                               "quantifier" % (st.new_id, st.pivot))
            if pc not in a:
                return views, "step %d: premise %d lacks the positive pivot" % (st.new_id, st.prem_a)
            if pc ^ 1 not in b:
                return views, "step %d: premise %d lacks the negated pivot" % (st.new_id, st.prem_b)
            resolvent = (a - {pc}) | (b - {pc ^ 1})
            if any(c ^ 1 in resolvent for c in resolvent):
                kind = "tautological resolvent" if mode != "cube" else "contradictory consensus"
                return views, "step %d produces a %s" % (st.new_id, kind)
        rcodes = []
        for lit in st.removed:
            if mode == "prop":
                return views, "step %d removes literals in a propositional trace" % st.new_id
            if abs(lit) not in space.rank:
                return views, "step %d removes unquantified literal %d" % (st.new_id, lit)
            rc = space.code(lit)
            if space.quant_of_code(rc) != _REMOVED_QUANT[mode]:
                return views, ("step %d removes literal %d of the wrong quantifier"
                               % (st.new_id, lit))
            if rc not in resolvent or rc in rcodes:
                return views, ("step %d removes literal %d not (or no longer) present"
                               % (st.new_id, lit))
            rcodes.append(rc)
        result = resolvent - set(rcodes)
        keep = _PIVOT_QUANT.get(mode)
        if rcodes:
            inner = max((c >> 1 for c in result if space.quant_of_code(c) == keep),
                        default=0)
            for rc in rcodes:
                if rc >> 1 <= inner:
                    return views, ("step %d reduction order violated: removing %d "
                                   "while a deeper %s literal remains"
                                   % (st.new_id, space.lit_of_code(rc), keep))
        if len(result) > width:
            return views, ("step %d derives %d literals, wider than the header %d"
                           % (st.new_id, len(result), width))
        views.append(StepView(st, a, b, pc, resolvent, tuple(rcodes), result))
        seq.append(result)
    return views, ""


def clause_widths(initial: list[frozenset[int]], views: list[StepView]) -> list[int]:
    """Literal counts of every clause slot, initial first then one per step."""
    return [len(s) for s in initial] + [len(v.result) for v in views]


# -- strict certificate checking -----------------------------------------------

def plain_check(qbf: Qbf, cert, clauses=None, space: CodeSpace | None = None):
    """Strict cleartext verdict on a certificate: (valid, reason).

    cert may be a QResTrace (kind 'qres' over the instance, or 'prop' over
    the instance or an explicit clause/code list), a CubeTrace, or a
    Strategy.  reason is 'ok' on success.
    """
    if isinstance(cert, Strategy):
        return check_strategy(qbf, cert)
    if isinstance(cert, CubeTrace):
        return _check_cube_trace(qbf, cert)
    if not isinstance(cert, QResTrace):
        raise TypeError("unknown certificate type %r" % type(cert).__name__)
    if cert.kind == "qres":
        if clauses is not None or space is not None:
            raise ValueError("explicit clause lists only make sense for prop traces")
        space = CodeSpace.for_instance(qbf)
        initial = [frozenset(qbf.clause_codes(cl)) for cl in qbf.clauses]
    else:
        if space is None:
            space = CodeSpace.for_instance(qbf)
        raw = qbf.clauses if clauses is None else clauses
        initial = [frozenset(cl if clauses is not None else qbf.clause_codes(cl))
                   for cl in raw]
    if any(len(cl) > cert.width for cl in initial):
        return False, "an initial clause is wider than the trace header"
    views, reason = replay_steps(initial, cert.steps, space, cert.kind, cert.width)
    if reason:
        return False, reason
    if not views or views[-1].result:
        return False, "the final derived clause is not empty"
    return True, "ok"


def _check_cube_trace(qbf: Qbf, cert: CubeTrace):
    space = CodeSpace.for_instance(qbf)
    matrix = [set(cl) for cl in qbf.clauses]
    initial = []
    for i, cube in enumerate(cert.cubes, start=1):
        lits = set(cube.lits)
        for l in lits:
            if abs(l) not in space.rank:
                return False, "cube %d uses unquantified literal %d" % (i, l)
            if -l in lits:
                return False, "cube %d is contradictory on variable %d" % (i, abs(l))
        if len(cube.witnesses) != len(matrix):
            return False, ("cube %d lists %d witnesses for %d matrix clauses"
                           % (i, len(cube.witnesses), len(matrix)))
        for j, w in enumerate(cube.witnesses):
            if w not in lits or w not in matrix[j]:
                return False, ("cube %d witness %d does not satisfy matrix clause %d"
                               % (i, w, j + 1))
        if len(lits) > cert.width:
            return False, "cube %d is wider than the trace header" % i
        initial.append(frozenset(space.code(l) for l in lits))
    views, reason = replay_steps(initial, cert.steps, space, "cube", cert.width)
    if reason:
        return False, reason
    if not views or views[-1].result:
        return False, "the final derived cube is not empty"
    return True, "ok"


# -- relaxed certificate checking ------------------------------------------------
#
# The committed step relations prove divisibility, not equality: each premise
# polynomial must divide result*removed*(X+pivot) times padding.  That soundly
# admits a superset of the strict rules above: a step's pivot may be absent
# from a premise (the (X+pivot) factor is simply not consumed), the result may
# carry extra non-clashing literals (weakening), and a copy step behaves like
# a resolution on the padding sentinel.  plain_check stays the arbiter for
# what this oracle emits; relaxed_check is the reference for which
# certificates a session must reject.

def _pivot_eligible(space: CodeSpace, mode: str, code: int) -> bool:
    if code == 0:
        return True  # pads stand in for the pivot on copy steps
    if code == 1:
        return False
    want = _PIVOT_QUANT.get(mode)
    return want is None or space.quant_of_code(code) == want


def _removal_eligible(space: CodeSpace, mode: str, code: int) -> bool:
    if code == 0:
        return True  # padding inside the committed removed list
    if code == 1 or mode == "prop":
        return False
    return space.quant_of_code(code) == _REMOVED_QUANT[mode]


def _clashes(roots) -> bool:
    cs = set(roots)
    return any(c ^ 1 in cs for c in cs)


def _relaxed_steps(space: CodeSpace, mode: str, width: int, degree: int,
                   initial, steps):
    """Evaluate the committed step relations on the canonical prover view."""
    flags = quant_flags_for(space, mode)
    views = lenient_views(space, flags, initial, steps)
    seq = [Counter(cl) for cl in initial]
    for n, v in enumerate(views, 1):
        if not _pivot_eligible(space, mode, v.pivot_code):
            return False, "step %d pivot is not eligible" % n
        trunc = list(v.result)[:width]
        if degree:
            if v.w_code and v.w_code not in trunc:
                return False, "step %d result overflows its slot" % n
            rem = (list(v.removed) + [0] * degree)[:degree]
            for rc in rem:
                if not _removal_eligible(space, mode, rc):
                    return False, "step %d removes an ineligible literal" % n
                if rc and (rc >> 1) <= (v.w_code >> 1):
                    return False, "step %d violates the reduction order" % n
            res_roots = list(trunc)
            if v.w_code and v.w_code in res_roots:
                res_roots.remove(v.w_code)
            res_roots = (res_roots + [0] * width)[:width]
            gamma = res_roots + [v.w_code] + rem
        else:
            gamma = (trunc + [0] * width)[:width]
        if _clashes(gamma):
            return False, "step %d result holds clashing literals" % n
        cover = Counter(gamma)
        for prem, extra in ((v.prem_a, v.pivot_code),
                            (v.prem_b, v.pivot_code ^ 1)):
            need = seq[prem - 1] - cover - Counter([extra])
            if +need:
                return False, ("step %d premise %d is not covered by its "
                               "resolvent" % (n, prem))
        seq.append(Counter(trunc))
    if +seq[-1]:
        return False, "the final derived slot is not empty"
    return True, "ok"


def relaxed_check(qbf: Qbf, cert, clauses=None, space: CodeSpace | None = None):
    """Session-equivalent verdict on a certificate: (valid, reason).

    Mirrors, on cleartext root multisets, exactly the relations a
    committed session enforces under its default single-bucket plan, with
    the prover's lenient witness construction.  Certificates this accepts
    are accepted by sessions; certificates this rejects must be rejected.
    """
    if isinstance(cert, CubeTrace):
        return _relaxed_cube(qbf, cert)
    if not isinstance(cert, QResTrace):
        raise TypeError("relaxed_check handles derivation traces, not %r"
                        % type(cert).__name__)
    if not cert.steps:
        return False, "the trace has no steps"
    if cert.kind == "prop" and cert.degree != 0:
        return False, "propositional traces do not reduce"
    if space is None:
        space = CodeSpace.for_instance(qbf)
    raw = qbf.clauses if clauses is None else clauses
    initial = [frozenset(cl if clauses is not None else qbf.clause_codes(cl))
               for cl in raw]
    if any(len(cl) > cert.width for cl in initial):
        return False, "an initial clause is wider than the trace header"
    return _relaxed_steps(space, cert.kind, cert.width, cert.degree,
                          initial, cert.steps)


def _relaxed_cube(qbf: Qbf, cert: CubeTrace):
    if not cert.cubes:
        return False, "no initial cubes"
    if not cert.steps:
        return False, "the trace has no steps"
    space = CodeSpace.for_instance(qbf)
    matrix = [frozenset(qbf.clause_codes(cl)) for cl in qbf.clauses]
    initial = []
    for i, cb in enumerate(cert.cubes, start=1):
        codes = sorted(space.code(l) if abs(l) in space.rank else 1
                       for l in cb.lits)
        trunc = codes[:cert.width]
        padded = (trunc + [0] * cert.width)[:cert.width]
        if _clashes(padded):
            return False, "cube %d holds clashing literals" % i
        wits = list(cb.witnesses)[:len(matrix)]
        while len(wits) < len(matrix):
            wits.append(1)
        roots = set(padded)
        for j, clause in enumerate(matrix):
            t = space.code(wits[j]) if abs(wits[j]) in space.rank else 1
            if t not in roots or t not in clause:
                return False, ("cube %d witness for matrix clause %d is not "
                               "a shared root" % (i, j + 1))
        initial.append(frozenset(trunc))
    return _relaxed_steps(space, "cube", cert.width, cert.degree,
                          initial, cert.steps)


def check_strategy(qbf: Qbf, strategy: Strategy):
    """Well-formedness (output membership, input scoping, prefix order) plus
    a brute-force check that the strategy wins the instance."""
    own = "a" if strategy.kind == "herbrand" else "e"
    opp = "e" if own == "a" else "a"
    aux_seen = 0
    defined: set[int] = set()
    dep: dict[int, int] = {}
    for g in strategy.gates:
        if g.out > qbf.num_vars:
            aux_seen += 1
            if g.out != qbf.num_vars + aux_seen:
                return False, ("auxiliary output %d breaks the canonical sequence "
                               "(expected %d)" % (g.out, qbf.num_vars + aux_seen))
        elif qbf.quant.get(g.out) != own:
            return False, ("gate output %d is not a %s-player variable"
                           % (g.out, "universal" if own == "a" else "existential"))
        ranks = [0]
        for var, _ in (g.a, g.b):
            if var == TOP_VAR:
                continue
            if var in defined:
                ranks.append(dep[var])
            elif qbf.quant.get(var) == opp:
                ranks.append(qbf.rank[var])
            else:
                return False, ("gate for %d reads variable %d, which is neither an "
                               "opponent variable nor an earlier output" % (g.out, var))
        dep[g.out] = max(ranks)
        defined.add(g.out)
        if g.out <= qbf.num_vars and dep[g.out] >= qbf.rank[g.out]:
            return False, ("gate for %d depends on a variable quantified at or "
                           "inside it" % g.out)
    if aux_seen != strategy.aux_count:
        return False, ("header announces %d auxiliaries, found %d"
                       % (strategy.aux_count, aux_seen))
    reason = _losing_branch(qbf, strategy, defined)
    if reason:
        return False, reason
    return True, "ok"


def _strategy_branch_vars(qbf: Qbf, strategy: Strategy, defined: set[int]) -> list[int]:
    opp = "e" if strategy.kind == "herbrand" else "a"
    return [v for v, q in sorted(qbf.quant.items(), key=lambda kv: qbf.rank[kv[0]])
            if q == opp or v not in defined]


def _closure(strategy: Strategy, asg: dict[int, bool]) -> dict[int, bool]:
    total = dict(asg)
    total[TOP_VAR] = True
    for g in strategy.gates:
        va = total[g.a[0]] == g.a[1]
        vb = total[g.b[0]] == g.b[1]
        total[g.out] = va and vb
    return total


def _losing_branch(qbf: Qbf, strategy: Strategy, defined: set[int]) -> str:
    branch = _strategy_branch_vars(qbf, strategy, defined)
    if len(branch) > 20:
        raise OracleError("%d free branch variables exceed the brute-force cap" % len(branch))
    want_false = strategy.kind == "herbrand"
    for bits in itertools.product((False, True), repeat=len(branch)):
        total = _closure(strategy, dict(zip(branch, bits)))
        falsified = any(_false_under(cl, total) for cl in qbf.clauses)
        if falsified != want_false:
            side = "leaves every clause satisfied" if want_false else "falsifies a clause"
            return "assignment %s %s" % (
                " ".join(str(v if total[v] else -v) for v in branch), side)
    return ""


# -- certificate search ----------------------------------------------------------

def _eager_reduce(clause: frozenset[int], space: CodeSpace, mode: str):
    keep = _PIVOT_QUANT[mode]
    inner = max((c >> 1 for c in clause if space.quant_of_code(c) == keep), default=0)
    removed = frozenset(c for c in clause if space.quant_of_code(c) != keep
                        and c >> 1 > inner)
    return clause - removed, removed


def _rebuild_trace(space: CodeSpace, initial: list[frozenset[int]], parents: dict,
                   bottom: frozenset[int]):
    """Backward-collect the steps reaching bottom and renumber them densely."""
    needed: set[frozenset[int]] = set()
    stack = [bottom]
    while stack:
        cl = stack.pop()
        if cl in needed or parents[cl] is None:
            continue
        needed.add(cl)
        stack.extend(parents[cl][:2])
    order = sorted(needed, key=lambda cl: parents[cl][4])
    ids: dict[frozenset[int], int] = {}
    for i, cl in enumerate(initial):
        ids.setdefault(cl, i + 1)
    steps, width, degree = [], 0, 0
    for cl in order:
        pa, pb, pivot_var, removed, _ = parents[cl]
        new_id = len(initial) + len(steps) + 1
        steps.append(Step(new_id, ids[pa], ids[pb], pivot_var,
                          tuple(space.lit_of_code(c) for c in sorted(removed))))
        ids[cl] = new_id
        width = max(width, len(cl), len(pa), len(pb))
        degree = max(degree, len(removed))
    return steps, width, degree


def _saturate(initial: list[frozenset[int]], space: CodeSpace, mode: str,
              max_clauses: int = 5000):
    """All-pairs resolution with eager reduction until the empty set or fixpoint.

    Returns (parents, bottom) where parents maps each clause set to
    (premA set, premB set, pivot var, removed codes, birth index) and
    None for the initial slots; bottom is the empty set or None.
    """
    parents: dict[frozenset[int], object] = {}
    for cl in initial:
        parents.setdefault(cl, None)
    if frozenset() in parents:
        return parents, frozenset()
    birth = itertools.count()
    queue = list(parents)

    def note(cl, pa, pb, pivot_var, removed):
        if cl in parents:
            return False
        parents[cl] = (pa, pb, pivot_var, removed, next(birth))
        queue.append(cl)
        return not cl

    for cl in list(parents):
        red, removed = _eager_reduce(cl, space, mode)
        if removed and note(red, cl, cl, 0, removed):
            return parents, red
    while queue:
        a = queue.pop()
        for b in list(parents):
            for x, y in ((a, b), (b, a)):
                if 1 in x or 1 in y:
                    continue
                for pc in x:
                    if space.quant_of_code(pc) != _PIVOT_QUANT[mode] or not pc & 1:
                        continue
                    if pc ^ 1 not in y:
                        continue
                    resolvent = (x - {pc}) | (y - {pc ^ 1})
                    if any(c ^ 1 in resolvent for c in resolvent):
                        continue
                    red, removed = _eager_reduce(resolvent, space, mode)
                    if note(red, x, y, space.lit_of_code(pc), removed):
                        return parents, red
                    if len(parents) > max_clauses:
                        raise OracleError("saturation exceeded %d clauses" % max_clauses)
    return parents, None


def search_refutation(qbf: Qbf, max_clauses: int = 5000) -> QResTrace | None:
    """Saturation search for a resolution refutation; None if the instance
    has none (it is then true, conjecturally up to the search bound)."""
    space = CodeSpace.for_instance(qbf)
    initial = [frozenset(qbf.clause_codes(cl)) for cl in qbf.clauses]
    parents, bottom = _saturate(initial, space, "qres", max_clauses)
    if bottom is None:
        return None
    if parents[bottom] is None:
        empty_id = initial.index(frozenset()) + 1
        steps = [Step(len(initial) + 1, empty_id, empty_id, 0, ())]
        width, degree = max((len(c) for c in initial), default=1), 0
    else:
        steps, width, degree = _rebuild_trace(space, initial, parents, bottom)
    width = max(width, 1, max((len(c) for c in initial), default=0))
    return QResTrace("qres", width, degree, tuple(steps))


def search_cube_proof(qbf: Qbf, max_clauses: int = 5000) -> CubeTrace | None:
    """Dual search: initial cubes from shrunk satisfying assignments, then
    universal-pivot consensus with eager existential reduction."""
    if len(qbf.rank) > 16:
        raise OracleError("cube search capped at 16 quantified variables")
    space = CodeSpace.for_instance(qbf)
    matrix = [set(cl) for cl in qbf.clauses]
    if any(not cl for cl in matrix):
        return None
    ranked = sorted(qbf.rank, key=qbf.rank.get)
    cubes: list[InitialCube] = []
    seen: set[frozenset[int]] = set()
    for bits in itertools.product((False, True), repeat=len(ranked)):
        asg = dict(zip(ranked, bits))
        if any(_false_under(cl, asg) for cl in matrix):
            continue
        lits = {v if asg[v] else -v for v in ranked}
        for l in sorted(lits, key=lambda l: -qbf.rank[abs(l)]):
            trial = lits - {l}
            if all(trial & cl for cl in matrix):
                lits = trial
        key = frozenset(lits)
        if key in seen:
            continue
        seen.add(key)
        wits = tuple(next(iter(sorted(lits & cl, key=qbf.code))) for cl in matrix)
        cubes.append(InitialCube(tuple(sorted(lits, key=qbf.code)), wits))
    if not cubes:
        return None
    initial = [frozenset(qbf.clause_codes(list(c.lits))) for c in cubes]
    parents, bottom = _saturate(initial, space, "cube", max_clauses)
    if bottom is None:
        return None
    if parents[bottom] is None:
        empty_id = initial.index(frozenset()) + 1
        steps, width, degree = [Step(len(initial) + 1, empty_id, empty_id, 0, ())], 0, 0
    else:
        steps, width, degree = _rebuild_trace(space, initial, parents, bottom)
    used = {s.prem_a for s in steps} | {s.prem_b for s in steps}
    keep = sorted(i for i in used if i <= len(initial))
    remap = {old: new + 1 for new, old in enumerate(keep)}
    for i in range(len(initial), len(initial) + len(steps) + 1):
        remap[i] = i - (len(initial) - len(keep))
    steps = [Step(remap[s.new_id], remap[s.prem_a], remap[s.prem_b], s.pivot, s.removed)
             for s in steps]
    kept_cubes = [cubes[i - 1] for i in keep]
    width = max([width, 1] + [len(c.lits) for c in kept_cubes])
    return CubeTrace(width, degree, tuple(kept_cubes), tuple(steps))


# -- strategy synthesis ----------------------------------------------------------

def synthesize_strategy(qbf: Qbf, kind: str) -> Strategy:
    """Winning-function extraction by exhaustive play, then AND-gate synthesis.

    herbrand strategies exist for false instances, skolem for true ones;
    asking for the wrong side raises OracleError.
    """
    if kind not in ("herbrand", "skolem"):
        raise ValueError("unknown strategy kind %r" % kind)
    if len(qbf.rank) > 20:
        raise OracleError("synthesis capped at 20 quantified variables")
    own = "a" if kind == "herbrand" else "e"
    want_false = kind == "herbrand"
    order = [v for _, block in qbf.prefix for v in block]
    clauses = [frozenset(cl) for cl in qbf.clauses]
    tables: dict[int, dict[tuple[bool, ...], bool]] = {
        v: {} for v in order if qbf.quant[v] == own}
    ctx_vars = {}
    for i, v in enumerate(order):
        if qbf.quant[v] == own:
            ctx_vars[v] = [u for u in order[:i] if qbf.quant[u] != own]

    def wins(i: int, live, ctx: tuple[bool, ...]) -> bool:
        if not live:
            return not want_false
        if any(not cl for cl in live):
            return want_false
        if i == len(order):
            return not want_false
        v = order[i]
        if qbf.quant[v] == own:
            for val in (False, True):
                lit = v if val else -v
                nxt = [cl - {-lit} for cl in live if lit not in cl]
                if wins(i + 1, nxt, ctx):
                    tables[v][ctx] = val
                    return True
            return False
        for val in (False, True):
            lit = v if val else -v
            nxt = [cl - {-lit} for cl in live if lit not in cl]
            if not wins(i + 1, nxt, ctx + (val,)):
                return False
        return True

    if not wins(0, clauses, ()):
        raise OracleError("no %s strategy: the instance is %s"
                          % (kind, "true" if want_false else "false"))
    gates: list[Gate] = []
    next_aux = itertools.count(qbf.num_vars + 1)

    def chain(lits: list[tuple[int, bool]]) -> tuple[int, bool]:
        acc = lits[0]
        for lit in lits[1:]:
            out = next(next_aux)
            gates.append(Gate(out, acc, lit))
            acc = (out, True)
        return acc

    for v in sorted(tables, key=qbf.rank.get):
        table = tables[v]
        support = []
        for j, u in enumerate(ctx_vars[v]):
            if any(table.get(k) != table.get(k[:j] + (not k[j],) + k[j + 1:])
                   for k in table):
                support.append(j)
        rows = {tuple(k[j] for j in support) for k, val in table.items() if val}
        if not rows:
            gates.append(Gate(v, (TOP_VAR, False), (TOP_VAR, False)))
            continue
        if len(rows) == (1 << len(support)):
            gates.append(Gate(v, (TOP_VAR, True), (TOP_VAR, True)))
            continue
        minterms = [chain([(ctx_vars[v][support[j]], bit) for j, bit in enumerate(row)])
                    for row in sorted(rows)]
        if len(minterms) == 1:
            gates.append(Gate(v, minterms[0], (TOP_VAR, True)))
        else:
            neg = chain([(var, not pos) for var, pos in minterms])
            gates.append(Gate(v, (neg[0], not neg[1]), (TOP_VAR, True)))
    aux_count = next(next_aux) - qbf.num_vars - 1
    return Strategy(kind, tuple(gates), aux_count)


# -- substitution refutations ------------------------------------------------------

def derive_substitution_refutation(qbf: Qbf, strategy: Strategy):
    """Propositional refutation of the substitution layout of a strategy.

    Returns (space, layout, trace).  Works by a decision tree over the
    opponent (and any ungated own-side) variables: at each leaf the gate
    closure falsifies a layout clause, whose non-input literals are then
    resolved away through the gate clauses; the branches join by resolving
    on the decision variable.  Every intermediate clause is falsified by
    one closure, so no resolvent is tautological.
    """
    space, layout = substitution_layout(qbf, strategy)
    sets = [frozenset(cl) for cl in layout]
    gate_pos = {g.out: i for i, g in enumerate(strategy.gates)}
    branch = _strategy_branch_vars(qbf, strategy, set(gate_pos))
    if len(branch) > 20:
        raise OracleError("%d branch variables exceed the refutation cap" % len(branch))

    known: dict[frozenset[int], int] = {}
    by_id: dict[int, frozenset[int]] = {}
    for i, cl in enumerate(sets):
        known.setdefault(cl, i + 1)
        by_id[i + 1] = cl
    steps: list[Step] = []

    def emit(prem_a: int, prem_b: int, pivot_var: int, result: frozenset[int]) -> int:
        if result in known:
            return known[result]
        new_id = len(sets) + len(steps) + 1
        steps.append(Step(new_id, prem_a, prem_b, pivot_var, ()))
        known[result] = new_id
        by_id[new_id] = result
        return new_id

    def clause_of(cid: int) -> frozenset[int]:
        return by_id[cid]

    def eliminate(cid: int, total: dict[int, bool]) -> int:
        """Resolve away gate-output literals, deepest gate first."""
        cur = clause_of(cid)
        seen = {cur}
        while True:
            gated = [c for c in cur if abs(space.lit_of_code(c)) in gate_pos]
            if not gated:
                return cid
            c = max(gated, key=lambda c: gate_pos[abs(space.lit_of_code(c))])
            var = abs(space.lit_of_code(c))
            g = strategy.gates[gate_pos[var]]
            base = 3 * gate_pos[var]
            if c & 1:  # clause holds +var, so var is false: some input is false
                partner = base + 1 if not total[g.a[0]] == g.a[1] else base + 2
            else:  # clause holds -var, var is true: resolve through the triple clause
                partner = base + 3
            resolvent = (cur - {c}) | (sets[partner - 1] - {c ^ 1})
            if resolvent in seen:  # a cyclic circuit feeds a literal back to itself
                raise OracleError("gate elimination made no progress on %r" % sorted(cur))
            seen.add(resolvent)
            cid = emit(cid if c & 1 else partner, partner if c & 1 else cid,
                       var, resolvent)
            cur = resolvent

    def leaf(asg: dict[int, bool]) -> int:
        total = _closure(strategy, asg)
        if strategy.kind == "herbrand":
            for i in range(3 * len(strategy.gates), len(sets)):
                if all(not (total[abs(space.lit_of_code(c))] == bool(c & 1))
                       for c in sets[i]):
                    return eliminate(i + 1, total)
            raise OracleError("strategy fails to falsify the matrix under %r" % asg)
        # skolem: start from the unit output clause of the negated matrix
        for cl in qbf.clauses:
            if not any(total[abs(l)] == (l > 0) for l in cl):
                raise OracleError("strategy fails to satisfy the matrix under %r" % asg)
        out_id = len(sets)
        or_id = len(sets) - 1
        out_var = abs(space.lit_of_code(next(iter(sets[out_id - 1]))))
        cur = (sets[out_id - 1] | sets[or_id - 1]) - {space.code(out_var),
                                                      space.code(-out_var)}
        cid = emit(out_id, or_id, out_var, cur)
        pair_id = 3 * len(strategy.gates)
        for cl in qbf.clauses:
            t = next(i for i, l in enumerate(cl) if total[abs(l)] == (l > 0))
            partner = pair_id + t + 1
            sel_code = next(c for c in sets[partner - 1] if c ^ 1 in cur)
            resolvent = (cur - {sel_code ^ 1}) | (sets[partner - 1] - {sel_code})
            cid = emit(cid, partner, abs(space.lit_of_code(sel_code)), resolvent)
            cur = resolvent
            pair_id += len(cl)
        return eliminate(cid, total)

    def descend(i: int, asg: dict[int, bool]) -> int:
        if i == len(branch):
            return leaf(asg)
        v = branch[i]
        id0 = descend(i + 1, {**asg, v: False})
        if space.code(v) not in clause_of(id0):
            return id0
        id1 = descend(i + 1, {**asg, v: True})
        if space.code(-v) not in clause_of(id1):
            return id1
        result = (clause_of(id0) - {space.code(v)}) | (clause_of(id1) - {space.code(-v)})
        return emit(id0, id1, v, result)

    final = descend(0, {})
    if clause_of(final):
        raise OracleError("substitution refutation did not reach the empty clause")
    if final <= len(sets):  # the layout held an empty clause; derive by copying it
        steps.append(Step(len(sets) + len(steps) + 1, final, final, 0, ()))
    width = max([1] + [len(cl) for cl in known])
    return space, layout, QResTrace("prop", width, 0, tuple(steps))


# -- random instances and corpus ---------------------------------------------------

def random_qbf(rng: random.Random, max_vars: int = 8, max_blocks: int = 3,
               max_clauses: int = 12) -> Qbf:
    n = rng.randint(2, max_vars)
    nb = rng.randint(1, min(max_blocks, n))
    cuts = sorted(rng.sample(range(1, n), nb - 1)) if nb > 1 else []
    bounds = [0] + cuts + [n]
    prefix = [(rng.choice("ae"), list(range(bounds[i] + 1, bounds[i + 1] + 1)))
              for i in range(nb)]
    clauses = []
    for _ in range(rng.randint(2, max_clauses)):
        k = rng.randint(1, min(4, n))
        vs = rng.sample(range(1, n + 1), k)
        clauses.append([v if rng.random() < 0.5 else -v for v in vs])
    return Qbf(n, prefix, clauses)


def corpus(extra_random: int = 20, seed: int = 2026) -> list[tuple[str, Qbf]]:
    """Named fixture instances plus deterministic random fillers."""
    out = [("xor-game", parse_qdimacs(XOR_GAME_TEXT)),
           ("neq-game", parse_qdimacs(NEQ_GAME_TEXT))]
    rng = random.Random(seed)
    for i in range(extra_random):
        out.append(("rand-%02d" % i, random_qbf(rng)))
    return out


def wide_proof_bench(chain: int = 900, wide: int = 200, wide_width: int = 256):
    """Synthetic propositional instance and refutation with a bimodal width
    profile: a long narrow unit chain plus untouched full-width clauses.

    Returns (qbf, trace).  About ninety percent of the proof's clause
    slots are at most two literals wide, the rest exactly wide_width.
    """
    n = chain + wide_width
    clauses = [[1]]
    clauses += [[-i, i + 1] for i in range(1, chain)]
    clauses.append([-chain])
    for k in range(wide):
        clauses.append([(chain + j) * (1 if (j + k) % 2 else -1)
                        for j in range(1, wide_width + 1)])
    qbf = Qbf(n, [("e", list(range(1, n + 1)))], clauses)
    num_initial = len(clauses)
    steps = []
    prev = 1
    for i in range(1, chain):
        steps.append(Step(num_initial + i, prev, i + 1, i, ()))
        prev = num_initial + i
    steps.append(Step(num_initial + chain, prev, chain + 1, chain, ()))
    return qbf, QResTrace("prop", wide_width, 0, tuple(steps))
