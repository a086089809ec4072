"""Committed checking of resolution-style derivations.

The prover holds a derivation (resolution refutation, cube consensus
proof, or plain propositional resolution); the verifier learns only its
public shape: step count, clause width bound, reduction degree, and the
bucketing plan.  Clauses are monic polynomials whose roots are literal
codes, stored in one append-only ZkArray per width bucket.  Each step
reads its two premises through hidden bounded reads, commits the result
clause, and proves three facts at a random point:

  resolution   W0 * g(A) = g(Wres)(X+w)g(Wrem)(X+p) * X^wa   and the
               mirrored identity for B with pivot complement p+1, which
               place every literal of the premises (minus the pivot) in
               the result-plus-removed multiset,
  result glue  g(Cr) * X = g(Wres)(X+w), binding the committed result
               coefficients to the committed root lists, and
  no clash     pz*g(Cbar) + qz*g(Cbar shifted by 1) = 1, a Bezout pair
               certifying the result carries no complementary codes.

With public degree 0 the root lists disappear and the identities run
directly on the committed result coefficients.  Reduction legality is
bitwise: every existential root of the result must sit at or outside the
reduction witness w, and every removed root strictly inside it, with
zero-valued pad roots exempt.  All clause semantics (which codes count as
pivot material, which are removable) enter through a public per-code flag
table, so the same loop checks refutations, cube proofs, and
propositional derivations.

Steps never assert that the pivot actually occurs in a premise; a
missing pivot only weakens the premise, which keeps the relation sound
and spares honest provers a membership proof.
"""

from __future__ import annotations

from dataclasses import dataclass

from .backend import Engine, PROVER
from .certs import CodeSpace, QResTrace, Step
from .gf import poly_compose_one_plus_x, poly_divmod, poly_ext_gcd, poly_from_roots
from .zkcore import (
    ZkArray,
    bit_decompose,
    commit_clause_poly,
    compare_bits,
    compose_one_plus_x_handles,
    is_zero_flag,
    popeq,
    public_clause_poly,
)

# Deferred-assert labels in flush order.  Earlier labels win when a bad
# witness breaks several checks at once, so the order runs from public
# shape via well-formedness toward the step relations.
STAGE_ORDER = (
    "plan",
    "init-cube",
    "wf-uniqueness",
    "wf-acyclicity",
    "wf-prefix",
    "subst",
    "quantifier",
    "array",
    "step-red",
    "step-res",
    "final-clause",
)


def finish_session(eng: Engine) -> str:
    """Flush every stage in canonical order and close out the session."""
    for label in STAGE_ORDER:
        eng.flush(label)
    eng.finalize_mults()
    return eng.finish()


# -- public bucketing plan ----------------------------------------------------

@dataclass(frozen=True)
class BucketPlan:
    """Public routing of clause slots to width buckets.

    Slots are 1-based: the matrix clauses first, then one slot per step.
    step_sources names the buckets the two premises of each step are read
    from; which entry inside the bucket stays hidden.
    """

    buckets: tuple[int, ...]
    slot_bucket: tuple[int, ...]
    step_sources: tuple[tuple[int, int], ...]

    @property
    def cells(self) -> int:
        return sum(self.buckets[b] for b in self.slot_bucket)


def single_plan(width: int, num_initial: int, sources) -> BucketPlan:
    """Everything in one bucket of the header width."""
    nslots = num_initial + len(sources)
    return BucketPlan((max(1, width),), (0,) * nslots,
                      tuple((0, 0) for _ in sources))


def build_plan(widths, sources, chunk: int) -> BucketPlan:
    """Group slots by size: sort by width, cut into runs of chunk slots.

    Every slot of a run shares the run's maximum width, so a run of
    near-equal clauses costs almost nothing over exact sizing while the
    bucket population keeps individual sizes hidden.
    """
    assert chunk > 0
    order = sorted(range(len(widths)), key=lambda i: (widths[i], i))
    buckets = []
    slot_bucket = [0] * len(widths)
    for at in range(0, len(order), chunk):
        run = order[at:at + chunk]
        for i in run:
            slot_bucket[i] = len(buckets)
        buckets.append(max(1, max(widths[i] for i in run)))
    step_sources = tuple((slot_bucket[a - 1], slot_bucket[b - 1])
                         for a, b in sources)
    return BucketPlan(tuple(buckets), tuple(slot_bucket), step_sources)


def validate_plan(plan: BucketPlan, num_initial: int, num_steps: int,
                  initial_widths) -> str:
    """Structural check both sides run; returns a reason or an empty string."""
    nb = len(plan.buckets)
    if num_steps < 1:
        return "a derivation needs at least one step"
    if len(plan.slot_bucket) != num_initial + num_steps:
        return "plan does not cover every clause slot"
    if len(plan.step_sources) != num_steps:
        return "plan does not route every step"
    if any(w < 1 for w in plan.buckets):
        return "empty width bucket"
    if any(not 0 <= b < nb for b in plan.slot_bucket):
        return "slot routed to a missing bucket"
    if any(not (0 <= a < nb and 0 <= b < nb) for a, b in plan.step_sources):
        return "premise routed to a missing bucket"
    for i, w in enumerate(initial_widths):
        if w > plan.buckets[plan.slot_bucket[i]]:
            return "matrix clause wider than its bucket"
    # premises must find at least one earlier entry in their bucket
    filled = [0] * nb
    for s in range(num_initial):
        filled[plan.slot_bucket[s]] += 1
    for (ba, bb), slot in zip(plan.step_sources,
                              range(num_initial, num_initial + num_steps)):
        if filled[ba] == 0 or filled[bb] == 0:
            return "premise read from a still-empty bucket"
        filled[plan.slot_bucket[slot]] += 1
    return ""


# -- per-code flag table -------------------------------------------------------

def quant_flags_for(space: CodeSpace, kind: str):
    """(pivot-ok, removable) flag pair per literal code.

    Code 0 (the pad) carries both flags: pads may stand in for the pivot
    on copy steps and appear among removed roots.  Code 1 (the true
    sentinel) carries neither, so a clause holding it can never resolve
    or reduce it away.
    """
    flags = [(1, 1), (0, 0)]
    for code in range(2, space.num_codes):
        q = space.quant_of_code(code)
        if kind == "qres":
            flags.append((1 if q == "e" else 0, 1 if q == "a" else 0))
        elif kind == "cube":
            flags.append((1 if q == "a" else 0, 1 if q == "e" else 0))
        elif kind == "prop":
            flags.append((1, 0))
        else:
            raise ValueError("unknown derivation kind %r" % kind)
    return flags


# -- prover-side witness views --------------------------------------------------

@dataclass(frozen=True)
class StepView:
    prem_a: int
    prem_b: int
    pivot_code: int
    result: tuple
    w_code: int
    removed: tuple


def lenient_views(space: CodeSpace, flags, initial_roots, steps):
    """Replay a trace without validity checks, for witness construction.

    Out-of-range pivots map to the true sentinel, out-of-range premise
    ids to slot 1, and absent removed literals are dropped silently: the
    committed relations then fail on their own, which keeps the prover
    total on mutated certificates.
    """
    seq = [frozenset(r) for r in initial_roots]
    views = []
    for st in steps:
        pa = st.prem_a if 1 <= st.prem_a <= len(seq) else 1
        pb = st.prem_b if 1 <= st.prem_b <= len(seq) else 1
        a = seq[pa - 1] if seq else frozenset()
        b = seq[pb - 1] if seq else frozenset()
        if st.pivot == 0:
            pc = 0
            res = set(a)
        else:
            pc = space.code(st.pivot) if st.pivot in space.rank else 1
            res = (a - {pc}) | (b - {pc ^ 1})
        rem = []
        for lit in st.removed:
            rem.append(space.code(lit) if abs(lit) in space.rank else 1)
        result = sorted(res - set(rem))
        cands = [c for c in result if c and flags[c][0]]
        w_code = max(cands) if cands else 0
        views.append(StepView(pa, pb, pc, tuple(result),
                              w_code, tuple(sorted(rem))))
        seq.append(frozenset(result))
    return views


def plan_for_trace(qbf, trace, chunk: int = 0) -> BucketPlan:
    """Bucket plan a prover derives from its certificate (public output)."""
    space = CodeSpace.for_instance(qbf)
    initial = [qbf.clause_codes(cl) for cl in qbf.clauses]
    flags = quant_flags_for(space, trace.kind)
    views = lenient_views(space, flags, initial, trace.steps)
    sources = [(v.prem_a, v.prem_b) for v in views]
    if chunk <= 0:
        return single_plan(trace.width, len(initial), sources)
    widths = [len(c) for c in initial] + [len(v.result) for v in views]
    return build_plan(widths, sources, chunk)


# -- the step engine ------------------------------------------------------------

def _bezout_pair(fld, g, length):
    """Cofactors proving gcd(g, g(X+1)) = 1, zero-padded to length."""
    gbar = poly_compose_one_plus_x(fld, g)
    d, u, v = poly_ext_gcd(fld, g, gbar)
    if d != [1]:
        u, v = [], []  # sharing a root pair: leave the identity failing
    u = (u + [0] * length)[:length]
    v = (v + [0] * length)[:length]
    return u, v


def run_derivation(eng: Engine, flags, entries, plan: BucketPlan,
                   degree: int, views=None) -> dict:
    """Drive the committed step loop; defers all assertions to the stages.

    entries: one ("public", codes) or ("handles", coeff_handles) item per
    matrix slot.  views: prover-side StepView list, None on the verifier.
    The final result clause is asserted empty, so callers check full
    refutations, not just derivability.
    """
    fld = eng.fld
    prover = eng.role == PROVER
    num_initial = len(entries)
    num_steps = len(plan.step_sources)
    nb_code = max(1, (len(flags) - 1).bit_length())

    quant = ZkArray(eng, "quantifier", width=2)
    for f0, f1 in flags:
        quant.append([eng.commit_public(f0), eng.commit_public(f1)])

    per_bucket = [0] * len(plan.buckets)
    for b in plan.slot_bucket:
        per_bucket[b] += 1
    arrays = [ZkArray(eng, "array", width=w,
                      index_bits=max(1, per_bucket[b].bit_length()))
              for b, w in enumerate(plan.buckets)]
    pos_of_slot = {}
    seen = [0] * len(plan.buckets)
    for slot in range(1, num_initial + num_steps + 1):
        b = plan.slot_bucket[slot - 1]
        pos_of_slot[slot] = seen[b]
        seen[b] += 1

    for i, ent in enumerate(entries):
        b = plan.slot_bucket[i]
        if ent[0] == "public":
            coeffs = public_clause_poly(eng, ent[1], plan.buckets[b])
            eng.extra["cells"] = eng.extra.get("cells", 0) + plan.buckets[b]
        else:
            coeffs = ent[1]
        arrays[b].append(coeffs)

    def read_quant(code):
        off, payload = quant.read(index=code if prover else None)
        return off, payload

    def premise(bucket, slot):
        arr = arrays[bucket]
        bound = len(arr)
        idx = None
        if prover:
            idx = 0
            if (1 <= slot <= len(plan.slot_bucket)
                    and plan.slot_bucket[slot - 1] == bucket
                    and pos_of_slot[slot] < bound):
                idx = pos_of_slot[slot]
        return arr.read(index=idx, bound=bound)

    last_result = []
    for s in range(num_steps):
        ba, bb = plan.step_sources[s]
        bc = plan.slot_bucket[num_initial + s]
        wa, wb, wc = plan.buckets[ba], plan.buckets[bb], plan.buckets[bc]
        v = views[s] if prover else None

        off_a, coef_a = premise(ba, v.prem_a if prover else 0)
        off_b, coef_b = premise(bb, v.prem_b if prover else 0)

        pivot, pl = read_quant(v.pivot_code if prover else None)
        eng.assert_zero("quantifier", eng.lincomb([(1, pl[0])], const=1))

        if prover:
            result = list(v.result)[:wc]
        cr = commit_clause_poly(eng, v.result if prover else None, wc)
        arrays[bc].append(cr)

        if degree:
            wcode, wl = read_quant(v.w_code if prover else None)
            eng.assert_zero("quantifier", eng.lincomb([(1, wl[0])], const=1))
            if prover:
                res_roots = list(result)
                if v.w_code and v.w_code in res_roots:
                    res_roots.remove(v.w_code)
                res_roots = (res_roots + [0] * wc)[:wc]
                rem_roots = (list(v.removed) + [0] * degree)[:degree]
            wres = []
            for j in range(wc):
                off, fl = read_quant(res_roots[j] if prover else None)
                wres.append((off, fl))
            wrem = []
            for j in range(degree):
                off, fl = read_quant(rem_roots[j] if prover else None)
                eng.assert_zero("quantifier",
                                eng.lincomb([(1, fl[1])], const=1))
                wrem.append((off, fl))

            # rank comparisons against the reduction witness
            w_rank = bit_decompose(eng, wcode, nb_code, "step-red")[1:]
            for off, fl in wres:
                rb = bit_decompose(eng, off, nb_code, "step-red")[1:]
                gt, _ = compare_bits(eng, rb, w_rank)
                (bad,) = eng.mul_pairs([(fl[0], gt)])
                eng.assert_zero("step-red", bad)
            for off, fl in wrem:
                rb = bit_decompose(eng, off, nb_code, "step-red")[1:]
                gt, _ = compare_bits(eng, rb, w_rank)
                z = is_zero_flag(eng, off, "step-red")
                (zg,) = eng.mul_pairs([(z, gt)])
                eng.assert_zero("step-red", eng.lincomb(
                    [(1, z), (1, gt), (1, zg)], const=1))

        # witness quotients and Bezout cofactors for this step
        w0len = wc + 1 if not degree else wc + degree + 2
        bzlen = wc if not degree else wc + degree + 1
        if prover:
            ga = [eng.value_of(h) for h in coef_a] + [1]
            gb = [eng.value_of(h) for h in coef_b] + [1]
            if degree:
                cbar = res_roots + [v.w_code] + rem_roots
            else:
                cbar = (result + [0] * wc)[:wc]
            rhs_a = poly_from_roots(fld, cbar + [v.pivot_code] + [0] * wa)
            rhs_b = poly_from_roots(fld, cbar + [v.pivot_code ^ 1] + [0] * wb)
            q0, _ = poly_divmod(fld, rhs_a, ga)
            q1, _ = poly_divmod(fld, rhs_b, gb)
            w0_vals = (q0 + [0] * w0len)[:w0len]
            w1_vals = (q1 + [0] * w0len)[:w0len]
            bz_p, bz_q = _bezout_pair(fld, poly_from_roots(fld, cbar), bzlen)
        else:
            w0_vals = w1_vals = bz_p = bz_q = None
        w0 = eng.commit_witness(w0_vals, count=w0len)
        w1 = eng.commit_witness(w1_vals, count=w0len)
        pz = eng.commit_witness(bz_p, count=bzlen)
        qz = eng.commit_witness(bz_q, count=bzlen)

        (pt,) = eng.challenge(1)
        if degree:
            roots_res = [off for off, _ in wres]
            roots_rem = [off for off, _ in wrem]
            shift = lambda h: eng.lincomb([(1, h)], const=1)
            cfac = [("roots", roots_res), ("aff", wcode, 0),
                    ("roots", roots_rem)]
            cfac_bar = [("roots", [shift(h) for h in roots_res]),
                        ("aff", wcode, 1),
                        ("roots", [shift(h) for h in roots_rem])]
            popeq(eng, "step-red", pt, [
                (1, [("monic", cr), ("xpow", 1)]),
                (1, [("roots", roots_res), ("aff", wcode, 0)]),
            ])
            popeq(eng, "step-res", pt, [
                (1, [("monic", w0), ("monic", coef_a)]),
                (1, cfac + [("aff", pivot, 0), ("xpow", wa)]),
            ])
            popeq(eng, "step-res", pt, [
                (1, [("monic", w1), ("monic", coef_b)]),
                (1, cfac + [("aff", pivot, 1), ("xpow", wb)]),
            ])
            popeq(eng, "step-res", pt, [
                (1, [("poly", pz)] + cfac),
                (1, [("poly", qz)] + cfac_bar),
            ], const=1)
        else:
            popeq(eng, "step-res", pt, [
                (1, [("monic", w0), ("monic", coef_a)]),
                (1, [("monic", cr), ("aff", pivot, 0), ("xpow", wa)]),
            ])
            popeq(eng, "step-res", pt, [
                (1, [("monic", w1), ("monic", coef_b)]),
                (1, [("monic", cr), ("aff", pivot, 1), ("xpow", wb)]),
            ])
            crbar = compose_one_plus_x_handles(eng, cr)
            popeq(eng, "step-res", pt, [
                (1, [("poly", pz), ("monic", cr)]),
                (1, [("poly", qz), ("monic", crbar)]),
            ], const=1)
        last_result = cr

    for h in last_result:
        eng.assert_zero("final-clause", h)
    quant.finalize()
    for arr in arrays:
        arr.finalize()
    return {
        "cells": plan.cells,
        "steps": num_steps,
        "buckets": len(plan.buckets),
    }


# -- refutation/propositional entry point -----------------------------------------

def check_proof(eng: Engine, qbf, kind: str, num_steps: int, width: int,
                degree: int, plan: BucketPlan | None = None,
                trace: QResTrace | None = None) -> dict:
    """Run one full proof-checking session for a qres or prop trace.

    All parameters but the trace are public and must match on both
    roles; the trace is the prover's certificate.  Returns the stats
    dict on accept and raises SessionAbort on reject.
    """
    if kind not in ("qres", "prop"):
        raise ValueError("unknown proof kind %r" % kind)
    space = CodeSpace.for_instance(qbf)
    initial = [qbf.clause_codes(cl) for cl in qbf.clauses]
    if plan is None:
        plan = single_plan(width, len(initial), [(0, 0)] * num_steps)
    reason = validate_plan(plan, len(initial), num_steps,
                           [len(c) for c in initial])
    if kind == "prop" and degree != 0:
        reason = reason or "propositional traces do not reduce"
    if reason:
        eng._reject("plan")

    flags = quant_flags_for(space, kind)
    views = None
    if eng.role == PROVER:
        steps = list(trace.steps)[:num_steps] if trace is not None else []
        while len(steps) < num_steps:  # padded filler keeps the prover total
            steps.append(Step(0, 1, 1, 0, ()))
        views = lenient_views(space, flags, initial, steps)
    entries = [("public", codes) for codes in initial]
    stats = run_derivation(eng, flags, entries, plan, degree, views)
    finish_session(eng)
    return stats
