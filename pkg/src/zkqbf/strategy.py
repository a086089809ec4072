"""Committed verification of winning strategies (Herbrand and Skolem).

The prover holds a circuit strategy for one player: and-gates over
opponent literals, earlier gate outputs, and the constant sentinels.
Acceptance means the strategy is well formed and that substituting it
into the matrix (for Herbrand) or the negated matrix (for Skolem) yields
a propositionally unsatisfiable formula, witnessed by a private
resolution refutation of the gate clauses plus the public section.

Well-formedness runs in three stages that fail independently:

  wf-uniqueness  every gate output is one of the player's own variables
                 or an auxiliary definition, and no variable is defined
                 twice (a sorted copy, a product-permutation identity,
                 and strict bitwise increase),
  wf-acyclicity  every gate input is a sentinel, an opponent literal, or
                 an earlier output, enforced by bounded hidden reads
                 from a reference table holding the free codes followed
                 by the gate outputs in definition order,
  wf-prefix      the recorded dependency depth of each gate is the max
                 of its inputs' depths and stays strictly inside the
                 rank of the output variable, so a variable's moves
                 never depend on anything quantified at or inside it.
                 Auxiliary outputs rank beyond every real variable,
                 which makes the same bound vacuous for them.

The substitution stage rebuilds the three and-gate clauses of every gate
as committed polynomials.  A duplicate-input gate would give the third
clause a double root where the plain layout collapses the repeat, so the
prover commits a deduplicated copy b* of the second negated input with
(b*+b)(a+b) = 0 and (b*+b)b* = 0: b* must equal b unless the negated
inputs coincide, in which case it may fall to the pad root instead.
"""

from __future__ import annotations

from .backend import Engine, PROVER
from .certs import (
    TOP_VAR,
    CodeSpace,
    Gate,
    QResTrace,
    Step,
    Strategy,
    negate_cnf,
    substitution_layout,
)
from .qres import (
    BucketPlan,
    build_plan,
    finish_session,
    lenient_views,
    quant_flags_for,
    run_derivation,
    single_plan,
    validate_plan,
)
from .zkcore import ZkArray, bit_decompose, compare_bits, popeq, set_membership

OWN_QUANT = {"herbrand": "a", "skolem": "e"}
OPP_QUANT = {"herbrand": "e", "skolem": "a"}


def public_section(qbf, kind: str, num_aux: int):
    """Extended code space and public clause slots both roles can compute.

    Auxiliary ranks follow the real prefix in definition order; for a
    Skolem strategy the selector encoding of the negated matrix is a
    fixed function of the matrix and the auxiliary count, so its codes
    are public as well.
    """
    space = CodeSpace.for_instance(qbf)
    base = qbf.num_vars
    for k in range(num_aux):
        space.add_var(base + 1 + k)
    if kind == "herbrand":
        codes = [sorted(space.code(l) for l in cl) for cl in qbf.clauses]
    else:
        next_var = max(space.rank) + 1 if space.rank else 1
        encoded, sels, out_var = negate_cnf(qbf.clauses, next_var)
        for v in sels + [out_var]:
            space.add_var(v)
        codes = [sorted(space.code(l) for l in cl) for cl in encoded]
    return space, codes


def plan_for_strategy(qbf, strategy: Strategy, trace: QResTrace,
                      chunk: int = 0) -> BucketPlan:
    """Bucket plan for a strategy session, derived prover-side."""
    strategy = _sanitize(qbf, strategy, len(strategy.gates))
    space, clauses = substitution_layout(qbf, strategy)
    flags = quant_flags_for(space, "prop")
    num_gates = len(strategy.gates)
    views = lenient_views(space, flags, clauses, trace.steps)
    sources = [(v.prem_a, v.prem_b) for v in views]
    if chunk <= 0:
        return single_plan(max(3, trace.width), len(clauses), sources)
    widths = (_slot_widths(num_gates, clauses[3 * num_gates:])
              + [len(v.result) for v in views])
    return build_plan(widths, sources, chunk)


def _slot_widths(num_gates, section):
    # committed gate clauses always occupy 2/2/3 roots before padding
    return [2, 2, 3] * num_gates + [len(c) for c in section]


def verify_strategy(eng: Engine, qbf, kind: str, num_gates: int,
                    num_aux: int, num_steps: int, width: int,
                    plan: BucketPlan | None = None,
                    strategy: Strategy | None = None,
                    trace: QResTrace | None = None) -> dict:
    """Run one full strategy-verification session.

    kind, num_gates, num_aux, num_steps, width, and the plan are public;
    strategy and its refutation trace belong to the prover.
    """
    if kind not in OWN_QUANT:
        raise ValueError("unknown strategy kind %r" % kind)
    prover = eng.role == PROVER
    space, section = public_section(qbf, kind, num_aux)
    flags = quant_flags_for(space, "prop")
    num_initial = 3 * num_gates + len(section)

    if plan is None:
        plan = single_plan(max(3, width), num_initial, [(0, 0)] * num_steps)
    reason = validate_plan(plan, num_initial, num_steps,
                           _slot_widths(num_gates, section))
    if reason:
        eng._reject("plan")

    views = None
    if prover:
        strategy = _sanitize(qbf, strategy, num_gates)
        layout_space, layout = substitution_layout(qbf, strategy) \
            if strategy else (space, [[]] * num_initial)
        gvals = _encode_gates(layout_space, strategy, num_gates)
        steps = list(trace.steps)[:num_steps] if trace is not None else []
        while len(steps) < num_steps:
            steps.append(Step(0, 1, 1, 0, ()))
        views = lenient_views(layout_space,
                              quant_flags_for(layout_space, "prop"),
                              layout, steps)
    else:
        gvals = None
    gh = eng.commit_witness(gvals, count=3 * num_gates)
    outs = [gh[3 * i] for i in range(num_gates)]
    ins = [(gh[3 * i + 1], gh[3 * i + 2]) for i in range(num_gates)]

    own_codes = sorted(space.code(v) for v, q in space.quant.items()
                       if q == OWN_QUANT[kind])
    own_codes += sorted(space.code(qbf.num_vars + 1 + k)
                        for k in range(num_aux))
    if num_gates:
        _check_well_formed(eng, space, kind, own_codes, outs, ins)
    entries = _gate_entries(eng, plan, outs, ins)
    for codes in section:
        entries.append(("public", codes))

    stats = run_derivation(eng, flags, entries, plan, 0, views)
    stats["gates"] = num_gates
    finish_session(eng)
    return stats


def _sanitize(qbf, strategy, num_gates):
    """Trim to the public gate count and collapse unknown input names to T.

    A gate input may name only a prefix variable, a gate output, or the
    sentinel; anything else has no code, so the prover commits the true
    sentinel there and lets the session judge the collapsed circuit.
    """
    if strategy is None:
        return None
    gates = list(strategy.gates)[:num_gates]
    known = {v for _, blk in qbf.prefix for v in blk} | {TOP_VAR}
    known.update(g.out for g in gates)
    fixed = []
    for g in gates:
        a = g.a if g.a[0] in known else (TOP_VAR, True)
        b = g.b if g.b[0] in known else (TOP_VAR, True)
        fixed.append(Gate(g.out, a, b))
    return Strategy(strategy.kind, tuple(fixed), strategy.aux_count)


def _encode_gates(space, strategy, num_gates):
    vals = []
    for g in (strategy.gates if strategy else ()):
        for lit in ((g.out, True), g.a, g.b):
            vals.append(space.gate_code(lit))
    while len(vals) < 3 * num_gates:
        vals.append(1)
    return vals


def _check_well_formed(eng: Engine, space: CodeSpace, kind: str, own_codes,
                       outs, ins):
    prover = eng.role == PROVER
    num_gates = len(outs)
    nb = max(1, (space.num_codes - 1).bit_length())

    # -- condition 1: outputs are own or auxiliary variables, no repeats
    for o in outs:
        set_membership(eng, o, own_codes, "wf-uniqueness")
    if prover:
        svals = sorted(eng.value_of(h) for h in outs)
    else:
        svals = None
    sh = eng.commit_witness(svals, count=num_gates)
    (pt,) = eng.challenge(1)
    popeq(eng, "wf-uniqueness", pt, [
        (1, [("roots", outs)]),
        (1, [("roots", sh)]),
    ])
    sbits = [bit_decompose(eng, h, nb, "wf-uniqueness") for h in sh]
    for i in range(num_gates - 1):
        gt, _ = compare_bits(eng, sbits[i + 1], sbits[i])
        eng.assert_zero("wf-uniqueness", eng.lincomb([(1, gt)], const=1))

    # -- conditions 2 and 3: the reference table of readable codes
    opp = sorted(c for c in range(2, space.num_codes)
                 if space.quant_of_code(c) == OPP_QUANT[kind])
    free = [(0, 0), (1, 0)] + [(c, c >> 1) for c in opp]
    n_free = len(free)
    refs = ZkArray(eng, "wf-acyclicity", width=2,
                   index_bits=max(1, (n_free + num_gates).bit_length()))
    for code, dep in free:
        refs.append([eng.commit_public(code), eng.commit_public(dep)])

    if prover:
        idx_of = {code: i for i, (code, _) in enumerate(free)}
        deps = []
        entry_dep = [d for _, d in free]
        var_entry = {}
        for i, o in enumerate(outs):
            d = 0
            for x in ins[i]:
                xv = eng.value_of(x)
                if xv in idx_of:
                    d = max(d, entry_dep[idx_of[xv]])
                elif xv >> 1 in var_entry:
                    d = max(d, entry_dep[var_entry[xv >> 1]])
            deps.append(d)
            var_entry[eng.value_of(o) >> 1] = n_free + i
            entry_dep.append(d)
    else:
        deps = None
    dh = eng.commit_witness(deps, count=num_gates)
    for i in range(num_gates):
        refs.append([outs[i], dh[i]])

    for i in range(num_gates):
        in_deps = []
        for x in ins[i]:
            idx = None
            if prover:
                xv = eng.value_of(x)
                idx = idx_of.get(xv)
                if idx is None:
                    idx = var_entry.get(xv >> 1, 0)
                if idx >= n_free + i:
                    idx = 0
            off, payload = refs.read(index=idx, bound=n_free + i)
            code, dep = payload
            # the input names the entry's variable, either polarity
            d1 = eng.lincomb([(1, x), (1, code)])
            d2 = eng.lincomb([(1, x), (1, code)], const=1)
            (m,) = eng.mul_pairs([(d1, d2)])
            eng.assert_zero("wf-acyclicity", m)
            in_deps.append(dep)

        # recorded depth is the max of the input depths ...
        da, db = in_deps
        abits = bit_decompose(eng, da, nb - 1, "wf-prefix")
        bbits = bit_decompose(eng, db, nb - 1, "wf-prefix")
        gt, _ = compare_bits(eng, abits, bbits)
        diff = eng.lincomb([(1, da), (1, db)])
        (sel,) = eng.mul_pairs([(gt, diff)])
        mx = eng.lincomb([(1, db), (1, sel)])
        eng.assert_zero("wf-prefix", eng.lincomb([(1, dh[i]), (1, mx)]))
        # ... and stays strictly outside the output variable's rank
        obits = bit_decompose(eng, outs[i], nb, "wf-prefix")[1:]
        dbits = bit_decompose(eng, dh[i], nb - 1, "wf-prefix")
        gt2, _ = compare_bits(eng, obits, dbits)
        eng.assert_zero("wf-prefix", eng.lincomb([(1, gt2)], const=1))

    refs.finalize()


def _gate_entries(eng: Engine, plan: BucketPlan, outs, ins):
    """Committed clause polynomials for every gate's three and-clauses."""
    zero = eng.commit_public(0)
    entries = []
    for i in range(len(outs)):
        o = outs[i]
        a, b = ins[i]
        xbar = eng.lincomb([(1, o)], const=1)
        abar = eng.lincomb([(1, a)], const=1)
        bbar = eng.lincomb([(1, b)], const=1)

        if eng.role == PROVER:
            av, bv = eng.value_of(abar), eng.value_of(bbar)
            bstar_val = [0 if av == bv else bv]
        else:
            bstar_val = None
        (bstar,) = eng.commit_witness(bstar_val, count=1)
        d = eng.lincomb([(1, bstar), (1, bbar)])
        same = eng.lincomb([(1, a), (1, b)])  # abar + bbar
        g1, g2 = eng.mul_pairs([(d, same), (d, bstar)])
        eng.assert_zero("subst", g1)
        eng.assert_zero("subst", g2)

        m1, m2, mab = eng.mul_pairs([(xbar, a), (xbar, b), (abar, bstar)])
        s3 = eng.lincomb([(1, abar), (1, bstar)])
        e3, os3 = eng.mul_pairs([(o, mab), (o, s3)])
        e2 = eng.lincomb([(1, mab), (1, os3)])
        e1 = eng.lincomb([(1, o), (1, s3)])

        for roots, coeffs in (((xbar, a), [m1, eng.lincomb([(1, xbar), (1, a)])]),
                              ((xbar, b), [m2, eng.lincomb([(1, xbar), (1, b)])]),
                              (None, [e3, e2, e1])):
            slot = len(entries)
            w = plan.buckets[plan.slot_bucket[slot]]
            pads = [zero] * (w - len(coeffs))
            entries.append(("handles", pads + coeffs))
            eng.extra["cells"] = eng.extra.get("cells", 0) + w
    return entries
