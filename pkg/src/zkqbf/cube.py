"""Committed checking of cube consensus proofs for true instances.

The prover holds initial cubes (assignments that satisfy every matrix
clause) and a consensus derivation ending in the empty cube.  Cubes are
committed exactly like clauses: monic polynomials with literal-code
roots, zero-padded to their bucket width.  The initial layer proves, per
cube,

  no clash   a Bezout pair for gcd(g, g(X+1)) = 1, so the cube never
             holds a literal and its complement, and
  coverage   one witness point per matrix clause that is a root of both
             the committed cube and the public unpadded clause
             polynomial; leaving the clause unpadded keeps the always
             present pad root 0 from standing in as a witness.

The step loop is the shared derivation engine with the flag table
swapped: pivots must be universal, removals existential, and the
reduction rank rule runs against the deepest remaining universal.
"""

from __future__ import annotations

from .backend import Engine, PROVER
from .certs import CodeSpace, CubeTrace, InitialCube, Step
from .gf import poly_from_roots
from .qres import (
    BucketPlan,
    _bezout_pair,
    build_plan,
    finish_session,
    lenient_views,
    quant_flags_for,
    run_derivation,
    single_plan,
    validate_plan,
)
from .zkcore import (
    commit_clause_poly,
    compose_one_plus_x_handles,
    eval_committed_poly,
    eval_public_poly,
    popeq,
    powers_of,
)


def plan_for_cubes(qbf, trace: CubeTrace, chunk: int = 0) -> BucketPlan:
    """Bucket plan a prover derives from its cube certificate."""
    space = CodeSpace.for_instance(qbf)
    flags = quant_flags_for(space, "cube")
    initial = [_cube_codes(space, c) for c in trace.cubes]
    views = lenient_views(space, flags, initial, trace.steps)
    sources = [(v.prem_a, v.prem_b) for v in views]
    if chunk <= 0:
        return single_plan(trace.width, len(initial), sources)
    widths = [len(c) for c in initial] + [len(v.result) for v in views]
    return build_plan(widths, sources, chunk)


def _cube_codes(space: CodeSpace, cube: InitialCube):
    codes = []
    for lit in cube.lits:
        codes.append(space.code(lit) if abs(lit) in space.rank else 1)
    return sorted(codes)


def check_cube_proof(eng: Engine, qbf, num_cubes: int, num_steps: int,
                     width: int, degree: int, plan: BucketPlan | None = None,
                     trace: CubeTrace | None = None) -> dict:
    """Run one full session proving the instance true by cube consensus."""
    space = CodeSpace.for_instance(qbf)
    prover = eng.role == PROVER
    matrix = [qbf.clause_codes(cl) for cl in qbf.clauses]

    if plan is None:
        plan = single_plan(width, num_cubes, [(0, 0)] * num_steps)
    reason = validate_plan(plan, num_cubes, num_steps,
                           [0] * num_cubes)  # cube widths are private
    if num_cubes < 1:
        reason = reason or "no initial cubes"
    if reason:
        eng._reject("plan")

    flags = quant_flags_for(space, "cube")
    views = None
    cubes = []
    if prover:
        got = list(trace.cubes)[:num_cubes] if trace is not None else []
        while len(got) < num_cubes:  # padded filler keeps the prover total
            got.append(InitialCube((), (1,) * len(matrix)))
        cubes = got
        steps = list(trace.steps)[:num_steps] if trace is not None else []
        while len(steps) < num_steps:
            steps.append(Step(0, 1, 1, 0, ()))
        initial = [_cube_codes(space, c) for c in cubes]
        views = lenient_views(space, flags, initial, steps)

    # commit every cube and prove it is a clash-free satisfying assignment
    fld = eng.fld
    entries = []
    for i in range(num_cubes):
        wb = plan.buckets[plan.slot_bucket[i]]
        codes = initial[i] if prover else None
        coeffs = commit_clause_poly(eng, codes, wb)
        entries.append(("handles", coeffs))

        if prover:
            padded = (list(codes)[:wb] + [0] * wb)[:wb]
            bz_p, bz_q = _bezout_pair(fld, poly_from_roots(fld, padded), wb)
        else:
            bz_p = bz_q = None
        pz = eng.commit_witness(bz_p, count=wb)
        qz = eng.commit_witness(bz_q, count=wb)

        if prover:
            wits = list(cubes[i].witnesses)[:len(matrix)]
            while len(wits) < len(matrix):
                wits.append(1)
            tvals = [space.code(w) if abs(w) in space.rank else 1
                     for w in wits]
        for j, clause in enumerate(matrix):
            t = eng.commit_witness([tvals[j]] if prover else None, count=1)[0]
            coeffs_j = poly_from_roots(fld, clause)
            pows = powers_of(eng, t, max(wb, len(coeffs_j) - 1))
            cube_at_t = eval_committed_poly(eng, coeffs, pows)
            clause_at_t = eval_public_poly(eng, coeffs_j, pows)
            eng.assert_zero("init-cube", cube_at_t)
            eng.assert_zero("init-cube", clause_at_t)

        (pt,) = eng.challenge(1)
        cbar = compose_one_plus_x_handles(eng, coeffs)
        popeq(eng, "init-cube", pt, [
            (1, [("poly", pz), ("monic", coeffs)]),
            (1, [("poly", qz), ("monic", cbar)]),
        ], const=1)

    stats = run_derivation(eng, flags, entries, plan, degree, views)
    stats["cubes"] = num_cubes
    finish_session(eng)
    return stats
