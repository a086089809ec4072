"""QDIMACS loading, normalization, literal codes, clause polynomials."""

import random

import pytest

from zkqbf.gf import field, poly_eval
from zkqbf.qbf import (
    BOT,
    TOP,
    Qbf,
    QbfError,
    clause_poly,
    parse_qdimacs,
    serialize_qdimacs,
)

XOR_GAME = """\
c forall x1 exists x2 forall x3: xor-ish matrix
p cnf 3 4
a 1 0
e 2 0
a 3 0
1 2 3 0
1 -2 -3 0
-1 2 -3 0
-1 -2 3 0
"""


def test_parse_phi1_reduces_trailing_universals():
    q = parse_qdimacs(XOR_GAME)
    assert q.num_vars == 3
    assert q.prefix == [("a", [1]), ("e", [2]), ("a", [3])]
    # x3 is universal and inner to the only existential, so it drops.
    assert q.clauses == [[1, 2], [1, -2], [-1, 2], [-1, -2]]
    assert q.matrix_width == 2


def test_ranks_and_codes():
    q = parse_qdimacs(XOR_GAME)
    assert [q.rank[v] for v in (1, 2, 3)] == [1, 2, 3]
    assert q.code(1) == 3 and q.code(-1) == 2
    assert q.code(2) == 5 and q.code(-2) == 4
    assert q.code(3) == 7 and q.code(-3) == 6
    assert q.code(3) ^ q.code(-3) == 1
    assert q.lit_of_code(6) == -3 and q.lit_of_code(5) == 2
    assert q.exist_codes == frozenset({4, 5})
    assert q.univ_codes == frozenset({2, 3, 6, 7})
    assert BOT == 0 and TOP == 1
    assert not (q.exist_codes | q.univ_codes) & {BOT, TOP}


def test_clause_poly_frozen():
    fld = field(8)
    # codes {3, 4} at width 2: (X+3)(X+4) = X^2 + 7X + 12
    assert clause_poly(fld, [3, 4], 2) == [12, 7, 1]
    # codes {2, 5} at width 3 gain one padding root at 0
    p = clause_poly(fld, [2, 5], 3)
    assert p == [0, 10, 7, 1]
    for r in (2, 5, 0):
        assert poly_eval(fld, p, r) == 0
    # empty clause at width 2 is X^2
    assert clause_poly(fld, [], 2) == [0, 0, 1]
    with pytest.raises(ValueError):
        clause_poly(fld, [2, 3, 5], 2)


def test_tautology_is_parse_error():
    with pytest.raises(QbfError, match="tautolog"):
        parse_qdimacs("p cnf 1 1\ne 1 0\n1 -1 0\n")


def test_universal_tautology_rejected_not_reduced():
    # If reduction ran first, (u or not u) would collapse to the empty
    # clause and flip the semantics; it must error out instead.
    with pytest.raises(QbfError, match="tautolog"):
        parse_qdimacs("p cnf 1 1\na 1 0\n1 -1 0\n")


def test_duplicate_literals_dropped():
    q = parse_qdimacs("p cnf 2 1\ne 1 2 0\n1 1 2 0\n")
    assert q.clauses == [[1, 2]]


def test_free_vars_get_outer_exists_block():
    q = parse_qdimacs("p cnf 3 2\na 2 0\n1 2 0\n3 -1 0\n")
    assert q.prefix == [("e", [1, 3]), ("a", [2])]
    # universal var 2 is innermost, so it reduces out of clause one
    assert q.clauses == [[1], [-1, 3]]


def test_adjacent_blocks_merge():
    q = parse_qdimacs("p cnf 3 1\ne 1 0\ne 2 0\na 3 0\n1 2 0\n")
    assert q.prefix == [("e", [1, 2]), ("a", [3])]


def test_all_universal_clause_reduces_to_empty():
    q = parse_qdimacs("p cnf 2 1\na 1 2 0\n1 2 0\n")
    assert q.clauses == [[]]


def test_parse_errors():
    bad = [
        ("p cnf x 1\n", "header"),
        ("p cnf 1 1\np cnf 1 1\n", "header"),
        ("e 1 0\n", "before header"),
        ("p cnf 2 1\n1 2 0\ne 1 0\n", "after clauses"),
        ("p cnf 2 1\ne 1 2\n", "quantifier"),
        ("p cnf 2 1\ne 0 0\n", "quantifier"),
        ("p cnf 1 1\ne 1 0\ne 1 0\n", "twice"),
        ("p cnf 1 1\ne 1 0\n2 0\n", "out of range"),
        ("p cnf 1 1\ne 1 0\n1\n", "unterminated"),
        ("p cnf 1 1\ne 1 0\n1 zz 0\n", "token"),
        ("", "header"),
    ]
    for text, needle in bad:
        with pytest.raises(QbfError, match=needle):
            parse_qdimacs(text)


def test_roundtrip_phi1():
    q = parse_qdimacs(XOR_GAME)
    assert parse_qdimacs(serialize_qdimacs(q)) == q


def test_roundtrip_random():
    rng = random.Random(0xD1A)
    for _ in range(60):
        nv = rng.randrange(1, 9)
        shuffled = list(range(1, nv + 1))
        rng.shuffle(shuffled)
        prefix = []
        while shuffled:
            take = rng.randrange(1, len(shuffled) + 1)
            prefix.append((rng.choice("ae"), shuffled[:take]))
            shuffled = shuffled[take:]
        clauses = []
        for _ in range(rng.randrange(1, 7)):
            size = rng.randrange(1, min(nv, 4) + 1)
            cvars = rng.sample(range(1, nv + 1), size)
            clauses.append([v * rng.choice((1, -1)) for v in cvars])
        try:
            q = Qbf(nv, prefix, clauses)
        except QbfError:
            continue  # random tautology
        assert parse_qdimacs(serialize_qdimacs(q)) == q


def test_codes_fit_field():
    q = parse_qdimacs(XOR_GAME)
    top_code = max(q.code(l) for cl in q.clauses for l in cl)
    assert top_code < field(8).size
