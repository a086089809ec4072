"""Prenex-CNF formulas: QDIMACS parsing, normalization, literal codes.

The accepted input is the usual QDIMACS subset: a ``p cnf V C`` header,
quantifier lines ``a|e v1 v2 ... 0`` outermost first, then clause lines of
nonzero literals each terminated by 0.  Variables that occur in the matrix
but in no quantifier line are bound by an implicit outermost existential
block.

Normalization happens at load time and is public: duplicate literals are
dropped, tautological clauses are a parse error, and every clause is
universally reduced (universal literals quantified inside the deepest
existential literal of the clause are removed).  Downstream checkers rely
on this: committed refutations may assume their premises arrive reduced.

Each prefix variable gets a rank, 1 for the outermost variable.  A literal
is coded as rank*2 + sign with sign 1 for positive polarity, so a literal
and its complement differ exactly in the lowest bit.  Codes 0 and 1 are
reserved: 0 is the padding root (and the code blocks of an empty clause),
1 marks the always-true sentinel.
"""

from __future__ import annotations

from .gf import Field, poly_from_roots

BOT = 0  # padding root, also the "false" sentinel
TOP = 1  # "true" sentinel


class QbfError(ValueError):
    """Malformed or non-conforming QDIMACS input."""


class Qbf:
    """A validated, normalized prenex-CNF instance.

    prefix: list of (quantifier, variables) with quantifier 'a' or 'e',
    outermost block first, adjacent equal quantifiers merged.
    clauses: lists of DIMACS literals, each sorted by literal code.
    """

    def __init__(self, num_vars: int, prefix: list[tuple[str, list[int]]],
                 clauses: list[list[int]]):
        self.num_vars = num_vars
        seen: set[int] = set()
        for quant, block in prefix:
            if quant not in ("a", "e"):
                raise QbfError("bad quantifier %r" % (quant,))
            for v in block:
                self._check_var(v)
                if v in seen:
                    raise QbfError("variable %d quantified twice" % v)
                seen.add(v)
        free = sorted({abs(l) for cl in clauses for l in cl} - seen)
        for v in free:
            self._check_var(v)
        blocks: list[tuple[str, list[int]]] = []
        for quant, block in ([("e", free)] if free else []) + list(prefix):
            if not block:
                continue
            if blocks and blocks[-1][0] == quant:
                blocks[-1][1].extend(block)
            else:
                blocks.append((quant, list(block)))
        self.prefix = blocks

        self.rank: dict[int, int] = {}
        self.quant: dict[int, str] = {}
        for quant, block in blocks:
            for v in block:
                self.rank[v] = len(self.rank) + 1
                self.quant[v] = quant
        self.clauses = [self._normalize(cl) for cl in clauses]

    def _check_var(self, v: int) -> None:
        if not 1 <= v <= self.num_vars:
            raise QbfError("variable %d out of range 1..%d" % (v, self.num_vars))

    def _normalize(self, clause: list[int]) -> list[int]:
        lits = set()
        for l in clause:
            if l == 0 or abs(l) not in self.rank:
                raise QbfError("bad literal %d" % l)
            if -l in lits:
                raise QbfError("tautological clause: %d and %d" % (-l, l))
            lits.add(l)
        inner_e = max((self.rank[abs(l)] for l in lits if self.quant[abs(l)] == "e"),
                      default=0)
        kept = [l for l in lits
                if self.quant[abs(l)] == "e" or self.rank[abs(l)] < inner_e]
        return sorted(kept, key=self.code)

    # -- literal codes -------------------------------------------------------

    def code(self, lit: int) -> int:
        return self.rank[abs(lit)] << 1 | (lit > 0)

    def lit_of_code(self, code: int) -> int:
        v = self._var_of_rank[code >> 1]
        return v if code & 1 else -v

    @property
    def _var_of_rank(self) -> dict[int, int]:
        cache = getattr(self, "_vor", None)
        if cache is None:
            cache = self._vor = {r: v for v, r in self.rank.items()}
        return cache

    def clause_codes(self, clause: list[int]) -> list[int]:
        return sorted(self.code(l) for l in clause)

    def codes_of_quant(self, quant: str) -> frozenset[int]:
        return frozenset(self.code(s * v) for v, q in self.quant.items()
                         if q == quant for s in (1, -1))

    @property
    def exist_codes(self) -> frozenset[int]:
        return self.codes_of_quant("e")

    @property
    def univ_codes(self) -> frozenset[int]:
        return self.codes_of_quant("a")

    @property
    def matrix_width(self) -> int:
        return max((len(cl) for cl in self.clauses), default=0)

    def vars_of_quant(self, quant: str) -> list[int]:
        return [v for v, q in self.quant.items() if q == quant]

    def __eq__(self, other) -> bool:
        return (isinstance(other, Qbf)
                and (self.num_vars, self.prefix, self.clauses)
                == (other.num_vars, other.prefix, other.clauses))

    def __repr__(self) -> str:
        return "Qbf(vars=%d, blocks=%d, clauses=%d)" % (
            self.num_vars, len(self.prefix), len(self.clauses))


def parse_qdimacs(text: str) -> Qbf:
    header = None
    prefix: list[tuple[str, list[int]]] = []
    pending: list[int] = []
    clauses: list[list[int]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        toks = line.split()
        if toks[0] == "p":
            if header is not None or toks[:2] != ["p", "cnf"] or len(toks) != 4:
                raise QbfError("malformed header: %r" % line)
            try:
                header = (int(toks[2]), int(toks[3]))
            except ValueError:
                raise QbfError("malformed header: %r" % line) from None
            if header[0] < 0 or header[1] < 0:
                raise QbfError("malformed header: %r" % line)
            continue
        if toks[0] in ("a", "e"):
            if header is None:
                raise QbfError("quantifier line before header")
            if clauses or pending:
                raise QbfError("quantifier line after clauses")
            body = _ints(toks[1:], line)
            if not body or body[-1] != 0 or any(v <= 0 for v in body[:-1]):
                raise QbfError("malformed quantifier line: %r" % line)
            prefix.append((toks[0], body[:-1]))
            continue
        if header is None:
            raise QbfError("clause line before header")
        for t in _ints(toks, line):
            if t == 0:
                clauses.append(pending)
                pending = []
            else:
                pending.append(t)
    if header is None:
        raise QbfError("missing p cnf header")
    if pending:
        raise QbfError("unterminated clause: %r" % (pending,))
    return Qbf(header[0], prefix, clauses)


def _ints(toks: list[str], line: str) -> list[int]:
    try:
        return [int(t) for t in toks]
    except ValueError:
        raise QbfError("bad token in line %r" % line) from None


def serialize_qdimacs(qbf: Qbf) -> str:
    out = ["p cnf %d %d" % (qbf.num_vars, len(qbf.clauses))]
    for quant, block in qbf.prefix:
        out.append("%s %s 0" % (quant, " ".join(map(str, block))))
    for cl in qbf.clauses:
        out.append("%s 0" % " ".join(map(str, cl)) if cl else "0")
    return "\n".join(out) + "\n"


def clause_poly(fld: Field, codes: list[int], width: int) -> list[int]:
    """Monic width-degree polynomial with the literal codes as roots.

    Short clauses are padded with roots at 0, so the result always has
    exactly width+1 coefficients.  The empty clause at width w is X^w.
    """
    if len(codes) > width:
        raise ValueError("clause of %d literals exceeds width %d" % (len(codes), width))
    return poly_from_roots(fld, list(codes) + [BOT] * (width - len(codes)))
