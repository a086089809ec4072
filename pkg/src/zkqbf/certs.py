"""Private certificate formats: resolution traces, cube traces, strategies.

Three line-oriented text formats, all prover-side inputs that never cross
the wire:

``p zkqres R w d`` (or ``p zkprop`` for plain propositional traces)
    One line per derivation step::

        <newId> <premA> <premB> <pivotLit> r <removedLits...> 0

    Matrix clauses implicitly occupy ids 1..L; derived ids continue from
    L+1 in order.  The pivot is written as the positive literal and premA
    is the premise containing it; pivot 0 means "copy premA" (which must
    equal premB) and is how reduction-only steps are written.  The
    removed list holds literals dropped by universal reduction after the
    resolvent is formed.

``p zkcube I R w d``
    I pairs of lines ``c <cubeLits> 0`` and ``w <witnessLits> 0`` (one
    witness literal per matrix clause), then R step lines in the grammar
    above with ids starting at I+1.  Pivots are universal and removed
    literals existential; the checker enforces that, not the parser.

``p zkstrat herbrand|skolem <numGates> <numAux>``
    Lines ``g <outVar> <litA> <litB>`` meaning out := litA AND litB, in
    topological order.  The tokens ``T`` and ``-T`` denote the public
    always-true input and its negation, for constants and pass-throughs.

Parsers establish structure only; logical validity is the checkers' job.
"""

from __future__ import annotations

from dataclasses import dataclass

TOP_VAR = 0  # gate-input variable index reserved for the constant-true sentinel

Lit = tuple[int, bool]  # (variable, positive); variable TOP_VAR is the sentinel


class CertError(ValueError):
    """Structurally invalid certificate text."""


@dataclass(frozen=True)
class Step:
    new_id: int
    prem_a: int
    prem_b: int
    pivot: int  # positive DIMACS literal, or 0 to copy prem_a
    removed: tuple[int, ...]

    @property
    def is_copy(self) -> bool:
        return self.pivot == 0


@dataclass(frozen=True)
class QResTrace:
    kind: str  # 'qres' or 'prop'
    width: int
    degree: int
    steps: tuple[Step, ...]

    @property
    def num_steps(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class InitialCube:
    lits: tuple[int, ...]
    witnesses: tuple[int, ...]  # the satisfied literal chosen in each matrix clause


@dataclass(frozen=True)
class CubeTrace:
    width: int
    degree: int
    cubes: tuple[InitialCube, ...]
    steps: tuple[Step, ...]

    @property
    def num_steps(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class Gate:
    out: int
    a: Lit
    b: Lit


@dataclass(frozen=True)
class Strategy:
    kind: str  # 'herbrand' or 'skolem'
    gates: tuple[Gate, ...]
    aux_count: int


# -- trace parsing -----------------------------------------------------------

def _trace_lines(text: str) -> list[list[str]]:
    out = []
    for raw in text.splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            out.append(line.split())
    return out


def _parse_step(toks: list[str], expect_id: int, degree: int) -> Step:
    try:
        vals = [int(t) for t in toks if t != "r"]
    except ValueError:
        raise CertError("bad token in step line %r" % " ".join(toks)) from None
    if len(toks) != len(vals) + 1 or len(vals) < 5 or toks[4] != "r":
        raise CertError("malformed step line %r" % " ".join(toks))
    new_id, prem_a, prem_b, pivot = vals[:4]
    removed, term = vals[4:-1], vals[-1]
    if term != 0 or any(l == 0 for l in removed):
        raise CertError("step %d: removed list must end with a single 0" % new_id)
    if new_id != expect_id:
        raise CertError("step id %d out of sequence (expected %d)" % (new_id, expect_id))
    for p in (prem_a, prem_b):
        if not 1 <= p < new_id:
            raise CertError("step %d: premise %d is not an earlier id" % (new_id, p))
    if pivot < 0:
        raise CertError("step %d: pivot written negatively (premA holds the "
                        "positive literal)" % new_id)
    if pivot == 0 and prem_a != prem_b:
        raise CertError("step %d: copy step must repeat its premise" % new_id)
    if len(removed) > degree:
        raise CertError("step %d: %d removed literals exceed degree %d"
                        % (new_id, len(removed), degree))
    return Step(new_id, prem_a, prem_b, pivot, tuple(removed))


def parse_trace(text: str, kind: str = "qres") -> QResTrace | CubeTrace:
    if kind not in ("qres", "prop", "cube"):
        raise ValueError("unknown trace kind %r" % kind)
    lines = _trace_lines(text)
    if not lines or lines[0][0] != "p":
        raise CertError("missing trace header")
    head = lines[0]
    if kind == "cube":
        if len(head) != 6 or head[1] != "zkcube":
            raise CertError("malformed header %r" % " ".join(head))
        num_cubes, num_steps, width, degree = map(int, head[2:])
        return _parse_cube_body(lines[1:], num_cubes, num_steps, width, degree)
    if len(head) != 5 or head[1] != "zk" + kind:
        raise CertError("malformed header %r" % " ".join(head))
    num_steps, width, degree = map(int, head[2:])
    if min(num_steps, width, degree) < 0 or width == 0:
        raise CertError("bad header parameters %r" % " ".join(head))
    steps = []
    start = None
    for toks in lines[1:]:
        if start is None:
            try:
                start = int(toks[0])
            except ValueError:
                raise CertError("bad step id %r" % toks[0]) from None
            if start < 2:
                raise CertError("first derived id %d leaves no room for premises" % start)
        steps.append(_parse_step(toks, start + len(steps), degree))
    if len(steps) != num_steps:
        raise CertError("header announces %d steps, found %d" % (num_steps, len(steps)))
    return QResTrace(kind, width, degree, tuple(steps))


def _parse_cube_body(lines: list[list[str]], num_cubes: int, num_steps: int,
                     width: int, degree: int) -> CubeTrace:
    if min(num_cubes, num_steps, width, degree) < 0 or width == 0 or num_cubes == 0:
        raise CertError("bad cube header parameters")
    cubes = []
    i = 0
    while len(cubes) < num_cubes:
        if i + 1 >= len(lines) or lines[i][0] != "c" or lines[i + 1][0] != "w":
            raise CertError("cube %d: expected a c line then a w line" % (len(cubes) + 1))
        lits = _lit_list(lines[i][1:], "cube %d" % (len(cubes) + 1))
        wits = _lit_list(lines[i + 1][1:], "witness list %d" % (len(cubes) + 1))
        if len(lits) > width:
            raise CertError("cube %d wider than width field %d" % (len(cubes) + 1, width))
        cubes.append(InitialCube(tuple(lits), tuple(wits)))
        i += 2
    steps = []
    for toks in lines[i:]:
        steps.append(_parse_step(toks, num_cubes + 1 + len(steps), degree))
    if len(steps) != num_steps:
        raise CertError("header announces %d steps, found %d" % (num_steps, len(steps)))
    return CubeTrace(width, degree, tuple(cubes), tuple(steps))


def _lit_list(toks: list[str], where: str) -> list[int]:
    try:
        vals = [int(t) for t in toks]
    except ValueError:
        raise CertError("bad token in %s" % where) from None
    if not vals or vals[-1] != 0 or any(v == 0 for v in vals[:-1]):
        raise CertError("%s must be nonzero literals ending with 0" % where)
    return vals[:-1]


def serialize_trace(trace: QResTrace | CubeTrace, first_id: int | None = None) -> str:
    """Render back to text.  first_id is required for an empty-step qres trace."""
    if isinstance(trace, CubeTrace):
        out = ["p zkcube %d %d %d %d" % (len(trace.cubes), trace.num_steps,
                                         trace.width, trace.degree)]
        for cube in trace.cubes:
            out.append("c %s 0" % " ".join(map(str, cube.lits)))
            out.append("w %s 0" % " ".join(map(str, cube.witnesses)))
    else:
        out = ["p zk%s %d %d %d" % (trace.kind, trace.num_steps, trace.width,
                                    trace.degree)]
    for s in trace.steps:
        removed = "".join(" %d" % l for l in s.removed)
        out.append("%d %d %d %d r%s 0" % (s.new_id, s.prem_a, s.prem_b, s.pivot, removed))
    return "\n".join(out) + "\n"


# -- strategy parsing --------------------------------------------------------

def _parse_gate_lit(tok: str, line: str) -> Lit:
    if tok == "T":
        return (TOP_VAR, True)
    if tok == "-T":
        return (TOP_VAR, False)
    try:
        v = int(tok)
    except ValueError:
        raise CertError("bad gate literal %r in %r" % (tok, line)) from None
    if v == 0:
        raise CertError("gate literal 0 in %r (use T / -T for constants)" % line)
    return (abs(v), v > 0)


def parse_strategy(text: str) -> Strategy:
    lines = _trace_lines(text)
    if not lines or lines[0][:2] != ["p", "zkstrat"]:
        raise CertError("missing strategy header")
    head = lines[0]
    if len(head) != 5 or head[2] not in ("herbrand", "skolem"):
        raise CertError("malformed header %r" % " ".join(head))
    kind = head[2]
    try:
        num_gates, num_aux = int(head[3]), int(head[4])
    except ValueError:
        raise CertError("malformed header %r" % " ".join(head)) from None
    gates: list[Gate] = []
    outs: set[int] = set()
    for toks in lines[1:]:
        line = " ".join(toks)
        if toks[0] != "g" or len(toks) != 4:
            raise CertError("malformed gate line %r" % line)
        try:
            out = int(toks[1])
        except ValueError:
            raise CertError("bad output variable in %r" % line) from None
        if out <= 0:
            raise CertError("gate output must be a variable, got %r" % line)
        if out in outs:
            raise CertError("variable %d defined by two gates" % out)
        a = _parse_gate_lit(toks[2], line)
        b = _parse_gate_lit(toks[3], line)
        gates.append(Gate(out, a, b))
        outs.add(out)
    later = set(outs)
    for g in gates:
        later.discard(g.out)
        for var, _ in (g.a, g.b):
            if var in later or var == g.out:
                raise CertError("gate for %d reads %d before it is defined"
                                % (g.out, var))
    if len(gates) != num_gates:
        raise CertError("header announces %d gates, found %d" % (num_gates, len(gates)))
    if num_aux < 0 or num_aux > len(gates):
        raise CertError("bad aux count %d" % num_aux)
    return Strategy(kind, tuple(gates), num_aux)


def serialize_strategy(strategy: Strategy) -> str:
    out = ["p zkstrat %s %d %d" % (strategy.kind, len(strategy.gates),
                                   strategy.aux_count)]
    for g in strategy.gates:
        out.append("g %d %s %s" % (g.out, _gate_lit_str(g.a), _gate_lit_str(g.b)))
    return "\n".join(out) + "\n"


def _gate_lit_str(lit: Lit) -> str:
    var, pos = lit
    if var == TOP_VAR:
        return "T" if pos else "-T"
    return str(var) if pos else str(-var)


# -- literal codes shared with the instance ----------------------------------

class CodeSpace:
    """Literal codes over the instance prefix plus appended auxiliaries.

    Mirrors the instance's rank*2+sign coding and extends the rank sequence
    for variables a certificate introduces (gate outputs above the declared
    range, clause selectors).  Appended variables sort inside every real
    variable and carry quantifier 'x'.
    """

    def __init__(self, rank: dict[int, int], quant: dict[int, str]):
        self.rank = dict(rank)
        self.quant = dict(quant)
        self._var_of_rank = {r: v for v, r in self.rank.items()}

    @classmethod
    def for_instance(cls, qbf) -> "CodeSpace":
        return cls(qbf.rank, qbf.quant)

    def add_var(self, var: int, quant: str = "x") -> int:
        if var in self.rank:
            raise CertError("variable %d is already ranked" % var)
        r = len(self.rank) + 1
        self.rank[var] = r
        self.quant[var] = quant
        self._var_of_rank[r] = var
        return r

    def code(self, lit: int) -> int:
        return self.rank[abs(lit)] << 1 | (lit > 0)

    def lit_of_code(self, code: int) -> int:
        var = self._var_of_rank[code >> 1]
        return var if code & 1 else -var

    def gate_code(self, lit: Lit) -> int:
        """Code of a gate literal; the true sentinel maps to 1, its negation to 0."""
        var, pos = lit
        if var == TOP_VAR:
            return 1 if pos else 0
        return self.rank[var] << 1 | pos

    def quant_of_code(self, code: int) -> str:
        return self.quant[self._var_of_rank[code >> 1]]

    @property
    def num_codes(self) -> int:
        """Codes run 0 .. 2*ranks+1, so array-style tables need this many slots."""
        return 2 * len(self.rank) + 2


def substitution_layout(qbf, strategy: Strategy):
    """Positional clause layout whose conjunction a correct strategy refutes.

    Gate i (0-based) contributes clauses 3i+1..3i+3: (not x or a), (not x
    or b), (x or not a or not b).  A herbrand layout then appends the
    instance matrix; a skolem layout appends the selector encoding of the
    negated matrix.  Clauses are sorted code lists with false-sentinel
    roots dropped and duplicate roots collapsed, which matches what the
    committed form pads: a true-sentinel input leaves code 1 in place.

    Returns (space, clauses) with clause ids starting at 1 in list order.
    """
    space = CodeSpace.for_instance(qbf)
    for g in strategy.gates:
        if g.out not in space.rank:
            space.add_var(g.out)
    clauses: list[list[int]] = []
    for g in strategy.gates:
        for tc in gate_triples(g):
            clauses.append(sorted({space.gate_code(l) for l in tc} - {0}))
    if strategy.kind == "herbrand":
        for cl in qbf.clauses:
            clauses.append(sorted(space.code(l) for l in cl))
    else:
        next_var = max(space.rank) + 1 if space.rank else 1
        encoded, sels, out_var = negate_cnf(qbf.clauses, next_var)
        for v in sels + [out_var]:
            space.add_var(v)
        for cl in encoded:
            clauses.append(sorted(space.code(l) for l in cl))
    return space, clauses


# -- Tseitin transformation ----------------------------------------------------

def gate_triples(gate: Gate) -> list[list[Lit]]:
    """The raw and-gate clauses (not x or a), (not x or b), (x or not a or not b)."""
    x = (gate.out, True)
    nx = (gate.out, False)
    na = (gate.a[0], not gate.a[1])
    nb = (gate.b[0], not gate.b[1])
    return [[nx, gate.a], [nx, gate.b], [x, na, nb]]


def tseitinize_gates(gates: tuple[Gate, ...] | list[Gate]) -> list[list[int]]:
    """Simplified clause list over DIMACS literals, sentinel constants folded in.

    The true-sentinel input makes some triple clauses satisfied (dropped)
    or shortens them; duplicate literals and duplicate clauses collapse.
    Suitable for cleartext reasoning; the committed layout keeps all three
    clauses per gate instead and is built by the strategy checker.
    """
    seen: set[tuple[int, ...]] = set()
    out: list[list[int]] = []
    for gate in gates:
        for clause in gate_triples(gate):
            lits: list[int] = []
            satisfied = False
            for var, pos in clause:
                if var == TOP_VAR:
                    if pos:
                        satisfied = True
                        break
                    continue  # a false literal drops out
                lits.append(var if pos else -var)
            if satisfied:
                continue
            key = tuple(sorted(set(lits)))
            if key not in seen:
                seen.add(key)
                out.append(sorted(set(lits), key=abs))
    return out


def negate_cnf(clauses: list[list[int]], next_var: int) -> tuple[list[list[int]], list[int], int]:
    """Tseitin encoding of NOT(psi) with public selector variables.

    Returns (clauses, selector_vars, output_var).  Selector s_i implies
    every literal of clause i false; the output variable forces some
    selector true.  Satisfiable exactly when some clause of psi is
    falsified, i.e. when NOT(psi) holds.
    """
    sels = list(range(next_var, next_var + len(clauses)))
    out_var = next_var + len(clauses)
    encoded = []
    for s, cl in zip(sels, clauses):
        for l in cl:
            encoded.append([-s, -l])
    encoded.append([-out_var] + sels)
    encoded.append([out_var])
    return encoded, sels, out_var
