"""Import of connection-calculus proof traces.

A trace has three parts: named input formulas, the clauses produced by the
prover's disjunctive normal form transformation, and the proof steps with
their bindings.  We regenerate the DNF ourselves without renaming variables,
match our clauses against the trace clauses, translate Skolem terms to
eigenvariables, and compose each step binding with its clause matcher to
recover the instance terms of the original problem.
"""
from __future__ import annotations

import re
from collections import Counter, defaultdict
from dataclasses import dataclass
from itertools import count
from typing import Optional, Sequence

from .core import (
    EQ,
    And,
    App,
    Atom,
    Exists,
    ExproofError,
    Forall,
    Formula,
    Literal,
    Neg,
    Or,
    Polarity,
    Sequent,
    Strength,
    Subst,
    Term,
    Var,
    apply_subst,
    free_vars,
    quantifier_strengths,
    rectify,
)
from .expansion import (
    VACUOUS_TERM,
    ExpansionSequent,
    ExpansionTree,
    expand_formula,
    shallow,
    shallow_sequent,
)
from .notation import FormulaParser, ParseError, tokenize
from .verit import AxiomSchema, Clause, SchemaKind, make_schema, match_literals


class LeanCoPImportError(ExproofError):
    pass


ROLES = ("axiom", "conjecture")


@dataclass(frozen=True)
class InputFormula:
    name: str
    role: str
    formula: Formula


@dataclass(frozen=True)
class TraceClause:
    number: int
    literals: Clause
    origin_kind: str  # "clausify" | "theory"
    origin_name: str  # formula name, or "equality"


@dataclass(frozen=True)
class TraceStep:
    id: str
    kind: str  # "start" | "extension" | "reduction"
    clause: Optional[int]
    binding: Subst
    literals: Clause


@dataclass(frozen=True)
class LeanCoPTrace:
    inputs: tuple[InputFormula, ...]
    clauses: tuple[TraceClause, ...]
    steps: tuple[TraceStep, ...]


@dataclass(frozen=True)
class ImportConfig:
    skolem_prefix: str = "sk"
    definitional_threshold: int = 4


# ---------------------------------------------------------------------------
# parsing


class _TraceParser(FormulaParser):
    def parse_name(self) -> str:
        tok = self.next()
        if tok.kind in ("name", "quoted", "num"):
            return tok.text
        raise ParseError(f"expected a name, found {tok.text!r}", tok.line, tok.col)

    def parse_literal(self) -> Literal:
        start = self.peek()
        f = self._parse_unary()  # covers ~, parentheses and disequations
        positive = True
        while isinstance(f, Neg):
            positive = not positive
            f = f.sub
        if not isinstance(f, Atom):
            raise ParseError("expected a literal", start.line, start.col)
        return Literal(f, positive)

    def parse_literal_list(self) -> Clause:
        self.expect("[")
        lits = []
        if self.peek() is not None and self.peek().kind != "]":
            lits.append(self.parse_literal())
            while self.peek() is not None and self.peek().kind == ",":
                self.next()
                lits.append(self.parse_literal())
        self.expect("]")
        return tuple(lits)

    def parse_bind(self) -> Subst:
        tok = self.next()
        if tok.text != "bind":
            raise ParseError(f"expected 'bind', found {tok.text!r}", tok.line, tok.col)
        self.expect("(")
        self.expect("[")
        names = []
        if self.peek() is not None and self.peek().kind != "]":
            names.append(self._var_name())
            while self.peek() is not None and self.peek().kind == ",":
                self.next()
                names.append(self._var_name())
        self.expect("]")
        self.expect(",")
        self.expect("[")
        terms = []
        if self.peek() is not None and self.peek().kind != "]":
            terms.append(self.parse_term())
            while self.peek() is not None and self.peek().kind == ",":
                self.next()
                terms.append(self.parse_term())
        self.expect("]")
        self.expect(")")
        if len(names) != len(terms):
            raise ParseError(
                f"bind lists differ in length ({len(names)} vs {len(terms)})", tok.line, tok.col
            )
        return Subst(dict(zip(names, terms)))

    def skip_balanced(self) -> None:
        """Consume a balanced parenthesised argument list."""
        depth = 0
        while True:
            tok = self.next()
            if tok.kind in ("(", "["):
                depth += 1
            elif tok.kind in (")", "]"):
                depth -= 1
                if depth == 0:
                    return


def parse_leancop(text: str) -> LeanCoPTrace:
    """Parse the three-part trace: `fof(name, role, formula).` input lines,
    `cnf(N, plain, [...], origin).` clause lines and proof-step lines."""
    parser = _TraceParser(tokenize(text))
    inputs: list[InputFormula] = []
    clauses: list[TraceClause] = []
    steps: list[TraceStep] = []
    clause_numbers: set[int] = set()
    while parser.peek() is not None:
        head = parser.next()
        if head.text == "fof":
            parser.expect("(")
            name = parser.parse_name()
            if any(f.name == name for f in inputs):
                raise ParseError(f"duplicate input formula name {name!r}", head.line, head.col)
            parser.expect(",")
            role_tok = parser.next()
            if role_tok.text not in ROLES:
                raise ParseError(f"unknown role {role_tok.text!r}", role_tok.line, role_tok.col)
            parser.expect(",")
            formula = parser.parse_formula()
            parser.expect(")")
            parser.expect(".")
            inputs.append(InputFormula(name, role_tok.text, formula))
        elif head.text == "cnf":
            parser.expect("(")
            id_tok = parser.next()
            if id_tok.kind not in ("num", "name", "quoted"):
                raise ParseError(f"bad clause identifier {id_tok.text!r}", id_tok.line, id_tok.col)
            parser.expect(",")
            parser.parse_name()  # the "plain" marker
            parser.expect(",")
            lits = parser.parse_literal_list()
            parser.expect(",")
            tail_tok = parser.next()
            if tail_tok.text in ("clausify", "theory"):
                if id_tok.kind != "num":
                    raise ParseError(
                        f"clause number must be numeric, found {id_tok.text!r}",
                        id_tok.line,
                        id_tok.col,
                    )
                number = int(id_tok.text)
                if number in clause_numbers:
                    raise ParseError(f"duplicate clause number {number}", id_tok.line, id_tok.col)
                clause_numbers.add(number)
                parser.expect("(")
                origin_name = parser.parse_name()
                parser.expect(")")
                clauses.append(TraceClause(number, lits, tail_tok.text, origin_name))
            elif tail_tok.text in ("start", "extension"):
                parser.expect("(")
                num_tok = parser.expect("num")
                clause_num = int(num_tok.text)
                if clause_num not in clause_numbers:
                    raise ParseError(
                        f"step references unknown clause {clause_num}", num_tok.line, num_tok.col
                    )
                binding = Subst()
                if parser.peek() is not None and parser.peek().kind == ",":
                    parser.next()
                    binding = parser.parse_bind()
                parser.expect(")")
                steps.append(TraceStep(id_tok.text, tail_tok.text, clause_num, binding, lits))
            elif tail_tok.text == "reduction":
                if parser.peek() is not None and parser.peek().kind == "(":
                    parser.skip_balanced()
                steps.append(TraceStep(id_tok.text, "reduction", None, Subst(), lits))
            else:
                raise ParseError(
                    f"unknown clause origin or step {tail_tok.text!r}", tail_tok.line, tail_tok.col
                )
            parser.expect(")")
            parser.expect(".")
        else:
            raise ParseError(f"expected 'fof' or 'cnf', found {head.text!r}", head.line, head.col)
    return LeanCoPTrace(tuple(inputs), tuple(clauses), tuple(steps))


# ---------------------------------------------------------------------------
# Skolem terms -> eigenvariables


class SkolemRegistry:
    """One fresh eigenvariable per Skolem head symbol, applied consistently.

    A head seen with two different argument lists means the trace bound a
    strong quantifier more than once, which the expansion-tree construction
    cannot represent.
    """

    def __init__(self, prefix: str = "sk"):
        self.pattern = re.compile(re.escape(prefix) + r"[A-Za-z0-9_]+\Z")
        self.args_seen: dict[str, tuple[Term, ...]] = {}

    def is_skolem_head(self, name: str) -> bool:
        return bool(self.pattern.match(name))

    def eigen_name(self, head: str) -> str:
        return f"v_{head}"

    @property
    def eigens(self) -> dict[str, str]:
        return {head: self.eigen_name(head) for head in sorted(self.args_seen)}

    def scan_term(self, term: Term) -> None:
        if isinstance(term, Var):
            return
        if self.is_skolem_head(term.head):
            seen = self.args_seen.get(term.head)
            if seen is None:
                self.args_seen[term.head] = term.args
            elif seen != term.args:
                raise LeanCoPImportError(
                    f"skolem head {term.head!r} used with two different argument lists "
                    f"({App(term.head, seen)} vs {term}): strong quantifier bound more than once"
                )
        for a in term.args:
            self.scan_term(a)

    def collapse_term(self, term: Term) -> Term:
        if isinstance(term, Var):
            return term
        if self.is_skolem_head(term.head):
            self.scan_term(term)
            return Var(self.eigen_name(term.head))
        return App(term.head, tuple(self.collapse_term(a) for a in term.args))

    def collapse_literal(self, lit: Literal) -> Literal:
        atom = Atom(lit.atom.pred, tuple(self.collapse_term(a) for a in lit.atom.args))
        return Literal(atom, lit.positive)


def skolem_to_eigen(term: Term, registry: SkolemRegistry) -> Term:
    """Replace every Skolem application by its registered eigenvariable."""
    return registry.collapse_term(term)


# ---------------------------------------------------------------------------
# definitional DNF without variable renaming


@dataclass(frozen=True)
class GenClause:
    literals: Clause
    source: str  # name of the input formula
    is_definition: bool = False

    @property
    def variables(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for lit in self.literals:
            out |= free_vars(lit)
        return out


def definitional_dnf(
    inputs: Sequence[tuple[str, str, Formula]], threshold: Optional[int] = 4
) -> list[GenClause]:
    """Generate the prover-style DNF clauses of (negated axioms, positive
    conjectures), keeping the original bound-variable names.

    Quantifiers are dropped: weak variables stay as clause variables and
    strong variables act as placeholders that matching later sends to
    eigenvariables.  When distributing a conjunction would multiply clause
    counts beyond `threshold`, a definition predicate over the subformula's
    free variables is introduced instead (pass None to disable).
    """
    out: list[GenClause] = []
    def_ids = count(1)

    def clauses_of(f: Formula, sign: bool, defs: list[tuple[Literal, ...]]) -> list[tuple[Literal, ...]]:
        if isinstance(f, Atom):
            return [(Literal(f, sign),)]
        if isinstance(f, Neg):
            return clauses_of(f.sub, not sign, defs)
        if isinstance(f, (Forall, Exists)):
            return clauses_of(f.body, sign, defs)
        if isinstance(f, And):
            pairs = ((f.left, sign), (f.right, sign)) if sign else None
            union = None if sign else ((f.left, sign), (f.right, sign))
        elif isinstance(f, Or):
            pairs = None if sign else ((f.left, sign), (f.right, sign))
            union = ((f.left, sign), (f.right, sign)) if sign else None
        else:  # Imp
            pairs = ((f.left, True), (f.right, False)) if not sign else None
            union = ((f.left, False), (f.right, True)) if sign else None
        if union is not None:
            (lf, ls), (rf, rs) = union
            return clauses_of(lf, ls, defs) + clauses_of(rf, rs, defs)
        (lf, ls), (rf, rs) = pairs
        left = clauses_of(lf, ls, defs)
        right = clauses_of(rf, rs, defs)
        if threshold is not None and len(left) * len(right) > threshold:
            if len(left) >= len(right) and len(left) > 1:
                left = _define(lf, left, defs)
            if len(left) * len(right) > threshold and len(right) > 1:
                right = _define(rf, right, defs)
        return [a + b for a in left for b in right]

    def _define(subf: Formula, sub_clauses, defs) -> list[tuple[Literal, ...]]:
        datom = Atom(f"d{next(def_ids)}", tuple(Var(v) for v in sorted(free_vars(subf))))
        for c in sub_clauses:
            defs.append(c + (Literal(datom, False),))
        return [(Literal(datom, True),)]

    for name, role, formula in inputs:
        defs: list[tuple[Literal, ...]] = []
        sign = role == "conjecture"  # axioms enter negated
        main = clauses_of(formula, sign, defs)
        out.extend(GenClause(c, name) for c in main)
        out.extend(GenClause(c, name, is_definition=True) for c in defs)
    return out


# ---------------------------------------------------------------------------
# clause matching


@dataclass(frozen=True)
class ClauseMatch:
    clause_number: int
    generated: Optional[GenClause]  # None for equality-theory clauses
    schema: Optional[AxiomSchema]
    permutation: tuple[int, ...]
    matcher: Subst
    flips: tuple[int, ...] = ()


def _signature(lits: Clause) -> tuple:
    return tuple(sorted(Counter((l.positive, l.atom.pred, len(l.atom.args)) for l in lits).items()))


def _signature_distance(a: Clause, b: Clause) -> int:
    ca = Counter((l.positive, l.atom.pred, len(l.atom.args)) for l in a)
    cb = Counter((l.positive, l.atom.pred, len(l.atom.args)) for l in b)
    return sum(((ca - cb) + (cb - ca)).values())


def _show(clause: Clause) -> str:
    return "[" + ", ".join(str(l) for l in clause) + "]"


def _eq_schema_candidates(clause: Clause) -> list[AxiomSchema]:
    """Schemas whose negated matrix could match a DNF equality-theory clause."""
    positives = [l for l in clause if l.positive]
    negatives = [l for l in clause if not l.positive]
    pos_eq = [l for l in positives if l.atom.pred == EQ]
    neg_eq = [l for l in negatives if l.atom.pred == EQ]
    candidates: list[AxiomSchema] = []
    # reflexivity, negated: [~(x = x)]
    if len(clause) == 1 and len(neg_eq) == 1:
        candidates.append(make_schema(SchemaKind.REFLEXIVITY))
    # symmetry / transitivity / function congruence, negated:
    # k positive equalities plus one negative equality
    if len(neg_eq) == 1 and len(pos_eq) >= 1 and len(clause) == len(pos_eq) + 1:
        k = len(pos_eq)
        if k == 1:
            candidates.append(make_schema(SchemaKind.SYMMETRY))
        else:
            candidates.append(make_schema(SchemaKind.TRANSITIVITY, k))
        lhs = neg_eq[0].atom.args[0]
        if isinstance(lhs, App) and len(lhs.args) == k:
            candidates.append(make_schema(SchemaKind.FN_CONGRUENCE, lhs.head, k))
    # predicate congruence, negated: k positive equalities, p positive, p negative
    non_eq_pos = [l for l in positives if l.atom.pred != EQ]
    non_eq_neg = [l for l in negatives if l.atom.pred != EQ]
    if (
        len(non_eq_pos) == 1
        and len(non_eq_neg) == 1
        and non_eq_pos[0].atom.pred == non_eq_neg[0].atom.pred
        and len(pos_eq) == len(non_eq_pos[0].atom.args) >= 1
        and len(clause) == len(pos_eq) + 2
    ):
        candidates.append(
            make_schema(SchemaKind.PRED_CONGRUENCE, non_eq_pos[0].atom.pred, len(pos_eq))
        )
    return candidates


def _negated_matrix(schema: AxiomSchema) -> Clause:
    return tuple(l.negated() for l in schema.matrix)


def match_clauses(generated: Sequence[GenClause], trace_clauses: Sequence[TraceClause]) -> dict[int, ClauseMatch]:
    """Find, for every trace clause, a generated clause from the same input
    formula equal to it up to literal reordering, or an equality axiom schema
    for theory clauses.  Unmatched clauses raise with nearest-miss hints."""
    by_source: dict[str, list[GenClause]] = defaultdict(list)
    for g in generated:
        by_source[g.source].append(g)
    matches: dict[int, ClauseMatch] = {}
    for tc in trace_clauses:
        if tc.origin_kind == "clausify":
            pool = by_source.get(tc.origin_name)
            if pool is None:
                raise LeanCoPImportError(
                    f"clause {tc.number} refers to unknown input formula {tc.origin_name!r}"
                )
            sig = _signature(tc.literals)
            found = None
            for g in pool:
                if _signature(g.literals) != sig:
                    continue
                result = match_literals(g.literals, tc.literals, allow_flips=False)
                if result is not None:
                    matcher, perm, flips = result
                    found = ClauseMatch(tc.number, g, None, perm, matcher, flips)
                    break
            if found is None:
                ranked = sorted(pool, key=lambda g: _signature_distance(g.literals, tc.literals))
                hints = "; ".join(_show(g.literals) for g in ranked[:3])
                raise LeanCoPImportError(
                    f"trace clause {tc.number} {_show(tc.literals)} does not match any "
                    f"generated clause of {tc.origin_name!r}; nearest candidates: {hints}"
                )
            matches[tc.number] = found
        else:  # theory(equality)
            found = None
            for schema in _eq_schema_candidates(tc.literals):
                result = match_literals(_negated_matrix(schema), tc.literals, allow_flips=True)
                if result is not None:
                    matcher, perm, flips = result
                    found = ClauseMatch(tc.number, None, schema, perm, matcher, flips)
                    break
            if found is None:
                raise LeanCoPImportError(
                    f"equality-theory clause {tc.number} {_show(tc.literals)} matches no "
                    f"known axiom schema"
                )
            matches[tc.number] = found
    return matches


# ---------------------------------------------------------------------------
# import


def _compose_instance(matcher: Subst, binding: Subst, registry: SkolemRegistry) -> Subst:
    out = {}
    for v, t in matcher.items():
        out[v] = registry.collapse_term(apply_subst(t, binding))
    return Subst(out)


def _fallback_subst(formula: Formula, polarity: Polarity, covered: set[str]) -> Optional[Subst]:
    """Instances for quantified variables no proof step ever bound: weak ones
    get the vacuous dummy constant, strong ones a fresh eigenvariable."""
    strengths = quantifier_strengths(formula, polarity)
    missing = {v: s for v, s in strengths.items() if v not in covered}
    if not missing:
        return None
    bindings: dict[str, Term] = {}
    for v, s in missing.items():
        bindings[v] = VACUOUS_TERM if s is Strength.WEAK else Var(f"v_vac_{v}")
    return Subst(bindings)


def import_leancop(trace: LeanCoPTrace, config: ImportConfig = ImportConfig()) -> tuple[ExpansionSequent, dict]:
    """Build the expansion sequent of the original (unskolemized) problem:
    axioms on the left, conjectures on the right, plus one antecedent tree per
    equality axiom schema the proof used."""
    if not trace.inputs:
        raise LeanCoPImportError("trace has no input formulas")

    axioms = [f for f in trace.inputs if f.role == "axiom"]
    conjectures = [f for f in trace.inputs if f.role == "conjecture"]
    sequent0 = Sequent(
        tuple(f.formula for f in axioms), tuple(f.formula for f in conjectures)
    )
    sequent, _renaming = rectify(sequent0)
    positions: dict[str, tuple[str, int, Formula, Polarity]] = {}
    for i, f in enumerate(axioms):
        positions[f.name] = ("ant", i, sequent.antecedent[i], Polarity.NEG)
    for i, f in enumerate(conjectures):
        positions[f.name] = ("suc", i, sequent.succedent[i], Polarity.POS)

    registry = SkolemRegistry(config.skolem_prefix)
    for tc in trace.clauses:
        for lit in tc.literals:
            for a in lit.atom.args:
                registry.scan_term(a)
    for step in trace.steps:
        for _v, t in step.binding.items():
            registry.scan_term(t)

    collapsed = [
        TraceClause(tc.number, tuple(registry.collapse_literal(l) for l in tc.literals),
                    tc.origin_kind, tc.origin_name)
        for tc in trace.clauses
    ]
    raw_by_number = {tc.number: tc for tc in trace.clauses}

    generated = definitional_dnf(
        [(f.name, f.role, positions[f.name][2]) for f in trace.inputs],
        config.definitional_threshold,
    )
    matches = match_clauses(generated, collapsed)

    per_formula: dict[str, list[Subst]] = {f.name: [] for f in trace.inputs}
    eq_groups: dict[tuple, tuple[AxiomSchema, list[Subst]]] = {}
    for step in trace.steps:
        if step.clause is None:
            continue  # reductions close branches without new instances
        raw = raw_by_number[step.clause]
        clause_vars: set[str] = set()
        for lit in raw.literals:
            clause_vars |= free_vars(lit)
        extra = step.binding.domain - clause_vars
        if extra:
            names = ", ".join(sorted(extra))
            raise LeanCoPImportError(
                f"step {step.id!r}: binding domain not covered by clause "
                f"{step.clause} variables: {names}"
            )
        cm = matches[step.clause]
        sigma = _compose_instance(cm.matcher, step.binding, registry)
        if cm.generated is not None:
            bucket = per_formula[cm.generated.source]
            if sigma and sigma not in bucket:
                bucket.append(sigma)
        else:
            key = (cm.schema.kind, cm.schema.param)
            _schema, subs = eq_groups.setdefault(key, (cm.schema, []))
            if sigma and sigma not in subs:
                subs.append(sigma)

    # variables never bound by any step still need instances for the trees
    for f in trace.inputs:
        _side, _i, rect_formula, pol = positions[f.name]
        covered: set[str] = set()
        for s in per_formula[f.name]:
            covered |= s.domain
        fallback = _fallback_subst(rect_formula, pol, covered)
        if fallback is not None:
            per_formula[f.name].append(fallback)

    ant_trees: list[ExpansionTree] = []
    suc_trees: list[ExpansionTree] = []
    for f in trace.inputs:
        side, _i, rect_formula, pol = positions[f.name]
        tree = expand_formula(rect_formula, per_formula[f.name], pol)
        assert shallow(tree, pol) == rect_formula
        (ant_trees if side == "ant" else suc_trees).append(tree)
    for (_kind, _param), (schema, subs) in eq_groups.items():
        tree = expand_formula(schema.formula, subs, Polarity.NEG)
        assert shallow(tree, Polarity.NEG) == schema.formula
        ant_trees.append(tree)

    es = ExpansionSequent(tuple(ant_trees), tuple(suc_trees))
    base = shallow_sequent(ExpansionSequent(tuple(ant_trees[: len(axioms)]), es.succedent))
    assert base == sequent, "shallow sequent drifted from the rectified input"

    report = {
        "matched_clauses": len(matches),
        "unmatched": [],
        "instances_per_formula": {f.name: len(per_formula[f.name]) for f in trace.inputs},
        "skolem_map": registry.eigens,
    }
    return es, report
