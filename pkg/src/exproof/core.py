"""First-order kernel: terms, formulas, sequents, polarity, substitution, matching.

All values are immutable; every operation is a pure function, so anything in
this module can be shared freely between threads.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum
from itertools import count
from typing import Iterable, Iterator, Mapping, Optional, Union

EQ = "="  # reserved equality predicate, always arity 2


class ExproofError(Exception):
    """Base class for every error raised by this package."""


class InvalidPathError(ExproofError):
    """A subformula path stepped outside the formula."""

    def __init__(self, index: int, depth: int):
        super().__init__(f"no child {index} at path depth {depth}")
        self.index = index
        self.depth = depth


class NotAQuantifierError(ExproofError):
    pass


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    head: str
    args: tuple["Term", ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.head
        return f"{self.head}({', '.join(str(a) for a in self.args)})"


Term = Union[Var, App]


def const(name: str) -> App:
    return App(name, ())


# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()

    def __str__(self) -> str:
        if self.pred == EQ and len(self.args) == 2:
            return f"{self.args[0]} = {self.args[1]}"
        if not self.args:
            return self.pred
        return f"{self.pred}({', '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class Neg:
    sub: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Imp:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Union[Atom, Neg, And, Or, Imp, Forall, Exists]

BINARY = (And, Or, Imp)
QUANTIFIERS = (Forall, Exists)


def eq(left: Term, right: Term) -> Atom:
    return Atom(EQ, (left, right))


@dataclass(frozen=True)
class Literal:
    """A signed atom, the building block of trace clauses."""

    atom: Atom
    positive: bool = True

    def negated(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def to_formula(self) -> Formula:
        return self.atom if self.positive else Neg(self.atom)

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"~{self.atom}"


def clause_to_formula(literals: Iterable[Literal], connective=Or) -> Formula:
    """Fold a clause into a left-associated disjunction (or conjunction)."""
    lits = list(literals)
    if not lits:
        raise ValueError("cannot fold an empty clause into a formula")
    out: Formula = lits[0].to_formula()
    for lit in lits[1:]:
        out = connective(out, lit.to_formula())
    return out


# ---------------------------------------------------------------------------
# polarity


class Polarity(IntEnum):
    NEG = 0
    POS = 1

    def flip(self) -> "Polarity":
        return Polarity(1 - self.value)


class Strength(Enum):
    WEAK = "weak"
    STRONG = "strong"


@dataclass(frozen=True)
class Sequent:
    antecedent: tuple[Formula, ...] = ()
    succedent: tuple[Formula, ...] = ()

    @property
    def formulas(self) -> tuple[Formula, ...]:
        return self.antecedent + self.succedent


def children(formula: Formula) -> tuple[Formula, ...]:
    if isinstance(formula, Atom):
        return ()
    if isinstance(formula, Neg):
        return (formula.sub,)
    if isinstance(formula, BINARY):
        return (formula.left, formula.right)
    return (formula.body,)


def subformula_at(formula: Formula, path: Iterable[int]) -> Formula:
    node = formula
    for depth, index in enumerate(path):
        kids = children(node)
        if index < 0 or index >= len(kids):
            raise InvalidPathError(index, depth)
        node = kids[index]
    return node


def polarity_at(formula: Formula, path: Iterable[int], root_polarity: Polarity) -> Polarity:
    """Polarity of the subformula addressed by `path` (0 = left/only child).

    Conjunction, disjunction and quantifiers preserve polarity; negation
    flips it; implication flips it for the left child only.
    """
    node = formula
    pol = root_polarity
    for depth, index in enumerate(path):
        kids = children(node)
        if index < 0 or index >= len(kids):
            raise InvalidPathError(index, depth)
        if isinstance(node, Neg):
            pol = pol.flip()
        elif isinstance(node, Imp) and index == 0:
            pol = pol.flip()
        node = kids[index]
    return pol


def classify_quantifier(formula: Formula, path: Iterable[int], root_polarity: Polarity) -> Strength:
    """Strong/weak classification of the quantifier addressed by `path`."""
    path = tuple(path)
    node = subformula_at(formula, path)
    pol = polarity_at(formula, path, root_polarity)
    if isinstance(node, Forall):
        return Strength.STRONG if pol is Polarity.POS else Strength.WEAK
    if isinstance(node, Exists):
        return Strength.WEAK if pol is Polarity.POS else Strength.STRONG
    raise NotAQuantifierError(f"node at {list(path)} is {type(node).__name__}, not a quantifier")


def quantifier_strengths(formula: Formula, polarity: Polarity) -> dict[str, Strength]:
    """Map every bound variable of a rectified formula to its strength."""
    out: dict[str, Strength] = {}

    def walk(f: Formula, pol: Polarity) -> None:
        if isinstance(f, Atom):
            return
        if isinstance(f, Neg):
            walk(f.sub, pol.flip())
        elif isinstance(f, Imp):
            walk(f.left, pol.flip())
            walk(f.right, pol)
        elif isinstance(f, (And, Or)):
            walk(f.left, pol)
            walk(f.right, pol)
        elif isinstance(f, Forall):
            out[f.var] = Strength.STRONG if pol is Polarity.POS else Strength.WEAK
            walk(f.body, pol)
        else:
            out[f.var] = Strength.WEAK if pol is Polarity.POS else Strength.STRONG
            walk(f.body, pol)

    walk(formula, polarity)
    return out


# ---------------------------------------------------------------------------
# variables


def free_vars(obj: Union[Term, Formula, Literal]) -> frozenset[str]:
    if isinstance(obj, Var):
        return frozenset((obj.name,))
    if isinstance(obj, App):
        out: frozenset[str] = frozenset()
        for a in obj.args:
            out |= free_vars(a)
        return out
    if isinstance(obj, Literal):
        return free_vars(obj.atom)
    if isinstance(obj, Atom):
        out = frozenset()
        for a in obj.args:
            out |= free_vars(a)
        return out
    if isinstance(obj, Neg):
        return free_vars(obj.sub)
    if isinstance(obj, BINARY):
        return free_vars(obj.left) | free_vars(obj.right)
    return free_vars(obj.body) - {obj.var}


def bound_var_names(formula: Formula) -> list[str]:
    """All binder names in preorder, with repetitions."""
    out: list[str] = []

    def walk(f: Formula) -> None:
        if isinstance(f, QUANTIFIERS):
            out.append(f.var)
        for child in children(f):
            walk(child)

    walk(formula)
    return out


# ---------------------------------------------------------------------------
# substitution


class Subst:
    """Finite map from variable names to terms; identity bindings are dropped."""

    __slots__ = ("_map",)

    def __init__(self, bindings: Optional[Mapping[str, Term]] = None):
        m: dict[str, Term] = {}
        if bindings:
            for v, t in bindings.items():
                if isinstance(t, Var) and t.name == v:
                    continue
                m[v] = t
        object.__setattr__(self, "_map", m)

    def __contains__(self, var: str) -> bool:
        return var in self._map

    def __getitem__(self, var: str) -> Term:
        return self._map[var]

    def get(self, var: str, default=None):
        return self._map.get(var, default)

    def __len__(self) -> int:
        return len(self._map)

    def __bool__(self) -> bool:
        return bool(self._map)

    @property
    def domain(self) -> frozenset[str]:
        return frozenset(self._map)

    def items(self) -> Iterator[tuple[str, Term]]:
        return iter(sorted(self._map.items()))

    def mapping(self) -> dict[str, Term]:
        return dict(self._map)

    def restrict(self, vars: Iterable[str]) -> "Subst":
        keep = set(vars)
        return Subst({v: t for v, t in self._map.items() if v in keep})

    def compose(self, other: "Subst") -> "Subst":
        """Substitution applying `self` first, then `other`."""
        out = {v: apply_subst(t, other) for v, t in self._map.items()}
        for v, t in other._map.items():
            out.setdefault(v, t)
        return Subst(out)

    def __eq__(self, other) -> bool:
        return isinstance(other, Subst) and self._map == other._map

    def __hash__(self) -> int:
        return hash(frozenset(self._map.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{v} -> {t}" for v, t in self.items())
        return f"{{{inner}}}"


EMPTY_SUBST = Subst()


def _fresh_name(base: str, used: set[str]) -> str:
    for n in count(1):
        cand = f"{base}_{n}"
        if cand not in used:
            return cand
    raise AssertionError("unreachable")


def _subst_term(t: Term, m: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return m.get(t.name, t)
    if not t.args:
        return t
    return App(t.head, tuple(_subst_term(a, m) for a in t.args))


def _subst_formula(f: Formula, m: Mapping[str, Term]) -> Formula:
    if not m:
        return f
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(_subst_term(a, m) for a in f.args))
    if isinstance(f, Neg):
        return Neg(_subst_formula(f.sub, m))
    if isinstance(f, BINARY):
        return type(f)(_subst_formula(f.left, m), _subst_formula(f.right, m))
    # quantifier: drop the binder from the map, rename on capture
    body_free = free_vars(f.body)
    relevant = {v: t for v, t in m.items() if v != f.var and v in body_free}
    if not relevant:
        return f
    var, body = f.var, f.body
    if any(var in free_vars(t) for t in relevant.values()):
        used = set(body_free)
        for t in relevant.values():
            used |= free_vars(t)
        used |= set(relevant)
        fresh = _fresh_name(var, used)
        body = _subst_formula(body, {var: Var(fresh)})
        var = fresh
    return type(f)(var, _subst_formula(body, relevant))


def apply_subst(obj: Union[Term, Formula, Literal], subst: Subst) -> Union[Term, Formula, Literal]:
    """Capture-avoiding substitution on a term, literal or formula."""
    m = subst._map  # noqa: SLF001 - same module family
    if isinstance(obj, (Var, App)):
        return _subst_term(obj, m)
    if isinstance(obj, Literal):
        return Literal(_subst_formula(obj.atom, m), obj.positive)
    return _subst_formula(obj, m)


# ---------------------------------------------------------------------------
# rectification


def rectify(sequent: Sequent) -> tuple[Sequent, dict[str, tuple[int, str]]]:
    """Rename binders so all bound names are pairwise distinct and disjoint
    from every free variable of the sequent.

    Returns the renamed sequent and a report mapping each fresh name to the
    (formula index, original name) it replaced; indices count antecedent
    formulas first, then succedent.
    """
    used: set[str] = set()
    for f in sequent.formulas:
        used |= free_vars(f)
    counter = count(1)
    report: dict[str, tuple[int, str]] = {}

    def fresh(base: str) -> str:
        while True:
            cand = f"{base}_{next(counter)}"
            if cand not in used:
                return cand

    def walk(f: Formula, env: dict[str, str], idx: int) -> Formula:
        if isinstance(f, Atom):
            m = {old: Var(new) for old, new in env.items()}
            return Atom(f.pred, tuple(_subst_term(a, m) for a in f.args))
        if isinstance(f, Neg):
            return Neg(walk(f.sub, env, idx))
        if isinstance(f, BINARY):
            return type(f)(walk(f.left, env, idx), walk(f.right, env, idx))
        if f.var in used:
            new = fresh(f.var)
            report[new] = (idx, f.var)
        else:
            new = f.var
        used.add(new)
        return type(f)(new, walk(f.body, {**env, f.var: new}, idx))

    ant = tuple(walk(f, {}, i) for i, f in enumerate(sequent.antecedent))
    n = len(sequent.antecedent)
    suc = tuple(walk(f, {}, n + i) for i, f in enumerate(sequent.succedent))
    return Sequent(ant, suc), report


# ---------------------------------------------------------------------------
# first-order matching (one-sided)


def _match(pattern, target, bindings: dict[str, Term], bound: frozenset[str]) -> bool:
    if isinstance(pattern, Var):
        if pattern.name in bound:
            return isinstance(target, Var) and target.name == pattern.name
        if pattern.name in bindings:
            return bindings[pattern.name] == target
        if not isinstance(target, (Var, App)):
            return False
        bindings[pattern.name] = target
        return True
    if isinstance(pattern, App):
        return (
            isinstance(target, App)
            and pattern.head == target.head
            and len(pattern.args) == len(target.args)
            and all(_match(p, t, bindings, bound) for p, t in zip(pattern.args, target.args))
        )
    if isinstance(pattern, Atom):
        return (
            isinstance(target, Atom)
            and pattern.pred == target.pred
            and len(pattern.args) == len(target.args)
            and all(_match(p, t, bindings, bound) for p, t in zip(pattern.args, target.args))
        )
    if isinstance(pattern, Neg):
        return isinstance(target, Neg) and _match(pattern.sub, target.sub, bindings, bound)
    if isinstance(pattern, BINARY):
        return (
            type(target) is type(pattern)
            and _match(pattern.left, target.left, bindings, bound)
            and _match(pattern.right, target.right, bindings, bound)
        )
    if isinstance(pattern, QUANTIFIERS):
        return (
            type(target) is type(pattern)
            and pattern.var == target.var
            and _match(pattern.body, target.body, bindings, bound | {pattern.var})
        )
    return False


def match(pattern: Union[Term, Formula], target: Union[Term, Formula]) -> Optional[Subst]:
    """One-sided first-order matching: the substitution sigma with
    apply_subst(pattern, sigma) == target, or None if there is none."""
    bindings: dict[str, Term] = {}
    if _match(pattern, target, bindings, frozenset()):
        return Subst(bindings)
    return None


def match_under(
    pattern: Union[Term, Formula],
    target: Union[Term, Formula],
    bindings: Mapping[str, Term],
) -> Optional[dict[str, Term]]:
    """Like `match`, but extending existing bindings; returns the extended
    map (a fresh dict) or None on conflict."""
    b = dict(bindings)
    if _match(pattern, target, b, frozenset()):
        return b
    return None
