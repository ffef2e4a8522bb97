"""Validity checking for expansion sequents.

The verdict combines two independent conditions: the deep sequent must be a
propositional tautology (ground atoms treated as opaque variables, equality
included), and the dependency relation between weak instance terms and the
eigenvariables they dominate must be acyclic.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .core import And, Atom, Formula, Imp, Neg, Polarity, Sequent, Term, free_vars
from .expansion import ETAtom, ETBin, ETNeg, ETStrong, ETWeak, ExpansionSequent, deep


# ---------------------------------------------------------------------------
# deep sequent


def deep_sequent(es: ExpansionSequent) -> Sequent:
    """Quantifier-free sequent of the deep readings (antecedent at negative
    polarity, succedent at positive)."""
    return Sequent(
        tuple(deep(t, Polarity.NEG) for t in es.antecedent),
        tuple(deep(t, Polarity.POS) for t in es.succedent),
    )


# ---------------------------------------------------------------------------
# propositional tautology check (iterative DPLL over a Tseitin CNF)


def _collect_atoms(f: Formula, ids: dict[Atom, int]) -> None:
    if isinstance(f, Atom):
        if f not in ids:
            ids[f] = len(ids) + 1
        return
    if isinstance(f, Neg):
        _collect_atoms(f.sub, ids)
        return
    _collect_atoms(f.left, ids)
    _collect_atoms(f.right, ids)


class _Tseitin:
    def __init__(self, natoms: int):
        self.next_var = natoms + 1
        self.clauses: list[list[int]] = []

    def fresh(self) -> int:
        v = self.next_var
        self.next_var += 1
        return v

    def encode(self, f: Formula, ids: dict[Atom, int]) -> int:
        if isinstance(f, Atom):
            return ids[f]
        if isinstance(f, Neg):
            return -self.encode(f.sub, ids)
        left = self.encode(f.left, ids)
        right = self.encode(f.right, ids)
        if isinstance(f, Imp):
            left = -left
        a = self.fresh()
        if isinstance(f, And):
            self.clauses += [[-a, left], [-a, right], [a, -left, -right]]
        else:  # Or and Imp share the disjunctive encoding
            self.clauses += [[-a, left, right], [a, -left], [a, -right]]
        return a


def _dpll(clauses: list[list[int]], nvars: int) -> Optional[dict[int, bool]]:
    """Plain iterative DPLL; returns a model or None when unsatisfiable."""
    assign: dict[int, bool] = {}
    trail: list[int] = []
    # decisions: (variable, trail length before the decision, tried_false)
    decisions: list[tuple[int, int, bool]] = []

    def value(lit: int) -> Optional[bool]:
        v = assign.get(abs(lit))
        if v is None:
            return None
        return v if lit > 0 else not v

    def set_lit(lit: int) -> None:
        assign[abs(lit)] = lit > 0
        trail.append(abs(lit))

    def propagate() -> bool:
        changed = True
        while changed:
            changed = False
            for clause in clauses:
                unassigned = None
                satisfied = False
                n_false = 0
                for lit in clause:
                    v = value(lit)
                    if v is True:
                        satisfied = True
                        break
                    if v is False:
                        n_false += 1
                    else:
                        unassigned = lit
                if satisfied:
                    continue
                if n_false == len(clause):
                    return False  # conflict
                if n_false == len(clause) - 1:
                    set_lit(unassigned)
                    changed = True
        return True

    while True:
        if propagate():
            free = None
            for v in range(1, nvars + 1):
                if v not in assign:
                    free = v
                    break
            if free is None:
                return assign
            decisions.append((free, len(trail), False))
            set_lit(free)
        else:
            while decisions:
                var, mark, tried_false = decisions.pop()
                while len(trail) > mark:
                    assign.pop(trail.pop())
                if not tried_false:
                    decisions.append((var, mark, True))
                    set_lit(-var)
                    break
            else:
                return None


def is_tautology(ds: Sequent) -> tuple[bool, Optional[dict[str, bool]]]:
    """Check whether and(antecedent) -> or(succedent) is propositionally
    valid; on failure the second component is a falsifying assignment over
    the sequent's atoms (rendered in textual notation)."""
    ids: dict[Atom, int] = {}
    for f in ds.formulas:
        _collect_atoms(f, ids)
    # the sequent fails iff all antecedents and all negated succedents are
    # jointly satisfiable
    conjuncts = list(ds.antecedent) + [Neg(f) for f in ds.succedent]
    ts = _Tseitin(len(ids))
    for f in conjuncts:
        ts.clauses.append([ts.encode(f, ids)])
    model = _dpll(ts.clauses, ts.next_var - 1)
    if model is None:
        return True, None
    assignment = {str(atom): model.get(i, False) for atom, i in ids.items()}
    return False, assignment


# ---------------------------------------------------------------------------
# dependency relation


@dataclass(frozen=True)
class TermOccurrence:
    """A weak instance term occurrence, identified by its tree path: the
    sequent side, the tree index, then child indices down to the instance."""

    path: tuple
    term: Term

    @property
    def node_id(self) -> str:
        side, idx, *rest = self.path
        return f"{side}[{idx}]" + "".join(f".{c}" for c in rest)


@dataclass(frozen=True)
class DependencyGraph:
    nodes: tuple[TermOccurrence, ...]
    edges: frozenset[tuple[int, int]]  # indices into `nodes`

    def closure(self) -> frozenset[tuple[int, int]]:
        reach: dict[int, set[int]] = {i: set() for i in range(len(self.nodes))}
        for a, b in self.edges:
            reach[a].add(b)
        changed = True
        while changed:
            changed = False
            for a in reach:
                extra = set()
                for b in reach[a]:
                    extra |= reach[b] - reach[a]
                if extra:
                    reach[a] |= extra
                    changed = True
        return frozenset((a, b) for a, bs in reach.items() for b in bs)


def _walk_tree(tree, path, occurrences, strongs) -> None:
    if isinstance(tree, ETAtom):
        return
    if isinstance(tree, ETNeg):
        _walk_tree(tree.child, path + (0,), occurrences, strongs)
    elif isinstance(tree, ETBin):
        _walk_tree(tree.left, path + (0,), occurrences, strongs)
        _walk_tree(tree.right, path + (1,), occurrences, strongs)
    elif isinstance(tree, ETWeak):
        for i, (term, child) in enumerate(tree.instances):
            occurrences.append(TermOccurrence(path + (i,), term))
            _walk_tree(child, path + (i,), occurrences, strongs)
    elif isinstance(tree, ETStrong):
        strongs.append((path, tree.eigenvariable))
        _walk_tree(tree.child, path + (0,), occurrences, strongs)


def dependency_relation(es: ExpansionSequent) -> DependencyGraph:
    """Base dependency relation: an edge t -> s whenever some eigenvariable
    of a strong node at or below t's instance edge occurs free in s."""
    occurrences: list[TermOccurrence] = []
    strongs: list[tuple[tuple, str]] = []
    for i, tree in enumerate(es.antecedent):
        _walk_tree(tree, ("ant", i), occurrences, strongs)
    for i, tree in enumerate(es.succedent):
        _walk_tree(tree, ("suc", i), occurrences, strongs)
    edges = set()
    for a, occ in enumerate(occurrences):
        k = len(occ.path)
        dominated = {eig for spath, eig in strongs if spath[:k] == occ.path}
        if not dominated:
            continue
        for b, other in enumerate(occurrences):
            if free_vars(other.term) & dominated:
                edges.add((a, b))
    return DependencyGraph(tuple(occurrences), frozenset(edges))


def is_acyclic(g: DependencyGraph) -> tuple[bool, Optional[tuple[str, ...]]]:
    """Cycle detection over the base edges; the witness is the shortest cycle
    found by BFS from each node in node order."""
    adj: dict[int, list[int]] = {i: [] for i in range(len(g.nodes))}
    for a, b in sorted(g.edges):
        adj[a].append(b)
    best: Optional[list[int]] = None
    for start in range(len(g.nodes)):
        parent: dict[int, int] = {}
        queue = deque([start])
        seen = {start}
        found = None
        while queue and found is None:
            node = queue.popleft()
            for nxt in adj[node]:
                if nxt == start:
                    found = node
                    break
                if nxt not in seen:
                    seen.add(nxt)
                    parent[nxt] = node
                    queue.append(nxt)
        if found is None:
            continue
        cycle = [found]
        while cycle[-1] != start:
            cycle.append(parent[cycle[-1]])
        cycle.reverse()
        if best is None or len(cycle) < len(best):
            best = cycle
    if best is None:
        return True, None
    return False, tuple(g.nodes[i].node_id for i in best)


# ---------------------------------------------------------------------------
# verdict


@dataclass(frozen=True)
class Verdict:
    is_proof: bool
    tautology: bool
    acyclic: bool
    counterexample: Optional[dict[str, bool]] = None
    cycle: Optional[tuple[str, ...]] = None

    def to_json(self) -> dict:
        out = {"is_proof": self.is_proof, "tautology": self.tautology, "acyclic": self.acyclic}
        if self.counterexample is not None:
            out["counterexample"] = dict(self.counterexample)
        if self.cycle is not None:
            out["cycle"] = list(self.cycle)
        return out


def verdict(es: ExpansionSequent) -> Verdict:
    """The sanity check: an expansion sequent is a proof iff its deep sequent
    is a tautology and its dependency relation is acyclic.  This validates
    the claimed instantiations, not individual inference steps."""
    taut, counterexample = is_tautology(deep_sequent(es))
    acyclic, cycle = is_acyclic(dependency_relation(es))
    return Verdict(taut and acyclic, taut, acyclic, counterexample, cycle)
