import random

from exproof.check import (
    DependencyGraph,
    TermOccurrence,
    deep_sequent,
    dependency_relation,
    is_acyclic,
    is_tautology,
    verdict,
)
from exproof.core import Atom, Sequent, Var, const, eq
from exproof.expansion import ETAtom, ETBin, ETNeg, ETStrong, ETWeak, ExpansionSequent
from exproof.notation import parse_formula, sequent_text
from oracles import eval_sequent, has_cycle_bruteforce, sequent_atoms, taut_oracle
from randgen import random_deep_sequent, random_graph

P = lambda t: Atom("p", (t,))
a, b, c = const("a"), const("b"), const("c")
A, B = Var("A"), Var("B")


def drinker_sequent() -> ExpansionSequent:
    """succedent tree for ?[X]: (p(X) => ![Y]: p(Y)) with instances c, A."""
    body = parse_formula("p(X) => ![Y]: p(Y)", extra_vars={"X"})
    child1 = ETBin("imp", ETAtom(P(c)), ETStrong("Y", P(Var("Y")), "A", ETAtom(P(A))))
    child2 = ETBin("imp", ETAtom(P(A)), ETStrong("Y", P(Var("Y")), "B", ETAtom(P(B))))
    return ExpansionSequent((), (ETWeak("X", body, ((c, child1), (A, child2))),))


def crossed_sequent() -> ExpansionSequent:
    """Two antecedent trees whose instances use each other's eigenvariables."""

    def tree(outer, inner, eigen, instance, pred):
        atom = Atom(pred, (instance, Var(eigen)))
        strong = ETStrong(inner, Atom(pred, (instance, Var(inner))), eigen, ETAtom(atom))
        shallow_body = parse_formula(f"?[{inner}]: {pred}({outer}, {inner})", extra_vars={outer})
        return ETWeak(outer, shallow_body, ((instance, strong),))

    t1 = tree("X", "U", "A", B, "r")  # X := B, eigenvariable A
    t2 = tree("Y", "V", "B", A, "s")  # Y := A, eigenvariable B
    return ExpansionSequent((t1, t2), ())


# --- deep sequent ---


def test_deep_sequent_single_instance():
    es = ExpansionSequent(
        (ETWeak("X", P(Var("X")), ((c, ETAtom(P(c))),)),), (ETAtom(P(c)),)
    )
    assert deep_sequent(es) == Sequent((P(c),), (P(c),))


def test_deep_sequent_empty():
    assert deep_sequent(ExpansionSequent()) == Sequent()


def test_deep_sequent_drinker():
    ds = deep_sequent(drinker_sequent())
    assert sequent_text(ds) == "⊢ ((p(c) => p(A)) | (p(A) => p(B)))"


# --- tautology ---


def test_excluded_middle():
    ds = Sequent((), (parse_formula("p(a) | ~p(a)"),))
    assert is_tautology(ds) == (True, None)


def test_transitivity_instance_makes_tautology():
    ds = Sequent(
        (eq(a, b), eq(b, c), parse_formula("(a = b & b = c) => a = c")),
        (eq(a, c),),
    )
    assert is_tautology(ds) == (True, None)


def test_equality_is_opaque_without_axiom():
    ds = Sequent((eq(a, b), eq(b, c)), (eq(a, c),))
    ok, assignment = is_tautology(ds)
    assert not ok
    assert assignment == {"a = b": True, "b = c": True, "a = c": False}


def test_empty_sequent_is_not_tautology():
    assert is_tautology(Sequent()) == (False, {})


def test_tautology_agrees_with_truth_table_seeded():
    rng = random.Random(424242)
    for i in range(300):
        ds = random_deep_sequent(rng)
        ours, assignment = is_tautology(ds)
        oracle, _ = taut_oracle(ds)
        assert ours == oracle, f"case {i}: {sequent_text(ds)}"
        if not ours:
            by_name = {str(atom): atom for atom in sequent_atoms(ds)}
            mapped = {by_name[k]: v for k, v in assignment.items()}
            assert eval_sequent(ds, mapped) is False, f"case {i}"


# --- dependency relation ---


def test_no_strong_nodes_means_no_edges():
    es = ExpansionSequent((ETWeak("X", P(Var("X")), ((a, ETAtom(P(a))),)),), ())
    g = dependency_relation(es)
    assert len(g.nodes) == 1 and not g.edges


def test_drinker_dependency_single_edge():
    g = dependency_relation(drinker_sequent())
    ids = [n.node_id for n in g.nodes]
    assert ids == ["suc[0].0", "suc[0].1"]
    assert g.edges == frozenset({(0, 1)})  # c dominates A's node; A occurs in instance 2


def test_crossed_dependency_two_cycle():
    g = dependency_relation(crossed_sequent())
    assert g.edges == frozenset({(0, 1), (1, 0)})
    ok, cycle = is_acyclic(g)
    assert not ok
    assert len(cycle) == 2


def test_strong_node_at_instance_child_is_dominated():
    # forall X exists Y r(X,Y): the strong node sits directly on the instance edge
    strong = ETStrong("Y", Atom("r", (a, Var("Y"))), "E", ETAtom(Atom("r", (a, Var("E")))))
    t1 = ETWeak("X", parse_formula("?[Y]: r(X, Y)", extra_vars={"X"}), ((a, strong),))
    t2 = ETWeak("Z", Atom("r", (a, Var("Z"))), ((Var("E"), ETAtom(Atom("r", (a, Var("E"))))),))
    g = dependency_relation(ExpansionSequent((t1,), (t2,)))
    assert g.edges == frozenset({(0, 1)})


def test_closure_is_transitive():
    nodes = tuple(TermOccurrence(("ant", i), const(f"t{i}")) for i in range(3))
    g = DependencyGraph(nodes, frozenset({(0, 1), (1, 2)}))
    assert g.closure() == frozenset({(0, 1), (1, 2), (0, 2)})


# --- acyclicity ---


def _graph_of(n, edges):
    nodes = tuple(TermOccurrence(("ant", i), const(f"t{i}")) for i in range(n))
    return DependencyGraph(nodes, frozenset(edges))


def test_acyclic_zero_edges():
    assert is_acyclic(_graph_of(3, set())) == (True, None)


def test_self_loop_is_a_cycle():
    ok, cycle = is_acyclic(_graph_of(1, {(0, 0)}))
    assert not ok and cycle == ("ant[0]",)


def test_acyclic_matches_bruteforce_seeded():
    rng = random.Random(777)
    for i in range(250):
        n, edges = random_graph(rng)
        ours, cycle = is_acyclic(_graph_of(n, edges))
        assert ours == (not has_cycle_bruteforce(n, edges)), f"case {i}: {n} {sorted(edges)}"
        if cycle is not None:
            assert len(cycle) >= 1


# --- verdict ---


def test_drinker_is_proof():
    v = verdict(drinker_sequent())
    assert v.is_proof and v.tautology and v.acyclic
    assert v.counterexample is None and v.cycle is None
    assert v.to_json() == {"is_proof": True, "tautology": True, "acyclic": True}


def test_opaque_equality_verdict_fails_tautology():
    es = ExpansionSequent((ETAtom(eq(a, b)), ETAtom(eq(b, c))), (ETAtom(eq(a, c)),))
    v = verdict(es)
    assert not v.is_proof and not v.tautology and v.acyclic
    assert v.counterexample is not None


def test_crossed_verdict_fails_acyclicity():
    # make the deep sequent trivially tautological but keep the cycle
    base = crossed_sequent()
    taut = ETBin("or", ETAtom(P(a)), ETNeg(ETAtom(P(a))))
    es = ExpansionSequent(base.antecedent, (taut,))
    v = verdict(es)
    assert v.tautology and not v.acyclic and not v.is_proof
    assert v.cycle is not None and len(v.cycle) == 2
    assert "cycle" in v.to_json() and "counterexample" not in v.to_json()
