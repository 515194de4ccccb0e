"""Rule parsing and fixpoint evaluation."""

import random

import pytest
from support import body_holds, iri, naive_closure, random_circuit

from circuit_annotator.engine import apply_to_fixpoint, explain, fire
from circuit_annotator.errors import RuleError, RuleSyntaxError
from circuit_annotator.library import builtin_preprocessing
from circuit_annotator.model import to_triples
from circuit_annotator.rules import NotEqual, RuleSet, parse_rules
from circuit_annotator.store import TripleStore
from circuit_annotator.terms import IRI, RDF_TYPE, Literal, Triple, Variable
from circuit_annotator.turtle import serialize_turtle
from circuit_annotator.vocab import CONNECTS, JUNCTION

SYMM = "[electSymm: (?a w:connects ?b) -> (?b w:connects ?a)]"
BYJ = """[byJ: (?a w:connects ?junction), (?junction w:connects ?c),
          (?junction rdf:type w:JUNCTION), notEqual(?a, ?c) -> (?a w:connects ?c)]"""

d1, j1 = iri("d1"), iri("j1")


# --- parsing ----------------------------------------------------------------


def test_parse_symmetry_rule():
    rs = parse_rules(SYMM)
    assert len(rs) == 1
    r = rs["electSymm"]
    assert r.body == ((Variable("a"), CONNECTS, Variable("b")),)
    assert r.head == ((Variable("b"), CONNECTS, Variable("a")),)


def test_parse_empty_and_comment_only():
    assert len(parse_rules("")) == 0
    assert len(parse_rules("# nothing here\n\n")) == 0


def test_parse_guard_multi_head_literal_and_doc():
    rs = parse_rules(
        "# joins a port named a_1\n"
        "[r: (?p w:name a_1), (?o w:has_part ?p), notEqual(?o, ?p)\n"
        "    -> (?o rdf:type w:CROSSOVER), (?p rdf:type w:PORT)]"
    )
    r = rs["r"]
    assert r.body[0][2] == Literal("a_1")
    assert r.guards == (NotEqual(Variable("o"), Variable("p")),)
    assert len(r.head) == 2
    assert r.doc == "joins a port named a_1"


def test_whitespace_is_insignificant():
    a = parse_rules(SYMM)["electSymm"]
    b = parse_rules("[ electSymm :\n(?a\n w:connects   ?b)\n->\n(?b w:connects ?a) ]")["electSymm"]
    assert (a.body, a.head) == (b.body, b.head)


def test_unbound_head_variable():
    with pytest.raises(RuleSyntaxError, match=r"\?c"):
        parse_rules("[bad: (?a w:connects ?b) -> (?c w:connects ?a)]")


def test_duplicate_rule_name():
    with pytest.raises(RuleSyntaxError, match="duplicate") as exc:
        parse_rules(SYMM + "\n" + SYMM)
    assert exc.value.line == 2


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("[r: (?a w:connects ?b) (?b w:connects ?a)]", 1, 24),
        ("\n  [r: (?a w:connects) -> (?a w:connects ?a)]", 2, 21),
        ("[r: (?a w:connects ?b) -> (?b w:connects ?a)", 1, 45),
        ("[r: (?a w:connects ?b) -> (?b w:connects ?a)] $", 1, 47),
        ("[r: notEqual(?a, ?b) -> (?a w:connects ?b)]", 1, 1),
        ("[r: (?a w:connects ?b), notEqual(?a, ?z) -> (?b w:connects ?a)]", 1, 1),
    ],
)
def test_syntax_errors_carry_position(text, line, column):
    with pytest.raises(RuleSyntaxError) as exc:
        parse_rules(text)
    assert (exc.value.line, exc.value.column) == (line, column)


def test_unknown_prefix_rejected_when_prefixes_given():
    with pytest.raises(RuleSyntaxError, match="prefix"):
        parse_rules("[r: (?a x:connects ?b) -> (?b w:connects ?a)]", prefixes={"w"})


def test_rule_errors_are_rule_errors():
    assert issubclass(RuleSyntaxError, RuleError)
    with pytest.raises(RuleError):
        RuleSet(list(parse_rules(SYMM)) * 2)


# --- fixpoint ---------------------------------------------------------------


def test_symmetry_example_and_idempotence():
    store = TripleStore([Triple(d1, CONNECTS, j1)])
    rules = parse_rules(SYMM)
    count, ders = apply_to_fixpoint(store, rules)
    assert count == 1
    assert set(store) == {Triple(d1, CONNECTS, j1), Triple(j1, CONNECTS, d1)}
    assert explain(Triple(j1, CONNECTS, d1), ders) == [("electSymm", {"a": d1, "b": j1})]
    assert explain(Triple(d1, CONNECTS, j1), ders) == []
    assert apply_to_fixpoint(store, rules) == (0, [])


def test_star_junction_six_pairs():
    parts = [iri("r1"), iri("c1"), d1]
    store = TripleStore([Triple(p, CONNECTS, j1) for p in parts] + [Triple(j1, RDF_TYPE, JUNCTION)])
    apply_to_fixpoint(store, parse_rules(SYMM + BYJ))
    pairs = {(t.subject, t.object) for t in store.triples(None, CONNECTS, None) if j1 not in t[::2]}
    assert pairs == {(a, b) for a in parts for b in parts if a != b}


def test_heads_with_literal_subject_are_skipped():
    rules = parse_rules("[flip: (?a w:name ?n) -> (?n w:name ?a)]")
    store = TripleStore([Triple(d1, IRI("w:name"), Literal("D1"))])
    assert apply_to_fixpoint(store, rules)[0] == 0


def test_fire_single_step():
    store = TripleStore([Triple(d1, CONNECTS, j1)])
    got = list(fire(parse_rules(SYMM)["electSymm"], store))
    assert got == [(Triple(j1, CONNECTS, d1), {"a": d1, "b": j1})]


def test_duplicate_derivations_recorded_but_store_not_grown():
    # both the direct edge and the junction route derive r1 -> r2
    r1, r2 = iri("r1"), iri("r2")
    store = TripleStore(
        [Triple(r1, CONNECTS, j1), Triple(j1, CONNECTS, r2), Triple(j1, RDF_TYPE, JUNCTION),
         Triple(r1, IRI("w:near"), r2)]
    )
    rules = parse_rules(BYJ + "[near: (?a w:near ?b) -> (?a w:connects ?b)]")
    count, ders = apply_to_fixpoint(store, rules)
    assert count == 1
    assert sorted(rule for rule, _ in explain(Triple(r1, CONNECTS, r2), ders)) == ["byJ", "near"]


def _closure_case(seed):
    g = random_circuit(random.Random(seed), max_components=10)
    return to_triples(g), builtin_preprocessing().all_rules()


@pytest.mark.parametrize("seed", range(15))
def test_matches_naive_oracle(seed):
    raw, rules = _closure_case(seed)
    expected_facts, expected_ders = naive_closure(raw, rules)
    store = raw.copy()
    _, ders = apply_to_fixpoint(store, rules)
    assert set(store) == expected_facts
    got = {(d.triple, d.rule, tuple(sorted(d.bindings))) for d in ders}
    assert got == expected_ders


@pytest.mark.parametrize("seed", range(15, 30))
def test_derivation_soundness_and_bound(seed):
    raw, rules = _closure_case(seed)
    terms = {x for t in raw for x in (t.subject, t.object)}
    store = raw.copy()
    count, ders = apply_to_fixpoint(store, rules)
    by_name = {r.name: r for r in rules}
    for d in ders:
        rule = by_name[d.rule]
        assert body_holds(rule, d.bindings, store)
        heads = {Triple(*(d.env[x.name] if isinstance(x, Variable) else x for x in p)) for p in rule.head}
        assert d.triple in heads
    derived = {t for t in store.triples(None, CONNECTS, None) if t not in raw}
    assert len(derived) <= len(terms) ** 2
    assert {d.triple for d in ders} == set(store) - set(raw)


@pytest.mark.parametrize("seed", range(5))
def test_rule_order_and_delta_restart_agree(seed):
    raw, rules = _closure_case(seed)
    a = raw.copy()
    apply_to_fixpoint(a, rules)
    b = raw.copy()
    apply_to_fixpoint(b, list(reversed(list(rules))))
    assert serialize_turtle(a) == serialize_turtle(b)
    # closing half the input, then feeding the rest as delta, reaches the same store
    triples = sorted(raw)
    c = TripleStore(triples[::2])
    apply_to_fixpoint(c, rules)
    rest = [t for t in triples[1::2] if c.add(t)]
    apply_to_fixpoint(c, rules, delta=rest)
    assert c == a


def _junction_chain(k):
    """k junctions in a row, each with one resistor hanging off it."""
    store = TripleStore()
    for i in range(k):
        j = iri(f"j{i}")
        store.add(Triple(j, RDF_TYPE, JUNCTION))
        store.add(Triple(iri(f"r{i}"), CONNECTS, j))
        if i:
            store.add(Triple(iri(f"j{i - 1}"), CONNECTS, j))
    return store


def test_chain_evaluations_grow_polynomially():
    rules = parse_rules(SYMM + BYJ)
    evals = {}
    for k in (8, 16, 32):
        stats = {}
        apply_to_fixpoint(_junction_chain(k), rules, stats=stats)
        evals[k] = stats["evaluations"]
    # closure has O(k^2) connects; a join over it stays within O(k^3) work per doubling
    assert evals[32] / evals[16] < 12
    assert evals[16] / evals[8] < 12
