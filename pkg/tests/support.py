"""Shared helpers for the test suite: fixture loaders, oracles and circuit generators."""

from __future__ import annotations

import random
from decimal import Decimal
from pathlib import Path

import networkx as nx

from circuit_annotator.cli import load_graph
from circuit_annotator.ingest.sexpr import Str, head, parse_sexpr
from circuit_annotator.model import CircuitGraph, Component, Port, connection
from circuit_annotator.terms import C, IRI, Triple, Variable
from circuit_annotator.turtle import parse_turtle
from circuit_annotator.vocab import DEFAULT_VOCABULARY, HAS_FUNCTION

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
DATA = Path(__file__).resolve().parent / "data"
LISTINGS = DATA / "listings"

V = DEFAULT_VOCABULARY


def fixture_paths() -> list[Path]:
    return sorted(p for p in FIXTURES.iterdir() if p.suffix in (".json", ".kicad_sch"))


def sidecar(path: Path) -> Path:
    return path.with_name(path.name.split(".")[0] + ".expected.ttl")


def load_fixture(name: str) -> CircuitGraph:
    return load_graph(FIXTURES / name)


def expected_annotations(path: Path) -> set[tuple[str, str]]:
    """(component id, function local name) pairs listed in the sidecar."""
    store = parse_turtle(sidecar(path).read_text("utf-8"))
    return {(t.subject.local, t.object.local) for t in store.triples(None, HAS_FUNCTION, None)}


def annotation_pairs(g: CircuitGraph) -> set[tuple[str, str]]:
    return {(a.component, a.function.local) for a in g.annotations}


# --- brute-force closure oracle ---------------------------------------------


def _unify(pattern, triple, env):
    env = dict(env)
    for p, t in zip(pattern, triple):
        if isinstance(p, Variable):
            if p.name in env and env[p.name] != t:
                return None
            env[p.name] = t
        elif p != t:
            return None
    return env


def _all_matches(body, triples, env=None):
    """Nested-loop join; facts are bucketed by predicate and patterns taken
    most-bound first, which keeps the loops small without any delta logic."""
    by_pred = {}
    for t in triples:
        by_pred.setdefault(t[1], []).append(t)
    envs = [env or {}]
    todo = list(body)
    while todo and envs:
        bound = set(envs[0])
        pattern = max(todo, key=lambda p: sum(not isinstance(x, Variable) or x.name in bound for x in p))
        todo.remove(pattern)
        pool = triples if isinstance(pattern[1], Variable) else by_pred.get(pattern[1], [])
        envs = [e2 for e in envs for t in pool if (e2 := _unify(pattern, t, e)) is not None]
    return envs


def naive_closure(triples, rules):
    """Naive fixpoint: re-match every rule against the whole set until nothing changes.

    Returns (closed triple set, set of (triple, rule name, sorted bindings))
    where the derivation set only covers triples not in the input.
    """
    facts = set(Triple(*t) for t in triples)
    initial = set(facts)
    derivations = set()
    changed = True
    while changed:
        changed = False
        snapshot = list(facts)
        for rule in rules:
            for env in _all_matches(rule.body, snapshot):
                if any(env[g.left.name] == env[g.right.name] for g in rule.guards):
                    continue
                for pattern in rule.head:
                    t = Triple(*(env[x.name] if isinstance(x, Variable) else x for x in pattern))
                    if not (isinstance(t.subject, IRI) and isinstance(t.predicate, IRI)):
                        continue
                    if t not in initial:
                        derivations.add((t, rule.name, tuple(sorted(env.items()))))
                    if t not in facts:
                        facts.add(t)
                        changed = True
    return facts, derivations


def body_holds(rule, bindings, store) -> bool:
    env = dict(bindings)
    for pattern in rule.body:
        t = Triple(*(env[x.name] if isinstance(x, Variable) else x for x in pattern))
        if t not in store:
            return False
    return all(env[g.left.name] != env[g.right.name] for g in rule.guards)


# --- circuit builders -------------------------------------------------------

PORTS = {
    "RESISTOR": ("p1", "p2"),
    "CAPACITOR": ("p1", "p2"),
    "INDUCTOR": ("p1", "p2"),
    "CRYSTAL": ("p1", "p2"),
    "SWITCH": ("p1", "p2"),
    "DIODE": ("anode", "cathode"),
    "LED": ("anode", "cathode"),
    "TRANSISTOR_NPN": ("base", "collector", "emitter"),
    "TRANSISTOR_PNP": ("base", "collector", "emitter"),
    "RELAY": ("coil1", "coil2", "com", "nc", "no"),
    "IC": ("vcc", "gnd", "out", "in"),
    "VOLTAGE_SOURCE": ("pos", "neg"),
    "VCC_SYMBOL": ("p1",),
    "GND_SYMBOL": ("p1",),
    "NET_LABEL": ("p1",),
    "JUNCTION": (),
    "CROSSOVER": ("a_1", "a_2", "b_1", "b_2"),
}


class Builder:
    """Small imperative helper for assembling CircuitGraphs in tests."""

    def __init__(self):
        self.components: list[Component] = []
        self.ports: list[Port] = []
        self.connections: set[frozenset[str]] = set()

    def add(self, ident: str, cls: str, ports: tuple[str, ...] | None = None) -> str:
        self.components.append(Component(ident, V.node_class(cls)))
        for name in PORTS[cls] if ports is None else ports:
            self.ports.append(Port(f"{ident}_{name}", ident, name))
        return ident

    def wire(self, a: str, b: str) -> None:
        if a != b:
            self.connections.add(connection(a, b))

    def graph(self) -> CircuitGraph:
        return CircuitGraph(self.components, self.ports, self.connections)


def random_circuit(rng: random.Random, max_components: int = 50) -> CircuitGraph:
    """A random netlist-shaped circuit, not necessarily a sensible one.

    Ports are dealt into random nets.  Two-member nets become direct links
    or a junction; bigger nets get a junction, sometimes split into a chain
    of two junctions joined by a wire (a corner).  Crossover ports and
    supply symbols take part like any other port.
    """
    b = Builder()
    classes = [c for c in PORTS if c not in ("JUNCTION", "CROSSOVER")]
    n = rng.randint(2, max_components)
    n_cross = rng.randint(0, min(2, n - 1))
    endpoints = []
    for i in range(n - n_cross):
        cls = rng.choice(classes)
        cid = b.add(f"{cls[:3]}{i}", cls)
        endpoints.extend(f"{cid}_{p}" for p in PORTS[cls])
    for i in range(n_cross):
        cid = b.add(f"X{i}", "CROSSOVER")
        endpoints.extend(f"{cid}_{p}" for p in PORTS["CROSSOVER"])
    rng.shuffle(endpoints)
    nets: list[list[str]] = [[] for _ in range(max(1, len(endpoints) // rng.randint(2, 4)))]
    for e in endpoints:
        if rng.random() < 0.9:
            rng.choice(nets).append(e)
    junctions = 0
    for members in nets:
        if len(members) < 2:
            continue
        if len(members) == 2 and rng.random() < 0.7:
            b.wire(*members)
            continue
        hub = b.add(f"J{junctions}", "JUNCTION")
        junctions += 1
        if len(members) > 3 and rng.random() < 0.3:
            corner = b.add(f"J{junctions}", "JUNCTION")
            junctions += 1
            b.wire(hub, corner)
            for k, m in enumerate(members):
                b.wire(m, hub if k % 2 else corner)
        else:
            for m in members:
                b.wire(m, hub)
    return b.graph()


def chained_blocks(n_blocks: int) -> tuple[CircuitGraph, set[tuple[str, str]]]:
    """n_blocks of ten components each: a divider-biased common-emitter stage,
    a pull-up on an IC input with a switch to ground, and a coupling capacitor
    feeding the next stage's base.  Returns the graph and its expected
    (component, function) pairs.
    """
    b = Builder()
    expected: set[tuple[str, str]] = set()
    for i in range(n_blocks):
        k = f"b{i}_"
        for cls, name in [
            ("VCC_SYMBOL", "VCC"), ("GND_SYMBOL", "GND"), ("RESISTOR", "R1"), ("RESISTOR", "R2"),
            ("TRANSISTOR_NPN", "Q1"), ("RESISTOR", "Rc"), ("CAPACITOR", "C1"), ("RESISTOR", "Rp"),
            ("SWITCH", "SW1"), ("IC", "U1"),
        ]:
            b.add(k + name, cls)
        for j in ("JV", "JG", "Jmid", "Jc", "Jp"):
            b.add(k + j, "JUNCTION")
        for port in ("VCC_p1", "R1_p1", "Rc_p1", "Rp_p1", "U1_vcc"):
            b.wire(k + port, k + "JV")
        for port in ("GND_p1", "R2_p2", "Q1_emitter", "SW1_p2", "U1_gnd"):
            b.wire(k + port, k + "JG")
        for port in ("R1_p2", "R2_p1", "Q1_base"):
            b.wire(k + port, k + "Jmid")
        for port in ("Q1_collector", "Rc_p2", "C1_p1"):
            b.wire(k + port, k + "Jc")
        for port in ("Rp_p2", "SW1_p1", "U1_in"):
            b.wire(k + port, k + "Jp")
        if i:
            b.wire(f"b{i - 1}_C1_p2", k + "Jmid")
        expected |= {
            (k + "R1", "VOLTAGE_DIVIDER"), (k + "R2", "VOLTAGE_DIVIDER"),
            (k + "R1", "EMITTER_COMMON_AMPLIFIER"), (k + "R2", "EMITTER_COMMON_AMPLIFIER"),
            (k + "Q1", "EMITTER_COMMON_AMPLIFIER"), (k + "Rc", "EMITTER_COMMON_AMPLIFIER"),
            (k + "Rp", "PULLUP_RESISTOR"), (k + "SW1", "ELECTRONIC_SWITCH"),
        }
    return b.graph(), expected


# --- isomorphism ------------------------------------------------------------


def to_nx(g: CircuitGraph, positions: bool = True) -> nx.Graph:
    """Labelled simple graph: components and ports as nodes, has_part and connections as edges."""
    h = nx.Graph()
    for c in g.components:
        label = (c.cls, c.name or c.id, c.position if positions else None)
        h.add_node(c.id, label=label)
    for p in g.ports:
        h.add_node(p.id, label=("PORT", p.name))
        h.add_edge(p.owner, p.id, kind="part")
    for pair in g.connections:
        a, b = sorted(pair)
        h.add_edge(a, b, kind="wire")
    for a in g.annotations:
        h.nodes[a.component].setdefault("functions", set()).add(a.function)
    return h


def isomorphic(g1: CircuitGraph, g2: CircuitGraph, positions: bool = True) -> bool:
    def node_match(x, y):
        return x["label"] == y["label"] and x.get("functions", set()) == y.get("functions", set())

    return nx.is_isomorphic(
        to_nx(g1, positions), to_nx(g2, positions),
        node_match=node_match, edge_match=lambda x, y: x["kind"] == y["kind"],
    )


def iri(local: str) -> IRI:
    return IRI(C, local)


# --- KiCad text helpers -----------------------------------------------------


def dump_sexpr(node) -> str:
    if isinstance(node, list):
        return "(" + " ".join(dump_sexpr(n) for n in node) + ")"
    if isinstance(node, Str):
        return '"' + node.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return str(node)


def _shift(node, dx: Decimal, dy: Decimal) -> None:
    if not isinstance(node, list):
        return
    if head(node) in ("at", "xy"):
        node[1] = type(node[1])(str(Decimal(node[1]) + dx))
        node[2] = type(node[2])(str(Decimal(node[2]) + dy))
        return
    for child in node[1:]:
        _shift(child, dx, dy)


def shift_schematic(text: str, dx: str, dy: str) -> str:
    """Move every placed item by (dx, dy) mm; library symbol geometry is relative and stays."""
    tree = parse_sexpr(text)
    for item in tree[1:]:
        if head(item) != "lib_symbols":
            _shift(item, Decimal(dx), Decimal(dy))
    return dump_sexpr(tree)
