"""Typed circuit graph and its mapping to and from triples."""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from functools import cached_property

from .errors import ValidationError
from .store import TripleStore
from .terms import C, IRI, LOCAL_RE, Literal, Term, Triple
from .vocab import (
    CONNECTS,
    DEFAULT_VOCABULARY,
    HAS_FUNCTION,
    HAS_PART,
    NAME,
    ON_SUPPLY,
    PORT,
    POSITION,
    TYPE,
    WIKIDATA,
    Vocabulary,
)

ID_RE = re.compile(r"[A-Za-z0-9_-]+")


@dataclass(frozen=True)
class Component:
    """A graph node: a component, or a structural JUNCTION/CROSSOVER node."""

    id: str
    cls: IRI
    name: str = ""
    position: tuple[int, int] | None = None

    def __post_init__(self):
        # an unnamed component is called by its id, as in its triples
        if not self.name:
            object.__setattr__(self, "name", self.id)

    @property
    def iri(self) -> IRI:
        return IRI(C, self.id)


@dataclass(frozen=True)
class Port:
    id: str
    owner: str
    name: str

    @property
    def iri(self) -> IRI:
        return IRI(C, self.id)


@dataclass(frozen=True)
class FunctionAnnotation:
    component: str
    function: IRI
    # (rule name, ((var, term), ...)) pairs; not part of identity
    provenance: tuple[tuple[str, tuple[tuple[str, Term], ...]], ...] = field(default=(), compare=False)


def connection(a: str, b: str) -> frozenset[str]:
    return frozenset((a, b))


def _sorted_pair(pair: frozenset[str]) -> tuple[str, str]:
    a, b = sorted(pair)
    return a, b


@dataclass(frozen=True)
class CircuitGraph:
    """Immutable circuit graph.

    ``connections`` holds unordered endpoint pairs; endpoints are component
    or port ids.  ``warnings`` carries non-fatal diagnostics from whoever
    built the graph and does not take part in equality.
    """

    components: frozenset[Component] = frozenset()
    ports: frozenset[Port] = frozenset()
    connections: frozenset[frozenset[str]] = frozenset()
    annotations: frozenset[FunctionAnnotation] = frozenset()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "components", frozenset(self.components))
        object.__setattr__(self, "ports", frozenset(self.ports))
        object.__setattr__(
            self, "connections", frozenset(c if isinstance(c, frozenset) else frozenset(c) for c in self.connections)
        )
        object.__setattr__(self, "annotations", frozenset(self.annotations))
        object.__setattr__(self, "warnings", tuple(self.warnings))
        self._validate()

    def _validate(self) -> None:
        ids: set[str] = set()
        for node in (*self.components, *self.ports):
            if not ID_RE.fullmatch(node.id) or not LOCAL_RE.fullmatch(node.id):
                raise ValidationError(f"invalid node id {node.id!r}")
            if node.id in ids:
                raise ValidationError(f"duplicate node id {node.id!r}")
            ids.add(node.id)
        comp_ids = {c.id for c in self.components}
        for p in self.ports:
            if p.owner not in comp_ids:
                raise ValidationError(f"port {p.id!r} has unknown owner {p.owner!r}")
        for pair in self.connections:
            if len(pair) != 2:
                raise ValidationError(f"connection {sorted(pair)} must join two distinct nodes")
            for end in pair:
                if end not in ids:
                    raise ValidationError(f"connection endpoint {end!r} does not exist")
        for a in self.annotations:
            if a.component not in comp_ids:
                raise ValidationError(f"annotation on unknown component {a.component!r}")

    @cached_property
    def component_map(self) -> dict[str, Component]:
        return {c.id: c for c in self.components}

    @cached_property
    def port_map(self) -> dict[str, Port]:
        return {p.id: p for p in self.ports}

    def ports_of(self, component_id: str) -> list[Port]:
        return sorted((p for p in self.ports if p.owner == component_id), key=lambda p: p.id)

    def owner_of(self, node_id: str) -> str:
        """The component a node belongs to (itself for components)."""
        port = self.port_map.get(node_id)
        return port.owner if port else node_id

    def with_annotations(self, annotations: Iterable[FunctionAnnotation]) -> "CircuitGraph":
        return replace(self, annotations=frozenset(self.annotations) | frozenset(annotations))

    def without_positions(self) -> "CircuitGraph":
        return replace(self, components=frozenset(replace(c, position=None) for c in self.components))


def annotations_of(g: CircuitGraph, component_id: str) -> set[IRI]:
    """Function classes attached to a component."""
    if component_id not in g.component_map:
        raise ValidationError(f"unknown component {component_id!r}")
    return {a.function for a in g.annotations if a.component == component_id}


def to_triples(
    g: CircuitGraph,
    links: Mapping[IRI, str] | None = None,
    vocab: Vocabulary = DEFAULT_VOCABULARY,
) -> TripleStore:
    """Encode *g* as triples.

    Connections are emitted once, lexicographically smaller endpoint first;
    the symmetry rule supplies the reverse direction during reasoning.  Link
    triples are only written for classes that occur in *g*.
    """
    store = TripleStore()
    used: set[IRI] = set()
    for c in g.components:
        if not vocab.is_node_class(c.cls):
            raise ValidationError(f"component {c.id!r} has unknown class {c.cls}")
        store.add(Triple(c.iri, TYPE, c.cls))
        store.add(Triple(c.iri, NAME, Literal(c.name)))
        if c.position is not None:
            store.add(Triple(c.iri, POSITION, Literal(f"{c.position[0]},{c.position[1]}")))
        used.add(c.cls)
    for p in g.ports:
        store.add(Triple(IRI(C, p.owner), HAS_PART, p.iri))
        store.add(Triple(p.iri, TYPE, PORT))
        store.add(Triple(p.iri, NAME, Literal(p.name)))
    for pair in g.connections:
        a, b = _sorted_pair(pair)
        store.add(Triple(IRI(C, a), CONNECTS, IRI(C, b)))
    for ann in g.annotations:
        if not vocab.is_function_class(ann.function):
            raise ValidationError(f"unknown function class {ann.function}")
        store.add(Triple(IRI(C, ann.component), HAS_FUNCTION, ann.function))
        used.add(ann.function)
    if links:
        for cls in sorted(used):
            qid = links.get(cls)
            if qid:
                store.add(Triple(cls, WIKIDATA, IRI("wd", qid)))
    return store


_IGNORED = {WIKIDATA, ON_SUPPLY}


def from_triples(
    store: Iterable[Triple],
    derivations: Iterable | None = None,
    vocab: Vocabulary = DEFAULT_VOCABULARY,
) -> CircuitGraph:
    """Decode a store produced by :func:`to_triples`.

    Unknown predicates are skipped and reported in ``warnings``.  When
    *derivations* are given, annotation provenance is filled from them.
    """
    types: dict[IRI, set[IRI]] = {}
    names: dict[IRI, str] = {}
    positions: dict[IRI, tuple[int, int]] = {}
    owners: dict[IRI, list[IRI]] = {}
    connects: set[frozenset[IRI]] = set()
    functions: set[tuple[IRI, IRI]] = set()
    warnings: list[str] = []
    mentioned: set[IRI] = set()

    for s, p, o in sorted(store):
        if p == TYPE:
            types.setdefault(s, set()).add(o)
        elif p == NAME:
            if not isinstance(o, Literal):
                raise ValidationError(f"name of {s} must be a literal")
            names[s] = o.value
            mentioned.add(s)
        elif p == POSITION:
            try:
                x, y = (int(v) for v in o.value.split(","))
            except (AttributeError, ValueError):
                raise ValidationError(f"bad position {o} on {s}") from None
            positions[s] = (x, y)
        elif p == HAS_PART:
            owners.setdefault(o, []).append(s)
            mentioned.update((s, o))
        elif p == CONNECTS:
            if s != o:
                connects.add(frozenset((s, o)))
            mentioned.update((s, o))
        elif p == HAS_FUNCTION:
            functions.add((s, o))
        elif p in _IGNORED:
            continue
        else:
            warnings.append(f"ignored triple with unknown predicate {p}")

    def local(iri: IRI) -> str:
        if not isinstance(iri, IRI) or iri.prefix != C:
            raise ValidationError(f"resource {iri} is outside the instance namespace")
        return iri.local

    components = []
    ports = []
    for s in sorted(set(types) | mentioned):
        classes = types.get(s, set())
        if PORT in classes:
            own = owners.get(s, [])
            if len(own) != 1:
                what = "no owner" if not own else f"{len(own)} owners ({', '.join(sorted(own))})"
                raise ValidationError(f"port {s} has {what}")
            ports.append(Port(local(s), local(own[0]), names.get(s, local(s))))
            continue
        node_classes = sorted(c for c in classes if vocab.is_node_class(c))
        if not node_classes:
            if s in owners:
                raise ValidationError(f"{s} is owned like a port but not typed w:PORT")
            if s in mentioned or s in types and not classes <= _role_types(vocab):
                raise ValidationError(f"component {s} has no class")
            continue
        if len(node_classes) > 1:
            raise ValidationError(f"component {s} has several classes: {', '.join(node_classes)}")
        components.append(Component(local(s), node_classes[0], names.get(s, local(s)), positions.get(s)))

    provenance: dict[tuple[IRI, IRI], list] = {}
    for d in derivations or ():
        if d.triple.predicate == HAS_FUNCTION:
            provenance.setdefault((d.triple.subject, d.triple.object), []).append((d.rule, d.bindings))
    annotations = [
        FunctionAnnotation(local(s), o, tuple(sorted(provenance.get((s, o), []))))
        for s, o in sorted(functions)
    ]
    return CircuitGraph(
        components=components,
        ports=ports,
        connections={frozenset(local(x) for x in pair) for pair in connects},
        annotations=annotations,
        warnings=tuple(warnings),
    )


def _role_types(vocab: Vocabulary) -> set[IRI]:
    return {IRI("w", r) for r in vocab.role_classes}

