"""Bundled rule sets and the preprocess -> annotate pipeline."""

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .engine import Derivation, run_fixpoint
from .errors import RuleError
from .model import CircuitGraph, FunctionAnnotation, to_triples
from .rules import Rule, RuleSet, parse_rules
from .store import TripleStore
from .terms import C, FN, IRI, RDF_TYPE, Literal, Term, Triple, Variable
from .vocab import (
    CONNECTS,
    DEFAULT_VOCABULARY,
    HAS_FUNCTION,
    HAS_PART,
    NAME,
    ON_SUPPLY,
    Vocabulary,
    role,
)

STAGES = (
    ("symmetry", "10_symmetry.rules"),
    ("supply", "20_supply.rules"),
    ("resolution", "30_resolution.rules"),
    ("roles", "40_roles.rules"),
)


@dataclass(frozen=True)
class Stage:
    name: str
    rules: RuleSet


@dataclass(frozen=True)
class BuiltinRuleSet:
    """Preprocessing rules grouped into stages.

    Staging is an evaluation-order optimization only: :func:`preprocess`
    cycles through the stages until none of them adds a triple, which yields
    the same store as one fixpoint over :meth:`all_rules`.
    """

    stages: tuple[Stage, ...]

    def all_rules(self) -> RuleSet:
        return RuleSet.merge(s.rules for s in self.stages)

    def __getitem__(self, name: str) -> Stage:
        for s in self.stages:
            if s.name == name:
                return s
        raise KeyError(name)


@dataclass(frozen=True)
class AnnotationRuleFile:
    name: str
    rules: RuleSet

    @property
    def functions(self) -> frozenset[IRI]:
        """Function classes this file can assign."""
        return frozenset(
            p[2] for r in self.rules for p in r.head if p[1] == HAS_FUNCTION and isinstance(p[2], IRI)
        )

    @property
    def docs(self) -> dict[str, str]:
        return {r.name: r.doc for r in self.rules}


def check_vocabulary(rules: Iterable[Rule], vocab: Vocabulary = DEFAULT_VOCABULARY) -> None:
    """Every ``w:``/``rdf:`` term in *rules* must resolve; ``fn:`` terms may be new."""
    for r in rules:
        for pattern in (*r.body, *r.head):
            for t in pattern:
                if isinstance(t, IRI) and t.prefix != FN and not vocab.knows(t):
                    raise RuleError(f"{r.source or '<rules>'}: rule {r.name!r} uses unknown term {t}")


def _check_annotation_heads(rules: Iterable[Rule]) -> None:
    for r in rules:
        for s, p, o in r.head:
            if p == HAS_FUNCTION:
                if not (isinstance(o, IRI) and o.prefix == FN):
                    raise RuleError(f"rule {r.name!r}: has_function must point at an fn: class")
            elif p != RDF_TYPE:
                raise RuleError(f"rule {r.name!r}: annotation heads may only assign functions or types")


def _read_rules(text: str, source: str, vocab: Vocabulary) -> RuleSet:
    rules = parse_rules(text, source=source, prefixes={"w", "rdf", "fn", "wd"})
    check_vocabulary(rules, vocab)
    return rules


def load_rule_file(path: str | Path, vocab: Vocabulary = DEFAULT_VOCABULARY) -> AnnotationRuleFile:
    path = Path(path)
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise RuleError(f"cannot read rule file {path}: {exc.strerror}") from None
    rules = _read_rules(text, str(path), vocab)
    _check_annotation_heads(rules)
    return AnnotationRuleFile(path.name, rules)


def load_rule_dir(path: str | Path, vocab: Vocabulary = DEFAULT_VOCABULARY) -> list[AnnotationRuleFile]:
    """All ``*.rules`` files of a directory, in lexical order."""
    path = Path(path)
    if not path.is_dir():
        raise RuleError(f"rule directory {path} does not exist")
    return [load_rule_file(p, vocab) for p in sorted(path.glob("*.rules"))]


def _bundled(subdir: str):
    return resources.files("circuit_annotator").joinpath("rules", subdir)


def builtin_preprocessing() -> BuiltinRuleSet:
    base = _bundled("preprocessing")
    stages = []
    for name, filename in STAGES:
        text = base.joinpath(filename).read_text("utf-8")
        stages.append(Stage(name, _read_rules(text, filename, DEFAULT_VOCABULARY)))
    return BuiltinRuleSet(tuple(stages))


def builtin_annotations() -> list[AnnotationRuleFile]:
    base = _bundled("annotations")
    files = sorted((p for p in base.iterdir() if p.name.endswith(".rules")), key=lambda p: p.name)
    out = []
    for p in files:
        rules = _read_rules(p.read_text("utf-8"), p.name, DEFAULT_VOCABULARY)
        _check_annotation_heads(rules)
        out.append(AnnotationRuleFile(p.name, rules))
    return out


# --- pipeline-level guards -------------------------------------------------
#
# Two patterns need "and not X".  The rule engine is purely monotone, so the
# rule files only derive candidate types and these guards run once the
# annotation fixpoint is complete.


@dataclass(frozen=True)
class PipelineGuard:
    rule: Rule
    blocked: Callable[[TripleStore, dict[str, Term]], bool]


def _ports(store: TripleStore, owner: Term) -> set[Term]:
    return store.objects(owner, HAS_PART)


def _coupling_blocked(store: TripleStore, binding: dict[str, Term]) -> bool:
    return any(store.count(p, ON_SUPPLY, None) for p in _ports(store, binding["cap"]))


def _switch_blocked(store: TripleStore, binding: dict[str, Term]) -> bool:
    midpoint = role("DIVIDER_MIDPOINT")
    for port in _ports(store, binding["t"]):
        if Triple(port, NAME, Literal("base")) not in store:
            continue
        for other in store.objects(port, CONNECTS):
            if Triple(other, RDF_TYPE, midpoint) in store:
                return True
    return False


def _guard_rule(name: str, var: str, candidate: str, function: str, doc: str) -> Rule:
    v = Variable(var)
    return Rule(
        name=name,
        body=((v, RDF_TYPE, role(candidate)),),
        head=((v, HAS_FUNCTION, IRI(FN, function)),),
        doc=doc,
        source="<pipeline>",
    )


PIPELINE_GUARDS = (
    PipelineGuard(
        _guard_rule(
            "couplingCapacitor",
            "cap",
            "COUPLING_CANDIDATE",
            "COUPLING_CAPACITOR",
            "Coupling candidate with no port on a supply rail.",
        ),
        _coupling_blocked,
    ),
    PipelineGuard(
        _guard_rule(
            "switchTransistor",
            "t",
            "SWITCH_CANDIDATE",
            "ELECTRONIC_SWITCH",
            "Switch candidate whose base is not a divider midpoint.",
        ),
        _switch_blocked,
    ),
)


def apply_guards(
    store: TripleStore, guards: Sequence[PipelineGuard] = PIPELINE_GUARDS, asserted=None
) -> list[Derivation]:
    asserted = set() if asserted is None else asserted
    derivations = []
    for guard in guards:
        for binding in store.match(guard.rule.body[0]):
            if guard.blocked(store, binding):
                continue
            for pattern in guard.rule.head:
                t = Triple(*(binding[x.name] if isinstance(x, Variable) else x for x in pattern))
                store.add(t)
                if t not in asserted:
                    derivations.append(Derivation(t, guard.rule.name, tuple(sorted(binding.items()))))
    return derivations


# --- pipeline ---------------------------------------------------------------


def preprocess(
    store: TripleStore,
    builtin: BuiltinRuleSet | None = None,
    *,
    asserted=None,
    stats: dict | None = None,
) -> list[Derivation]:
    """Run the preprocessing stages over *store* until no stage adds anything.

    Each stage only re-examines triples added since it last ran.
    """
    builtin = builtin or builtin_preprocessing()
    asserted = set(store) if asserted is None else asserted
    stages = builtin.stages
    pending: list[list[Triple] | None] = [None] * len(stages)
    derivations: list[Derivation] = []
    while any(p is None or p for p in pending):
        for i, stage in enumerate(stages):
            if pending[i] is not None and not pending[i]:
                continue
            added, ders = run_fixpoint(store, stage.rules, delta=pending[i], asserted=asserted, stats=stats)
            derivations.extend(ders)
            pending[i] = []
            if added:
                for j in range(len(stages)):
                    if j != i and pending[j] is not None:
                        pending[j].extend(added)
    return derivations


@dataclass
class Reasoning:
    """Everything one pipeline run produced."""

    graph: CircuitGraph
    raw: TripleStore
    store: TripleStore
    derivations: list[Derivation]
    vocab: Vocabulary
    stats: dict = field(default_factory=dict)

    @property
    def annotated(self) -> CircuitGraph:
        provenance: dict[Triple, list] = {}
        for d in self.derivations:
            if d.triple.predicate == HAS_FUNCTION:
                provenance.setdefault(d.triple, []).append((d.rule, d.bindings))
        comps = self.graph.component_map
        anns = []
        for t in self.store.triples(None, HAS_FUNCTION, None):
            s = t.subject
            if s.prefix == C and s.local in comps:
                anns.append(FunctionAnnotation(s.local, t.object, tuple(sorted(provenance.get(t, [])))))
        return self.graph.with_annotations(anns)

    def output_triples(self, keep_derived_connects: bool = False, links=None) -> TripleStore:
        """Raw triples plus function assignments (plus derived connections on request)."""
        out = to_triples(self.annotated, links=links, vocab=self.vocab)
        if keep_derived_connects:
            out.update(self.store.triples(None, CONNECTS, None))
        return out


def reason(
    g: CircuitGraph,
    extra_rules: Iterable[AnnotationRuleFile] = (),
    *,
    builtin: BuiltinRuleSet | None = None,
    annotations: Sequence[AnnotationRuleFile] | None = None,
    guards: Sequence[PipelineGuard] = PIPELINE_GUARDS,
) -> Reasoning:
    files = list(builtin_annotations() if annotations is None else annotations) + list(extra_rules)
    functions = {f.local for rf in files for f in rf.functions}
    vocab = DEFAULT_VOCABULARY.extended(function_classes=functions)
    raw = to_triples(g, vocab=vocab)
    store = raw.copy()
    asserted = set(raw)
    stats: dict = {}
    derivations = preprocess(store, builtin, asserted=asserted, stats=stats)
    annotation_rules = RuleSet.merge(rf.rules for rf in files)
    _, ders = run_fixpoint(store, annotation_rules, asserted=asserted, stats=stats)
    derivations.extend(ders)
    derivations.extend(apply_guards(store, guards, asserted))
    return Reasoning(g, raw, store, derivations, vocab, stats)


def run_pipeline(
    g: CircuitGraph, extra_rules: Iterable[AnnotationRuleFile] = ()
) -> tuple[CircuitGraph, list[Derivation]]:
    """Preprocess, annotate and return the annotated graph with its derivations."""
    r = reason(g, extra_rules)
    return r.annotated, r.derivations
