"""Functional annotation of circuit schematics with forward-chaining rules."""

from .engine import Derivation, apply_to_fixpoint, explain
from .library import builtin_annotations, builtin_preprocessing, run_pipeline
from .model import CircuitGraph, Component, FunctionAnnotation, Port, annotations_of, from_triples, to_triples
from .rules import Rule, RuleSet, parse_rules
from .store import TripleStore
from .terms import IRI, Literal, Triple, Variable
from .turtle import parse_turtle, serialize_turtle

__all__ = [
    "CircuitGraph",
    "Component",
    "Derivation",
    "FunctionAnnotation",
    "IRI",
    "Literal",
    "Port",
    "Rule",
    "RuleSet",
    "Triple",
    "TripleStore",
    "Variable",
    "annotations_of",
    "apply_to_fixpoint",
    "builtin_annotations",
    "builtin_preprocessing",
    "explain",
    "from_triples",
    "parse_rules",
    "parse_turtle",
    "run_pipeline",
    "serialize_turtle",
    "to_triples",
]
