"""JSON annotation report."""

from __future__ import annotations

import json
from collections.abc import Iterable

from .model import CircuitGraph
from .terms import Literal
from .vocab import CROSSOVER, JUNCTION


def _term(t) -> str:
    return t.value if isinstance(t, Literal) else str(t)


def build_report(g: CircuitGraph, explain: bool = False, warnings: Iterable[str] = ()) -> dict:
    """Per component: id, class, name and lower-case function names.

    With *explain*, every function also lists the rules that derived it and
    their variable bindings.
    """
    by_component: dict[str, list] = {}
    for a in g.annotations:
        by_component.setdefault(a.component, []).append(a)
    components = []
    for c in sorted(g.components, key=lambda c: c.id):
        if c.cls in (JUNCTION, CROSSOVER):
            continue
        anns = sorted(by_component.get(c.id, []), key=lambda a: a.function)
        entry = {
            "id": c.id,
            "class": c.cls.local,
            "name": c.name,
            "functions": [a.function.local.lower() for a in anns],
        }
        if explain:
            entry["explanations"] = {
                a.function.local.lower(): [
                    {"rule": rule, "bindings": {var: _term(t) for var, t in bindings}}
                    for rule, bindings in a.provenance
                ]
                for a in anns
            }
        components.append(entry)
    return {"components": components, "warnings": list(warnings)}


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
