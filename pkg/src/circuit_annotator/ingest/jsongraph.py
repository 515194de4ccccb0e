"""JSON graph exchange format, as produced by schematic recognition.

::

    {"nodes": [{"id": "D1", "class": "DIODE", "name": "D1",
                "ports": [{"id": "D1_a", "name": "anode"}], "position": [x, y]}],
     "edges": [{"from": "D1_a", "to": "J1"}]}
"""

from __future__ import annotations

import json

import jsonschema

from ..errors import ParseError, ValidationError
from ..model import CircuitGraph, Component, Port, connection
from ..vocab import DEFAULT_VOCABULARY, UnknownTermError, Vocabulary

ID = {"type": "string", "pattern": r"^[A-Za-z0-9_][A-Za-z0-9_-]*$"}

SCHEMA = {
    "type": "object",
    "required": ["nodes", "edges"],
    "additionalProperties": False,
    "properties": {
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "class"],
                "additionalProperties": False,
                "properties": {
                    "id": ID,
                    "class": {"type": "string", "minLength": 1},
                    "name": {"type": "string"},
                    "ports": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["id", "name"],
                            "additionalProperties": False,
                            "properties": {"id": ID, "name": {"type": "string", "minLength": 1}},
                        },
                    },
                    "position": {
                        "type": "array",
                        "items": {"type": "integer"},
                        "minItems": 2,
                        "maxItems": 2,
                    },
                },
            },
        },
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["from", "to"],
                "additionalProperties": False,
                "properties": {"from": {"type": "string"}, "to": {"type": "string"}},
            },
        },
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


def load_json_graph(text: str, vocab: Vocabulary = DEFAULT_VOCABULARY, source: str | None = None) -> CircuitGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno, source) from None
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ValidationError(f"{e.json_path}: {e.message}")

    components, ports = [], []
    seen: dict[str, str] = {}
    for i, node in enumerate(doc["nodes"]):
        try:
            cls = vocab.node_class(node["class"])
        except UnknownTermError:
            raise ValidationError(f"$.nodes[{i}].class: unknown class {node['class']!r}") from None
        _claim(seen, node["id"], f"$.nodes[{i}].id")
        pos = node.get("position")
        components.append(Component(node["id"], cls, node.get("name", ""), tuple(pos) if pos else None))
        for k, port in enumerate(node.get("ports", [])):
            _claim(seen, port["id"], f"$.nodes[{i}].ports[{k}].id")
            ports.append(Port(port["id"], node["id"], port["name"]))

    connections = set()
    for i, edge in enumerate(doc["edges"]):
        for end in ("from", "to"):
            if edge[end] not in seen:
                raise ValidationError(f"$.edges[{i}].{end}: unknown node {edge[end]!r}")
        if edge["from"] == edge["to"]:
            raise ValidationError(f"$.edges[{i}]: edge connects {edge['from']!r} to itself")
        pair = connection(edge["from"], edge["to"])
        if pair in connections:
            raise ValidationError(f"$.edges[{i}]: duplicate edge {edge['from']!r} - {edge['to']!r}")
        connections.add(pair)
    return CircuitGraph(components=components, ports=ports, connections=connections)


def _claim(seen: dict[str, str], ident: str, path: str) -> None:
    if ident in seen:
        raise ValidationError(f"{path}: id {ident!r} already used at {seen[ident]}")
    seen[ident] = path


def graph_to_json(g: CircuitGraph) -> dict:
    nodes = []
    for c in sorted(g.components, key=lambda c: c.id):
        node: dict = {"id": c.id, "class": c.cls.local, "name": c.name}
        ps = g.ports_of(c.id)
        if ps:
            node["ports"] = [{"id": p.id, "name": p.name} for p in ps]
        if c.position is not None:
            node["position"] = list(c.position)
        nodes.append(node)
    edges = [{"from": a, "to": b} for a, b in sorted(tuple(sorted(pair)) for pair in g.connections)]
    return {"nodes": nodes, "edges": edges}


def dump_json_graph(g: CircuitGraph) -> str:
    return json.dumps(graph_to_json(g), indent=2, sort_keys=True) + "\n"
