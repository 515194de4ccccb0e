"""Graphviz DOT rendering of (annotated) circuit graphs."""

from __future__ import annotations

from .model import CircuitGraph
from .vocab import CROSSOVER, JUNCTION


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def to_dot(g: CircuitGraph, name: str = "circuit") -> str:
    """One node per component or junction, one edge per connection.

    Ports are folded into their owners; the port names end up as edge
    tail/head labels.  Output is sorted, so identical graphs give identical
    text.
    """
    functions: dict[str, list[str]] = {}
    for a in g.annotations:
        functions.setdefault(a.component, []).append(a.function.local.lower())

    lines = [f"graph {_quote(name)} {{", "  node [shape=box, fontname=Helvetica];"]
    for c in sorted(g.components, key=lambda c: c.id):
        if c.cls == JUNCTION:
            lines.append(f"  {_quote(c.id)} [shape=point, width=0.08];")
            continue
        label = [c.id, c.cls.local]
        if c.name != c.id:
            label.insert(1, c.name)
        attrs = []
        if c.cls == CROSSOVER:
            attrs.append("shape=diamond")
        fns = sorted(functions.get(c.id, []))
        if fns:
            label.append(", ".join(fns))
            attrs += ["style=filled", "fillcolor=palegreen"]
        attrs.insert(0, f"label={_quote(chr(10).join(label))}")
        lines.append(f"  {_quote(c.id)} [{', '.join(attrs)}];")

    ports = g.port_map
    edges = []
    for pair in g.connections:
        a, b = sorted(pair)
        attrs = []
        if a in ports:
            attrs.append(f"taillabel={_quote(ports[a].name)}")
        if b in ports:
            attrs.append(f"headlabel={_quote(ports[b].name)}")
        stmt = f"  {_quote(g.owner_of(a))} -- {_quote(g.owner_of(b))}"
        edges.append(stmt + (f" [{', '.join(attrs)}]" if attrs else "") + ";")
    lines.extend(sorted(edges))
    lines.append("}")
    return "\n".join(lines) + "\n"
