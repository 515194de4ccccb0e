"""KiCad 6+ ``.kicad_sch`` subset: extraction and netlist building.

Coordinates are millimetres in the file and are scaled by 10 000 to
integers (KiCad stores at most four decimals).  Connectivity is decided by
exact coincidence of those integers, never by distance.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from importlib import resources
from pathlib import Path

from ..errors import ValidationError
from ..model import CircuitGraph, Component, Port, connection
from ..terms import IRI
from ..vocab import DEFAULT_VOCABULARY, GND_SYMBOL, IC, JUNCTION, NET_LABEL, VCC_SYMBOL, Vocabulary
from .sexpr import SExpr, child, children, head, parse_sexpr

SCALE = 10_000

Point = tuple[int, int]

# Top-level nodes that carry no circuit content.
_METADATA = {
    "version",
    "generator",
    "generator_version",
    "uuid",
    "paper",
    "title_block",
    "lib_symbols",
    "sheet_instances",
    "symbol_instances",
    "embedded_fonts",
}


@dataclass(frozen=True)
class Pin:
    number: str
    name: str
    at: Point


@dataclass(frozen=True)
class SymbolInstance:
    lib_id: str
    reference: str
    value: str
    at: Point
    rotation: int
    mirror: str | None
    unit: int
    pins: tuple[Pin, ...]
    power: bool = False


@dataclass(frozen=True)
class Label:
    text: str
    at: Point


@dataclass
class SchematicSubset:
    symbols: list[SymbolInstance] = field(default_factory=list)
    wires: list[tuple[Point, Point]] = field(default_factory=list)
    junctions: list[Point] = field(default_factory=list)
    no_connects: list[Point] = field(default_factory=list)
    labels: list[Label] = field(default_factory=list)
    unsupported: dict[str, int] = field(default_factory=dict)

    @property
    def power_symbols(self) -> list[SymbolInstance]:
        return [s for s in self.symbols if s.power]

    @property
    def counts(self) -> tuple[int, int, int]:
        """(symbols, wires, junctions), power symbols included."""
        return len(self.symbols), len(self.wires), len(self.junctions)


def _coord(tok: SExpr) -> int:
    try:
        v = Decimal(str(tok)) * SCALE
    except InvalidOperation:
        raise ValidationError(f"bad coordinate {tok!r}") from None
    if v != v.to_integral_value():
        raise ValidationError(f"coordinate {tok} is off the 0.0001 mm grid")
    return int(v)


def _point(node: list | None, what: str) -> Point:
    if node is None or len(node) < 3:
        raise ValidationError(f"{what} has no position")
    return _coord(node[1]), _coord(node[2])


def _property(node: list, name: str) -> str | None:
    for p in children(node, "property"):
        if len(p) >= 3 and str(p[1]) == name:
            return str(p[2])
    return None


# --- library symbols ----------------------------------------------------------


@dataclass(frozen=True)
class _LibPin:
    number: str
    name: str
    x: int  # library coordinates, y up
    y: int
    unit: int


def _lib_pins(sym: list) -> list[_LibPin]:
    """Pins of a library symbol, including those of its unit sub-symbols."""
    out = []
    base = str(sym[1]).split(":")[-1]
    for sub in [sym, *children(sym, "symbol")]:
        unit = 0
        if sub is not sym:
            m = re.fullmatch(re.escape(base) + r"_(\d+)_(\d+)", str(sub[1]))
            unit = int(m.group(1)) if m else 0
        for pin in children(sub, "pin"):
            number = child(pin, "number")
            name = child(pin, "name")
            x, y = _point(child(pin, "at"), f"pin of {sym[1]}")
            out.append(
                _LibPin(
                    str(number[1]) if number else "",
                    str(name[1]) if name else "",
                    x,
                    y,
                    unit,
                )
            )
    return out


def _transform(x: int, y: int, rotation: int, mirror: str | None) -> tuple[int, int]:
    """Library pin offset -> schematic offset (y down).

    Angles turn counter-clockwise as seen on screen; mirroring applies after
    the rotation, in schematic axes.
    """
    y = -y  # library y points up
    for _ in range(rotation // 90):
        x, y = y, -x
    if mirror == "x":
        y = -y
    elif mirror == "y":
        x = -x
    return x, y


# --- extraction -------------------------------------------------------------


def extract_schematic(tree: SExpr) -> SchematicSubset:
    """Pull symbols, wires, junctions, no-connects and labels out of a parse tree."""
    if head(tree) != "kicad_sch":
        raise ValidationError("not a kicad_sch document")
    libs: dict[str, list] = {}
    lib_node = child(tree, "lib_symbols")
    if lib_node is not None:
        for sym in children(lib_node, "symbol"):
            libs[str(sym[1])] = sym

    subset = SchematicSubset()
    for node in tree[1:]:
        kind = head(node)
        if kind in _METADATA:
            continue
        if kind == "symbol":
            subset.symbols.append(_symbol(node, libs))
        elif kind == "wire":
            pts = child(node, "pts")
            xy = children(pts, "xy") if pts else []
            if len(xy) != 2:
                raise ValidationError("wire must have exactly two points")
            subset.wires.append((_point(xy[0], "wire"), _point(xy[1], "wire")))
        elif kind == "junction":
            subset.junctions.append(_point(child(node, "at"), "junction"))
        elif kind == "no_connect":
            subset.no_connects.append(_point(child(node, "at"), "no_connect"))
        elif kind in ("label", "global_label"):
            subset.labels.append(Label(str(node[1]), _point(child(node, "at"), f"label {node[1]}")))
        else:
            key = kind or "?"
            subset.unsupported[key] = subset.unsupported.get(key, 0) + 1
    return subset


def _symbol(node: list, libs: dict[str, list]) -> SymbolInstance:
    lib_id_node = child(node, "lib_id")
    if lib_id_node is None:
        raise ValidationError("symbol without lib_id")
    lib_id = str(lib_id_node[1])
    lib_name = child(node, "lib_name")
    lib_key = str(lib_name[1]) if lib_name else lib_id
    reference = _property(node, "Reference")
    if not reference:
        raise ValidationError(f"symbol {lib_id} has no reference designator")
    at = child(node, "at")
    x, y = _point(at, f"symbol {reference}")
    rotation = int(Decimal(str(at[3]))) if len(at) > 3 else 0
    if rotation % 90:
        raise ValidationError(f"symbol {reference}: rotation {rotation} is not a multiple of 90")
    rotation %= 360
    mirror_node = child(node, "mirror")
    mirror = str(mirror_node[1]) if mirror_node else None
    unit_node = child(node, "unit")
    unit = int(str(unit_node[1])) if unit_node else 1

    lib = libs.get(lib_key)
    if lib is None:
        raise ValidationError(f"symbol {reference}: library symbol {lib_key} is not embedded")
    pins = []
    for p in _lib_pins(lib):
        if p.unit not in (0, unit):
            continue
        dx, dy = _transform(p.x, p.y, rotation, mirror)
        pins.append(Pin(p.number, p.name, (x + dx, y + dy)))
    if not pins:
        raise ValidationError(f"symbol {reference} has no pins")
    power = child(lib, "power") is not None or lib_id.startswith("power:")
    return SymbolInstance(
        lib_id=lib_id,
        reference=reference,
        value=_property(node, "Value") or "",
        at=(x, y),
        rotation=rotation,
        mirror=mirror,
        unit=unit,
        pins=tuple(sorted(pins, key=lambda p: _pin_key(p.number))),
        power=power,
    )


def _pin_key(number: str):
    return (0, int(number), "") if number.isdigit() else (1, 0, number)


# --- symbol classes ---------------------------------------------------------


@dataclass(frozen=True)
class SymbolClass:
    cls: IRI
    ports: tuple[str, ...]


@dataclass
class SymbolClassMap:
    entries: dict[str, SymbolClass]

    @classmethod
    def parse(cls, text: str, vocab: Vocabulary = DEFAULT_VOCABULARY, source: str = "<class map>") -> "SymbolClassMap":
        entries = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            cols = [c.strip() for c in line.split("\t")]
            if len(cols) != 3:
                raise ValidationError(f"{source}:{lineno}: expected lib_id, class and ports")
            lib_id, name, ports = cols
            try:
                klass = vocab.component_class(name)
            except KeyError as exc:
                raise ValidationError(f"{source}:{lineno}: {exc}") from None
            entries[lib_id] = SymbolClass(klass, tuple(p for p in ports.split(",") if p))
        return cls(entries)

    @classmethod
    def load(cls, path: str | Path | None = None) -> "SymbolClassMap":
        if path is None:
            res = resources.files("circuit_annotator").joinpath("data/symbol_classes.tsv")
            return cls.parse(res.read_text("utf-8"), source="symbol_classes.tsv")
        return cls.parse(Path(path).read_text("utf-8"), source=str(path))

    def lookup(self, lib_id: str) -> SymbolClass | None:
        if lib_id in self.entries:
            return self.entries[lib_id]
        best = None
        for key in self.entries:
            if lib_id.startswith(key + "_") and (best is None or len(key) > len(best)):
                best = key
        return self.entries[best] if best else None


# --- netlist ----------------------------------------------------------------


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def _sanitize(text: str) -> str:
    out = re.sub(r"[^A-Za-z0-9_-]", "_", text.lstrip("#"))
    out = out.lstrip("-")
    return out or "_"


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    (px, py), (ax, ay), (bx, by) = p, a, b
    if (bx - ax) * (py - ay) != (by - ay) * (px - ax):
        return False
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def build_netlist(subset: SchematicSubset, class_map: SymbolClassMap | None = None) -> CircuitGraph:
    """Turn an extracted schematic into a :class:`CircuitGraph`.

    Two-endpoint nets become direct port connections; nets with three or more
    endpoints get a minted JUNCTION node.  Wires that merely cross are not
    connected.
    """
    class_map = class_map or SymbolClassMap.load()
    warnings: list[str] = []
    components: dict[str, Component] = {}
    ports: dict[str, Port] = {}
    endpoint_at: list[tuple[str, Point]] = []  # (port id, point)

    by_ref: dict[str, list[SymbolInstance]] = defaultdict(list)
    for sym in subset.symbols:
        by_ref[_sanitize(sym.reference)].append(sym)

    for ref in sorted(by_ref):
        units = sorted(by_ref[ref], key=lambda s: s.unit)
        first = units[0]
        if len({s.lib_id for s in units}) > 1:
            raise ValidationError(f"reference {first.reference} is used by different symbols")
        entry = class_map.lookup(first.lib_id)
        if entry is None and first.power:
            upper = first.lib_id.upper()
            klass = GND_SYMBOL if "GND" in upper or "EARTH" in upper else VCC_SYMBOL
            entry = SymbolClass(klass, ("p1",))
            warnings.append(f"{first.reference}: unknown power symbol {first.lib_id}, treated as {klass.local}")
        elif entry is None:
            entry = SymbolClass(IC, ())
            warnings.append(f"{first.reference}: unknown lib_id {first.lib_id}, treated as IC")
        all_pins = sorted({p for s in units for p in s.pins}, key=lambda p: (_pin_key(p.number), p.at))
        numbers = sorted({p.number for p in all_pins}, key=_pin_key)
        names = dict(zip(numbers, entry.ports)) if len(entry.ports) == len(numbers) else {}
        if entry.ports and not names:
            warnings.append(
                f"{first.reference}: {len(numbers)} pins but {len(entry.ports)} port names for {first.lib_id}"
            )
        components[ref] = Component(ref, entry.cls, first.value or first.reference, first.at)
        for p in all_pins:
            pname = names.get(p.number, p.number)
            pid = f"{ref}__{_sanitize(pname)}"
            if pid not in ports:
                ports[pid] = Port(pid, ref, pname)
            endpoint_at.append((pid, p.at))

    # labels become NET_LABEL components, one per distinct text
    label_ids: dict[str, str] = {}
    for lab in sorted(subset.labels, key=lambda l: (l.text, l.at)):
        if lab.text not in label_ids:
            cid = _unique(f"label_{_sanitize(lab.text)}", components)
            label_ids[lab.text] = cid
            components[cid] = Component(cid, NET_LABEL, lab.text, lab.at)
            ports[f"{cid}__p1"] = Port(f"{cid}__p1", cid, "p1")

    uf = _UnionFind()
    for a, b in subset.wires:
        uf.union(("pt", a), ("pt", b))
    for j in subset.junctions:
        for a, b in subset.wires:
            if _on_segment(j, a, b):
                uf.union(("pt", j), ("pt", a))
    for lab in subset.labels:
        for a, b in subset.wires:
            if _on_segment(lab.at, a, b):
                uf.union(("pt", lab.at), ("pt", a))
        uf.union(("pt", lab.at), ("port", f"{label_ids[lab.text]}__p1"))
    for pid, at in endpoint_at:
        uf.union(("port", pid), ("pt", at))

    nets: dict = defaultdict(set)
    for pid, _ in endpoint_at:
        nets[uf.find(("port", pid))].add(pid)
    for cid in label_ids.values():
        nets[uf.find(("port", f"{cid}__p1"))].add(f"{cid}__p1")

    no_connect_roots = {uf.find(("pt", p)) for p in subset.no_connects}
    junction_points: dict = defaultdict(list)
    for j in subset.junctions:
        junction_points[uf.find(("pt", j))].append(j)

    connections = set()
    minted = 0
    for root, members in sorted(nets.items(), key=lambda kv: min(kv[1])):
        members = sorted(members)
        if len(members) == 1:
            if root not in no_connect_roots and not members[0].startswith("label_"):
                warnings.append(f"floating pin {members[0]}")
            continue
        if len(members) == 2:
            connections.add(connection(*members))
            continue
        minted += 1
        jid = _unique(f"junction_{minted}", components)
        marks = sorted(junction_points.get(root, []))
        components[jid] = Component(jid, JUNCTION, jid, marks[0] if marks else None)
        for m in members:
            connections.add(connection(jid, m))

    if subset.unsupported:
        kinds = ", ".join(f"{k} x{v}" for k, v in sorted(subset.unsupported.items()))
        warnings.append(f"skipped unsupported nodes: {kinds}")
    return CircuitGraph(
        components=frozenset(components.values()),
        ports=frozenset(ports.values()),
        connections=frozenset(connections),
        warnings=tuple(warnings),
    )


def _unique(base: str, taken) -> str:
    if base not in taken:
        return base
    i = 2
    while f"{base}_{i}" in taken:
        i += 1
    return f"{base}_{i}"


def load_kicad(text: str, class_map: SymbolClassMap | None = None, source: str | None = None) -> CircuitGraph:
    return build_netlist(extract_schematic(parse_sexpr(text, source)), class_map)


__all__ = [
    "Label",
    "Pin",
    "SchematicSubset",
    "SymbolClass",
    "SymbolClassMap",
    "SymbolInstance",
    "build_netlist",
    "extract_schematic",
    "load_kicad",
]
