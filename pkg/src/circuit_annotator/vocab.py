"""Circuit ontology vocabulary.

Every predicate and class has exactly one IRI.  Lookups of names outside the
vocabulary raise :class:`UnknownTermError` instead of minting a new IRI.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field

from .errors import ValidationError
from .terms import FN, RDF, RDF_TYPE, W, WD, IRI

PREDICATES = ("connects", "has_part", "name", "has_function", "wikidata", "position", "on_supply")

NODE_CLASSES = ("PORT", "JUNCTION", "CROSSOVER")

COMPONENT_CLASSES = (
    "RESISTOR",
    "CAPACITOR",
    "INDUCTOR",
    "DIODE",
    "LED",
    "TRANSISTOR_NPN",
    "TRANSISTOR_PNP",
    "CRYSTAL",
    "SWITCH",
    "RELAY",
    "IC",
    "VOLTAGE_SOURCE",
    "VCC_SYMBOL",
    "GND_SYMBOL",
    "NET_LABEL",
)

FUNCTION_CLASSES = (
    "EMITTER_COMMON_AMPLIFIER",
    "COUPLING_CAPACITOR",
    "ELECTRONIC_SWITCH",
    "FLYBACK_DIODE",
    "OSCILLATOR_CRYSTAL",
    "PULLUP_RESISTOR",
    "VOLTAGE_DIVIDER",
)

# Rails produced by supply normalization.
INDIVIDUALS = ("VCC_RAIL", "GND_RAIL")

# Intermediate role types derived by the rule library; never serialized.
ROLE_CLASSES = (
    "TAP_CAPABLE",
    "SIGNAL_ENDPOINT",
    "LOGIC_INPUT",
    "BASE_PORT",
    "GND_SINK_PORT",
    "SWITCHABLE_LOAD",
    "DIVIDER_MIDPOINT",
    "COUPLING_CANDIDATE",
    "SWITCH_CANDIDATE",
)


class UnknownTermError(ValidationError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown term"


@dataclass(frozen=True)
class Vocabulary:
    component_classes: frozenset[str] = frozenset(COMPONENT_CLASSES)
    function_classes: frozenset[str] = frozenset(FUNCTION_CLASSES)
    predicates: frozenset[str] = frozenset(PREDICATES)
    node_classes: frozenset[str] = frozenset(NODE_CLASSES)
    individuals: frozenset[str] = frozenset(INDIVIDUALS)
    role_classes: frozenset[str] = frozenset(ROLE_CLASSES)
    _w_names: frozenset[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        names = (
            self.component_classes | self.predicates | self.node_classes | self.individuals | self.role_classes
        )
        object.__setattr__(self, "_w_names", frozenset(names))

    def extended(self, component_classes: Iterable[str] = (), function_classes: Iterable[str] = ()) -> "Vocabulary":
        return Vocabulary(
            component_classes=self.component_classes | frozenset(component_classes),
            function_classes=self.function_classes | frozenset(function_classes),
            predicates=self.predicates,
            node_classes=self.node_classes,
            individuals=self.individuals,
            role_classes=self.role_classes,
        )

    def predicate(self, name: str) -> IRI:
        if name not in self.predicates:
            raise UnknownTermError(f"unknown predicate {name!r}")
        return IRI(W, name)

    def component_class(self, name: str) -> IRI:
        key = name.upper()
        if key not in self.component_classes:
            raise UnknownTermError(f"unknown component class {name!r}")
        return IRI(W, key)

    def node_class(self, name: str) -> IRI:
        """A component class or one of the structural classes JUNCTION/CROSSOVER."""
        key = name.upper()
        if key in ("JUNCTION", "CROSSOVER"):
            return IRI(W, key)
        return self.component_class(key)

    def function_class(self, name: str) -> IRI:
        key = name.upper()
        if key not in self.function_classes:
            raise UnknownTermError(f"unknown function class {name!r}")
        return IRI(FN, key)

    def is_node_class(self, iri: IRI) -> bool:
        return iri.prefix == W and (iri.local in self.component_classes or iri.local in ("JUNCTION", "CROSSOVER"))

    def is_function_class(self, iri: IRI) -> bool:
        return iri.prefix == FN and iri.local in self.function_classes

    def knows(self, iri: IRI) -> bool:
        """Whether *iri* resolves through this vocabulary."""
        if iri.prefix == W:
            return iri.local in self._w_names
        if iri.prefix == FN:
            return iri.local in self.function_classes
        if iri.prefix == RDF:
            return iri == RDF_TYPE
        return iri.prefix == WD

    def check(self, iri: IRI) -> IRI:
        if not self.knows(iri):
            raise UnknownTermError(f"term {iri} is not in the vocabulary")
        return iri


DEFAULT_VOCABULARY = Vocabulary()

CONNECTS = IRI(W, "connects")
HAS_PART = IRI(W, "has_part")
NAME = IRI(W, "name")
HAS_FUNCTION = IRI(W, "has_function")
WIKIDATA = IRI(W, "wikidata")
POSITION = IRI(W, "position")
ON_SUPPLY = IRI(W, "on_supply")
TYPE = RDF_TYPE

PORT = IRI(W, "PORT")
JUNCTION = IRI(W, "JUNCTION")
CROSSOVER = IRI(W, "CROSSOVER")
VCC_RAIL = IRI(W, "VCC_RAIL")
GND_RAIL = IRI(W, "GND_RAIL")

RESISTOR = IRI(W, "RESISTOR")
CAPACITOR = IRI(W, "CAPACITOR")
INDUCTOR = IRI(W, "INDUCTOR")
DIODE = IRI(W, "DIODE")
LED = IRI(W, "LED")
TRANSISTOR_NPN = IRI(W, "TRANSISTOR_NPN")
TRANSISTOR_PNP = IRI(W, "TRANSISTOR_PNP")
CRYSTAL = IRI(W, "CRYSTAL")
SWITCH = IRI(W, "SWITCH")
RELAY = IRI(W, "RELAY")
IC = IRI(W, "IC")
VOLTAGE_SOURCE = IRI(W, "VOLTAGE_SOURCE")
VCC_SYMBOL = IRI(W, "VCC_SYMBOL")
GND_SYMBOL = IRI(W, "GND_SYMBOL")
NET_LABEL = IRI(W, "NET_LABEL")

EMITTER_COMMON_AMPLIFIER = IRI(FN, "EMITTER_COMMON_AMPLIFIER")
COUPLING_CAPACITOR = IRI(FN, "COUPLING_CAPACITOR")
ELECTRONIC_SWITCH = IRI(FN, "ELECTRONIC_SWITCH")
FLYBACK_DIODE = IRI(FN, "FLYBACK_DIODE")
OSCILLATOR_CRYSTAL = IRI(FN, "OSCILLATOR_CRYSTAL")
PULLUP_RESISTOR = IRI(FN, "PULLUP_RESISTOR")
VOLTAGE_DIVIDER = IRI(FN, "VOLTAGE_DIVIDER")


def role(name: str) -> IRI:
    if name not in ROLE_CLASSES:
        raise UnknownTermError(f"unknown role class {name!r}")
    return IRI(W, name)
