"""RDF-style terms and triples.

Terms are ``str`` subclasses holding their compact textual form
(``w:connects``, ``"a_1"``, ``?a``).  The three forms never collide because
they differ in the first character, so plain string equality and hashing are
correct across kinds and the lexicographic order of the text is the canonical
serialization order.
"""

from __future__ import annotations

import re
from typing import NamedTuple, Union

PREFIX_RE = re.compile(r"[A-Za-z][A-Za-z0-9_-]*")
LOCAL_RE = re.compile(r"[A-Za-z0-9_]([A-Za-z0-9_.-]*[A-Za-z0-9_-])?")
VAR_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

RDF = "rdf"
W = "w"
FN = "fn"
WD = "wd"
C = "c"

DEFAULT_NAMESPACES: dict[str, str] = {
    C: "http://circuit-annotator.invalid/instance#",
    FN: "http://circuit-annotator.invalid/function#",
    RDF: "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
    W: "http://circuit-annotator.invalid/ontology#",
    WD: "http://www.wikidata.org/entity/",
}


class IRI(str):
    """A namespace-qualified name, ``prefix:local``."""

    __slots__ = ()

    def __new__(cls, prefix: str, local: str | None = None) -> "IRI":
        if local is None:
            prefix, sep, local = prefix.partition(":")
            if not sep:
                raise ValueError(f"IRI needs a prefix: {prefix!r}")
        if not PREFIX_RE.fullmatch(prefix):
            raise ValueError(f"bad IRI prefix {prefix!r}")
        if not LOCAL_RE.fullmatch(local):
            raise ValueError(f"bad IRI local name {local!r}")
        return str.__new__(cls, f"{prefix}:{local}")

    @property
    def prefix(self) -> str:
        return self.partition(":")[0]

    @property
    def local(self) -> str:
        return self.partition(":")[2]

    def __repr__(self) -> str:
        return f"IRI({str(self)!r})"


class Literal(str):
    """A plain string literal (no datatype, no language tag)."""

    __slots__ = ()

    def __new__(cls, value: str) -> "Literal":
        if not isinstance(value, str):
            raise TypeError("literal value must be a string")
        return str.__new__(cls, '"' + value + '"')

    @property
    def value(self) -> str:
        return str.__str__(self)[1:-1]

    def __repr__(self) -> str:
        return f"Literal({self.value!r})"


class Variable(str):
    __slots__ = ()

    def __new__(cls, name: str) -> "Variable":
        if name.startswith("?"):
            name = name[1:]
        if not VAR_RE.fullmatch(name):
            raise ValueError(f"bad variable name {name!r}")
        return str.__new__(cls, "?" + name)

    @property
    def name(self) -> str:
        return str.__str__(self)[1:]

    def __repr__(self) -> str:
        return f"Variable({self.name!r})"


Term = Union[IRI, Literal, Variable]


class Triple(NamedTuple):
    subject: Term
    predicate: Term
    object: Term


def is_ground(t: tuple) -> bool:
    return not any(isinstance(x, Variable) for x in t)


def n3(term: Term) -> str:
    """Compact text form used by the Turtle serializer and reports."""
    if isinstance(term, Literal):
        return '"' + term.value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'
    return str.__str__(term)


def rdf(local: str) -> IRI:
    return IRI(RDF, local)


RDF_TYPE = IRI(RDF, "type")
