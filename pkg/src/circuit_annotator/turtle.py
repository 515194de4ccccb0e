"""Turtle subset: prefixed names, plain string literals, no blank nodes.

The writer emits one statement per line, sorted by (subject, predicate,
object), so that output diffs are stable.  The reader additionally accepts
comments, ``;`` predicate lists, ``,`` object lists, the ``a`` keyword, and
full ``<...>`` IRIs inside a known namespace.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, MutableMapping

from .errors import ParseError
from .store import TripleStore
from .terms import DEFAULT_NAMESPACES, IRI, LOCAL_RE, RDF_TYPE, Literal, Triple, n3

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<prefix_kw>@prefix\b|PREFIX\b)
  | (?P<iriref><[^<>"{}|^`\\\s]*>)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<pname>[A-Za-z][A-Za-z0-9_-]*:(?:[A-Za-z0-9_](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?)?)
  | (?P<a>a\b)
  | (?P<punct>[.;,])
    """,
    re.VERBOSE,
)

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\", "'": "'"}


def _unescape(body: str, line: int, col: int) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            nxt = body[i + 1]
            if nxt not in _ESCAPES:
                raise ParseError(f"unsupported escape \\{nxt}", line, col + i)
            out.append(_ESCAPES[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _tokenize(text: str):
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            yield kind, value, line, col
        nl = value.count("\n")
        if nl:
            line += nl
            line_start = m.start() + value.rfind("\n") + 1
        pos = m.end()
    yield "eof", "", line, pos - line_start + 1


class _Reader:
    def __init__(self, text: str, namespaces: MutableMapping[str, str]):
        self.tokens = list(_tokenize(text))
        self.i = 0
        self.namespaces = namespaces
        self.declared: dict[str, str] = {}
        self.by_uri = {uri: p for p, uri in namespaces.items()}

    def peek(self):
        return self.tokens[self.i]

    def take(self, *kinds):
        tok = self.tokens[self.i]
        if kinds and tok[0] not in kinds and tok[1] not in kinds:
            raise ParseError(f"expected {' or '.join(kinds)}, got {tok[1] or 'end of input'!r}", tok[2], tok[3])
        self.i += 1
        return tok

    def parse(self) -> list[Triple]:
        out: list[Triple] = []
        while self.peek()[0] != "eof":
            if self.peek()[0] == "prefix_kw":
                self.prefix()
            else:
                self.statement(out)
        return out

    def prefix(self) -> None:
        kw = self.take("prefix_kw")
        _, pname, line, col = self.take("pname")
        if not pname.endswith(":"):
            raise ParseError(f"bad prefix declaration {pname!r}", line, col)
        _, iri, _, _ = self.take("iriref")
        uri = iri[1:-1]
        name = pname[:-1]
        canonical = self.by_uri.get(uri)
        if canonical is None:
            if name in self.namespaces and self.namespaces[name] != uri:
                raise ParseError(f"prefix {name!r} rebinds a known namespace", line, col)
            self.namespaces[name] = uri
            self.by_uri[uri] = name
            canonical = name
        self.declared[name] = canonical
        if kw[1].startswith("@"):
            self.take(".")

    def iri(self, tok) -> IRI:
        kind, value, line, col = tok
        if kind == "a":
            return RDF_TYPE
        if kind == "pname":
            prefix, _, local = value.partition(":")
            if prefix not in self.declared:
                raise ParseError(f"undeclared prefix {prefix!r}", line, col)
            if not local:
                raise ParseError("empty local name", line, col)
            return IRI(self.declared[prefix], local)
        if kind == "iriref":
            uri = value[1:-1]
            for ns, prefix in sorted(self.by_uri.items(), key=lambda kv: -len(kv[0])):
                local = uri[len(ns):]
                if uri.startswith(ns) and LOCAL_RE.fullmatch(local):
                    return IRI(prefix, local)
            raise ParseError(f"IRI outside every known namespace: {value}", line, col)
        raise ParseError(f"expected an IRI, got {value or 'end of input'!r}", line, col)

    def obj(self):
        tok = self.take()
        if tok[0] == "string":
            return Literal(_unescape(tok[1][1:-1], tok[2], tok[3] + 1))
        return self.iri(tok)

    def statement(self, out: list[Triple]) -> None:
        subject = self.iri(self.take())
        while True:
            predicate = self.iri(self.take())
            out.append(Triple(subject, predicate, self.obj()))
            while self.peek()[1] == ",":
                self.take(",")
                out.append(Triple(subject, predicate, self.obj()))
            sep = self.take(";", ".")
            if sep[1] == ".":
                return
            # trailing ';' before '.' is legal Turtle
            if self.peek()[1] == ".":
                self.take(".")
                return


def parse_turtle(text: str, namespaces: MutableMapping[str, str] | None = None) -> TripleStore:
    """Parse Turtle text into a store.

    Prefixes are normalized: a declaration whose IRI matches a known
    namespace is mapped onto that namespace's canonical prefix.  Unknown
    namespaces are added to *namespaces* when it is given.
    """
    ns = dict(DEFAULT_NAMESPACES) if namespaces is None else namespaces
    if namespaces is not None:
        for k, v in DEFAULT_NAMESPACES.items():
            ns.setdefault(k, v)
    return TripleStore(_Reader(text, ns).parse())


def serialize_turtle(triples: Iterable[Triple], namespaces: dict[str, str] | None = None) -> str:
    """Canonical Turtle: used prefixes only, one sorted statement per line."""
    ns = dict(DEFAULT_NAMESPACES)
    if namespaces:
        ns.update(namespaces)
    rows = sorted(set(triples))
    used = set()
    for t in rows:
        for term in t:
            if isinstance(term, IRI):
                used.add(term.prefix)
    lines = []
    for prefix in sorted(used):
        if prefix not in ns:
            raise ValueError(f"no namespace registered for prefix {prefix!r}")
        lines.append(f"@prefix {prefix}: <{ns[prefix]}> .")
    if lines:
        lines.append("")
    for s, p, o in rows:
        lines.append(f"{n3(s)} {n3(p)} {n3(o)} .")
    return "\n".join(lines) + ("\n" if lines else "")
