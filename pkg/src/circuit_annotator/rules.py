"""Forward-chaining rule syntax.

Grammar (whitespace-insensitive, ``#`` comments)::

    rulefile := { rule }
    rule     := "[" NAME ":" bodyAtom { "," bodyAtom } "->" pattern { "," pattern } "]"
    bodyAtom := pattern | "notEqual" "(" VAR "," VAR ")"
    pattern  := "(" term term term ")"
    term     := VAR | QNAME | LITERALTOKEN

Comment lines directly above a rule become its ``doc``.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field

from .errors import RuleError, RuleSyntaxError
from .terms import IRI, Literal, Term, Variable

TriplePattern = tuple[Term, Term, Term]


@dataclass(frozen=True)
class NotEqual:
    left: Variable
    right: Variable

    def holds(self, binding: dict[str, Term]) -> bool:
        return binding[self.left.name] != binding[self.right.name]

    def __str__(self) -> str:
        return f"notEqual({self.left}, {self.right})"


Guard = NotEqual


@dataclass(frozen=True)
class Rule:
    name: str
    body: tuple[TriplePattern, ...]
    head: tuple[TriplePattern, ...]
    guards: tuple[Guard, ...] = ()
    doc: str = ""
    source: str | None = None

    def __post_init__(self):
        if not self.body:
            raise RuleError(f"rule {self.name!r}: empty body")
        if not self.head:
            raise RuleError(f"rule {self.name!r}: empty head")
        body_vars = self.body_variables()
        for pattern in self.head:
            for term in pattern:
                if isinstance(term, Variable) and term not in body_vars:
                    raise RuleError(f"rule {self.name!r}: head variable {term} is not bound in the body")
        for g in self.guards:
            for v in (g.left, g.right):
                if v not in body_vars:
                    raise RuleError(f"rule {self.name!r}: guard variable {v} does not occur in the body")
        for pattern in self.head:
            for term in pattern[:2]:
                if isinstance(term, Literal):
                    raise RuleError(f"rule {self.name!r}: literal {term} in head subject/predicate position")
        for i, pattern in enumerate(self.body):
            own = {t for t in pattern if isinstance(t, Variable)}
            if len(own) == 3:
                others = {t for j, p in enumerate(self.body) if j != i for t in p if isinstance(t, Variable)}
                if not own & others:
                    raise RuleError(f"rule {self.name!r}: body pattern {i + 1} is unconstrained")

    def body_variables(self) -> set[Variable]:
        return {t for p in self.body for t in p if isinstance(t, Variable)}

    def __str__(self) -> str:
        atoms = [_fmt(p) for p in self.body] + [str(g) for g in self.guards]
        return f"[{self.name}: {', '.join(atoms)} -> {', '.join(_fmt(p) for p in self.head)}]"


def _fmt(p: TriplePattern) -> str:
    return "(" + " ".join(t.value if isinstance(t, Literal) else str.__str__(t) for t in p) + ")"


@dataclass
class RuleSet:
    rules: list[Rule] = field(default_factory=list)

    def __post_init__(self):
        seen: dict[str, Rule] = {}
        for r in self.rules:
            if r.name in seen:
                raise RuleError(f"duplicate rule name {r.name!r} ({seen[r.name].source or '?'} and {r.source or '?'})")
            seen[r.name] = r

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def __getitem__(self, name: str) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def provenance(self) -> dict[str, str | None]:
        return {r.name: r.source for r in self.rules}

    @classmethod
    def merge(cls, sets: Iterable["RuleSet | Iterable[Rule]"]) -> "RuleSet":
        return cls([r for s in sets for r in s])


_TOKENS = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<arrow>->)
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<qname>[A-Za-z][A-Za-z0-9_-]*:[A-Za-z0-9_][A-Za-z0-9_-]*)
  | (?P<word>[A-Za-z0-9_][A-Za-z0-9_.+]*)
  | (?P<punct>[\[\]():,])
    """,
    re.VERBOSE,
)


class _Parser:
    def __init__(self, text: str, source: str | None, prefixes: set[str] | None):
        self.source = source
        self.prefixes = prefixes
        self.tokens: list[tuple[str, str, int, int]] = []
        self.docs: dict[int, list[str]] = {}
        self._lex(text)
        self.i = 0

    def _lex(self, text: str) -> None:
        pos, line, line_start = 0, 1, 0
        pending: list[str] = []
        while pos < len(text):
            m = _TOKENS.match(text, pos)
            col = pos - line_start + 1
            if not m:
                raise RuleSyntaxError(f"unexpected character {text[pos]!r}", line, col, self.source)
            kind, value = m.lastgroup, m.group()
            if kind == "comment":
                pending.append(value[1:].strip())
            elif kind == "ws":
                if value.count("\n") > 1:
                    pending = []
            else:
                if value == "[":
                    self.docs[len(self.tokens)] = pending
                pending = []
                self.tokens.append((kind, value, line, col))
            nl = value.count("\n")
            if nl:
                line += nl
                line_start = m.start() + value.rfind("\n") + 1
            pos = m.end()
        self.tokens.append(("eof", "", line, pos - line_start + 1))

    def error(self, msg: str, tok=None):
        tok = tok or self.tokens[self.i]
        return RuleSyntaxError(msg, tok[2], tok[3], self.source)

    def peek(self):
        return self.tokens[self.i]

    def expect(self, value: str):
        tok = self.tokens[self.i]
        if tok[1] != value or tok[0] == "eof":
            raise self.error(f"expected {value!r}, got {tok[1] or 'end of input'!r}")
        self.i += 1
        return tok

    def rules(self) -> list[Rule]:
        out = []
        while self.peek()[0] != "eof":
            out.append(self.rule())
        return out

    def rule(self) -> Rule:
        start = self.i
        open_tok = self.expect("[")
        name_tok = self.tokens[self.i]
        if name_tok[0] != "word" or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name_tok[1]):
            raise self.error("expected a rule name")
        self.i += 1
        self.expect(":")
        body: list = []
        guards: list[NotEqual] = []
        while True:
            tok = self.peek()
            if tok[0] == "word" and tok[1] == "notEqual":
                self.i += 1
                self.expect("(")
                a = self.var()
                self.expect(",")
                b = self.var()
                self.expect(")")
                guards.append(NotEqual(a, b))
            else:
                body.append(self.pattern())
            if self.peek()[1] == ",":
                self.i += 1
                continue
            if self.peek()[0] == "arrow":
                self.i += 1
                break
            raise self.error(f"expected ',' or '->', got {self.peek()[1] or 'end of input'!r}")
        head = [self.pattern()]
        while self.peek()[1] == ",":
            self.i += 1
            head.append(self.pattern())
        self.expect("]")
        if not body:
            raise self.error("rule body has no triple patterns", open_tok)
        try:
            return Rule(
                name=name_tok[1],
                body=tuple(body),
                head=tuple(head),
                guards=tuple(guards),
                doc="\n".join(self.docs.get(start, [])),
                source=self.source,
            )
        except RuleError as exc:
            raise RuleSyntaxError(str(exc), open_tok[2], open_tok[3], self.source) from None

    def var(self) -> Variable:
        tok = self.peek()
        if tok[0] != "var":
            raise self.error(f"expected a variable, got {tok[1] or 'end of input'!r}")
        self.i += 1
        return Variable(tok[1])

    def pattern(self) -> tuple[Term, Term, Term]:
        self.expect("(")
        terms = [self.term() for _ in range(3)]
        self.expect(")")
        return tuple(terms)

    def term(self) -> Term:
        tok = self.peek()
        kind, value = tok[0], tok[1]
        if kind == "var":
            self.i += 1
            return Variable(value)
        if kind == "qname":
            prefix = value.partition(":")[0]
            if self.prefixes is not None and prefix not in self.prefixes:
                raise self.error(f"unknown prefix {prefix!r}")
            self.i += 1
            return IRI(value)
        if kind == "word":
            self.i += 1
            return Literal(value)
        raise self.error(f"expected a term, got {value or 'end of input'!r}")


def parse_rules(text: str, source: str | None = None, prefixes: set[str] | None = None) -> RuleSet:
    """Parse rule-file text.

    Raises :class:`RuleSyntaxError` (with line and column) on malformed
    input, unbound head variables, and duplicate rule names.
    """
    parser = _Parser(text, source, prefixes)
    rules = parser.rules()
    seen: set[str] = set()
    for r, (kind, value, line, col) in zip(rules, (t for t in parser.tokens if t[1] == "[")):
        if r.name in seen:
            raise RuleSyntaxError(f"duplicate rule name {r.name!r}", line, col, source)
        seen.add(r.name)
    return RuleSet(rules)
