"""Minimal s-expression reader for KiCad files."""

from __future__ import annotations

import re
from typing import Union

from ..errors import ParseError


class Atom(str):
    """Bare token such as ``symbol`` or ``50.8``."""

    __slots__ = ()

    def __repr__(self) -> str:
        return f"Atom({str(self)!r})"


class Str(str):
    """Quoted string, content unescaped."""

    __slots__ = ()

    def __repr__(self) -> str:
        return f"Str({str(self)!r})"


SExpr = Union[Atom, Str, list]

_TOKEN = re.compile(r'\s+|\(|\)|"(?:[^"\\]|\\.)*"|[^\s()"]+', re.S)
_ESCAPES = {"n": "\n", "t": "\t", "r": "\r"}


def _unescape(body: str) -> str:
    out = []
    it = iter(body)
    for ch in it:
        if ch == "\\":
            nxt = next(it, "")
            out.append(_ESCAPES.get(nxt, nxt))
        else:
            out.append(ch)
    return "".join(out)


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    return line, offset - (text.rfind("\n", 0, offset) + 1) + 1


def parse_sexpr(text: str, source: str | None = None) -> SExpr:
    """Parse exactly one expression from *text*.

    ``\\"`` and ``\\\\`` inside quoted strings are honoured; errors carry
    line and column.
    """
    stack: list[tuple[list, int]] = []
    result: SExpr | None = None
    done = False
    pos = 0
    n = len(text)

    def error(msg: str, at: int) -> ParseError:
        line, col = _position(text, at)
        return ParseError(msg, line, col, source)

    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            raise error("unterminated string", pos)
        tok = m.group()
        start, pos = pos, m.end()
        if tok[0].isspace():
            continue
        if tok == ")" and not stack:
            raise error("stray closing parenthesis", start)
        if done:
            raise error("unexpected content after expression", start)
        if tok == "(":
            stack.append(([], start))
            continue
        if tok == ")":
            node, _ = stack.pop()
            if stack:
                stack[-1][0].append(node)
            else:
                result, done = node, True
            continue
        atom: SExpr = Str(_unescape(tok[1:-1])) if tok[0] == '"' else Atom(tok)
        if stack:
            stack[-1][0].append(atom)
        else:
            result, done = atom, True
    if stack:
        raise error("unbalanced parenthesis: '(' is never closed", stack[-1][1])
    if not done:
        raise error("no expression", pos)
    return result


def head(node: SExpr) -> str | None:
    """First atom of a list node, if any."""
    if isinstance(node, list) and node and isinstance(node[0], Atom):
        return str(node[0])
    return None


def children(node: list, name: str) -> list[list]:
    return [c for c in node[1:] if head(c) == name]


def child(node: list, name: str) -> list | None:
    for c in node[1:]:
        if head(c) == name:
            return c
    return None
