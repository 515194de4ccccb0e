"""Indexed triple store with single-pattern matching."""

from __future__ import annotations

from collections.abc import Iterable, Iterator

from .terms import IRI, Literal, Term, Triple, Variable


def _check_ground(t: Triple) -> None:
    s, p, o = t
    if not isinstance(s, IRI) or not isinstance(p, IRI):
        if isinstance(s, Variable) or isinstance(p, Variable) or isinstance(o, Variable):
            raise ValueError(f"cannot store a triple containing variables: {t}")
        raise ValueError(f"subject and predicate must be IRIs: {t}")
    if not isinstance(o, (IRI, Literal)):
        if isinstance(o, Variable):
            raise ValueError(f"cannot store a triple containing variables: {t}")
        raise ValueError(f"object must be an IRI or literal: {t!r}")


_EMPTY: frozenset = frozenset()
_EMPTY_MAP: dict = {}


class TripleStore:
    """A set of ground triples indexed by subject, predicate and object.

    Three nested indexes (s->p->{o}, p->o->{s}, o->s->{p}) answer every
    combination of bound positions without a scan; per-position counters make
    ``count`` O(1), which the reasoner uses to order joins.
    """

    def __init__(self, triples: Iterable[Triple] = ()):
        self._triples: set[Triple] = set()
        self._spo: dict[Term, dict[Term, set[Term]]] = {}
        self._pos: dict[Term, dict[Term, set[Term]]] = {}
        self._osp: dict[Term, dict[Term, set[Term]]] = {}
        self._n_s: dict[Term, int] = {}
        self._n_p: dict[Term, int] = {}
        self._n_o: dict[Term, int] = {}
        for t in triples:
            self.add(t)

    def add(self, t: Triple) -> bool:
        """Insert *t*; return ``True`` if it was not already present."""
        if not isinstance(t, Triple):
            t = Triple(*t)
        if t in self._triples:
            return False
        _check_ground(t)
        return self.add_ground(t)

    def add_ground(self, t: Triple) -> bool:
        """Like :meth:`add` for callers that already guarantee a ground :class:`Triple`."""
        if t in self._triples:
            return False
        self._triples.add(t)
        s, p, o = t
        self._spo.setdefault(s, {}).setdefault(p, set()).add(o)
        self._pos.setdefault(p, {}).setdefault(o, set()).add(s)
        self._osp.setdefault(o, {}).setdefault(s, set()).add(p)
        self._n_s[s] = self._n_s.get(s, 0) + 1
        self._n_p[p] = self._n_p.get(p, 0) + 1
        self._n_o[o] = self._n_o.get(o, 0) + 1
        return True

    insert = add

    def update(self, triples: Iterable[Triple]) -> int:
        return sum(1 for t in triples if self.add(t))

    def copy(self) -> "TripleStore":
        return TripleStore(self._triples)

    def __contains__(self, t: object) -> bool:
        return t in self._triples

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, TripleStore):
            return self._triples == other._triples
        return NotImplemented

    def __repr__(self) -> str:
        return f"<TripleStore {len(self)} triples>"

    def sorted(self) -> list[Triple]:
        return sorted(self._triples)

    def count(self, s: Term | None = None, p: Term | None = None, o: Term | None = None) -> int:
        """Number of triples matching the given positions (``None`` = any)."""
        if s is not None:
            if p is not None:
                if o is not None:
                    return 1 if (s, p, o) in self._triples else 0
                return len(self._spo.get(s, {}).get(p, ()))
            if o is not None:
                return len(self._osp.get(o, {}).get(s, ()))
            return self._n_s.get(s, 0)
        if p is not None:
            if o is not None:
                return len(self._pos.get(p, {}).get(o, ()))
            return self._n_p.get(p, 0)
        if o is not None:
            return self._n_o.get(o, 0)
        return len(self._triples)

    def triples(self, s: Term | None = None, p: Term | None = None, o: Term | None = None) -> Iterator[Triple]:
        """Iterate triples matching the given positions (``None`` = any)."""
        if s is not None:
            if p is not None:
                if o is not None:
                    if (s, p, o) in self._triples:
                        yield Triple(s, p, o)
                    return
                for o2 in self._spo.get(s, {}).get(p, ()):
                    yield Triple(s, p, o2)
                return
            if o is not None:
                for p2 in self._osp.get(o, {}).get(s, ()):
                    yield Triple(s, p2, o)
                return
            for p2, objs in self._spo.get(s, {}).items():
                for o2 in objs:
                    yield Triple(s, p2, o2)
            return
        if p is not None:
            if o is not None:
                for s2 in self._pos.get(p, {}).get(o, ()):
                    yield Triple(s2, p, o)
                return
            for o2, subs in self._pos.get(p, {}).items():
                for s2 in subs:
                    yield Triple(s2, p, o2)
            return
        if o is not None:
            for s2, preds in self._osp.get(o, {}).items():
                for p2 in preds:
                    yield Triple(s2, p2, o)
            return
        yield from self._triples

    def values(self, s: Term | None, p: Term | None, o: Term | None):
        """The stored values of the single unbound position (exactly one argument ``None``).

        Returns the live index set; callers must not mutate the store while
        iterating it.
        """
        if o is None:
            return self._spo.get(s, _EMPTY_MAP).get(p, _EMPTY)
        if s is None:
            return self._pos.get(p, _EMPTY_MAP).get(o, _EMPTY)
        return self._osp.get(o, _EMPTY_MAP).get(s, _EMPTY)

    def objects(self, s: Term, p: Term) -> set[Term]:
        return set(self._spo.get(s, {}).get(p, ()))

    def subjects(self, p: Term, o: Term) -> set[Term]:
        return set(self._pos.get(p, {}).get(o, ()))

    def match(self, pattern: tuple[Term, Term, Term]) -> list[dict[str, Term]]:
        """Bindings (variable name -> term) making *pattern* a stored triple."""
        return list(match_pattern(self.triples, pattern))


def match_pattern(source, pattern: tuple[Term, Term, Term]) -> Iterator[dict[str, Term]]:
    """Match one pattern against ``source(s, p, o)``, a triple iterator factory."""
    lookup = [None if isinstance(x, Variable) else x for x in pattern]
    for t in source(*lookup):
        binding: dict[str, Term] = {}
        for pos, x in zip(t, pattern):
            if isinstance(x, Variable):
                seen = binding.get(x.name)
                if seen is None:
                    binding[x.name] = pos
                elif seen != pos:
                    break
        else:
            yield binding


def scan_match(triples: Iterable[Triple], pattern: tuple[Term, Term, Term]) -> list[dict[str, Term]]:
    """Reference linear scan; the index-free oracle for :meth:`TripleStore.match`."""
    out = []
    for t in triples:
        binding: dict[str, Term] = {}
        ok = True
        for pos, x in zip(t, pattern):
            if isinstance(x, Variable):
                if binding.setdefault(x.name, pos) != pos:
                    ok = False
                    break
            elif x != pos:
                ok = False
                break
        if ok:
            out.append(binding)
    return out
