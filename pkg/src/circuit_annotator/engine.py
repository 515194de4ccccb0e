"""Semi-naive forward chaining over a :class:`TripleStore`."""

from __future__ import annotations

import gc
from collections.abc import Callable, Iterable, Iterator
from contextlib import contextmanager
from dataclasses import dataclass
from functools import lru_cache
from operator import itemgetter
from typing import NamedTuple

from .rules import Rule, RuleSet
from .store import TripleStore
from .terms import IRI, Term, Triple, Variable

_new = tuple.__new__


@contextmanager
def no_cyclic_gc() -> Iterator[None]:
    """Suspend the cyclic garbage collector.

    A fixpoint run allocates millions of small containers but no garbage
    cycles worth collecting; the collector's repeated full passes over the
    growing store otherwise cost a large share of the run time.
    """
    enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if enabled:
            gc.enable()

# where a body pattern draws its triples from during one semi-naive round
_FULL, _DELTA, _OLD = 0, 1, 2


class Derivation(NamedTuple):
    """One rule firing: the derived triple, the rule, and its bindings."""

    triple: Triple
    rule: str
    bindings: tuple[tuple[str, Term], ...]

    @property
    def env(self) -> dict[str, Term]:
        return dict(self.bindings)


def _template(pattern) -> tuple:
    """Pattern as ``(variable name or None, constant or None)`` per position."""
    return tuple((t.name, None) if isinstance(t, Variable) else (None, t) for t in pattern)


@dataclass(frozen=True)
class _Compiled:
    patterns: list
    guards: list
    # body variable names, sorted; solutions are value tuples in this order
    names: tuple[str, ...]
    project: Callable[[dict], tuple]
    # per head pattern and position: (index into a solution, constant)
    heads: list


@lru_cache(maxsize=None)
def _compile(rule: Rule) -> _Compiled:
    names = tuple(sorted(v.name for v in rule.body_variables()))
    if len(names) == 1:
        only = names[0]
        project = lambda b: (b[only],)  # noqa: E731
    else:
        project = itemgetter(*names)
    slot = {n: i for i, n in enumerate(names)}
    heads = [
        tuple((slot[t.name], None) if isinstance(t, Variable) else (None, t) for t in p)
        for p in rule.head
    ]
    return _Compiled(
        [_template(p) for p in rule.body],
        [(g.left.name, g.right.name) for g in rule.guards],
        names,
        project,
        heads,
    )


def _instantiate(head, values: tuple) -> Triple:
    (i0, c0), (i1, c1), (i2, c2) = head
    # tuple.__new__ skips the generated NamedTuple constructor; this runs once per firing
    return _new(Triple, (
        c0 if i0 is None else values[i0],
        c1 if i1 is None else values[i1],
        c2 if i2 is None else values[i2],
    ))


# what a pattern position holds once the join reaches it
_CONST, _BOUND, _FREE, _AGAIN = 0, 1, 2, 3


def _first_pattern(patterns, sources, store: TripleStore, delta: TripleStore) -> int | None:
    """The pattern with the fewest candidates, or ``None`` if some pattern has none."""
    best, best_size = None, None
    for i, pattern in enumerate(patterns):
        key = [c for _, c in pattern]
        src = sources[i]
        if src == _DELTA:
            n = delta.count(*key)
        elif src == _OLD:
            n = store.count(*key) - delta.count(*key)
        else:
            n = store.count(*key)
        if n == 0:
            return None
        if best_size is None or n < best_size:
            best, best_size = i, n
    return best


@lru_cache(maxsize=None)
def _plan(rule: Rule, sources: tuple[int, ...], first: int) -> list[tuple]:
    """Compiled join steps for *rule* starting at body pattern *first*.

    After the first pattern, always take a pattern sharing a bound variable,
    preferring the one with the most positions already fixed.
    """
    compiled = _compile(rule)
    patterns, guards = compiled.patterns, compiled.guards
    remaining = [i for i in range(len(patterns)) if i != first]
    order = [first]
    bound = {v for v, _ in patterns[first] if v is not None}
    while remaining:
        best = min(
            remaining,
            key=lambda i: (
                not any(v in bound for v, _ in patterns[i]),
                -sum(v is None or v in bound for v, _ in patterns[i]),
                i,
            ),
        )
        order.append(best)
        remaining.remove(best)
        bound.update(v for v, _ in patterns[best] if v is not None)

    steps = []
    bound = set()
    pending = list(guards)
    for idx in order:
        kinds, names, consts = [], [], []
        fresh: list[str] = []
        for var, const in patterns[idx]:
            if var is None:
                kinds.append(_CONST)
            elif var in bound:
                kinds.append(_BOUND)
            elif var in fresh:
                kinds.append(_AGAIN)
            else:
                kinds.append(_FREE)
                fresh.append(var)
            names.append(var)
            consts.append(const)
        bound.update(fresh)
        ready = [g for g in pending if g[0] in bound and g[1] in bound]
        pending = [g for g in pending if g not in ready]
        steps.append((sources[idx], tuple(kinds), tuple(names), tuple(consts), len(fresh), ready))
    return steps


def _solve(steps, project, store: TripleStore, delta: TripleStore, stats: dict) -> list[tuple]:
    """All solutions of *steps*, each projected to a value tuple."""
    out: list[tuple] = []
    binding: dict[str, Term] = {}
    n = len(steps)
    visits = 0

    def rec(k: int) -> None:
        nonlocal visits
        if k == n:
            out.append(project(binding))
            return
        visits += 1
        src, kinds, names, consts, n_free, ready = steps[k]
        key = [
            consts[j] if kinds[j] == _CONST else binding[names[j]] if kinds[j] == _BOUND else None
            for j in range(3)
        ]
        source = delta if src == _DELTA else store
        if n_free == 0:
            t = tuple(key)
            if t not in source or (src == _OLD and t in delta):
                return
            rec(k + 1)
            return
        if n_free == 1 and _AGAIN not in kinds:
            j = kinds.index(_FREE)
            var = names[j]
            s, p, o = key
            for value in source.values(s, p, o):
                if src == _OLD:
                    t = (value, p, o) if j == 0 else (s, value, o) if j == 1 else (s, p, value)
                    if t in delta:
                        continue
                binding[var] = value
                if ready and any(binding[a] == binding[b] for a, b in ready):
                    continue
                rec(k + 1)
            binding.pop(var, None)
            return
        for t in source.triples(*key):
            if src == _OLD and t in delta:
                continue
            ok = True
            for j in range(3):
                kind = kinds[j]
                if kind == _FREE:
                    binding[names[j]] = t[j]
                elif kind == _AGAIN and binding[names[j]] != t[j]:
                    ok = False
                    break
            if ok and ready and any(binding[a] == binding[b] for a, b in ready):
                ok = False
            if ok:
                rec(k + 1)
        for j in range(3):
            if kinds[j] == _FREE:
                binding.pop(names[j], None)

    rec(0)
    stats["evaluations"] = stats.get("evaluations", 0) + visits
    return out


def _fire(rule: Rule, store: TripleStore, delta: TripleStore | None, stats: dict):
    """Yield ``(head_triple, values)`` per firing; *values* follow ``_compile(rule).names``."""
    compiled = _compile(rule)
    patterns = compiled.patterns
    n = len(patterns)
    if delta is None:
        plans = [(_FULL,) * n]
        delta = TripleStore()
    else:
        plans = [
            (_OLD,) * i + (_DELTA,) + (_FULL,) * (n - i - 1)
            for i in range(n)
            if delta.count(*[c for _, c in patterns[i]])
        ]
    for sources in plans:
        first = _first_pattern(patterns, sources, store, delta)
        if first is None:
            continue
        for values in _solve(_plan(rule, sources, first), compiled.project, store, delta, stats):
            for head in compiled.heads:
                t = _instantiate(head, values)
                # a variable bound to a literal cannot become a subject
                if isinstance(t.subject, IRI) and isinstance(t.predicate, IRI):
                    yield t, values


def fire(rule: Rule, store: TripleStore, delta: TripleStore | None = None, stats: dict | None = None):
    """Yield ``(head_triple, binding)`` for every firing of *rule*.

    With *delta*, only firings that use at least one delta triple are
    produced, each exactly once: body pattern ``i`` reads the delta, patterns
    before it read the pre-delta store, patterns after it the full store.
    """
    names = _compile(rule).names
    for t, values in _fire(rule, store, delta, {} if stats is None else stats):
        yield t, dict(zip(names, values))


def apply_to_fixpoint(
    store: TripleStore,
    rules: RuleSet | Iterable[Rule],
    *,
    delta: Iterable[Triple] | None = None,
    asserted: TripleStore | set | None = None,
    stats: dict | None = None,
) -> tuple[int, list[Derivation]]:
    """Extend *store* in place to the least fixpoint of *rules*.

    Returns the number of added triples and the derivations behind them.
    Firings whose head is an asserted triple (by default: present before
    the call) are not recorded, so :func:`explain` of an input triple is
    empty.  Passing *delta* declares that *store* minus *delta* is already
    closed under *rules*; only joins touching *delta* are then evaluated.
    """
    added, derivations = run_fixpoint(store, rules, delta=delta, asserted=asserted, stats=stats)
    return len(added), derivations


def run_fixpoint(
    store: TripleStore,
    rules: RuleSet | Iterable[Rule],
    *,
    delta: Iterable[Triple] | None = None,
    asserted: TripleStore | set | None = None,
    stats: dict | None = None,
) -> tuple[list[Triple], list[Derivation]]:
    """Like :func:`apply_to_fixpoint` but returns the added triples themselves."""
    # solution tuples follow the sorted body variables, so they identify a firing
    ordered = [(r, _compile(r).names) for r in rules]
    stats = {} if stats is None else stats
    stats.setdefault("rounds", 0)
    stats.setdefault("evaluations", 0)
    if asserted is None:
        asserted = set(store)
    # None means the whole store is new: one unrestricted pass, no copy needed
    current = None if delta is None else TripleStore(t for t in delta if t in store)
    added: list[Triple] = []
    derivations: list[Derivation] = []
    recorded: set[tuple] = set()
    with no_cyclic_gc():
        while current is None or len(current):
            stats["rounds"] += 1
            fresh: list[Triple] = []
            fresh_set: set[Triple] = set()
            for rule, names in ordered:
                for triple, values in _fire(rule, store, current, stats):
                    if triple not in asserted:
                        key = (triple, rule.name, values)
                        if key not in recorded:
                            recorded.add(key)
                            derivations.append(_new(Derivation, (triple, rule.name, tuple(zip(names, values)))))
                    if triple not in store and triple not in fresh_set:
                        fresh_set.add(triple)
                        fresh.append(triple)
            current = TripleStore()
            for t in fresh:
                store.add_ground(t)
                current.add_ground(t)
            added.extend(fresh)
    return added, derivations


def explain(triple: Triple, derivations: Iterable[Derivation]) -> list[tuple[str, dict[str, Term]]]:
    """All (rule name, bindings) that derived *triple*; empty if it was asserted."""
    triple = Triple(*triple)
    return [(d.rule, d.env) for d in derivations if d.triple == triple]
