"""Finitely presented transformation monoids.

Words over a generator alphabet, normal forms under oriented rewrite rules,
and breadth-first exploration of a generator action on model states (the
orbit of a base model, drawn as a Cayley-style graph).

Termination is guaranteed by construction: every rule must shrink its word,
or keep the length and strictly decrease lexicographically (in generator
declaration order).  Confluence is not verified in general; use
``unresolved_critical_pairs`` to check a presentation's overlaps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from .errors import DepthExceeded, NonterminatingRule

DEFAULT_STATE_CAP = 100_000


@dataclass(frozen=True)
class Word:
    symbols: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))

    def __len__(self) -> int:
        return len(self.symbols)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.symbols + other.symbols)

    def __str__(self) -> str:
        return "·".join(self.symbols) if self.symbols else "ε"


EMPTY_WORD = Word()


class MonoidPresentation:
    """Generators plus oriented, length-nonincreasing rewrite rules."""

    def __init__(
        self,
        generators: Sequence[str],
        rules: Iterable[tuple[Word | Sequence[str], Word | Sequence[str]]] = (),
    ):
        self.generators = tuple(generators)
        if len(set(self.generators)) != len(self.generators):
            raise ValueError("duplicate generators")
        self._rank = {g: i for i, g in enumerate(self.generators)}
        normalized = []
        for lhs, rhs in rules:
            lhs = lhs if isinstance(lhs, Word) else Word(tuple(lhs))
            rhs = rhs if isinstance(rhs, Word) else Word(tuple(rhs))
            for w in (lhs, rhs):
                unknown = [s for s in w.symbols if s not in self._rank]
                if unknown:
                    raise ValueError(f"rule uses undeclared generators {unknown}")
            if len(rhs) > len(lhs):
                raise NonterminatingRule(f"rule {lhs} -> {rhs} grows its word")
            if len(rhs) == len(lhs) and self._key(rhs) >= self._key(lhs):
                raise NonterminatingRule(
                    f"equal-length rule {lhs} -> {rhs} must decrease lexicographically"
                )
            normalized.append((lhs, rhs))
        self.rules = tuple(normalized)

    def _key(self, w: Word) -> tuple[int, ...]:
        return tuple(self._rank[s] for s in w.symbols)

    def check_word(self, w: Word) -> None:
        unknown = [s for s in w.symbols if s not in self._rank]
        if unknown:
            raise ValueError(f"word uses undeclared generators {unknown}")

    def __repr__(self) -> str:
        rules = ", ".join(f"{l} -> {r}" for l, r in self.rules)
        return f"MonoidPresentation(generators={list(self.generators)}, rules=[{rules}])"


def normalize(presentation: MonoidPresentation, word: Word) -> Word:
    """Reduce a word by repeatedly applying the leftmost applicable rule.

    Position is the primary key, rule declaration order the tiebreak.
    """
    presentation.check_word(word)
    symbols = list(word.symbols)
    while True:
        applied = False
        for pos in range(len(symbols)):
            for lhs, rhs in presentation.rules:
                n = len(lhs.symbols)
                if tuple(symbols[pos : pos + n]) == lhs.symbols:
                    symbols[pos : pos + n] = list(rhs.symbols)
                    applied = True
                    break
            if applied:
                break
        if not applied:
            return Word(tuple(symbols))


def enumerate_words(presentation: MonoidPresentation, max_len: int) -> set[Word]:
    """All distinct normal forms of length at most ``max_len``.

    Works by extending known normal forms one generator at a time; substrings
    of irreducible words are irreducible, so this reaches every normal form.
    """
    if max_len < 0:
        raise ValueError("max_len must be nonnegative")
    found = {EMPTY_WORD}
    frontier = [EMPTY_WORD]
    for _ in range(max_len):
        fresh = []
        for w in frontier:
            for g in presentation.generators:
                v = normalize(presentation, Word(w.symbols + (g,)))
                if v not in found:
                    found.add(v)
                    fresh.append(v)
        frontier = fresh
    return found


def unresolved_critical_pairs(
    presentation: MonoidPresentation,
) -> list[tuple[Word, Word]]:
    """Overlap pairs whose two reductions reach different normal forms.

    Empty result means the presentation is locally confluent (and, since the
    rules terminate, confluent).
    """
    bad = []
    rules = presentation.rules
    for l1, r1 in rules:
        s1 = l1.symbols
        for l2, r2 in rules:
            s2 = l2.symbols
            # Proper suffix/prefix overlaps: ...s1] overlaps [s2...
            for k in range(1, min(len(s1), len(s2))):
                if s1[-k:] == s2[:k]:
                    a = normalize(presentation, Word(r1.symbols + s2[k:]))
                    b = normalize(presentation, Word(s1[:-k] + r2.symbols))
                    if a != b:
                        bad.append((a, b))
            # Containment: s2 strictly inside s1.
            if len(s2) < len(s1):
                for i in range(len(s1) - len(s2) + 1):
                    if s1[i : i + len(s2)] == s2:
                        a = normalize(presentation, r1)
                        b = normalize(presentation, Word(s1[:i] + r2.symbols + s1[i + len(s2) :]))
                        if a != b:
                            bad.append((a, b))
    return bad


@dataclass(frozen=True)
class OrbitGraph:
    """Reachable model states under a generator action, with labeled arcs."""

    states: frozenset
    arcs: frozenset  # (state, generator name, state)
    base: Any
    depth: int
    depths: Mapping[Any, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.base not in self.states:
            raise ValueError("base state missing from states")
        for s, _, t in self.arcs:
            if s not in self.states or t not in self.states:
                raise ValueError("arc endpoint missing from states")


GeneratorAction = tuple[str, Callable[[Any], Any]]


def explore_orbit(
    base: Any,
    generators: Sequence[GeneratorAction],
    depth: int,
    *,
    max_states: int = DEFAULT_STATE_CAP,
) -> OrbitGraph:
    """Breadth-first orbit of ``base`` under the generator actions.

    States are merged by equality of their canonical form (the state values
    themselves must be hashable); self-loops are kept.  Exploration stops at
    ``depth`` applications and raises DepthExceeded past ``max_states``.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    states = {base}
    depths = {base: 0}
    arcs: set[tuple[Any, str, Any]] = set()
    frontier = [base]
    for level in range(1, depth + 1):
        fresh = []
        for state in frontier:
            for name, action in generators:
                nxt = action(state)
                arcs.add((state, name, nxt))
                if nxt not in states:
                    states.add(nxt)
                    depths[nxt] = level
                    fresh.append(nxt)
                    if len(states) > max_states:
                        raise DepthExceeded(
                            f"orbit exceeded {max_states} states at depth {level}"
                        )
        frontier = fresh
    return OrbitGraph(
        states=frozenset(states),
        arcs=frozenset(arcs),
        base=base,
        depth=depth,
        depths=depths,
    )


def orbit_to_dot(orbit: OrbitGraph, label: Callable[[Any], str] = str) -> str:
    """Cayley-style DOT rendering: states as boxes, arcs labeled by generator."""

    def quote(s: str) -> str:
        return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'

    ordered = sorted(orbit.states, key=lambda s: (orbit.depths.get(s, 0), label(s)))
    lines = ["digraph orbit {", "  node [shape=box];"]
    for state in ordered:
        lines.append(f"  {quote(label(state))};")
    for s, g, t in sorted(orbit.arcs, key=lambda a: (label(a[0]), a[1], label(a[2]))):
        lines.append(f"  {quote(label(s))} -> {quote(label(t))} [label={quote(g)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def orbit_to_json(orbit: OrbitGraph, label: Callable[[Any], str] = str) -> dict:
    ordered = sorted(orbit.states, key=lambda s: (orbit.depths.get(s, 0), label(s)))
    return {
        "base": label(orbit.base),
        "depth": orbit.depth,
        "states": [
            {"label": label(s), "depth": orbit.depths.get(s, 0)} for s in ordered
        ],
        "arcs": [
            {"from": label(s), "generator": g, "to": label(t)}
            for s, g, t in sorted(orbit.arcs, key=lambda a: (label(a[0]), a[1], label(a[2])))
        ],
    }


def orbit_to_json_str(orbit: OrbitGraph, label: Callable[[Any], str] = str) -> str:
    return json.dumps(orbit_to_json(orbit, label), indent=2) + "\n"
