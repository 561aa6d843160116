"""Arenas, secret DFAs, observation maps and plays.

Everything here is immutable once built.  Arena and DFA validation report
violations as data; only the parsers turn them into exceptions.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .guards import Guard, atoms_of, evaluate

P1 = 1
P2 = 2

Letter = frozenset  # frozenset[str]: the atoms true at a state
EMPTY = frozenset()


def opponent(player: int) -> int:
    return P2 if player == P1 else P1


class InvalidPlayError(ValueError):
    pass


class PlayVerdict(enum.Enum):
    OPAQUE_WINNING = "opaque-winning"
    REVEALING_WINNING = "revealing-winning"
    NON_WINNING = "non-winning"


class StateVerdict(enum.Enum):
    OPAQUE_WINNABLE = "opaque-winning"
    WIN_ONLY_BY_REVEALING = "win-only-by-revealing"
    NOT_SURELY_WINNABLE = "not-surely-winnable"


@dataclass(frozen=True)
class GameArena:
    """Turn-based deterministic two-player arena.

    ``transitions`` maps ``(state, action)`` to the successor; a missing key
    means the action is disabled at that state.
    """

    states: tuple[str, ...]
    owner: Mapping[str, int]
    actions: Mapping[str, int]
    transitions: Mapping[tuple[str, str], str]
    initial: str
    atoms: frozenset[str] = EMPTY
    labels: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "states", tuple(self.states))
        set_(self, "owner", dict(self.owner))
        set_(self, "actions", dict(self.actions))
        set_(self, "transitions", dict(self.transitions))
        set_(self, "atoms", frozenset(self.atoms))
        set_(self, "labels", {s: frozenset(self.labels.get(s, ())) for s in self.states})

    @cached_property
    def _moves(self) -> dict[str, tuple[tuple[str, str], ...]]:
        moves: dict[str, list[tuple[str, str]]] = {s: [] for s in self.states}
        for (s, a), t in self.transitions.items():
            if s in moves:
                moves[s].append((a, t))
        return {s: tuple(sorted(m)) for s, m in moves.items()}

    def moves(self, state: str) -> tuple[tuple[str, str], ...]:
        """Enabled ``(action, successor)`` pairs at ``state``, sorted by action."""
        return self._moves[state]

    def enabled(self, state: str) -> tuple[str, ...]:
        return tuple(a for a, _ in self._moves[state])

    def step(self, state: str, action: str) -> str:
        try:
            return self.transitions[state, action]
        except KeyError:
            raise InvalidPlayError(f"action {action!r} is not enabled at state {state!r}") from None

    def label(self, state: str) -> frozenset[str]:
        return self.labels.get(state, EMPTY)

    def players_states(self, player: int) -> list[str]:
        return [s for s in self.states if self.owner[s] == player]


def validate_arena(arena: GameArena) -> list[str]:
    """List every structural violation of ``arena``; empty means valid."""
    problems = []
    states = set(arena.states)
    if len(states) != len(arena.states):
        problems.append("duplicate state ids")
    if arena.initial not in states:
        problems.append(f"initial state {arena.initial!r} is not a declared state")
    for s in arena.states:
        if arena.owner.get(s) not in (P1, P2):
            problems.append(f"state {s!r} has no valid owner")
        extra = set(arena.labels.get(s, EMPTY)) - arena.atoms
        if extra:
            problems.append(f"state {s!r} is labeled with undeclared atoms {sorted(extra)}")
    for a, p in arena.actions.items():
        if p not in (P1, P2):
            problems.append(f"action {a!r} has no valid owner")
    has_move = set()
    for (s, a), t in sorted(arena.transitions.items()):
        if s not in states:
            problems.append(f"transition from undeclared state {s!r}")
            continue
        if t not in states:
            problems.append(f"transition ({s!r}, {a!r}) leads to undeclared state {t!r}")
        if a not in arena.actions:
            problems.append(f"transition ({s!r}, {a!r}) uses undeclared action {a!r}")
        elif arena.actions[a] != arena.owner.get(s):
            problems.append(
                f"ownership violation: action {a!r} of player {arena.actions[a]} "
                f"at state {s!r} of player {arena.owner.get(s)}"
            )
        has_move.add(s)
    for s in arena.states:
        if s not in has_move:
            problems.append(f"state without enabled action: {s!r}")
    return problems


@dataclass(frozen=True)
class SecretDFA:
    """Complete DFA over letters ``2^atoms`` whose edges carry guards."""

    dstates: tuple[str, ...]
    guards: Mapping[tuple[str, str], Guard]
    initial: str
    accepting: frozenset[str]
    atoms: frozenset[str] = EMPTY
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @cached_property
    def _out(self) -> dict[str, list[tuple[str, Guard]]]:
        out: dict[str, list[tuple[str, Guard]]] = {q: [] for q in self.dstates}
        for (q, r), g in sorted(self.guards.items()):
            out.setdefault(q, []).append((r, g))
        return out

    @cached_property
    def alphabet_atoms(self) -> frozenset[str]:
        used = frozenset().union(*(atoms_of(g) for g in self.guards.values()))
        return used | self.atoms

    def step(self, q: str, letter: Iterable[str]) -> str:
        letter = frozenset(letter) & self.alphabet_atoms
        key = (q, letter)
        nxt = self._cache.get(key)
        if nxt is None:
            hits = [r for r, g in self._out[q] if evaluate(g, letter)]
            if len(hits) != 1:
                raise ValueError(
                    f"DFA is not complete and deterministic at {q!r} on {sorted(letter)}: {hits}"
                )
            nxt = self._cache[key] = hits[0]
        return nxt

    def run(self, word: Iterable[Iterable[str]], start: str | None = None) -> str:
        q = self.initial if start is None else start
        for letter in word:
            q = self.step(q, letter)
        return q

    def is_accepting(self, q: str) -> bool:
        return q in self.accepting


def all_letters(atoms: Iterable[str]) -> list[frozenset[str]]:
    atoms = sorted(atoms)
    return [
        frozenset(combo)
        for k in range(len(atoms) + 1)
        for combo in itertools.combinations(atoms, k)
    ]


def validate_dfa(dfa: SecretDFA) -> list[str]:
    """Check completeness, determinism and absorbing accepting states by
    enumerating every letter over the DFA's atoms."""
    problems = []
    dstates = set(dfa.dstates)
    if dfa.initial not in dstates:
        problems.append(f"initial dstate {dfa.initial!r} is not declared")
    for q in sorted(dfa.accepting - dstates):
        problems.append(f"accepting dstate {q!r} is not declared")
    for q, r in dfa.guards:
        for x in (q, r):
            if x not in dstates:
                problems.append(f"edge uses undeclared dstate {x!r}")
    if problems:
        return problems
    for q in dfa.dstates:
        out = [(r, g) for (p, r), g in sorted(dfa.guards.items()) if p == q]
        for letter in all_letters(dfa.alphabet_atoms):
            hits = [r for r, g in out if evaluate(g, letter)]
            shown = "{" + ",".join(sorted(letter)) + "}"
            if not hits:
                problems.append(f"incomplete: no edge from {q!r} on letter {shown}")
            elif len(hits) > 1:
                problems.append(f"nondeterministic: edges from {q!r} to {hits} all enabled on letter {shown}")
            elif q in dfa.accepting and hits[0] != q:
                problems.append(
                    f"accepting dstate {q!r} is not absorbing: letter {shown} leads to {hits[0]!r}"
                )
    return problems


@dataclass(frozen=True)
class ObservationMap:
    """Attacker observation of transitions.

    ``explicit`` triples take precedence; otherwise a transition is observed
    as the class of its destination state.
    """

    classes: Mapping[str, str] = field(default_factory=dict)
    explicit: Mapping[tuple[str, str, str], str] = field(default_factory=dict)

    def __call__(self, src: str, action: str, dst: str) -> str:
        sym = self.explicit.get((src, action, dst))
        if sym is None:
            sym = self.classes.get(dst)
            if sym is None:
                raise KeyError(f"no observation for transition ({src}, {action}, {dst})")
        return sym

    @property
    def symbols(self) -> frozenset[str]:
        return frozenset(self.classes.values()) | frozenset(self.explicit.values())

    def expand(self, arena: GameArena) -> "ObservationMap":
        """Equivalent map made only of explicit triples over ``arena``."""
        return ObservationMap(
            explicit={(s, a, t): self(s, a, t) for (s, a), t in arena.transitions.items()}
        )

    def missing(self, arena: GameArena) -> list[tuple[str, str, str]]:
        return [
            (s, a, t)
            for (s, a), t in sorted(arena.transitions.items())
            if (s, a, t) not in self.explicit and t not in self.classes
        ]


@dataclass(frozen=True)
class Play:
    states: tuple[str, ...]
    actions: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.states) != len(self.actions) + 1:
            raise InvalidPlayError("a play alternates states and actions and ends in a state")

    @classmethod
    def parse(cls, text: str | Sequence[str]) -> "Play":
        """Build from ``"s0 a0 s1 a1 ... sn"`` (or the token list)."""
        tokens = text.split() if isinstance(text, str) else list(text)
        if len(tokens) % 2 == 0:
            raise InvalidPlayError("a play has an odd number of tokens")
        return cls(tuple(tokens[0::2]), tuple(tokens[1::2]))

    def __len__(self) -> int:
        return len(self.actions)

    def __str__(self) -> str:
        parts = [self.states[0]]
        for a, s in zip(self.actions, self.states[1:]):
            parts += [a, s]
        return " ".join(parts)

    def transitions(self) -> list[tuple[str, str, str]]:
        return list(zip(self.states, self.actions, self.states[1:]))

    def prefix(self, n: int) -> "Play":
        return Play(self.states[: n + 1], self.actions[:n])


def check_play(arena: GameArena, play: Play, start: str | None = None) -> None:
    """Raise :class:`InvalidPlayError` unless ``play`` is a play of ``arena``."""
    first = arena.initial if start is None else start
    if play.states[0] != first:
        raise InvalidPlayError(f"play starts at {play.states[0]!r}, expected {first!r}")
    for i, (s, a, t) in enumerate(play.transitions()):
        if s not in arena.owner:
            raise InvalidPlayError(f"unknown state {s!r} at position {i}")
        if arena.actions.get(a) != arena.owner[s]:
            raise InvalidPlayError(f"action {a!r} at position {i} is not owned by the owner of {s!r}")
        if arena.transitions.get((s, a)) != t:
            raise InvalidPlayError(f"transition ({s}, {a}) does not lead to {t!r} at position {i}")
    if play.states[-1] not in arena.owner:
        raise InvalidPlayError(f"unknown state {play.states[-1]!r}")


def play_labels(arena: GameArena, play: Play) -> list[frozenset[str]]:
    check_play(arena, play)
    return [arena.label(s) for s in play.states]


def dfa_run(dfa: SecretDFA, word: Iterable[Iterable[str]]) -> str:
    return dfa.run(word)


def is_winning_play(arena: GameArena, dfa: SecretDFA, play: Play) -> bool:
    return dfa.run(play_labels(arena, play)) in dfa.accepting


def observe_play(obs: ObservationMap, play: Play, arena: GameArena | None = None) -> list[str]:
    """Observation symbols of the play's transitions.

    The initial state is common knowledge, so it contributes no symbol.
    """
    if arena is not None:
        check_play(arena, play)
    return [obs(s, a, t) for s, a, t in play.transitions()]
