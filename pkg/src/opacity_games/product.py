"""Belief-augmented product of an arena, a secret DFA and an observer.

A product vertex ``(s, q, b)`` pairs the true arena state ``s`` and DFA state
``q`` with the observer's belief ``b``: every ``(state, dstate)`` pair that is
consistent with what the observer has seen so far.

:class:`ProductGame` is built lazily from ``v0``; beliefs and vertices are
interned so each ``(s, q, b)`` gets exactly one integer id.
"""
from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .model import GameArena, InvalidPlayError, ObservationMap, Play, SecretDFA, check_play

Belief = tuple  # sorted tuple of (state, dstate) pairs

DEFAULT_VERTEX_BUDGET = 5_000_000
BUDGET_ENV = "OPACITY_VERTEX_BUDGET"


def default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    return int(raw) if raw else DEFAULT_VERTEX_BUDGET


class BudgetExceeded(RuntimeError):
    pass


def make_belief(pairs: Iterable[tuple[str, str]]) -> Belief:
    return tuple(sorted(set(pairs)))


def format_belief(belief: Belief) -> str:
    return "{" + ",".join(f"({s},{q})" for s, q in belief) + "}"


@dataclass(frozen=True, order=True)
class ProductState:
    state: str
    dstate: str
    belief: Belief

    def __str__(self) -> str:
        return f"({self.state},{self.dstate},{format_belief(self.belief)})"


def _initial_pairs(arena: GameArena, dfa: SecretDFA, obs: ObservationMap, mode: str) -> Belief:
    s0 = arena.initial
    if mode == "singleton":
        return ((s0, dfa.step(dfa.initial, arena.label(s0))),)
    if mode == "class":
        cls = obs.classes.get(s0)
        if cls is None:
            return _initial_pairs(arena, dfa, obs, "singleton")
        return make_belief(
            (s, dfa.step(dfa.initial, arena.label(s)))
            for s in arena.states
            if obs.classes.get(s) == cls
        )
    raise ValueError(f"unknown initial-belief mode {mode!r}")


def initial_product_state(
    arena: GameArena, dfa: SecretDFA, obs: ObservationMap | None = None, mode: str = "singleton"
) -> ProductState:
    s0 = arena.initial
    q0 = dfa.step(dfa.initial, arena.label(s0))
    pairs = _initial_pairs(arena, dfa, obs or ObservationMap(), mode)
    return ProductState(s0, q0, pairs)


def belief_update(
    arena: GameArena, dfa: SecretDFA, obs: ObservationMap, belief: Iterable[tuple[str, str]], observed: str
) -> Belief:
    """Pairs reachable from ``belief`` by one transition observed as ``observed``.

    Only actions enabled at (hence owned by the owner of) each believed state
    are considered.  An empty result means ``observed`` is impossible.
    """
    out = set()
    for s, q in belief:
        for a, t in arena.moves(s):
            if obs(s, a, t) == observed:
                out.add((t, dfa.step(q, arena.label(t))))
    return make_belief(out)


def lift_play(
    arena: GameArena, dfa: SecretDFA, obs: ObservationMap, play: Play, mode: str = "singleton"
) -> list[ProductState]:
    """The unique product play whose projection is ``play``."""
    check_play(arena, play)
    v = initial_product_state(arena, dfa, obs, mode)
    out = [v]
    for s, a, t in play.transitions():
        b = belief_update(arena, dfa, obs, v.belief, obs(s, a, t))
        v = ProductState(t, dfa.step(v.dstate, arena.label(t)), b)
        out.append(v)
    return out


class ProductGame:
    """Lazily explored belief-augmented game.

    Vertex ids are assigned in discovery order; :meth:`build` explores
    breadth-first with actions in sorted order, so ids are deterministic.
    """

    def __init__(
        self,
        arena: GameArena,
        dfa: SecretDFA,
        obs: ObservationMap,
        budget: int | None = None,
        initial_belief: str = "singleton",
    ):
        self.arena = arena
        self.dfa = dfa
        self.obs = obs
        self.budget = default_budget() if budget is None else budget
        self.initial_belief = initial_belief

        self._states = list(arena.states)
        self._sidx = {s: i for i, s in enumerate(self._states)}
        self._dstates = list(dfa.dstates)
        self._qidx = {q: i for i, q in enumerate(self._dstates)}
        nq = self._nq = len(self._dstates)
        self._acc = [q in dfa.accepting for q in self._dstates]
        # DFA state after entering arena state t from dstate q
        self._delta = [
            [self._qidx[dfa.step(q, arena.label(t))] for t in self._states] for q in self._dstates
        ]
        self._moves = []
        self._by_sym = []
        for s in self._states:
            moves = []
            by_sym: dict[str, list[int]] = {}
            for a, t in arena.moves(s):
                sym = obs(s, a, t)
                ti = self._sidx[t]
                moves.append((a, ti, sym))
                by_sym.setdefault(sym, []).append(ti)
            self._moves.append(tuple(moves))
            self._by_sym.append(by_sym)
        self._owner_of_state = [arena.owner[s] for s in self._states]

        self._beliefs: list[tuple[int, ...]] = []
        self._belief_id: dict[tuple[int, ...], int] = {}
        self._update_cache: dict[tuple[int, str], int] = {}
        self._keys: list[tuple[int, int, int]] = []
        self._vid: dict[tuple[int, int, int], int] = {}
        self._edges: list[tuple[tuple[str, int], ...] | None] = []
        self._pstates: list[ProductState | None] = []
        self._preds: list[list[tuple[str, int]]] | None = None
        self.complete = False

        v0 = initial_product_state(arena, dfa, obs, initial_belief)
        codes = tuple(sorted(self._sidx[s] * nq + self._qidx[q] for s, q in v0.belief))
        self.initial = self._intern(self._sidx[v0.state], self._qidx[v0.dstate], self._intern_belief(codes))

    # -- interning -----------------------------------------------------
    def _intern_belief(self, codes: tuple[int, ...]) -> int:
        bid = self._belief_id.get(codes)
        if bid is None:
            bid = self._belief_id[codes] = len(self._beliefs)
            self._beliefs.append(codes)
        return bid

    def _intern(self, s: int, q: int, b: int) -> int:
        key = (s, q, b)
        v = self._vid.get(key)
        if v is None:
            if len(self._keys) >= self.budget:
                raise BudgetExceeded(f"product exceeds the vertex budget of {self.budget}")
            v = self._vid[key] = len(self._keys)
            self._keys.append(key)
            self._edges.append(None)
            self._pstates.append(None)
        return v

    def _update(self, bid: int, sym: str) -> int:
        key = (bid, sym)
        out = self._update_cache.get(key)
        if out is None:
            nq = self._nq
            delta = self._delta
            new = set()
            for code in self._beliefs[bid]:
                s, q = divmod(code, nq)
                row = delta[q]
                for t in self._by_sym[s].get(sym, ()):
                    new.add(t * nq + row[t])
            out = self._update_cache[key] = self._intern_belief(tuple(sorted(new)))
        return out

    # -- exploration ---------------------------------------------------
    def successors(self, v: int) -> tuple[tuple[str, int], ...]:
        """``(action, successor)`` pairs of ``v`` sorted by action."""
        edges = self._edges[v]
        if edges is None:
            s, q, b = self._keys[v]
            row = self._delta[q]
            edges = tuple(
                (a, self._intern(t, row[t], self._update(b, sym))) for a, t, sym in self._moves[s]
            )
            self._edges[v] = edges
        return edges

    def step(self, v: int, action: str) -> int:
        for a, w in self.successors(v):
            if a == action:
                return w
        raise InvalidPlayError(f"action {action!r} is not enabled at {self.state(v)}")

    def build(self) -> "ProductGame":
        """Explore every vertex reachable from the initial one."""
        if self.complete:
            return self
        seen = {self.initial}
        queue = deque([self.initial])
        while queue:
            v = queue.popleft()
            for _, w in self.successors(v):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        # every interned vertex is reachable from v0, so all are expanded now
        self.complete = True
        return self

    # -- queries -------------------------------------------------------
    def __len__(self) -> int:
        return len(self._keys)

    def vertices(self) -> range:
        return range(len(self._keys))

    def owner(self, v: int) -> int:
        return self._owner_of_state[self._keys[v][0]]

    def is_accepting(self, v: int) -> bool:
        return self._acc[self._keys[v][1]]

    def belief_accepting_counts(self, v: int) -> tuple[int, int]:
        """(# pairs with accepting dstate, # pairs with non-accepting dstate)."""
        nq = self._nq
        acc = sum(1 for c in self._beliefs[self._keys[v][2]] if self._acc[c % nq])
        return acc, len(self._beliefs[self._keys[v][2]]) - acc

    def state(self, v: int) -> ProductState:
        ps = self._pstates[v]
        if ps is None:
            s, q, b = self._keys[v]
            nq = self._nq
            pairs = make_belief(
                (self._states[c // nq], self._dstates[c % nq]) for c in self._beliefs[b]
            )
            ps = self._pstates[v] = ProductState(self._states[s], self._dstates[q], pairs)
        return ps

    def index(self, ps: ProductState) -> int:
        try:
            nq = self._nq
            codes = tuple(sorted(self._sidx[s] * nq + self._qidx[q] for s, q in ps.belief))
            key = (self._sidx[ps.state], self._qidx[ps.dstate], self._belief_id[codes])
            return self._vid[key]
        except KeyError:
            raise KeyError(f"{ps} is not a vertex of this product") from None

    def __contains__(self, ps: ProductState) -> bool:
        try:
            self.index(ps)
        except KeyError:
            return False
        return True

    def predecessors(self) -> list[list[tuple[str, int]]]:
        """Predecessor lists ``w -> [(action, v)]`` of the built product."""
        if self._preds is None or len(self._preds) != len(self._keys):
            self.build()
            preds: list[list[tuple[str, int]]] = [[] for _ in self._keys]
            for v in self.vertices():
                for a, w in self._edges[v]:
                    preds[w].append((a, v))
            self._preds = preds
        return self._preds

    def num_edges(self) -> int:
        self.build()
        return sum(len(e) for e in self._edges)


def build_product(
    arena: GameArena,
    dfa: SecretDFA,
    obs: ObservationMap,
    budget: int | None = None,
    initial_belief: str = "singleton",
) -> ProductGame:
    return ProductGame(arena, dfa, obs, budget=budget, initial_belief=initial_belief).build()


def product_step(product: ProductGame, v: ProductState, action: str) -> ProductState:
    return product.state(product.step(product.index(v), action))
