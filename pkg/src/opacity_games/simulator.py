"""Run plays on a product game under deterministic or randomized strategies.

Randomness comes only from :class:`random.Random` instances seeded
explicitly (Mersenne Twister, identical across platforms), so a seed fixes
every episode.
"""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Mapping, Protocol, Sequence

from .classifier import vertex_play_verdict
from .model import P1, Play, PlayVerdict
from .product import ProductGame, ProductState
from .solver import Solution


class StrategyUndefined(LookupError):
    pass


class Strategy(Protocol):
    def distribution(self, history: Sequence[ProductState], enabled: Sequence[str]) -> dict[str, float]:
        """Probability of each enabled action after ``history``."""


@dataclass
class MemorylessStrategy:
    """Deterministic choice per product vertex, with an optional fallback
    for vertices outside the table."""

    table: Mapping[ProductState, str]
    fallback: Strategy | None = None
    name: str = "memoryless"

    def distribution(self, history, enabled):
        a = self.table.get(history[-1])
        if a is None:
            if self.fallback is None:
                raise StrategyUndefined(f"{self.name} strategy is undefined at {history[-1]}")
            return self.fallback.distribution(history, enabled)
        return {a: 1.0}


@dataclass
class StateStrategy:
    """Deterministic choice per arena state (ignores DFA state and belief)."""

    table: Mapping[str, str]
    fallback: Strategy | None = None

    def distribution(self, history, enabled):
        a = self.table.get(history[-1].state)
        if a is None or a not in enabled:
            if self.fallback is None:
                raise StrategyUndefined(f"no action for arena state {history[-1].state!r}")
            return self.fallback.distribution(history, enabled)
        return {a: 1.0}


class UniformStrategy:
    """Uniformly random over the enabled actions."""

    def distribution(self, history, enabled):
        return {a: 1.0 / len(enabled) for a in enabled}


class FirstEnabledStrategy:
    """Always the smallest enabled action; completes partial strategies."""

    def distribution(self, history, enabled):
        return {min(enabled): 1.0}


@dataclass
class FunctionStrategy:
    fn: Callable[[Sequence[ProductState], Sequence[str]], Mapping[str, float]]

    def distribution(self, history, enabled):
        return dict(self.fn(history, enabled))


def opaque_strategy(solution: Solution, fallback: Strategy | None = None) -> MemorylessStrategy:
    """P1's opacity-enforcing strategy, falling back to the plain
    reachability strategy and then to ``fallback``.

    The solver's strategies say nothing once the target is reached (or
    outside the winning region); the default fallback plays the smallest
    enabled action there.
    """
    fallback = fallback or FirstEnabledStrategy()
    reach = MemorylessStrategy(solution.p1_strategy, fallback, "reach")
    return MemorylessStrategy(solution.p1_opaque_strategy, reach, "opaque")


def reach_strategy(solution: Solution, fallback: Strategy | None = None) -> MemorylessStrategy:
    fallback = fallback or FirstEnabledStrategy()
    return MemorylessStrategy(solution.p1_strategy, fallback, "reach")


def revealing_strategy(solution: Solution, fallback: Strategy | None = None) -> MemorylessStrategy:
    """P2's strategy keeping the play away from opaque acceptance."""
    fallback = fallback or FirstEnabledStrategy()
    return MemorylessStrategy(solution.p2_strategy, fallback, "revealing")


@dataclass(frozen=True)
class EpisodeRecord:
    play: Play
    lifted: tuple[ProductState, ...]
    observations: tuple[str, ...]
    verdict: PlayVerdict
    steps: int
    truncated: bool

    def trace(self) -> str:
        """One line per step: ``step<TAB>action<TAB>observation<TAB>vertex``."""
        lines = [f"0\t-\t-\t{self.lifted[0]}"]
        for i, (a, o, v) in enumerate(zip(self.play.actions, self.observations, self.lifted[1:]), 1):
            lines.append(f"{i}\t{a}\t{o}\t{v}")
        lines.append(f"verdict\t{self.verdict.value}")
        return "\n".join(lines) + "\n"


class _Settled:
    """Caches whether every vertex reachable from ``v`` has ``v``'s verdict."""

    def __init__(self, product: ProductGame):
        self.product = product
        self.cache: dict[int, bool] = {}

    def __call__(self, v: int) -> bool:
        hit = self.cache.get(v)
        if hit is not None:
            return hit
        p = self.product
        verdict = vertex_play_verdict(p.dfa, p.state(v))
        seen, stack, ok = {v}, [v], True
        while stack and ok:
            u = stack.pop()
            for _, w in p.successors(u):
                if w not in seen:
                    if vertex_play_verdict(p.dfa, p.state(w)) != verdict:
                        ok = False
                        break
                    seen.add(w)
                    stack.append(w)
        self.cache[v] = ok
        return ok


def _sample(rng: random.Random, dist: Mapping[str, float], enabled: Sequence[str], where) -> str:
    actions = [a for a in sorted(dist) if dist[a] > 0]
    bad = [a for a in actions if a not in enabled]
    if not actions or bad:
        raise StrategyUndefined(f"strategy proposes {bad or 'nothing'} at {where}; enabled: {list(enabled)}")
    if len(actions) == 1:
        return actions[0]
    return rng.choices(actions, weights=[dist[a] for a in actions])[0]


def simulate(
    product: ProductGame,
    p1: Strategy,
    p2: Strategy,
    max_steps: int = 1000,
    seed: int | None = 0,
    start: ProductState | None = None,
    rng: random.Random | None = None,
    _settled: _Settled | None = None,
) -> EpisodeRecord:
    """Play one episode from ``start`` (default: the initial vertex).

    The episode ends after ``max_steps`` moves, at a vertex whose only
    moves are self-loops, or on revisiting a vertex from which no reachable
    vertex has a different verdict.
    """
    rng = rng or random.Random(seed)
    settled = _settled or _Settled(product)
    v = product.initial if start is None else product.index(start)
    lifted = [product.state(v)]
    states, actions, observations = [lifted[0].state], [], []
    visited = {v}
    truncated = False
    while True:
        succ = product.successors(v)
        if all(w == v for _, w in succ):
            break
        if len(actions) >= max_steps:
            truncated = True
            break
        player = p1 if product.owner(v) == P1 else p2
        enabled = [a for a, _ in succ]
        a = _sample(rng, player.distribution(lifted, enabled), enabled, lifted[-1])
        w = product.step(v, a)
        s, t = lifted[-1].state, product.state(w).state
        observations.append(product.obs(s, a, t))
        actions.append(a)
        states.append(t)
        lifted.append(product.state(w))
        v = w
        if v in visited and settled(v):
            break
        visited.add(v)
    return EpisodeRecord(
        play=Play(tuple(states), tuple(actions)),
        lifted=tuple(lifted),
        observations=tuple(observations),
        verdict=vertex_play_verdict(product.dfa, lifted[-1]),
        steps=len(actions),
        truncated=truncated,
    )


@dataclass
class BatchResult:
    episodes: list[EpisodeRecord]
    counts: Counter

    def fraction(self, verdict: PlayVerdict) -> float:
        return self.counts[verdict] / len(self.episodes)

    def summary(self) -> str:
        n = len(self.episodes)
        return "\n".join(
            f"{v.value}\t{self.counts[v]}\t{self.counts[v] / n:.4f}" for v in PlayVerdict
        ) + "\n"


def batch(
    product: ProductGame,
    p1: Strategy,
    p2: Strategy,
    episodes: int,
    seed: int = 0,
    max_steps: int = 1000,
    start: ProductState | None = None,
) -> BatchResult:
    """Run ``episodes`` episodes; episode ``i`` uses its own generator seeded
    from ``(seed, i)`` so results do not depend on execution order."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    settled = _Settled(product)
    records = [
        simulate(product, p1, p2, max_steps, start=start,
                 rng=random.Random(f"{seed}:{i}"), _settled=settled)
        for i in range(episodes)
    ]
    return BatchResult(records, Counter(r.verdict for r in records))
