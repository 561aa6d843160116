"""Reachability and safety games on a built :class:`ProductGame`.

Attractors are computed by backward breadth-first search with per-vertex
out-degree counters, in time linear in the number of product edges.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Collection, Mapping

from .model import P1, P2, SecretDFA
from .product import ProductGame, ProductState


def attractor_ranks(product: ProductGame, player: int, target: Collection[int]) -> list[int]:
    """Rank of each vertex in ``player``'s attractor of ``target``; -1 if outside.

    Targets have rank 0; any other attractor vertex has rank one more than
    the successor(s) that pull it in.
    """
    preds = product.predecessors()
    n = len(product)
    rank = [-1] * n
    count = [len(product.successors(v)) for v in range(n)]
    frontier = sorted(set(target))
    for v in frontier:
        rank[v] = 0
    level = 0
    while frontier:
        level += 1
        nxt = []
        for w in frontier:
            for _, v in preds[w]:
                if rank[v] >= 0:
                    continue
                if product.owner(v) == player:
                    rank[v] = level
                    nxt.append(v)
                else:
                    count[v] -= 1
                    if count[v] == 0:
                        rank[v] = level
                        nxt.append(v)
        frontier = nxt
    return rank


def attractor(
    product: ProductGame, player: int, target: Collection[int]
) -> tuple[frozenset[int], dict[int, str]]:
    """Least fixed point of ``player``-forced reachability of ``target``.

    The strategy picks, at each of ``player``'s vertices outside the target,
    the smallest action leading to a strictly lower rank.
    """
    rank = attractor_ranks(product, player, target)
    region = frozenset(v for v, r in enumerate(rank) if r >= 0)
    strategy = {}
    for v in region:
        if rank[v] > 0 and product.owner(v) == player:
            strategy[v] = min(a for a, w in product.successors(v) if 0 <= rank[w] < rank[v])
    return region, strategy


def safety(
    product: ProductGame, player: int, safe: Collection[int]
) -> tuple[frozenset[int], dict[int, str]]:
    """Greatest set inside ``safe`` where ``player`` can stay forever.

    Computed as a trap: repeatedly drop vertices where ``player`` has no
    staying move or the opponent has a leaving one.
    """
    preds = product.predecessors()
    n = len(product)
    inside = [False] * n
    for v in safe:
        inside[v] = True
    staying = [0] * n
    for v in range(n):
        if inside[v]:
            staying[v] = sum(1 for _, w in product.successors(v) if inside[w])
    doomed = [
        v for v in range(n)
        if inside[v] and (
            staying[v] == 0 if product.owner(v) == player
            else staying[v] < len(product.successors(v))
        )
    ]
    for v in doomed:
        inside[v] = False
    while doomed:
        w = doomed.pop()
        for _, v in preds[w]:
            if not inside[v]:
                continue
            if product.owner(v) == player:
                staying[v] -= 1
                if staying[v] > 0:
                    continue
            inside[v] = False
            doomed.append(v)
    region = frozenset(v for v in range(n) if inside[v])
    strategy = {
        v: min(a for a, w in product.successors(v) if inside[w])
        for v in region
        if product.owner(v) == player
    }
    return region, strategy


def target_F(product: ProductGame) -> frozenset[int]:
    """Vertices whose DFA state is accepting."""
    product.build()
    return frozenset(v for v in product.vertices() if product.is_accepting(v))


def target_F_O(product: ProductGame) -> frozenset[int]:
    """Accepting vertices whose belief still holds a non-accepting pair."""
    product.build()
    return frozenset(
        v for v in product.vertices()
        if product.is_accepting(v) and product.belief_accepting_counts(v)[1] > 0
    )


@dataclass(frozen=True)
class Solution:
    """Winning regions and strategies of a solved product, keyed by vertex."""

    initial: ProductState
    owners: Mapping[ProductState, int]
    target_opaque: frozenset[ProductState]
    target_accepting: frozenset[ProductState]
    win_opaque: frozenset[ProductState]
    win: frozenset[ProductState]
    p2_safe_opaque: frozenset[ProductState]
    p2_safe: frozenset[ProductState]
    p1_opaque_strategy: Mapping[ProductState, str]
    p1_strategy: Mapping[ProductState, str]
    p2_strategy: Mapping[ProductState, str]
    product: ProductGame | None = field(default=None, compare=False, repr=False)

    @property
    def vertices(self) -> frozenset[ProductState]:
        return frozenset(self.owners)


def solve(product: ProductGame, dfa: SecretDFA | None = None) -> Solution:
    """Solve both reachability objectives and P2's revealing safety game.

    ``dfa`` defaults to the product's own DFA; it is accepted for symmetry
    with the other entry points.
    """
    if dfa is not None and dfa is not product.dfa and dfa != product.dfa:
        raise ValueError("dfa does not match the product's DFA")
    product.build()
    every = range(len(product))
    f_opaque = target_F_O(product)
    f_acc = target_F(product)
    win_opaque, strat_opaque = attractor(product, P1, f_opaque)
    win, strat = attractor(product, P1, f_acc)
    safe_opaque, p2_strat = safety(product, P2, [v for v in every if v not in f_opaque])
    safe, _ = safety(product, P2, [v for v in every if v not in f_acc])

    def states(ids):
        return frozenset(product.state(v) for v in ids)

    def strategy(table):
        return {product.state(v): a for v, a in sorted(table.items())}

    return Solution(
        initial=product.state(product.initial),
        owners={product.state(v): product.owner(v) for v in every},
        target_opaque=states(f_opaque),
        target_accepting=states(f_acc),
        win_opaque=states(win_opaque),
        win=states(win),
        p2_safe_opaque=states(safe_opaque),
        p2_safe=states(safe),
        p1_opaque_strategy=strategy(strat_opaque),
        p1_strategy=strategy(strat),
        p2_strategy=strategy(p2_strat),
        product=product,
    )
