"""Brute-force ground truth for small instances.

Nothing here reuses the product construction's belief update or the
solver's attractor: plays are enumerated explicitly, opacity is decided from
its language-level definition, the belief game is rebuilt with plain sets,
and winning regions come from a naive Boolean fixed point.
"""
from __future__ import annotations

import random
from array import array
from dataclasses import dataclass, field

from . import guards as g
from .classifier import classify_play, vertex_play_verdict
from .model import (
    P1, P2, GameArena, ObservationMap, Play, PlayVerdict, SecretDFA, all_letters,
)
from .product import BudgetExceeded, ProductGame, ProductState, make_belief
from .solver import Solution, attractor, safety, solve, target_F, target_F_O

DEFAULT_PLAY_BUDGET = 3_000_000


# -- random instances --------------------------------------------------------

def random_instance(
    seed: int,
    max_states: int = 7,
    max_dstates: int = 3,
    max_actions: int = 2,
) -> tuple[GameArena, SecretDFA, ObservationMap]:
    """Draw a small arena, a DFA with absorbing accepting states and an
    observation map from a seeded PRNG."""
    rng = random.Random(seed)
    n = rng.randint(2, max_states)
    atoms = ["p", "r"][: rng.randint(1, 2)]
    acts = {
        P1: [f"a{i}" for i in range(1, rng.randint(1, max_actions) + 1)],
        P2: [f"b{i}" for i in range(1, rng.randint(1, max_actions) + 1)],
    }
    states = [f"s{i}" for i in range(n)]
    owner = {s: rng.choice((P1, P2)) for s in states}
    density = rng.uniform(0.1, 0.5)
    labels = {s: frozenset(a for a in atoms if rng.random() < density) for s in states}
    transitions = {}
    for s in states:
        mine = acts[owner[s]]
        enabled = [a for a in mine if rng.random() < 0.6] or [rng.choice(mine)]
        for a in enabled:
            transitions[s, a] = rng.choice(states)
    arena = GameArena(
        states=tuple(states),
        owner=owner,
        actions={a: p for p in (P1, P2) for a in acts[p]},
        transitions=transitions,
        initial=states[0],
        atoms=frozenset(atoms),
        labels=labels,
    )

    k = rng.randint(1, max_dstates)
    dstates = [f"q{i}" for i in range(k)]
    accepting = frozenset(q for q in dstates[1:] if rng.random() < 0.5)
    if k > 1 and not accepting:
        accepting = frozenset([dstates[-1]])
    if k == 1 and rng.random() < 0.3:
        accepting = frozenset(dstates)
    guard_of: dict[tuple[str, str], list] = {}
    for q in dstates:
        if q in accepting:
            guard_of[q, q] = [g.TRUE]
            continue
        for letter in all_letters(atoms):
            r = rng.choice(dstates)
            lits = [g.Atom(a) if a in letter else g.Not(g.Atom(a)) for a in sorted(atoms)]
            term = lits[0]
            for lit in lits[1:]:
                term = g.And(term, lit)
            guard_of.setdefault((q, r), []).append(term)
    dfa = SecretDFA(
        dstates=tuple(dstates),
        guards={edge: g.disjunction(ts) for edge, ts in guard_of.items()},
        initial=dstates[0],
        accepting=accepting,
        atoms=frozenset(atoms),
    )

    n_classes = rng.randint(1, max(1, (n + 1) // 2))
    symbols = [f"o{i}" for i in range(n_classes)]
    classes = {s: rng.choice(symbols) for s in states}
    explicit = {}
    if rng.random() < 0.3:
        for (s, a), t in sorted(transitions.items()):
            if rng.random() < 0.3:
                explicit[s, a, t] = rng.choice(symbols)
    return arena, dfa, ObservationMap(classes=classes, explicit=explicit)


# -- play enumeration ---------------------------------------------------------

class PlayTable:
    """Every play of length <= horizon, stored as a prefix tree.

    Node ``i`` is one play: it extends play ``parent[i]`` by ``action[i]``
    into ``state[i]``.  ``obs_node[i]`` identifies the play's observation
    sequence, so two plays are observation-equivalent iff their
    ``obs_node`` agree.  ``dstate[i]`` is the DFA state after reading the
    play's labels.
    """

    def __init__(self, arena: GameArena, obs: ObservationMap, horizon: int):
        self.arena = arena
        self.obs = obs
        self.horizon = horizon
        self.state_names = list(arena.states)
        self.action_names = sorted(arena.actions)
        self.parent = array("i")
        self.action = array("i")
        self.state = array("i")
        self.depth = array("i")
        self.obs_node = array("i")
        self.obs_parent = array("i", [-1])
        self.obs_symbol: list[str | None] = [None]
        self.dstate: list[str] = []
        self.winning = bytearray()

    def __len__(self) -> int:
        return len(self.parent)

    def play(self, i: int) -> Play:
        states, actions = [], []
        while i >= 0:
            states.append(self.state_names[self.state[i]])
            if self.parent[i] >= 0:
                actions.append(self.action_names[self.action[i]])
            i = self.parent[i]
        return Play(tuple(reversed(states)), tuple(reversed(actions)))

    def observation(self, i: int) -> tuple[str, ...]:
        out = []
        o = self.obs_node[i]
        while o > 0:
            out.append(self.obs_symbol[o])
            o = self.obs_parent[o]
        return tuple(reversed(out))

    def groups(self) -> dict[tuple[str, ...], list[Play]]:
        """Plays grouped by observation sequence (materializes every play)."""
        by_node: dict[int, list[int]] = {}
        for i in range(len(self)):
            by_node.setdefault(self.obs_node[i], []).append(i)
        return {
            self.observation(ids[0]): [self.play(i) for i in ids] for ids in by_node.values()
        }

    def find(self, play: Play) -> int:
        """Node id of ``play``; raises KeyError if it is not in the table."""
        sidx = {s: k for k, s in enumerate(self.state_names)}
        aidx = {a: k for k, a in enumerate(self.action_names)}
        if play.states[0] != self.arena.initial or len(play) > self.horizon:
            raise KeyError(f"play {play} is not in the table")
        node = 0
        for a, t in zip(play.actions, play.states[1:]):
            want_a, want_t = aidx.get(a), sidx.get(t)
            # children are contiguous runs in breadth-first order; scan forward
            for j in range(node + 1, len(self)):
                if self.parent[j] == node and self.action[j] == want_a and self.state[j] == want_t:
                    node = j
                    break
            else:
                raise KeyError(f"play {play} is not in the table")
        return node


def enumerate_plays(
    arena: GameArena,
    obs: ObservationMap,
    horizon: int,
    dfa: SecretDFA | None = None,
    budget: int = DEFAULT_PLAY_BUDGET,
) -> PlayTable:
    """Breadth-first enumeration of all plays of length <= ``horizon``."""
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    table = PlayTable(arena, obs, horizon)
    sidx = {s: k for k, s in enumerate(table.state_names)}
    aidx = {a: k for k, a in enumerate(table.action_names)}
    obs_child: dict[tuple[int, str], int] = {}

    def add(parent, a, s, depth, onode, q):
        if len(table) >= budget:
            raise BudgetExceeded(f"more than {budget} plays up to horizon {horizon}")
        table.parent.append(parent)
        table.action.append(a)
        table.state.append(s)
        table.depth.append(depth)
        table.obs_node.append(onode)
        table.dstate.append(q)
        if dfa is not None:
            table.winning.append(q in dfa.accepting)

    s0 = arena.initial
    q0 = dfa.step(dfa.initial, arena.label(s0)) if dfa is not None else ""
    add(-1, -1, sidx[s0], 0, 0, q0)
    start = 0
    for depth in range(1, horizon + 1):
        end = len(table)
        for i in range(start, end):
            s = table.state_names[table.state[i]]
            q = table.dstate[i]
            for a, t in arena.moves(s):
                sym = obs(s, a, t)
                key = (table.obs_node[i], sym)
                onode = obs_child.get(key)
                if onode is None:
                    onode = obs_child[key] = len(table.obs_parent)
                    table.obs_parent.append(table.obs_node[i])
                    table.obs_symbol.append(sym)
                q2 = dfa.step(q, arena.label(t)) if dfa is not None else ""
                add(i, aidx[a], sidx[t], depth, onode, q2)
        start = end
    return table


def _class_flags(table: PlayTable) -> tuple[bytearray, bytearray]:
    """Per observation node: does it contain a winning / a losing play?"""
    n = len(table.obs_parent)
    has_win, has_lose = bytearray(n), bytearray(n)
    for i in range(len(table)):
        if table.winning[i]:
            has_win[table.obs_node[i]] = 1
        else:
            has_lose[table.obs_node[i]] = 1
    return has_win, has_lose


def _ground_truth(winning: bool, class_has_losing: bool) -> PlayVerdict:
    if not winning:
        return PlayVerdict.NON_WINNING
    return PlayVerdict.OPAQUE_WINNING if class_has_losing else PlayVerdict.REVEALING_WINNING


def opacity_ground_truth(table: PlayTable, dfa: SecretDFA, play: Play) -> PlayVerdict:
    """Decide the verdict from the definition: a winning play is opaque iff
    some observation-equivalent play is not winning."""
    node = table.find(play)
    target = table.obs_node[node]
    word_of = lambda i: dfa.run(table.arena.label(s) for s in table.play(i).states)  # noqa: E731
    winning = word_of(node) in dfa.accepting
    losing_twin = any(
        table.obs_node[j] == target and word_of(j) not in dfa.accepting for j in range(len(table))
    )
    return _ground_truth(winning, losing_twin)


# -- explicit belief game and naive solving ----------------------------------

def explicit_product(
    arena: GameArena, dfa: SecretDFA, obs: ObservationMap, budget: int = 200_000
) -> dict[ProductState, dict[str, ProductState]]:
    """Reachable belief game as a plain adjacency dict, built with sets."""
    s0 = arena.initial
    q0 = dfa.step(dfa.initial, arena.label(s0))
    v0 = (s0, q0, frozenset([(s0, q0)]))
    edges: dict[tuple, dict[str, tuple]] = {}
    todo = [v0]
    while todo:
        v = todo.pop()
        if v in edges:
            continue
        if len(edges) >= budget:
            raise BudgetExceeded(f"explicit product exceeds {budget} vertices")
        s, q, b = v
        out = {}
        for a in arena.actions:
            t = arena.transitions.get((s, a))
            if t is None:
                continue
            seen = obs(s, a, t)
            b2 = set()
            for (sb, qb) in b:
                for ab in arena.actions:
                    tb = arena.transitions.get((sb, ab))
                    if tb is not None and obs(sb, ab, tb) == seen:
                        b2.add((tb, dfa.step(qb, arena.label(tb))))
            w = (t, dfa.step(q, arena.label(t)), frozenset(b2))
            out[a] = w
            todo.append(w)
        edges[v] = out

    def ps(v):
        return ProductState(v[0], v[1], make_belief(v[2]))

    return {ps(v): {a: ps(w) for a, w in out.items()} for v, out in edges.items()}


def _as_explicit(product) -> dict[ProductState, dict[str, ProductState]]:
    if isinstance(product, ProductGame):
        product.build()
        return {
            product.state(v): {a: product.state(w) for a, w in product.successors(v)}
            for v in product.vertices()
        }
    return product


def _naive_win(game, owner_of, target) -> frozenset:
    win = set(target)
    changed = True
    while changed:
        changed = False
        for v, out in game.items():
            if v in win:
                continue
            succ = list(out.values())
            if owner_of(v) == P1:
                ok = any(w in win for w in succ)
            else:
                ok = bool(succ) and all(w in win for w in succ)
            if ok:
                win.add(v)
                changed = True
    return frozenset(win)


def brute_solve(product, arena: GameArena | None = None, dfa: SecretDFA | None = None):
    """``(Win1(F_O), Win1(F))`` by iterating the one-step controllable
    predecessor to a fixed point over the whole vertex set.

    ``product`` is a :class:`ProductGame` or an adjacency dict from
    :func:`explicit_product` (then ``arena`` and ``dfa`` are required).
    """
    if isinstance(product, ProductGame):
        arena, dfa = product.arena, product.dfa
    game = _as_explicit(product)
    acc = dfa.accepting

    def owner_of(v):
        return arena.owner[v.state]

    f_acc = {v for v in game if v.dstate in acc}
    f_opaque = {v for v in f_acc if any(q not in acc for _, q in v.belief)}
    return _naive_win(game, owner_of, f_opaque), _naive_win(game, owner_of, f_acc)


# -- forced revelation check --------------------------------------------------------

def _winning_memoryless_p1(product: ProductGame, start: int, targets, win, budget: int):
    """Yield every memoryless P1 strategy (restricted to the vertices it can
    reach from ``start`` before hitting ``targets``) that surely reaches
    ``targets``."""
    count = 0

    def reachable(choice):
        seen, stack, free = {start}, [start], None
        while stack:
            v = stack.pop()
            if v in targets:
                continue
            if product.owner(v) == P1:
                if v not in choice:
                    if free is None or v < free:
                        free = v
                    continue
                succ = [product.step(v, choice[v])]
            else:
                succ = [w for _, w in product.successors(v)]
            for w in succ:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen, free

    def surely_reaches(choice, seen):
        # no cycle avoiding targets inside the strategy's reachable graph
        colour = {}

        def succ(v):
            if v in targets:
                return []
            if product.owner(v) == P1:
                return [product.step(v, choice[v])]
            return [w for _, w in product.successors(v)]

        for root in seen:
            if root in colour:
                continue
            colour[root] = 1
            stack = [(root, iter(succ(root)))]
            while stack:
                v, it = stack[-1]
                for w in it:
                    c = colour.get(w)
                    if c == 1:
                        return False
                    if c is None:
                        colour[w] = 1
                        stack.append((w, iter(succ(w))))
                        break
                else:
                    colour[v] = 2
                    stack.pop()
        return True

    def rec(choice):
        nonlocal count
        seen, free = reachable(choice)
        if free is None:
            count += 1
            if count > budget:
                raise BudgetExceeded(f"more than {budget} memoryless strategies from {start}")
            if surely_reaches(choice, seen):
                yield dict(choice)
            return
        for a, w in product.successors(free):
            if w in win:
                choice[free] = a
                yield from rec(choice)
                del choice[free]

    yield from rec({})


def revealing_check(
    product: ProductGame, solution: Solution | None = None, budget: int = 100_000
) -> tuple[int, int]:
    """Play every memoryless winning P1 strategy against P2's revealing
    strategy from every win-only-by-revealing vertex.

    Returns ``(plays checked, plays where the first accepting vertex has a
    belief that still contains a non-accepting pair)``.
    """
    solution = solution or solve(product)
    acc_targets = target_F(product)
    win = frozenset(product.index(v) for v in solution.win)
    win_opaque = frozenset(product.index(v) for v in solution.win_opaque)
    p2 = {product.index(v): a for v, a in solution.p2_strategy.items()}
    checked = violations = 0
    for v in sorted(win - win_opaque):
        for choice in _winning_memoryless_p1(product, v, acc_targets, win, budget):
            w = v
            for _ in range(len(product) + 1):
                if w in acc_targets:
                    break
                a = choice[w] if product.owner(w) == P1 else p2.get(w)
                if a is None:  # P2's strategy does not cover this vertex
                    break
                w = product.step(w, a)
            checked += 1
            if w not in acc_targets or product.belief_accepting_counts(w)[1] > 0:
                violations += 1
    return checked, violations


def strategy_check(product: ProductGame, region, strategy, targets) -> int:
    """Count region vertices from which following ``strategy`` against every
    P2 behaviour can avoid ``targets`` forever or leave ``region``."""
    bad = 0
    for v in region:
        if v in targets:
            continue
        if product.owner(v) == P1:
            succ = [product.step(v, strategy[v])]
        else:
            succ = [w for _, w in product.successors(v)]
        if any(w not in region for w in succ):
            bad += 1
    # rank-free acyclicity: repeatedly peel vertices whose moves all hit
    # already-peeled vertices or targets
    done = set(targets)
    pending = [v for v in region if v not in done]
    progress = True
    while progress:
        progress = False
        rest = []
        for v in pending:
            succ = (
                [product.step(v, strategy[v])] if product.owner(v) == P1
                else [w for _, w in product.successors(v)]
            )
            if all(w in done for w in succ):
                done.add(v)
                progress = True
            else:
                rest.append(v)
        pending = rest
    return bad + len(pending)


# -- differential report ------------------------------------------------------

@dataclass
class VerifyReport:
    plays: int = 0
    product_vertices: int = 0
    true_pair_missing: int = 0
    belief_disagreements: int = 0
    verdict_mismatches: int = 0
    lift_mismatches: int = 0
    vertex_set_mismatch: int = 0
    region_mismatches: int = 0
    determinacy_violations: int = 0
    strategy_violations: int = 0
    revealing_plays: int = 0
    revealing_violations: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any((
            self.true_pair_missing, self.belief_disagreements, self.verdict_mismatches,
            self.lift_mismatches, self.vertex_set_mismatch, self.region_mismatches,
            self.determinacy_violations, self.strategy_violations, self.revealing_violations,
        ))

    def merge(self, other: "VerifyReport") -> None:
        for name in self.__dataclass_fields__:
            if name != "notes":
                setattr(self, name, getattr(self, name) + getattr(other, name))
        self.notes += other.notes


def verify_instance(
    arena: GameArena,
    dfa: SecretDFA,
    obs: ObservationMap,
    horizon: int | None = None,
    play_budget: int = DEFAULT_PLAY_BUDGET,
    vertex_budget: int = 200_000,
    lift_sample: int | None = 500,
    check_revealing: bool = True,
) -> VerifyReport:
    """Compare product, solver and classifier against the brute-force oracle.

    ``horizon`` defaults to ``|S|·|Q|``.  Every play's verdict is checked
    through the product; ``lift_sample`` of them (all if ``None``) are also
    lifted from scratch with :func:`classify_play`.  Raises
    :class:`BudgetExceeded` when the instance is too large to enumerate.
    """
    if horizon is None:
        horizon = len(arena.states) * len(dfa.dstates)
    rep = VerifyReport()
    table = enumerate_plays(arena, obs, horizon, dfa=dfa, budget=play_budget)
    product = ProductGame(arena, dfa, obs, budget=vertex_budget).build()
    rep.plays = len(table)
    rep.product_vertices = len(product)

    has_win, has_lose = _class_flags(table)
    vert = array("i", [0]) * len(table)
    vert[0] = product.initial
    obs_belief: dict[int, tuple] = {}
    if lift_sample is None:
        sample_every = 1
    else:
        sample_every = max(1, len(table) // lift_sample) if lift_sample else 0
    for i in range(len(table)):
        if i:
            v = product.step(vert[table.parent[i]], table.action_names[table.action[i]])
            vert[i] = v
        ps = product.state(vert[i])
        s, q = table.state_names[table.state[i]], table.dstate[i]
        if ps.state != s or ps.dstate != q or (s, q) not in ps.belief:
            rep.true_pair_missing += 1
        seen = obs_belief.setdefault(table.obs_node[i], ps.belief)
        if seen != ps.belief:
            rep.belief_disagreements += 1
        truth = _ground_truth(bool(table.winning[i]), bool(has_lose[table.obs_node[i]]))
        if vertex_play_verdict(dfa, ps) != truth:
            rep.verdict_mismatches += 1
        if sample_every and i % sample_every == 0:
            if classify_play(arena, dfa, obs, table.play(i)) != truth:
                rep.lift_mismatches += 1

    explicit = explicit_product(arena, dfa, obs, budget=vertex_budget)
    mine = {
        product.state(v): {a: product.state(w) for a, w in product.successors(v)}
        for v in product.vertices()
    }
    if explicit != mine:
        rep.vertex_set_mismatch = 1
        rep.notes.append(f"explicit product has {len(explicit)} vertices, lazy product {len(mine)}")

    solution = solve(product)
    oracle_opaque, oracle_win = brute_solve(explicit, arena, dfa)
    rep.region_mismatches = len(oracle_opaque ^ solution.win_opaque) + len(oracle_win ^ solution.win)

    every = frozenset(product.vertices())
    for target in (target_F_O(product), target_F(product)):
        w1, strat = attractor(product, P1, target)
        s2, _ = safety(product, P2, every - target)
        rep.determinacy_violations += len(w1 & s2) + len(every - (w1 | s2))
        rep.strategy_violations += strategy_check(product, w1, strat, target)

    if check_revealing:
        rep.revealing_plays, rep.revealing_violations = revealing_check(product, solution)
    return rep
