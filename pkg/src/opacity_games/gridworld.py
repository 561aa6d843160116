"""Aerial robot (P1) versus ground robot (P2) on a rectangular grid.

Cells are ``(row, col)`` with row 0 at the bottom; ``N`` increases the row
and ``E`` increases the column.  A state ``(p1r, p1c, p2r, p2c, turn)`` is
written ``"p1r_p1c_p2r_p2c_turn"``; ``turn`` 1 means P1 moves next.

P1 must first visit G0 and later G1 or G2.  P2 cannot enter water cells.
Moving onto the other robot's cell ends the game in the absorbing
``captured`` state.  The observer sees P1's row (row sensors), P1's exact
cell when it lies in the plus-shaped sensor carried by P2, and, by default,
P2's own position.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable

from . import guards as g
from .classifier import classify_play, classify_state
from .model import (
    P1, P2, GameArena, ObservationMap, Play, PlayVerdict, SecretDFA, StateVerdict,
    validate_arena, validate_dfa,
)
from .product import ProductGame, lift_play
from .solver import solve

Cell = tuple[int, int]

CAPTURED = "captured"
MOVES = {"N": (1, 0), "S": (-1, 0), "E": (0, 1), "W": (0, -1)}
GOAL_ATOMS = ("G0", "G1", "G2")

# DFA for "eventually G0, and afterwards eventually G1 or G2"
DSTATE_START, DSTATE_AFTER_G0, DSTATE_DONE = "1", "2", "0"

# Winning path from (0,1) with P2 at (0,0): alternating P1/P2 moves and the
# expected (state, dstate) after each move.
WINNING_PATH_ACTIONS = ("E", "N", "E", "S", "E", "E", "W", "W", "N", "E", "W", "W", "W")
WINNING_PATH = (
    ((0, 1, 0, 0, 1), "1"),
    ((0, 2, 0, 0, 2), "1"),
    ((0, 2, 1, 0, 1), "1"),
    ((0, 3, 1, 0, 2), "1"),
    ((0, 3, 0, 0, 1), "1"),
    ((0, 4, 0, 0, 2), "2"),
    ((0, 4, 0, 1, 1), "2"),
    ((0, 3, 0, 1, 2), "2"),
    ((0, 3, 0, 0, 1), "2"),
    ((1, 3, 0, 0, 2), "2"),
    ((1, 3, 0, 1, 1), "2"),
    ((1, 2, 0, 1, 2), "2"),
    ((1, 2, 0, 0, 1), "2"),
    ((1, 1, 0, 0, 2), "0"),
)


class ConfigError(ValueError):
    pass


def center_block(rows: int, cols: int, size: int = 3) -> frozenset[Cell]:
    """The ``size`` x ``size`` block in the middle of the grid (clipped)."""
    r0, c0 = (rows - size) // 2, (cols - size) // 2
    return frozenset(
        (r, c) for r in range(max(r0, 0), min(r0 + size, rows))
        for c in range(max(c0, 0), min(c0 + size, cols))
    )


@dataclass(frozen=True)
class GridConfig:
    rows: int = 5
    cols: int = 5
    p1_init: Cell = (0, 1)
    p2_init: Cell = (0, 0)
    g0: Cell = (0, 4)
    g1: Cell = (1, 1)
    g2: Cell = (3, 3)
    water: frozenset[Cell] | None = None  # None: center 3x3 block on grids >= 5x5
    row_sensors: bool = True
    cross_arm: int = 2
    observer_sees_p2: bool = True
    capture_ends_game: bool = True

    @property
    def water_cells(self) -> frozenset[Cell]:
        if self.water is None:
            if self.rows < 5 or self.cols < 5:
                return frozenset()
            return center_block(self.rows, self.cols)
        return frozenset(self.water)

    @property
    def goals(self) -> dict[str, Cell]:
        return {"G0": self.g0, "G1": self.g1, "G2": self.g2}

    def inside(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.rows and 0 <= cell[1] < self.cols

    def problems(self) -> list[str]:
        out = []
        if self.rows < 1 or self.cols < 1:
            out.append("grid needs at least one row and one column")
        if self.rows * self.cols < 2:
            out.append("a 1x1 grid leaves no room for two robots")
        for name, cell in [("p1_init", self.p1_init), ("p2_init", self.p2_init), *self.goals.items()]:
            if not self.inside(cell):
                out.append(f"{name} {cell} is outside the {self.rows}x{self.cols} grid")
        if self.p2_init in self.water_cells:
            out.append(f"p2_init {self.p2_init} is a water cell")
        if self.cross_arm < 0:
            out.append("cross_arm must be >= 0")
        return out

    def mirrored(self) -> "GridConfig":
        """Left-right reflection of every cell."""
        flip = lambda cell: (cell[0], self.cols - 1 - cell[1])  # noqa: E731
        return replace(
            self,
            p1_init=flip(self.p1_init), p2_init=flip(self.p2_init),
            g0=flip(self.g0), g1=flip(self.g1), g2=flip(self.g2),
            water=frozenset(flip(c) for c in self.water_cells),
        )


def state_id(p1: Cell, p2: Cell, turn: int) -> str:
    return f"{p1[0]}_{p1[1]}_{p2[0]}_{p2[1]}_{turn}"


def parse_state_id(sid: str) -> tuple[Cell, Cell, int]:
    r1, c1, r2, c2, turn = map(int, sid.split("_"))
    return (r1, c1), (r2, c2), turn


def action_id(move: str, player: int) -> str:
    return f"{move}{player}"


def cross_cells(cfg: GridConfig, center: Cell) -> frozenset[Cell]:
    r, c = center
    cells = {center}
    for d in range(1, cfg.cross_arm + 1):
        cells |= {(r + d, c), (r - d, c), (r, c + d), (r, c - d)}
    return frozenset(x for x in cells if cfg.inside(x))


def observation_symbol(cfg: GridConfig, p1: Cell, p2: Cell) -> str:
    """What the observer learns on entering a state with these positions."""
    parts = []
    if p1 in cross_cells(cfg, p2):
        parts.append(f"p1@{p1[0]},{p1[1]}")
    elif cfg.row_sensors:
        parts.append(f"row{p1[0]}")
    if cfg.observer_sees_p2:
        parts.append(f"p2@{p2[0]},{p2[1]}")
    return "|".join(parts) or "-"


def grid_dfa() -> SecretDFA:
    G0, G1, G2 = (g.Atom(a) for a in GOAL_ATOMS)
    other = g.Or(G1, G2)
    guards = {
        (DSTATE_START, DSTATE_DONE): g.And(G0, other),
        (DSTATE_START, DSTATE_AFTER_G0): g.And(G0, g.And(g.Not(G1), g.Not(G2))),
        (DSTATE_START, DSTATE_START): g.Not(G0),
        (DSTATE_AFTER_G0, DSTATE_DONE): other,
        (DSTATE_AFTER_G0, DSTATE_AFTER_G0): g.And(g.Not(G1), g.Not(G2)),
        (DSTATE_DONE, DSTATE_DONE): g.TRUE,
    }
    return SecretDFA(
        dstates=(DSTATE_START, DSTATE_AFTER_G0, DSTATE_DONE),
        guards=guards,
        initial=DSTATE_START,
        accepting=frozenset([DSTATE_DONE]),
        atoms=frozenset(GOAL_ATOMS),
    )


def _successors(cfg: GridConfig, p1: Cell, p2: Cell, turn: int):
    """``(move, next state id)`` for the robot whose turn it is."""
    water = cfg.water_cells
    me, other = (p1, p2) if turn == P1 else (p2, p1)
    out = []
    for move, (dr, dc) in MOVES.items():
        cell = (me[0] + dr, me[1] + dc)
        if not cfg.inside(cell) or (turn == P2 and cell in water):
            continue
        if cell == other and cfg.capture_ends_game:
            out.append((move, CAPTURED))
        elif turn == P1:
            out.append((move, state_id(cell, p2, P2)))
        else:
            out.append((move, state_id(p1, cell, P1)))
    if not out:
        nxt = P2 if turn == P1 else P1
        out.append(("stay", state_id(p1, p2, nxt)))
    return out


def generate(cfg: GridConfig) -> tuple[GameArena, ObservationMap, SecretDFA]:
    """Arena (states reachable from the initial positions), observation map
    and goal DFA for ``cfg``."""
    problems = cfg.problems()
    if problems:
        raise ConfigError("; ".join(problems))
    start = CAPTURED if cfg.p1_init == cfg.p2_init and cfg.capture_ends_game else state_id(
        cfg.p1_init, cfg.p2_init, P1
    )
    owner: dict[str, int] = {}
    transitions: dict[tuple[str, str], str] = {}
    labels: dict[str, frozenset[str]] = {}
    classes: dict[str, str] = {}
    order = []
    queue = deque([start])
    owner[start] = P1
    while queue:
        sid = queue.popleft()
        order.append(sid)
        if sid == CAPTURED:
            transitions[sid, action_id("stay", P1)] = sid
            labels[sid] = frozenset()
            classes[sid] = CAPTURED
            continue
        p1, p2, turn = parse_state_id(sid)
        labels[sid] = frozenset(name for name, cell in cfg.goals.items() if cell == p1)
        classes[sid] = observation_symbol(cfg, p1, p2)
        for move, nxt in _successors(cfg, p1, p2, turn):
            transitions[sid, action_id(move, turn)] = nxt
            if nxt not in owner:
                owner[nxt] = P1 if nxt == CAPTURED else parse_state_id(nxt)[2]
                queue.append(nxt)
    used = {a for _, a in transitions}
    actions = {action_id(m, p): p for p in (P1, P2) for m in MOVES}
    actions.update({a: int(a[-1]) for a in used})
    arena = GameArena(
        states=tuple(order),
        owner=owner,
        actions=actions,
        transitions=transitions,
        initial=start,
        atoms=frozenset(GOAL_ATOMS),
        labels=labels,
    )
    dfa = grid_dfa()
    bad = validate_arena(arena) + validate_dfa(dfa)
    if bad:  # pragma: no cover - generator bug
        raise AssertionError("; ".join(bad))
    return arena, ObservationMap(classes=classes), dfa


# -- replay of the known winning path -----------------------------------------

@dataclass
class ReplayReport:
    matched: bool
    steps: int
    divergence: str | None = None
    final_state: str | None = None
    final_dstate: str | None = None
    final_belief: tuple = ()
    verdict: PlayVerdict | None = None
    rows: list[tuple[str, str, str]] = field(default_factory=list)

    def __str__(self) -> str:
        lines = [f"{i}\t{a}\t{s}\t{q}" for i, (a, s, q) in enumerate(self.rows)]
        status = "match" if self.matched else f"diverged: {self.divergence}"
        lines.append(f"{status}; verdict {self.verdict.value if self.verdict else '-'}")
        return "\n".join(lines) + "\n"


def replay_winning_path(
    cfg: GridConfig | None = None,
    actions: Iterable[str] = WINNING_PATH_ACTIONS,
    expected=WINNING_PATH,
) -> ReplayReport:
    """Replay the alternating move sequence and compare every
    ``(state, dstate)`` with ``expected``.

    A final belief is only reported when the whole path matched.
    """
    cfg = cfg or GridConfig()
    arena, obs, dfa = generate(cfg)
    states, acts = [arena.initial], []
    for i, move in enumerate(actions):
        s = states[-1]
        turn = P1 if i % 2 == 0 else P2
        a = action_id(move, turn)
        if (s, a) not in arena.transitions:
            return ReplayReport(False, i, f"step {i + 1}: move {move} is not available at {s}")
        acts.append(a)
        states.append(arena.transitions[s, a])
    play = Play(tuple(states), tuple(acts))
    lifted = lift_play(arena, dfa, obs, play)
    rows = [("-", lifted[0].state, lifted[0].dstate)] + [
        (a, v.state, v.dstate) for a, v in zip(acts, lifted[1:])
    ]
    report = ReplayReport(True, len(acts), rows=rows)
    for i, ((state, q), v) in enumerate(zip(expected, lifted)):
        want = state_id(state[:2], state[2:4], state[4])
        if (v.state, v.dstate) != (want, q):
            report.matched = False
            report.divergence = f"step {i}: expected ({want}, {q}), got ({v.state}, {v.dstate})"
            return report
    if len(lifted) != len(expected):
        report.matched = False
        report.divergence = f"path has {len(lifted)} states, expected {len(expected)}"
        return report
    last = lifted[-1]
    report.final_state, report.final_dstate, report.final_belief = last.state, last.dstate, last.belief
    report.verdict = classify_play(arena, dfa, obs, play)
    return report


# -- sweep over P1's initial cell ---------------------------------------------

def solve_config(cfg: GridConfig, budget: int | None = None) -> StateVerdict:
    arena, obs, dfa = generate(cfg)
    solution = solve(ProductGame(arena, dfa, obs, budget=budget).build())
    return classify_state(solution, solution.initial)


def _solve_cell(args):
    cfg, budget = args
    return solve_config(cfg, budget)


def sweep_initials(
    cfg: GridConfig | None = None, jobs: int = 1, budget: int | None = None
) -> dict[Cell, StateVerdict]:
    """Verdict of the initial product state for every P1 start cell."""
    cfg = cfg or GridConfig()
    cells = [(r, c) for r in range(cfg.rows) for c in range(cfg.cols)]
    work = [(replace(cfg, p1_init=cell), budget) for cell in cells]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            verdicts = list(pool.map(_solve_cell, work))
    else:
        verdicts = [_solve_cell(w) for w in work]
    return dict(zip(cells, verdicts))


def verdict_csv(verdicts: dict[Cell, StateVerdict]) -> str:
    lines = ["row,col,verdict"]
    lines += [f"{r},{c},{v.value}" for (r, c), v in sorted(verdicts.items())]
    return "\n".join(lines) + "\n"


def verdict_grid(verdicts: dict[Cell, StateVerdict], rows: int, cols: int) -> str:
    """Text map, top row first: ``O`` opaque-winning, ``R`` win only by
    revealing, ``X`` not surely winnable."""
    mark = {
        StateVerdict.OPAQUE_WINNABLE: "O",
        StateVerdict.WIN_ONLY_BY_REVEALING: "R",
        StateVerdict.NOT_SURELY_WINNABLE: "X",
    }
    return "\n".join(
        " ".join(mark[verdicts[r, c]] for c in range(cols)) for r in reversed(range(rows))
    ) + "\n"
