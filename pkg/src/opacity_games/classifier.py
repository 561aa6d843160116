"""Verdicts for product vertices and for arena plays."""
from __future__ import annotations

from .model import GameArena, ObservationMap, Play, PlayVerdict, SecretDFA, StateVerdict
from .product import ProductState, lift_play
from .solver import Solution


class UnknownVertexError(KeyError):
    pass


def classify_state(solution: Solution, v: ProductState) -> StateVerdict:
    if v not in solution.owners:
        raise UnknownVertexError(f"{v} is not a vertex of the solved product")
    if v in solution.win_opaque:
        return StateVerdict.OPAQUE_WINNABLE
    if v in solution.win:
        return StateVerdict.WIN_ONLY_BY_REVEALING
    return StateVerdict.NOT_SURELY_WINNABLE


def state_verdicts(solution: Solution) -> dict[ProductState, StateVerdict]:
    return {v: classify_state(solution, v) for v in sorted(solution.owners)}


def vertex_play_verdict(dfa: SecretDFA, v: ProductState) -> PlayVerdict:
    """Verdict of a play that ends in product vertex ``v``.

    The true DFA state must be accepting; the play is opaque iff the observer
    still considers a non-accepting pair possible.
    """
    if v.dstate not in dfa.accepting:
        return PlayVerdict.NON_WINNING
    if any(q not in dfa.accepting for _, q in v.belief):
        return PlayVerdict.OPAQUE_WINNING
    return PlayVerdict.REVEALING_WINNING


def classify_play(arena: GameArena, dfa: SecretDFA, obs: ObservationMap, play: Play) -> PlayVerdict:
    return vertex_play_verdict(dfa, lift_play(arena, dfa, obs, play)[-1])


def p2_revealing_strategy(solution: Solution) -> dict[ProductState, str]:
    """P2's memoryless strategy that keeps every play out of the opaque
    winning region; defined on all P2 vertices outside that region."""
    return dict(solution.p2_strategy)
