"""Strategy synthesis for reaching a secret goal in a turn-based game while
keeping an observer unsure whether the goal was reached."""
from .classifier import classify_play, classify_state, state_verdicts
from .formats import ParseError, parse_arena, parse_dfa, read_arena, read_dfa
from .model import (
    P1, P2, GameArena, ObservationMap, Play, PlayVerdict, SecretDFA, StateVerdict,
)
from .product import BudgetExceeded, ProductGame, ProductState, build_product, lift_play
from .solver import Solution, solve

__all__ = [
    "P1", "P2", "GameArena", "ObservationMap", "Play", "PlayVerdict", "SecretDFA",
    "StateVerdict", "ParseError", "parse_arena", "parse_dfa", "read_arena", "read_dfa",
    "BudgetExceeded", "ProductGame", "ProductState", "build_product", "lift_play",
    "Solution", "solve", "classify_play", "classify_state", "state_verdicts",
]
