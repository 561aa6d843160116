from pathlib import Path

import pytest

from opacity_games.formats import read_arena, read_dfa
from opacity_games.product import ProductGame
from opacity_games.solver import solve

DATA = Path(__file__).resolve().parent.parent / "data"
ARENA = DATA / "small_game.arena"
DFA = DATA / "small_game.dfa"


@pytest.fixture(scope="session")
def small_game():
    arena, obs = read_arena(ARENA)
    return arena, read_dfa(DFA), obs


@pytest.fixture(scope="session")
def small_product(small_game):
    arena, dfa, obs = small_game
    return ProductGame(arena, dfa, obs).build()


@pytest.fixture(scope="session")
def small_solution(small_product):
    return solve(small_product)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
