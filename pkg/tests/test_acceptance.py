"""End-to-end acceptance checks.

Each test prints one ``PASS``/``FAIL`` line; the lines are repeated in the
terminal summary.
"""
import time
from contextlib import contextmanager

import pytest

from opacity_games import gridworld as gw
from opacity_games.classifier import classify_play, classify_state
from opacity_games.model import P1, P2, Play, PlayVerdict, StateVerdict
from opacity_games.oracle import VerifyReport, random_instance, verify_instance
from opacity_games.product import ProductGame, ProductState, format_belief, lift_play
from opacity_games.solver import attractor, safety, solve, target_F, target_F_O

SEEDS = range(100)
RESULTS: dict[int, str] = {}


@contextmanager
def criterion(number, title):
    start = time.perf_counter()
    try:
        yield
    except BaseException as err:
        line = f"FAIL criterion {number}: {title} ({type(err).__name__}: {str(err).splitlines()[0] if str(err) else ''})"
        RESULTS[number] = line
        print(line)
        raise
    line = f"PASS criterion {number}: {title} [{time.perf_counter() - start:.2f}s]"
    RESULTS[number] = line
    print(line)


@pytest.fixture(scope="module")
def differential():
    """Run the full oracle comparison on the 100 fixed-seed instances once."""
    start = time.perf_counter()
    per_seed = {}
    for seed in SEEDS:
        arena, dfa, obs = random_instance(seed)
        assert len(arena.states) <= 7 and len(dfa.dstates) <= 3
        assert sum(p == P1 for p in arena.actions.values()) <= 2
        assert sum(p == P2 for p in arena.actions.values()) <= 2
        per_seed[seed] = verify_instance(arena, dfa, obs, lift_sample=None)
    total = VerifyReport()
    for rep in per_seed.values():
        total.merge(rep)
    return per_seed, total, time.perf_counter() - start


def test_criterion_1_small_game_end_to_end(small_game):
    with criterion(1, "Seven-state game solved: v0 opaque-winning via a3, a1-successor revealing, a2-successor losing"):
        start = time.perf_counter()
        arena, dfa, obs = small_game
        product = ProductGame(arena, dfa, obs).build()
        s = solve(product)
        elapsed = time.perf_counter() - start
        assert s.initial == ProductState("0", "q0", (("0", "q0"),))
        assert classify_state(s, s.initial) == StateVerdict.OPAQUE_WINNABLE
        assert s.p1_opaque_strategy[s.initial] == "a3"
        v0 = product.initial
        after_a1 = product.state(product.step(v0, "a1"))
        after_a2 = product.state(product.step(v0, "a2"))
        assert after_a1 == ProductState("h1", "q1", (("h1", "q1"),))
        assert after_a2 == ProductState("1", "q0", (("1", "q0"), ("4", "q0")))
        assert classify_state(s, after_a1) == StateVerdict.WIN_ONLY_BY_REVEALING
        assert classify_state(s, after_a2) == StateVerdict.NOT_SURELY_WINNABLE
        assert elapsed < 1.0, f"took {elapsed:.3f}s"


def test_criterion_2_play_verdicts(small_game):
    with criterion(2, "Seven-state game play verdicts"):
        expected = {
            "0 a3 4 b1 h2 a1 3": PlayVerdict.OPAQUE_WINNING,
            "0 a1 h1 b1 2 a1 3": PlayVerdict.REVEALING_WINNING,
            "0 a2 1 b2 2 a1 3": PlayVerdict.NON_WINNING,
        }
        got = {p: classify_play(*small_game, Play.parse(p)) for p in expected}
        assert got == expected


def test_criterion_3_belief_sequence(small_game):
    with criterion(3, "belief sequence along 0 a3 4 b1 h2 a1 3"):
        lifted = lift_play(*small_game, Play.parse("0 a3 4 b1 h2 a1 3"))
        assert [format_belief(v.belief) for v in lifted] == [
            "{(0,q0)}", "{(1,q0),(4,q0)}", "{(2,q0),(h2,q1)}", "{(3,q0),(3,q1)}",
        ]


def test_criterion_4_belief_lemmas(differential):
    per_seed, total, elapsed = differential
    with criterion(4, f"true pair in belief and equal beliefs for equivalent plays on 100 instances ({total.plays} plays, oracle run {elapsed:.1f}s)"):
        assert len(per_seed) == 100
        assert total.true_pair_missing == 0
        assert total.belief_disagreements == 0
        assert elapsed < 300, f"took {elapsed:.1f}s"


def test_criterion_5_verdicts_and_regions_match_oracle(differential):
    per_seed, total, _ = differential
    with criterion(5, "play verdicts and winning regions equal brute force on 100 instances"):
        assert total.verdict_mismatches == 0
        assert total.lift_mismatches == 0
        assert total.vertex_set_mismatch == 0
        assert total.region_mismatches == 0
        assert total.strategy_violations == 0


def test_criterion_6_determinacy(differential, small_game):
    per_seed, total, _ = differential
    with criterion(6, "attractor and opponent safety region partition the product"):
        assert total.determinacy_violations == 0
        grid = gw.generate(gw.GridConfig())
        for arena, obs, dfa in [(small_game[0], small_game[2], small_game[1]), grid]:
            p = ProductGame(arena, dfa, obs).build()
            every = frozenset(p.vertices())
            for target in (target_F_O(p), target_F(p)):
                win = attractor(p, P1, target)[0]
                safe = safety(p, P2, every - target)[0]
                assert win | safe == every and not win & safe


def test_criterion_7_revealing_is_forced(differential, small_game):
    per_seed, total, _ = differential
    with criterion(7, f"every winning memoryless strategy vs revealing P2 reveals the secret ({total.revealing_plays} plays)"):
        example = verify_instance(*small_game)
        assert example.revealing_plays > 0 and example.revealing_violations == 0
        assert total.revealing_plays > 0
        assert total.revealing_violations == 0


def test_criterion_8_grid_world():
    with criterion(8, "grid world: 25 starts solved, (0,1) opaque-winning, winning path replayed"):
        cfg = gw.GridConfig()
        timings = []
        verdicts = {}
        for r in range(cfg.rows):
            for c in range(cfg.cols):
                start = time.perf_counter()
                verdicts[r, c] = gw.solve_config(gw.GridConfig(p1_init=(r, c)))
                timings.append(time.perf_counter() - start)
        assert len(verdicts) == 25
        assert max(timings) < 60, f"slowest instance {max(timings):.1f}s"
        assert verdicts[0, 1] == StateVerdict.OPAQUE_WINNABLE
        report = gw.replay_winning_path(cfg)
        assert report.matched, report.divergence
        assert len(report.rows) == 14
        assert report.final_dstate == "0"
        assert any(q == "2" for _, q in report.final_belief)
        assert report.verdict == PlayVerdict.OPAQUE_WINNING
