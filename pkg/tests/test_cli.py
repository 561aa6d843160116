import json
import subprocess
import sys

import pytest

from opacity_games.cli import main

from conftest import ARENA, DFA

GAME = [str(ARENA), str(DFA)]


def variant(tmp_path, drop):
    text = "\n".join(l for l in ARENA.read_text().splitlines() if l.strip() not in drop)
    path = tmp_path / "variant.arena"
    path.write_text(text + "\n")
    return [str(path), str(DFA)]


def test_solve_small_game(tmp_path, capsys):
    out = tmp_path / "sol.json"
    assert main(["solve", *GAME, "-o", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "verdict\topaque-winning" in stdout and "action\ta3" in stdout
    assert json.loads(out.read_text())["format"] == "opacity-solution/1"


def test_solve_exit_codes_for_variants(tmp_path):
    only_a2 = variant(tmp_path, {"trans 0 a1 h1", "trans 0 a3 4"})
    assert main(["solve", *only_a2]) == 20
    only_a1 = variant(tmp_path, {"trans 0 a2 1", "trans 0 a3 4"})
    assert main(["solve", *only_a1]) == 10


def test_solve_malformed(tmp_path, capsys):
    bad = tmp_path / "bad.arena"
    bad.write_text("state a owner=1\nstate a owner=2\n")
    assert main(["solve", str(bad), str(DFA)]) == 1
    assert f"{bad}:2:7:" in capsys.readouterr().err
    assert main(["solve", str(tmp_path / "missing.arena"), str(DFA)]) == 1


def test_solve_budget(capsys):
    assert main(["solve", *GAME, "--budget", "3"]) == 2
    assert "budget" in capsys.readouterr().err


def test_classify(capsys):
    assert main(["classify", *GAME, "--play", "0 a1 h1 b1 2 a1 3"]) == 0
    assert capsys.readouterr().out.strip() == "revealing-winning"
    assert main(["classify", *GAME, "--play", "0 a1 4"]) == 1
    assert main(["classify", *GAME]) == 0
    table = capsys.readouterr().out.splitlines()
    assert len(table) == 11 and "(0,q0,{(0,q0)})\topaque-winning" in table


def test_simulate_seeds(capsys):
    for seed in range(1, 11):
        assert main(["simulate", *GAME, "--seed", str(seed), "--episodes", "1"]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "opaque-winning\t1\t1.0000"


def test_simulate_trace(tmp_path, capsys):
    trace = tmp_path / "trace.txt"
    assert main(["simulate", *GAME, "--p1", "random", "--episodes", "3", "--trace", str(trace)]) == 0
    assert trace.read_text().count("# episode") == 3
    capsys.readouterr()


def test_verify(capsys):
    assert main(["verify", *GAME, "--horizon", "4"]) == 0
    assert "\tok\t" in capsys.readouterr().out
    assert main(["verify", "--random", "5", "--seed", "7"]) == 0
    assert "agree\t5/5" in capsys.readouterr().out
    assert main(["verify", *GAME, "--play-budget", "10"]) == 2
    assert main(["verify", *GAME, "--random", "2"]) == 1
    assert main(["verify"]) == 1


def test_export_dot(tmp_path, capsys):
    assert main(["export-dot", str(ARENA)]) == 0
    assert capsys.readouterr().out.startswith("digraph arena")
    out = tmp_path / "p.dot"
    assert main(["export-dot", *GAME, "--product", "--verdicts", "-o", str(out)]) == 0
    assert "palegreen" in out.read_text()
    assert main(["export-dot", str(ARENA), "--product"]) == 1


def test_grid_gen(tmp_path, capsys):
    assert main(["grid", "gen", "--out", str(tmp_path / "g")]) == 0
    files = sorted(p.name for p in (tmp_path / "g").iterdir())
    assert files == ["grid.arena", "grid.dfa", "grid.json"]
    capsys.readouterr()
    g = tmp_path / "g"
    assert main(["solve", str(g / "grid.arena"), str(g / "grid.dfa")]) == 0
    assert "action\tE1" in capsys.readouterr().out


def test_grid_bad_config(tmp_path, capsys):
    assert main(["grid", "gen", "--rows", "1", "--cols", "1", "--p1", "0,0", "--p2", "0,0",
                 "--g0", "0,0", "--g1", "0,0", "--g2", "0,0", "--out", str(tmp_path)]) == 1
    assert "1x1" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["grid", "gen", "--p1", "zero", "--out", str(tmp_path)])


def test_grid_replay(capsys):
    assert main(["grid", "replay"]) == 0
    assert "final belief\t{(1_1_0_0_2,0),(1_3_0_0_2,2)}" in capsys.readouterr().out
    assert main(["grid", "replay", "--g0", "0,3"]) == 3


def test_grid_sweep_small(tmp_path, capsys):
    out = tmp_path / "v.csv"
    assert main(["grid", "sweep", "--rows", "3", "--cols", "3", "--g0", "2,2", "--g1", "0,2",
                 "--g2", "2,0", "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "row,col,verdict" and len(lines) == 10


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "opacity_games", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "grid" in proc.stdout
