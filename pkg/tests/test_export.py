import json
import re

import pytest

from opacity_games.export import (
    export_dot, find_vertex, parse_solution, serialize_solution, solution_to_dict,
)


def dot_counts(text):
    nodes = [l for l in text.splitlines() if re.match(r'\s+\S+ \[', l) and "->" not in l]
    edges = [l for l in text.splitlines() if "->" in l]
    return len(nodes), len(edges)


def test_arena_dot(small_game):
    text = export_dot(small_game[0])
    assert text.startswith("digraph arena {")
    assert dot_counts(text) == (7, 10)
    assert '"4" [shape=box' in text and '"0" [shape=ellipse, style=bold' in text
    assert '"3" [shape=ellipse, peripheries=2' in text
    assert '"4" -> "h2" [label="b1, b2"];' in text


def test_product_dot(small_product, small_solution):
    text = export_dot(small_product, small_solution)
    pairs = {(v, w) for v in small_product.vertices() for _, w in small_product.successors(v)}
    assert dot_counts(text) == (11, len(pairs))
    assert "(0,q0,{(0,q0)})" in text and "palegreen" in text and "lightpink" in text
    with pytest.raises(TypeError):
        export_dot("not a game")


def test_solution_roundtrip(small_solution):
    text = serialize_solution(small_solution)
    doc = json.loads(text)
    assert doc["format"] == "opacity-solution/1"
    assert len(doc["vertices"]) == 11
    assert parse_solution(text) == small_solution
    assert serialize_solution(parse_solution(text)) == text


def test_solution_verdict_mismatch_rejected(small_solution):
    doc = solution_to_dict(small_solution)
    doc["verdicts"][0]["verdict"] = "not-surely-winnable" if doc["verdicts"][0]["verdict"] != "not-surely-winnable" else "opaque-winning"
    with pytest.raises(ValueError):
        parse_solution(json.dumps(doc))
    with pytest.raises(ValueError):
        parse_solution(json.dumps({"format": "other"}))


def test_find_vertex(small_solution):
    found = find_vertex(small_solution, "h2")
    assert len(found) == 2
    assert find_vertex(small_solution, "0", "q0") == [small_solution.initial]
