import pytest
from hypothesis import given, settings, strategies as st

from opacity_games.formats import (
    ParseError, check_compatible, format_arena, format_dfa, parse_arena, parse_dfa,
)
from opacity_games.model import P1, P2, validate_arena, validate_dfa
from opacity_games.oracle import random_instance

from conftest import ARENA, DFA

SMALL = """\
atoms p
state a owner=1 label=-
state b owner=2 label=p
init a
action x player=1
action y player=2
trans a x b
trans b y a
obsclass O a b
"""


def test_small_game_arena_contents(small_game):
    arena, dfa, obs = small_game
    assert len(arena.states) == 7
    assert len(arena.transitions) == 12
    assert arena.owner["4"] == P2 and arena.owner["h2"] == P1
    assert arena.label("h1") == {"h1"}
    assert obs("0", "a3", "4") == "O_14"
    assert obs.classes["h1"] == obs.classes["h2"] == obs.classes["2"]
    assert dfa.accepting == {"q1"} and dfa.initial == "q0"


def test_small_game_roundtrip(small_game):
    arena, dfa, obs = small_game
    arena2, obs2 = parse_arena(format_arena(arena, obs))
    assert arena2 == arena and obs2 == obs
    assert parse_dfa(format_dfa(dfa)) == dfa
    assert format_arena(arena2, obs2) == format_arena(arena, obs)


def test_example_files_parse_without_problems(small_game):
    arena, dfa, _ = small_game
    assert check_compatible(arena, dfa) == []
    assert ARENA.read_text().startswith("#")
    assert DFA.exists()


def error_for(text, **kw):
    with pytest.raises(ParseError) as err:
        parse_arena(text, file="t.arena", **kw)
    return err.value


@pytest.mark.parametrize("edit,fragment,line", [
    (("trans b y a", "trans b y zz"), "undeclared state 'zz'", 8),
    (("trans b y a", "trans b x a"), "ownership mismatch", 8),
    (("init a", "init a\ninit b"), "init given twice", 5),
    (("init a\n", ""), "missing init", None),
    (("state b owner=2", "state a owner=2"), "declared twice", 3),
    (("obsclass O a b", "obsclass O a b\nobs a y b Z"), "non-existent transition", 10),
    (("obsclass O a b", "obsclass O a"), "no observation class", 3),
    (("obsclass O a b", "obsclass O a b\nobsclass P b"), "already in observation class", 10),
    (("atoms p", "atoms p\nfrobnicate"), "unknown keyword", 2),
    (("label=p", "label=r"), "undeclared atom 'r'", 3),
    (("action y player=2", "action y player=3"), "player must be 1 or 2", 6),
    (("trans b y a", ""), "state without enabled action: 'b'", 3),
])
def test_arena_errors_have_spans(edit, fragment, line):
    old, new = edit
    err = error_for(SMALL.replace(old, new))
    assert fragment in err.reason
    assert err.span.file == "t.arena"
    if line is not None:
        assert err.span.line == line
    assert str(err).startswith("t.arena:")


def test_error_column_points_at_token():
    err = error_for(SMALL.replace("trans b y a", "trans b y zz"))
    assert (err.span.line, err.span.column) == (8, 11)


def test_unterminated_quote():
    err = error_for('state "a owner=1\n')
    assert "unterminated" in err.reason


def test_comments_are_ignored():
    text = "# header\n" + SMALL.replace("state a owner=1 label=-", "state a owner=1 label=-  # the start")
    arena, _ = parse_arena(text)
    assert arena.states == ("a", "b")


def test_quoted_identifier_rejected():
    err = error_for(SMALL.replace("state a owner=1", 'state "a" owner=1'))
    assert "identifier" in err.reason and err.span.line == 2


def test_complete_sinks_adds_self_loop():
    text = SMALL.replace("trans b y a", "")
    arena, _ = parse_arena(text, complete_sinks=True)
    assert arena.transitions["b", "y"] == "b"
    assert validate_arena(arena) == []
    text = text.replace("action y player=2\n", "")
    arena, _ = parse_arena(text, complete_sinks=True)
    assert arena.transitions["b", "stay2"] == "b"
    assert arena.actions["stay2"] == P2


DFA_TEXT = """\
atoms p
dstate q0
dstate q1 accepting
init q0
edge q0 "p" q1
edge q0 "!p" q0
edge q1 "true" q1
"""


def test_dfa_parse():
    dfa = parse_dfa(DFA_TEXT)
    assert dfa.dstates == ("q0", "q1") and dfa.accepting == {"q1"}
    assert dfa.run([set(), {"p"}]) == "q1"


@pytest.mark.parametrize("edit,fragment", [
    (('edge q0 "!p" q0\n', ""), "incomplete"),
    (('"!p"', '"true"'), "nondeterministic"),
    (('edge q1 "true" q1', 'edge q1 "true" q0'), "not absorbing"),
    (('"p"', '"p &"'), "guard syntax error"),
    (('"p"', "p"), "quoted"),
    (("init q0", "init q9"), "undeclared dstate"),
    (('edge q0 "p" q1', 'edge q0 "p" q7'), "undeclared dstate"),
])
def test_dfa_errors(edit, fragment):
    with pytest.raises(ParseError) as err:
        parse_dfa(DFA_TEXT.replace(*edit), file="t.dfa")
    assert fragment in err.value.reason
    assert err.value.span.file == "t.dfa"


def test_duplicate_edges_are_merged():
    text = DFA_TEXT.replace('edge q0 "p" q1', 'edge q0 "p & r" q1\nedge q0 "p & !r" q1')
    text = text.replace('"!p"', '"!p"').replace("atoms p", "atoms p r")
    dfa = parse_dfa(text)
    assert validate_dfa(dfa) == []
    assert dfa.step("q0", {"p"}) == "q1"


def test_guard_error_column_is_inside_the_line():
    with pytest.raises(ParseError) as err:
        parse_dfa(DFA_TEXT.replace('"p"', '"p &"'))
    assert err.value.span.line == 5
    assert err.value.span.column > len('edge q0 "')


def test_incompatible_atoms():
    arena, _ = parse_arena(SMALL)
    dfa = parse_dfa(DFA_TEXT.replace("atoms p", "atoms p z").replace('"p"', '"p | z"').replace('"!p"', '"!p & !z"'))
    assert check_compatible(arena, dfa)


def token_soup(pieces):
    return st.lists(st.sampled_from(pieces), max_size=25).map("".join)


@given(token_soup(list('abc xy=12"#\n') + ["state ", "trans ", "init ", "obs ", "owner=", "label="]))
def test_arena_parser_is_total(text):
    try:
        parse_arena(text)
    except ParseError as err:
        assert err.span.line >= 1 and err.span.column >= 1


@given(token_soup(list('pq"&|!() \n') + ["dstate ", "edge ", "init ", "q0 ", "accepting"]))
def test_dfa_parser_is_total(text):
    try:
        parse_dfa(text)
    except ParseError as err:
        assert err.span.line >= 1 and err.span.column >= 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_random_instances_roundtrip(seed):
    arena, dfa, obs = random_instance(seed)
    arena2, obs2 = parse_arena(format_arena(arena, obs))
    assert arena2 == arena
    assert all(obs2(s, a, t) == obs(s, a, t) for (s, a), t in arena.transitions.items())
    dfa2 = parse_dfa(format_dfa(dfa))
    assert dfa2.dstates == dfa.dstates and dfa2.accepting == dfa.accepting
    for q in dfa.dstates:
        for letter in [set(), {"p"}, {"r"}, {"p", "r"}]:
            assert dfa2.step(q, letter) == dfa.step(q, letter)
