import itertools
import re

import pytest
from hypothesis import given, strategies as st

from opacity_games import guards as g
from opacity_games.model import all_letters

ATOMS = ["p", "q", "r", "s"]


def python_eval(text, letter):
    """Independent evaluator: rewrite the guard as a Python expression."""
    expr = re.sub(r"[A-Za-z_][A-Za-z0-9_.]*", lambda m: {
        "true": "True", "false": "False",
    }.get(m.group(), repr(m.group() in letter)), text)
    expr = expr.replace("!", " not ").replace("&", " and ").replace("|", " or ")
    return eval(expr)


guard_trees = st.recursive(
    st.sampled_from([g.TRUE, g.FALSE] + [g.Atom(a) for a in ATOMS]),
    lambda kids: st.one_of(
        st.builds(g.Not, kids),
        st.builds(g.And, kids, kids),
        st.builds(g.Or, kids, kids),
    ),
    max_leaves=12,
)


def test_precedence_not_and_or():
    assert g.parse_guard("!a & b | c") == g.Or(g.And(g.Not(g.Atom("a")), g.Atom("b")), g.Atom("c"))
    assert g.parse_guard("a | b & c") == g.Or(g.Atom("a"), g.And(g.Atom("b"), g.Atom("c")))


def test_left_associative():
    assert g.parse_guard("a & b & c") == g.And(g.And(g.Atom("a"), g.Atom("b")), g.Atom("c"))


def test_constants_and_parentheses():
    assert g.parse_guard("true") == g.TRUE
    assert g.parse_guard("(false)") == g.FALSE
    assert g.parse_guard("!(a | b)") == g.Not(g.Or(g.Atom("a"), g.Atom("b")))


def test_example_guards():
    guard = g.parse_guard("h1|h2")
    assert g.evaluate(guard, {"h2"})
    assert not g.evaluate(guard, set())
    assert g.evaluate(g.parse_guard("!h1&!h2"), set())


@pytest.mark.parametrize("text,column", [
    ("a &", 4),
    ("(a | b", 7),
    ("a b", 3),
    ("a $ b", 3),
    ("", 1),
    ("| a", 1),
])
def test_syntax_errors_report_column(text, column):
    with pytest.raises(g.GuardSyntaxError) as err:
        g.parse_guard(text)
    assert err.value.column == column


def test_atoms_of():
    assert g.atoms_of(g.parse_guard("a & !b | true")) == {"a", "b"}


@pytest.mark.parametrize("text", [
    "p", "!p", "p & q", "p | q & !r", "!(p | q) & (r | s)", "p & (q | r) & s", "true | false",
    "!!p", "(p | q) | (r | s)", "p & q & r & s",
])
def test_truth_table_against_python(text):
    guard = g.parse_guard(text)
    for letter in all_letters(ATOMS):
        assert g.evaluate(guard, letter) == python_eval(text, letter)


@given(guard_trees)
def test_format_parse_roundtrip(tree):
    text = g.format_guard(tree)
    assert g.parse_guard(text) == tree
    for letter in all_letters(ATOMS):
        assert g.evaluate(tree, letter) == python_eval(text, letter)


@given(st.text(alphabet="pq!&|() x1", max_size=20))
def test_parser_is_total(text):
    try:
        guard = g.parse_guard(text)
    except g.GuardSyntaxError as e:
        assert 1 <= e.column <= len(text) + 1
    else:
        assert g.parse_guard(g.format_guard(guard)) == guard


def test_disjunction():
    assert g.disjunction([]) == g.FALSE
    guard = g.disjunction([g.Atom("p"), g.Atom("q"), g.Atom("r")])
    assert [g.evaluate(guard, {a}) for a in "pqrs"] == [True, True, True, False]


def test_evaluation_exhaustive_small():
    # every 2-atom boolean function expressible as a DNF of minterms
    letters = all_letters(["p", "q"])
    for table in itertools.product([False, True], repeat=4):
        terms = []
        for letter, on in zip(letters, table):
            if on:
                lits = [g.Atom(a) if a in letter else g.Not(g.Atom(a)) for a in ("p", "q")]
                terms.append(g.And(*lits))
        guard = g.disjunction(terms)
        assert [g.evaluate(guard, x) for x in letters] == list(table)
