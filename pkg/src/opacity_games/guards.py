"""Boolean guard expressions over atomic propositions.

Grammar (precedence ``!`` > ``&`` > ``|``, binary operators left-associative)::

    expr    := conj ('|' conj)*
    conj    := unary ('&' unary)*
    unary   := '!' unary | primary
    primary := 'true' | 'false' | ATOM | '(' expr ')'

An atom is true on a letter iff it is a member of the letter.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import AbstractSet, Union


class GuardSyntaxError(ValueError):
    """Raised on malformed guard text; ``column`` is 1-based."""

    def __init__(self, message: str, column: int):
        super().__init__(f"column {column}: {message}")
        self.reason = message
        self.column = column


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Not:
    arg: "Guard"


@dataclass(frozen=True)
class And:
    left: "Guard"
    right: "Guard"


@dataclass(frozen=True)
class Or:
    left: "Guard"
    right: "Guard"


Guard = Union[Const, Atom, Not, And, Or]

TRUE = Const(True)
FALSE = Const(False)

_TOKEN = re.compile(r"\s*(?:(?P<op>[!&|()])|(?P<name>[A-Za-z_][A-Za-z0-9_.]*))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise GuardSyntaxError(f"unexpected character {text[col - 1]!r}", col)
        kind = "op" if m.group("op") else "name"
        start = m.start(kind) + 1
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expr(self) -> Guard:
        node = self.conj()
        while self.peek()[1] == "|" and self.peek()[0] == "op":
            self.take()
            node = Or(node, self.conj())
        return node

    def conj(self) -> Guard:
        node = self.unary()
        while self.peek()[1] == "&" and self.peek()[0] == "op":
            self.take()
            node = And(node, self.unary())
        return node

    def unary(self) -> Guard:
        kind, value, col = self.peek()
        if kind == "op" and value == "!":
            self.take()
            return Not(self.unary())
        return self.primary()

    def primary(self) -> Guard:
        kind, value, col = self.take()
        if kind == "name":
            if value == "true":
                return TRUE
            if value == "false":
                return FALSE
            return Atom(value)
        if kind == "op" and value == "(":
            node = self.expr()
            kind, value, col = self.take()
            if value != ")" or kind != "op":
                raise GuardSyntaxError("expected ')'", col)
            return node
        if kind == "end":
            raise GuardSyntaxError("unexpected end of guard", col)
        raise GuardSyntaxError(f"unexpected {value!r}", col)


def parse_guard(text: str) -> Guard:
    parser = _Parser(text)
    node = parser.expr()
    kind, value, col = parser.peek()
    if kind != "end":
        raise GuardSyntaxError(f"unexpected {value!r}", col)
    return node


def evaluate(guard: Guard, letter: AbstractSet[str]) -> bool:
    if isinstance(guard, Atom):
        return guard.name in letter
    if isinstance(guard, Const):
        return guard.value
    if isinstance(guard, Not):
        return not evaluate(guard.arg, letter)
    if isinstance(guard, And):
        return evaluate(guard.left, letter) and evaluate(guard.right, letter)
    return evaluate(guard.left, letter) or evaluate(guard.right, letter)


def atoms_of(guard: Guard) -> frozenset[str]:
    if isinstance(guard, Atom):
        return frozenset([guard.name])
    if isinstance(guard, Const):
        return frozenset()
    if isinstance(guard, Not):
        return atoms_of(guard.arg)
    return atoms_of(guard.left) | atoms_of(guard.right)


_PREC = {Or: 1, And: 2, Not: 3, Atom: 4, Const: 4}


def format_guard(guard: Guard) -> str:
    """Print with the fewest parentheses that still re-parse to ``guard``."""
    if isinstance(guard, Atom):
        return guard.name
    if isinstance(guard, Const):
        return "true" if guard.value else "false"
    if isinstance(guard, Not):
        inner = format_guard(guard.arg)
        return "!" + (inner if _PREC[type(guard.arg)] >= 3 else f"({inner})")
    op = " | " if isinstance(guard, Or) else " & "
    prec = _PREC[type(guard)]
    left = format_guard(guard.left)
    if _PREC[type(guard.left)] < prec:
        left = f"({left})"
    right = format_guard(guard.right)
    # left-associative: an equal-precedence right operand needs parentheses
    if _PREC[type(guard.right)] <= prec:
        right = f"({right})"
    return left + op + right


def disjunction(guards: list[Guard]) -> Guard:
    if not guards:
        return FALSE
    node = guards[0]
    for g in guards[1:]:
        node = Or(node, g)
    return node
