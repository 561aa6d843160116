"""Line-oriented ``.arena`` and ``.dfa`` text formats.

Arena file::

    atoms h1 h2
    state 0 owner=1 label=-
    state h1 owner=2 label=h1
    init 0
    action a1 player=1
    trans 0 a1 h1
    obsclass O_mid h1 h2 2
    obs 0 a1 h1 O_special

DFA file::

    atoms h1 h2            # optional
    dstate q0
    dstate q1 accepting
    init q0
    edge q0 "h1|h2" q1

``#`` starts a comment outside quotes.  Every problem is reported as a
:class:`ParseError` carrying a 1-based :class:`SourceSpan`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .guards import GuardSyntaxError, atoms_of, format_guard, parse_guard, Or
from .model import GameArena, ObservationMap, SecretDFA, validate_arena, validate_dfa


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


class ParseError(ValueError):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span}: {message}")
        self.reason = message
        self.span = span


@dataclass(frozen=True)
class _Tok:
    text: str
    span: SourceSpan
    quoted: bool = False


_LEX = re.compile(r'\s*(?:(?P<q>"[^"\n]*")|(?P<bad>"[^"\n]*$)|(?P<c>#.*)|(?P<w>[^\s"#]+))')


def _lines(text: str, file: str) -> list[list[_Tok]]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        toks = []
        pos = 0
        while pos < len(line):
            m = _LEX.match(line, pos)
            if m is None or m.end() == pos:
                break
            if m.group("c") is not None:
                break
            if m.group("bad") is not None:
                raise ParseError("unterminated string", SourceSpan(file, lineno, m.start("bad") + 1))
            if m.group("q") is not None:
                toks.append(_Tok(m.group("q")[1:-1], SourceSpan(file, lineno, m.start("q") + 1), True))
            else:
                toks.append(_Tok(m.group("w"), SourceSpan(file, lineno, m.start("w") + 1)))
            pos = m.end()
        if toks:
            out.append(toks)
    return out


def _ident(tok: _Tok) -> str:
    if tok.quoted or "=" in tok.text:
        raise ParseError(f"expected an identifier, got {tok.text!r}", tok.span)
    return tok.text


def _options(toks: list[_Tok], allowed: set[str]) -> dict[str, _Tok]:
    opts = {}
    for tok in toks:
        key, eq, value = tok.text.partition("=")
        if not eq or tok.quoted:
            raise ParseError(f"expected key=value, got {tok.text!r}", tok.span)
        if key not in allowed:
            raise ParseError(f"unknown option {key!r}", tok.span)
        if key in opts:
            raise ParseError(f"option {key!r} given twice", tok.span)
        opts[key] = _Tok(value, tok.span)
    return opts


def _player(tok: _Tok) -> int:
    if tok.text not in ("1", "2"):
        raise ParseError(f"player must be 1 or 2, got {tok.text!r}", tok.span)
    return int(tok.text)


def _arity(line: list[_Tok], lo: int, hi: int | None = None) -> None:
    hi = lo if hi is None else hi
    n = len(line) - 1
    if n < lo or n > hi:
        want = str(lo) if lo == hi else f"{lo}..{hi}" if hi < 10**6 else f"at least {lo}"
        raise ParseError(f"{line[0].text!r} takes {want} arguments, got {n}", line[0].span)


def parse_arena(
    text: str, file: str = "<arena>", complete_sinks: bool = False
) -> tuple[GameArena, ObservationMap]:
    """Parse an arena file into a validated arena and its observation map.

    With ``complete_sinks`` a state without outgoing transitions gets a
    self-loop under its owner's first action (or a fresh ``stay<owner>``).
    """
    atoms: dict[str, _Tok] = {}
    states: dict[str, _Tok] = {}
    owner: dict[str, int] = {}
    labels: dict[str, tuple[str, _Tok]] = {}
    actions: dict[str, int] = {}
    action_tok: dict[str, _Tok] = {}
    trans: dict[tuple[str, str], str] = {}
    trans_toks: list[tuple[_Tok, _Tok, _Tok]] = []
    classes: dict[str, str] = {}
    class_tok: dict[str, _Tok] = {}
    explicit: dict[tuple[str, str, str], str] = {}
    explicit_toks: list[tuple[_Tok, _Tok, _Tok]] = []
    init: _Tok | None = None

    for line in _lines(text, file):
        kw = line[0]
        args = line[1:]
        if kw.text == "atoms":
            for tok in args:
                name = _ident(tok)
                if name in ("true", "false") or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_.]*", name):
                    raise ParseError(f"invalid atom name {name!r}", tok.span)
                if name in atoms:
                    raise ParseError(f"atom {name!r} declared twice", tok.span)
                atoms[name] = tok
        elif kw.text == "state":
            _arity(line, 1, 3)
            sid = _ident(args[0])
            if sid in states:
                raise ParseError(f"state {sid!r} declared twice", args[0].span)
            opts = _options(args[1:], {"owner", "label"})
            if "owner" not in opts:
                raise ParseError(f"state {sid!r} needs owner=1 or owner=2", args[0].span)
            states[sid] = args[0]
            owner[sid] = _player(opts["owner"])
            lab = opts.get("label")
            labels[sid] = (lab.text, lab) if lab else ("-", args[0])
        elif kw.text == "init":
            _arity(line, 1)
            if init is not None:
                raise ParseError("init given twice", kw.span)
            init = args[0]
            _ident(init)
        elif kw.text == "action":
            _arity(line, 2)
            aid = _ident(args[0])
            if aid in actions:
                raise ParseError(f"action {aid!r} declared twice", args[0].span)
            opts = _options(args[1:], {"player"})
            if "player" not in opts:
                raise ParseError(f"action {aid!r} needs player=1 or player=2", args[0].span)
            actions[aid] = _player(opts["player"])
            action_tok[aid] = args[0]
        elif kw.text == "trans":
            _arity(line, 3)
            s, a, t = (_ident(x) for x in args)
            if (s, a) in trans:
                raise ParseError(f"duplicate transition for ({s}, {a})", kw.span)
            trans[s, a] = t
            trans_toks.append((args[0], args[1], args[2]))
        elif kw.text == "obsclass":
            _arity(line, 1, 10**9)
            sym = _ident(args[0])
            for tok in args[1:]:
                sid = _ident(tok)
                if sid in classes:
                    raise ParseError(
                        f"state {sid!r} is already in observation class {classes[sid]!r}", tok.span
                    )
                classes[sid] = sym
                class_tok[sid] = tok
        elif kw.text == "obs":
            _arity(line, 4)
            s, a, t, sym = (_ident(x) for x in args)
            if (s, a, t) in explicit:
                raise ParseError(f"duplicate observation for ({s}, {a}, {t})", kw.span)
            explicit[s, a, t] = sym
            explicit_toks.append((args[0], args[1], args[2]))
        else:
            raise ParseError(f"unknown keyword {kw.text!r}", kw.span)

    end = SourceSpan(file, max(1, text.count("\n") + 1), 1)
    if init is None:
        raise ParseError("missing init", end)
    if init.text not in states:
        raise ParseError(f"undeclared state {init.text!r}", init.span)

    label_sets = {}
    for sid, (raw, tok) in labels.items():
        names = [] if raw in ("-", "") else raw.split(",")
        for name in names:
            if name not in atoms:
                raise ParseError(f"undeclared atom {name!r}", tok.span)
        label_sets[sid] = frozenset(names)

    for (s_tok, a_tok, t_tok) in trans_toks:
        for tok in (s_tok, t_tok):
            if tok.text not in states:
                raise ParseError(f"undeclared state {tok.text!r}", tok.span)
        if a_tok.text not in actions:
            raise ParseError(f"undeclared action {a_tok.text!r}", a_tok.span)
        if actions[a_tok.text] != owner[s_tok.text]:
            raise ParseError(
                f"ownership mismatch: action {a_tok.text!r} belongs to player "
                f"{actions[a_tok.text]} but state {s_tok.text!r} to player {owner[s_tok.text]}",
                a_tok.span,
            )
    for sid, tok in class_tok.items():
        if sid not in states:
            raise ParseError(f"undeclared state {sid!r}", tok.span)
    for (s_tok, a_tok, t_tok) in explicit_toks:
        if trans.get((s_tok.text, a_tok.text)) != t_tok.text:
            raise ParseError(
                f"observation given for non-existent transition "
                f"({s_tok.text}, {a_tok.text}, {t_tok.text})",
                s_tok.span,
            )

    if complete_sinks:
        has_move = {s for s, _ in trans}
        for sid in states:
            if sid not in has_move:
                own = sorted(a for a, p in actions.items() if p == owner[sid])
                act = own[0] if own else f"stay{owner[sid]}"
                actions.setdefault(act, owner[sid])
                trans[sid, act] = sid

    arena = GameArena(
        states=tuple(states),
        owner=owner,
        actions=actions,
        transitions=trans,
        initial=init.text,
        atoms=frozenset(atoms),
        labels=label_sets,
    )
    problems = validate_arena(arena)
    if problems:
        tok = next(
            (states[s] for s in states if f"{s!r}" in problems[0]), states[init.text]
        )
        raise ParseError(problems[0], tok.span)
    obs = ObservationMap(classes=classes, explicit=explicit)
    missing = obs.missing(arena)
    if missing:
        s, a, t = missing[0]
        raise ParseError(
            f"state {t!r} has no observation class and transition ({s}, {a}, {t}) "
            f"has no explicit observation",
            states[t].span,
        )
    return arena, obs


def format_arena(arena: GameArena, obs: ObservationMap | None = None) -> str:
    lines = []
    if arena.atoms:
        lines.append("atoms " + " ".join(sorted(arena.atoms)))
    for s in arena.states:
        lab = ",".join(sorted(arena.label(s))) or "-"
        lines.append(f"state {s} owner={arena.owner[s]} label={lab}")
    lines.append(f"init {arena.initial}")
    for a in sorted(arena.actions):
        lines.append(f"action {a} player={arena.actions[a]}")
    order = {s: i for i, s in enumerate(arena.states)}
    for (s, a), t in sorted(arena.transitions.items(), key=lambda kv: (order[kv[0][0]], kv[0][1])):
        lines.append(f"trans {s} {a} {t}")
    if obs is not None:
        groups: dict[str, list[str]] = {}
        for s in arena.states:
            if s in obs.classes:
                groups.setdefault(obs.classes[s], []).append(s)
        for sym in sorted(groups):
            lines.append(f"obsclass {sym} " + " ".join(groups[sym]))
        for (s, a, t), sym in sorted(obs.explicit.items()):
            lines.append(f"obs {s} {a} {t} {sym}")
    return "\n".join(lines) + "\n"


def parse_dfa(text: str, file: str = "<dfa>") -> SecretDFA:
    atoms: list[str] = []
    dstates: dict[str, _Tok] = {}
    accepting: set[str] = set()
    init: _Tok | None = None
    guards: dict[tuple[str, str], object] = {}
    edge_toks: list[tuple[_Tok, _Tok]] = []

    for line in _lines(text, file):
        kw, args = line[0], line[1:]
        if kw.text == "atoms":
            atoms += [_ident(t) for t in args]
        elif kw.text == "dstate":
            _arity(line, 1, 2)
            q = _ident(args[0])
            if q in dstates:
                raise ParseError(f"dstate {q!r} declared twice", args[0].span)
            dstates[q] = args[0]
            if len(args) == 2:
                if args[1].text != "accepting":
                    raise ParseError(f"expected 'accepting', got {args[1].text!r}", args[1].span)
                accepting.add(q)
        elif kw.text == "init":
            _arity(line, 1)
            if init is not None:
                raise ParseError("init given twice", kw.span)
            init = args[0]
        elif kw.text == "edge":
            _arity(line, 3)
            src, gtok, dst = args
            if not gtok.quoted:
                raise ParseError("guard must be a quoted string", gtok.span)
            try:
                g = parse_guard(gtok.text)
            except GuardSyntaxError as e:
                span = SourceSpan(file, gtok.span.line, gtok.span.column + e.column)
                raise ParseError(f"guard syntax error: {e.reason}", span) from None
            key = (_ident(src), _ident(dst))
            guards[key] = Or(guards[key], g) if key in guards else g
            edge_toks.append((src, dst))
        else:
            raise ParseError(f"unknown keyword {kw.text!r}", kw.span)

    end = SourceSpan(file, max(1, text.count("\n") + 1), 1)
    if init is None:
        raise ParseError("missing init", end)
    for tok in [init] + [t for pair in edge_toks for t in pair]:
        if tok.text not in dstates:
            raise ParseError(f"undeclared dstate {tok.text!r}", tok.span)
    dfa = SecretDFA(
        dstates=tuple(dstates),
        guards=guards,
        initial=init.text,
        accepting=frozenset(accepting),
        atoms=frozenset(atoms),
    )
    problems = validate_dfa(dfa)
    if problems:
        first = problems[0]
        tok = next((dstates[q] for q in dstates if f"{q!r}" in first), init)
        raise ParseError(first, tok.span)
    return dfa


def format_dfa(dfa: SecretDFA) -> str:
    lines = []
    if dfa.atoms:
        lines.append("atoms " + " ".join(sorted(dfa.atoms)))
    for q in dfa.dstates:
        lines.append(f"dstate {q}" + (" accepting" if q in dfa.accepting else ""))
    lines.append(f"init {dfa.initial}")
    for (q, r), g in sorted(dfa.guards.items()):
        lines.append(f'edge {q} "{format_guard(g)}" {r}')
    return "\n".join(lines) + "\n"


def check_compatible(arena: GameArena, dfa: SecretDFA) -> list[str]:
    """Atoms the DFA mentions but the arena never declares."""
    used = frozenset().union(*(atoms_of(g) for g in dfa.guards.values())) | dfa.atoms
    return [f"DFA atom {a!r} is not declared by the arena" for a in sorted(used - arena.atoms)]


def read_arena(path, complete_sinks: bool = False) -> tuple[GameArena, ObservationMap]:
    with open(path, encoding="utf-8") as fh:
        return parse_arena(fh.read(), str(path), complete_sinks=complete_sinks)


def read_dfa(path) -> SecretDFA:
    with open(path, encoding="utf-8") as fh:
        return parse_dfa(fh.read(), str(path))
