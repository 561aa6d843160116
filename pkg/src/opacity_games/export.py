"""GraphViz export and the JSON solution document."""
from __future__ import annotations

import json
from typing import Any

from .classifier import classify_state
from .model import GameArena, StateVerdict
from .product import ProductGame, ProductState, make_belief
from .solver import Solution, target_F_O

SOLUTION_FORMAT = "opacity-solution/1"

_VERDICT_COLOR = {
    StateVerdict.OPAQUE_WINNABLE: "palegreen",
    StateVerdict.WIN_ONLY_BY_REVEALING: "lightgoldenrod1",
    StateVerdict.NOT_SURELY_WINNABLE: "lightpink",
}


def _q(text: str) -> str:
    return json.dumps(text)


def _merged_edges(edges):
    """Group ``(src, action, dst)`` into one DOT edge per ``(src, dst)``."""
    merged: dict[tuple[Any, Any], list[str]] = {}
    for src, a, dst in edges:
        merged.setdefault((src, dst), []).append(a)
    return merged


def arena_to_dot(arena: GameArena) -> str:
    """P1 states are ellipses, P2 states boxes.

    Sink states (all moves are self-loops) are double-bordered and their
    loops left implicit, the usual drawing of a blocking state.
    """
    lines = ["digraph arena {", "  rankdir=LR;"]
    sinks = {s for s in arena.states if all(t == s for _, t in arena.moves(s))}
    for s in arena.states:
        attrs = [f"shape={'ellipse' if arena.owner[s] == 1 else 'box'}"]
        if s in sinks:
            attrs.append("peripheries=2")
        if s == arena.initial:
            attrs.append("style=bold")
        lab = ",".join(sorted(arena.label(s)))
        attrs.append(f"label={_q(s + (' [' + lab + ']' if lab else ''))}")
        lines.append(f"  {_q(s)} [{', '.join(attrs)}];")
    edges = [(s, a, t) for (s, a), t in sorted(arena.transitions.items()) if s not in sinks]
    for (s, t), acts in sorted(_merged_edges(edges).items()):
        lines.append(f"  {_q(s)} -> {_q(t)} [label={_q(', '.join(sorted(acts)))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def product_to_dot(product: ProductGame, solution: Solution | None = None) -> str:
    """Nodes are labeled ``(s,q,{(s,q),...})``; targets of the opaque
    objective are double-bordered and, given a solution, nodes are filled by
    verdict."""
    product.build()
    targets = target_F_O(product)
    lines = ["digraph product {"]
    for v in product.vertices():
        ps = product.state(v)
        attrs = [f"shape={'ellipse' if product.owner(v) == 1 else 'box'}"]
        if v in targets:
            attrs.append("peripheries=2")
        if v == product.initial and solution is None:
            attrs.append("style=bold")
        if solution is not None and ps in solution.owners:
            color = _VERDICT_COLOR[classify_state(solution, ps)]
            attrs.append("style=" + ('"bold,filled"' if v == product.initial else "filled"))
            attrs.append(f"fillcolor={color}")
        attrs.append(f"label={_q(str(ps))}")
        lines.append(f"  v{v} [{', '.join(attrs)}];")
    edges = [(v, a, w) for v in product.vertices() for a, w in product.successors(v)]
    for (v, w), acts in sorted(_merged_edges(edges).items()):
        lines.append(f"  v{v} -> v{w} [label={_q(', '.join(sorted(acts)))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(obj, solution: Solution | None = None) -> str:
    if isinstance(obj, GameArena):
        return arena_to_dot(obj)
    if isinstance(obj, ProductGame):
        return product_to_dot(obj, solution)
    raise TypeError(f"cannot export {type(obj).__name__} to DOT")


def solution_to_dict(solution: Solution) -> dict:
    order = sorted(solution.owners)
    ids = {v: i for i, v in enumerate(order)}

    def region(vs):
        return sorted(ids[v] for v in vs)

    def strategy(table):
        return [{"vertex": ids[v], "action": a} for v, a in sorted(table.items(), key=lambda kv: ids[kv[0]])]

    return {
        "format": SOLUTION_FORMAT,
        "initial": ids[solution.initial],
        "vertices": [
            {
                "id": ids[v],
                "state": v.state,
                "dstate": v.dstate,
                "belief": [list(p) for p in v.belief],
                "owner": solution.owners[v],
            }
            for v in order
        ],
        "regions": {
            "F_O": region(solution.target_opaque),
            "F": region(solution.target_accepting),
            "win1_opaque": region(solution.win_opaque),
            "win1": region(solution.win),
            "p2_safe_opaque": region(solution.p2_safe_opaque),
            "p2_safe": region(solution.p2_safe),
        },
        "verdicts": [{"vertex": ids[v], "verdict": classify_state(solution, v).value} for v in order],
        "p1_strategy": {
            "opaque": strategy(solution.p1_opaque_strategy),
            "reach": strategy(solution.p1_strategy),
        },
        "p2_strategy": strategy(solution.p2_strategy),
    }


def serialize_solution(solution: Solution) -> str:
    return json.dumps(solution_to_dict(solution), indent=2, sort_keys=True) + "\n"


def solution_from_dict(doc: dict) -> Solution:
    if doc.get("format") != SOLUTION_FORMAT:
        raise ValueError(f"not a solution document: format={doc.get('format')!r}")
    by_id = {}
    owners = {}
    for rec in doc["vertices"]:
        v = ProductState(rec["state"], rec["dstate"], make_belief(tuple(p) for p in rec["belief"]))
        by_id[rec["id"]] = v
        owners[v] = rec["owner"]

    def region(name):
        return frozenset(by_id[i] for i in doc["regions"][name])

    def strategy(records):
        return {by_id[r["vertex"]]: r["action"] for r in records}

    solution = Solution(
        initial=by_id[doc["initial"]],
        owners=owners,
        target_opaque=region("F_O"),
        target_accepting=region("F"),
        win_opaque=region("win1_opaque"),
        win=region("win1"),
        p2_safe_opaque=region("p2_safe_opaque"),
        p2_safe=region("p2_safe"),
        p1_opaque_strategy=strategy(doc["p1_strategy"]["opaque"]),
        p1_strategy=strategy(doc["p1_strategy"]["reach"]),
        p2_strategy=strategy(doc["p2_strategy"]),
    )
    for rec in doc.get("verdicts", []):
        got = classify_state(solution, by_id[rec["vertex"]]).value
        if got != rec["verdict"]:
            raise ValueError(f"verdict of vertex {rec['vertex']} is {rec['verdict']!r}, regions say {got!r}")
    return solution


def parse_solution(text: str) -> Solution:
    return solution_from_dict(json.loads(text))


def find_vertex(solution: Solution, state: str, dstate: str | None = None) -> list[ProductState]:
    """Vertices of ``solution`` at arena state ``state`` (and ``dstate``)."""
    return sorted(
        v for v in solution.owners if v.state == state and (dstate is None or v.dstate == dstate)
    )
