"""Command-line interface: ``opacity-games <command> ...``.

Exit codes of ``solve``: 0 opaque-winning at the initial vertex, 10 winnable
only by revealing the secret, 20 not surely winnable, 1 bad input, 2 vertex
budget exceeded.  ``verify``: 0 agreement, 1 bad input, 2 budget exceeded,
3 disagreement.  ``grid replay``: 0 match, 3 mismatch.
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import gridworld as gw
from .classifier import classify_play, classify_state, state_verdicts
from .export import arena_to_dot, product_to_dot, serialize_solution
from .formats import ParseError, check_compatible, format_arena, format_dfa, read_arena, read_dfa
from .model import InvalidPlayError, Play, StateVerdict
from .oracle import BudgetExceeded, VerifyReport, random_instance, verify_instance
from .product import ProductGame
from .simulator import (
    FirstEnabledStrategy, UniformStrategy, batch, opaque_strategy, reach_strategy,
    revealing_strategy,
)
from .solver import solve

log = logging.getLogger("opacity_games")

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_DISAGREE = 0, 1, 2, 3
SOLVE_EXIT = {
    StateVerdict.OPAQUE_WINNABLE: 0,
    StateVerdict.WIN_ONLY_BY_REVEALING: 10,
    StateVerdict.NOT_SURELY_WINNABLE: 20,
}


class InputError(Exception):
    pass


def _load(args):
    try:
        arena, obs = read_arena(args.arena, complete_sinks=args.complete_sinks)
        dfa = read_dfa(args.dfa)
    except ParseError as e:
        raise InputError(str(e)) from None
    except OSError as e:
        raise InputError(f"{e.filename}: {e.strerror}") from None
    problems = check_compatible(arena, dfa)
    if problems:
        raise InputError("; ".join(problems))
    return arena, obs, dfa


def _product(args, arena, dfa, obs) -> ProductGame:
    product = ProductGame(arena, dfa, obs, budget=args.budget, initial_belief=args.initial_belief)
    product.build()
    log.info("product: %d vertices, %d edges", len(product), product.num_edges())
    return product


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
        log.info("wrote %s", path)


# -- commands ----------------------------------------------------------------

def cmd_solve(args) -> int:
    arena, obs, dfa = _load(args)
    solution = solve(_product(args, arena, dfa, obs))
    verdict = classify_state(solution, solution.initial)
    if args.out:
        _write(args.out, serialize_solution(solution))
    action = solution.p1_opaque_strategy.get(solution.initial) or solution.p1_strategy.get(solution.initial)
    print(f"initial\t{solution.initial}")
    print(f"verdict\t{verdict.value}")
    if action is not None:
        print(f"action\t{action}")
    print(f"vertices\t{len(solution.owners)}")
    print(f"win1_opaque\t{len(solution.win_opaque)}")
    print(f"win1\t{len(solution.win)}")
    return SOLVE_EXIT[verdict]


def cmd_classify(args) -> int:
    arena, obs, dfa = _load(args)
    if args.play is not None:
        try:
            verdict = classify_play(arena, dfa, obs, Play.parse(args.play))
        except InvalidPlayError as e:
            raise InputError(f"invalid play: {e}") from None
        print(verdict.value)
        return EXIT_OK
    solution = solve(_product(args, arena, dfa, obs))
    for v, verdict in sorted(state_verdicts(solution).items()):
        print(f"{v}\t{verdict.value}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    arena, obs, dfa = _load(args)
    product = _product(args, arena, dfa, obs)
    solution = solve(product)
    p1 = {
        "opaque": lambda: opaque_strategy(solution),
        "reach": lambda: reach_strategy(solution),
        "random": UniformStrategy,
    }[args.p1]()
    p2 = {
        "revealing": lambda: revealing_strategy(solution),
        "random": UniformStrategy,
        "first": FirstEnabledStrategy,
    }[args.p2]()
    result = batch(product, p1, p2, args.episodes, seed=args.seed, max_steps=args.max_steps)
    if args.trace:
        text = "".join(f"# episode {i}\n{ep.trace()}" for i, ep in enumerate(result.episodes))
        _write(args.trace, text)
    sys.stdout.write(result.summary())
    return EXIT_OK


def _verify_seed(args_tuple):
    seed, horizon = args_tuple
    arena, dfa, obs = random_instance(seed)
    return seed, verify_instance(arena, dfa, obs, horizon)


def _print_report(name: str, rep: VerifyReport) -> None:
    status = "ok" if rep.ok else "DISAGREE"
    print(
        f"{name}\t{status}\tplays={rep.plays}\tvertices={rep.product_vertices}"
        f"\tstrategies={rep.revealing_plays}"
    )
    if not rep.ok:
        for key, value in vars(rep).items():
            if key not in ("plays", "product_vertices", "revealing_plays", "notes") and value:
                print(f"  {key}={value}")
        for note in rep.notes:
            print(f"  {note}")


def cmd_verify(args) -> int:
    if args.random is not None:
        if args.arena or args.dfa:
            raise InputError("give either ARENA DFA or --random, not both")
        seeds = [(args.seed + i, args.horizon) for i in range(args.random)]
        total = VerifyReport()
        try:
            if args.jobs > 1:
                with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                    results = list(pool.map(_verify_seed, seeds))
            else:
                results = [_verify_seed(s) for s in seeds]
        except BudgetExceeded as e:
            print(f"budget exceeded: {e}", file=sys.stderr)
            return EXIT_BUDGET
        for seed, rep in results:
            if not rep.ok or args.verbose:
                _print_report(f"seed {seed}", rep)
            total.merge(rep)
        agree = sum(rep.ok for _, rep in results)
        print(f"agree\t{agree}/{len(results)}")
        return EXIT_OK if total.ok else EXIT_DISAGREE
    if not (args.arena and args.dfa):
        raise InputError("verify needs ARENA and DFA (or --random N)")
    arena, obs, dfa = _load(args)
    try:
        rep = verify_instance(
            arena, dfa, obs, args.horizon, play_budget=args.play_budget,
            vertex_budget=args.budget or 200_000,
        )
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    _print_report(args.arena, rep)
    return EXIT_OK if rep.ok else EXIT_DISAGREE


def cmd_export_dot(args) -> int:
    if args.product:
        if not args.dfa:
            raise InputError("--product needs a DFA file")
        arena, obs, dfa = _load(args)
        product = _product(args, arena, dfa, obs)
        solution = solve(product) if args.verdicts else None
        _write(args.out, product_to_dot(product, solution))
    else:
        try:
            arena, _ = read_arena(args.arena, complete_sinks=args.complete_sinks)
        except ParseError as e:
            raise InputError(str(e)) from None
        _write(args.out, arena_to_dot(arena))
    return EXIT_OK


def _cell(text: str) -> tuple[int, int]:
    try:
        r, c = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected ROW,COL, got {text!r}") from None
    return r, c


def _water(text: str):
    if text == "center3x3":
        return None
    if text == "none":
        return frozenset()
    return frozenset(_cell(part) for part in text.split(";") if part)


def _grid_config(args) -> gw.GridConfig:
    cfg = gw.GridConfig(
        rows=args.rows, cols=args.cols, p1_init=args.p1, p2_init=args.p2,
        g0=args.g0, g1=args.g1, g2=args.g2, water=args.water,
        row_sensors=not args.no_row_sensors, cross_arm=args.cross_arm,
        observer_sees_p2=not args.hide_p2, capture_ends_game=not args.no_capture,
    )
    problems = cfg.problems()
    if problems:
        raise InputError("; ".join(problems))
    return cfg


def cmd_grid_gen(args) -> int:
    import json

    cfg = _grid_config(args)
    arena, obs, dfa = gw.generate(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{args.name}.arena").write_text(format_arena(arena, obs))
    (out / f"{args.name}.dfa").write_text(format_dfa(dfa))
    doc = {
        "rows": cfg.rows, "cols": cfg.cols,
        "p1_init": list(cfg.p1_init), "p2_init": list(cfg.p2_init),
        "goals": {k: list(v) for k, v in cfg.goals.items()},
        "water": sorted(list(c) for c in cfg.water_cells),
        "row_sensors": cfg.row_sensors, "cross_arm": cfg.cross_arm,
        "observer_sees_p2": cfg.observer_sees_p2, "capture_ends_game": cfg.capture_ends_game,
    }
    (out / f"{args.name}.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"{len(arena.states)} states written to {out}/{args.name}.{{arena,dfa,json}}")
    return EXIT_OK


def cmd_grid_sweep(args) -> int:
    cfg = _grid_config(args)
    try:
        verdicts = gw.sweep_initials(cfg, jobs=args.jobs, budget=args.budget)
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    _write(args.out, gw.verdict_csv(verdicts))
    sys.stderr.write(gw.verdict_grid(verdicts, cfg.rows, cfg.cols))
    return EXIT_OK


def cmd_grid_replay(args) -> int:
    report = gw.replay_winning_path(_grid_config(args))
    sys.stdout.write(str(report))
    if report.matched:
        beliefs = ",".join(f"({s},{q})" for s, q in report.final_belief)
        print(f"final belief\t{{{beliefs}}}")
    return EXIT_OK if report.matched else EXIT_DISAGREE


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opacity-games",
        description="Synthesize strategies that reach a secret goal while keeping it opaque.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="progress messages on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def game_args(p, dfa_required=True):
        p.add_argument("arena", nargs=None if dfa_required else "?")
        p.add_argument("dfa", nargs=None if dfa_required else "?")
        p.add_argument("--complete-sinks", action="store_true",
                       help="add a self-loop to states without enabled actions")
        p.add_argument("--initial-belief", choices=("singleton", "class"), default="singleton")
        p.add_argument("--budget", type=int, default=None,
                       help="product vertex budget (default: $OPACITY_VERTEX_BUDGET or 5000000)")

    p = sub.add_parser("solve", help="solve the game and classify the initial vertex")
    game_args(p)
    p.add_argument("-o", "--out", help="write the solution as JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("classify", help="classify a play, or every product vertex")
    game_args(p)
    p.add_argument("--play", help='play as "s0 a0 s1 ... sn"')
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", help="sample plays under a strategy profile")
    game_args(p)
    p.add_argument("--p1", choices=("opaque", "reach", "random"), default="opaque")
    p.add_argument("--p2", choices=("revealing", "random", "first"), default="random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--max-steps", type=int, default=1000)
    p.add_argument("--trace", help="write per-step episode traces to this file ('-' for stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="cross-check against brute-force enumeration")
    game_args(p, dfa_required=False)
    p.add_argument("--horizon", type=int, default=None, help="default: |S|*|Q|")
    p.add_argument("--play-budget", type=int, default=3_000_000)
    p.add_argument("--random", type=int, metavar="N", help="verify N random instances instead")
    p.add_argument("--seed", type=int, default=0, help="first seed for --random")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export-dot", help="GraphViz drawing of the arena or product")
    game_args(p, dfa_required=False)
    p.add_argument("--product", action="store_true", help="draw the belief product (needs DFA)")
    p.add_argument("--verdicts", action="store_true", help="color product vertices by verdict")
    p.add_argument("-o", "--out", default="-")
    p.set_defaults(func=cmd_export_dot)

    grid = sub.add_parser("grid", help="aerial/ground robot grid world")
    gsub = grid.add_subparsers(dest="grid_command", required=True)
    d = gw.GridConfig()

    def grid_args(p):
        p.add_argument("--rows", type=int, default=d.rows)
        p.add_argument("--cols", type=int, default=d.cols)
        p.add_argument("--p1", type=_cell, default=d.p1_init, help="P1 start ROW,COL")
        p.add_argument("--p2", type=_cell, default=d.p2_init, help="P2 start ROW,COL")
        p.add_argument("--g0", type=_cell, default=d.g0)
        p.add_argument("--g1", type=_cell, default=d.g1)
        p.add_argument("--g2", type=_cell, default=d.g2)
        p.add_argument("--water", type=_water, default=None,
                       help="'center3x3' (default), 'none' or 'r,c;r,c;...'")
        p.add_argument("--cross-arm", type=int, default=d.cross_arm)
        p.add_argument("--hide-p2", action="store_true", help="observer does not see P2")
        p.add_argument("--no-row-sensors", action="store_true")
        p.add_argument("--no-capture", action="store_true", help="robots may share a cell")
        p.add_argument("--budget", type=int, default=None)

    p = gsub.add_parser("gen", help="write .arena, .dfa and .json config files")
    grid_args(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--name", default="grid")
    p.set_defaults(func=cmd_grid_gen)

    p = gsub.add_parser("sweep", help="verdict for every P1 start cell (CSV)")
    grid_args(p)
    p.add_argument("-o", "--out", default="-")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_grid_sweep)

    p = gsub.add_parser("replay", help="replay the known opacity-enforcing winning path")
    grid_args(p)
    p.set_defaults(func=cmd_grid_replay)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except gw.ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
