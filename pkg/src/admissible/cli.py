"""Command-line front end.

Exit status: 0 on success, 1 when the analysis answers no (strategy not
admissible, no winner within the memory bound, validation failure), 2 when
the invocation or its inputs are broken.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence, TextIO

from . import aa_synthesis as aa
from .admissibility import baseline_admissible_strategy, classify_strategy, la_actions
from .arena import (ArenaError, MooreStrategy, StrategyError, check_strategy, parse_arena,
                    simulate_run)
from .objectives import Normalized, normalize
from .values import SEMANTICS, UnsupportedError, semantics_name, state_values


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def load_arena(path: str):
    return parse_arena(_read(path))


def load_strategy(path: str) -> MooreStrategy:
    try:
        doc = json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return MooreStrategy.from_json(doc)


def _player(arena, p: int) -> int:
    if p not in arena.player_ids:
        raise InputError(f"player {p} does not exist (players are 1..{arena.players})")
    if p not in arena.objectives:
        raise InputError(f"player {p} has no objective in the arena file")
    return p


def _strategy_doc(norm: Normalized, strategy: MooreStrategy) -> dict:
    projected = norm.project_strategy(strategy)
    if projected is not None:
        order = [s for s in norm.arena.states if norm.lift(norm.origin[s])[0] == s]
        return projected.to_json([norm.origin[s] for s in order])
    return strategy.to_json(norm.arena.states)


# -- subcommands -------------------------------------------------------------

def cmd_values(args, out: TextIO) -> int:
    arena = load_arena(args.arena)
    p = _player(arena, args.player)
    norm = normalize(arena, players=[p])
    table = state_values(norm.arena, None, p, args.semantics)
    doc = table.to_json()
    if args.format == "json":
        _emit(out, doc)
    else:
        out.write(f"player {p}, {table.semantics}\n")
        for s, v in table.values.items():
            out.write(f"  {s:<12} {v:+d}\n")
    return 0


def cmd_la(args, out: TextIO) -> int:
    arena = load_arena(args.arena)
    p = _player(arena, args.player)
    norm = normalize(arena, players=[p])
    table = la_actions(norm.arena, None, p, args.semantics)
    if args.format == "json":
        _emit(out, table.to_json())
    else:
        out.write(f"player {p}, {table.semantics}\n")
        for s, classes in table.classes.items():
            text = "  ".join("{" + ", ".join(c) + "}" for c in classes)
            out.write(f"  {s:<12} {text}\n")
    return 0


def cmd_check(args, out: TextIO) -> int:
    arena = load_arena(args.arena)
    strategy = load_strategy(args.strategy)
    p = strategy.player
    if args.player is not None and args.player != p:
        raise InputError(f"strategy belongs to player {p}, not {args.player}")
    _player(arena, p)
    check_strategy(arena, strategy)
    norm = normalize(arena, players=[p])
    verdict = classify_strategy(norm.arena, None, p, args.semantics,
                                norm.lift_strategy(strategy))
    doc = {"player": p, "semantics": semantics_name(args.semantics), **verdict.to_json()}
    if args.format == "json":
        _emit(out, doc)
    else:
        word = "admissible" if verdict.admissible else "not admissible"
        out.write(f"player {p}, {doc['semantics']}: {word} (LA: {verdict.la}, "
                  f"SCO: {verdict.sco})\n")
        for key in ("la_witness", "sco_witness"):
            if key in doc:
                out.write(f"  {key}: {json.dumps(doc[key])}\n")
    return 0 if verdict.admissible else 1


def cmd_synth(args, out: TextIO) -> int:
    arena = load_arena(args.arena)
    p = _player(arena, args.player)
    missing = [q for q in arena.player_ids if q not in arena.objectives]
    if missing:
        raise InputError(f"players {missing} have no objective; synthesis needs all of them")
    sem = semantics_name(args.semantics)
    norm = normalize(arena)
    game = None
    doc: dict = {"status": None, "player": p, "semantics": sem,
                 "memory_bound": args.memory_bound}
    if args.safety_fast:
        try:
            final = aa.synthesize_aa_safety(norm.arena, None, p, sem)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        doc["method"] = "safety-pruning"
        if final is None:
            doc["status"] = "none"
            _emit_any(out, args.format, doc)
            return 1
    else:
        game = aa.build_aa_game(norm.arena, None, p, sem)
        doc["method"] = "bounded-memory"
        stats = aa.SearchStats()
        try:
            winner = aa.synthesize_aa_bounded(norm.arena, None, p, sem, args.memory_bound,
                                              budget=args.budget, stats=stats, game=game)
        except aa.BudgetExceeded as exc:
            doc.update(status="budget_exceeded", message=str(exc), machines=stats.machines)
            _emit_any(out, args.format, doc)
            return 1
        doc["machines_checked"] = stats.machines
        doc["labelled_game"] = _game_stats(norm, game)
        if winner is aa.NONE_AT_BOUND:
            doc["status"] = "none_at_bound"
            _emit_any(out, args.format, doc)
            return 1
        doc["labelled_winner"] = _strategy_doc(norm, winner)
        final = aa.extract_admissible_winner(norm.arena, None, p, sem, winner, game)
    doc["status"] = "winner"
    doc["strategy"] = _strategy_doc(norm, final)
    suite = aa.adversary_suite(norm.arena, None, p, sem, size=args.suite_size, seed=args.seed)
    report = aa.validate_vs_admissible(norm.arena, None, p, sem, final, suite)
    doc["validation"] = report.to_json()
    _emit_any(out, args.format, doc)
    return 0 if report.passed else 1


def cmd_simulate(args, out: TextIO) -> int:
    arena = load_arena(args.arena)
    norm = normalize(arena)
    profile = {}
    for path in args.strategy:
        strat = load_strategy(path)
        _player(arena, strat.player)
        check_strategy(arena, strat)
        if strat.player in profile:
            raise InputError(f"two strategies given for player {strat.player}")
        profile[strat.player] = norm.lift_strategy(strat)
    for q in arena.player_ids:
        if q not in profile:
            if q not in arena.objectives:
                raise InputError(f"no strategy and no objective for player {q}")
            profile[q] = baseline_admissible_strategy(norm.arena, None, q, args.semantics)
    runs = []
    for i in range(args.runs):
        run = simulate_run(norm.arena, profile, args.steps, seed=args.seed + i)
        runs.append(norm.project_run(run))
    doc = {"seed": args.seed, "steps": args.steps, "runs": runs}
    if args.format == "json":
        _emit(out, doc)
    else:
        for run in runs:
            out.write(" ".join(run) + "\n")
    return 0


def cmd_export_dot(args, out: TextIO) -> int:
    arena = load_arena(args.arena)
    p = _player(arena, args.player)
    norm = normalize(arena)
    game = aa.build_aa_game(norm.arena, None, p, args.semantics)
    out.write(to_dot(norm, game))
    return 0


# -- rendering ---------------------------------------------------------------

def _display(norm: Normalized, game: aa.AaGame) -> dict[str, str]:
    """Original state names where they are unambiguous in the labelled game."""
    used = {v.state for v in game.labelled.nodes} | {v.source for v in game.labelled.nodes
                                                      if v.source is not None}
    count: dict[str, int] = {}
    for s in used:
        count[norm.origin[s]] = count.get(norm.origin[s], 0) + 1
    return {s: norm.origin[s] if count.get(norm.origin[s]) == 1 else s
            for s in norm.arena.states}


def _node_name(v: aa.LabelledState, names: dict[str, str]) -> str:
    if v.joint is None:
        return f"{names[v.state]}'"
    return f"({names[v.state]},({','.join(v.joint)}))"


def _game_stats(norm: Normalized, game: aa.AaGame) -> dict:
    names = _display(norm, game)
    lab = game.labelled
    per_obs: dict[str, int] = {}
    for v in lab.nodes[1:]:
        per_obs[names[v.state]] = per_obs.get(names[v.state], 0) + 1
    return {
        "labelled_states": len(lab.nodes),
        "per_observation": per_obs,
        "after_help": {str(q): [_node_name(lab.nodes[x], names) for x in sorted(xs)]
                       for q, xs in game.atoms.after_help.items()},
        "val1_sizes": {str(q): len(xs) for q, xs in game.atoms.val1.items()},
        "formula": game.stats()["formula"],
    }


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(norm: Normalized, game: aa.AaGame) -> str:
    """Graphviz rendering of the labelled game: one dashed cluster per
    observation, bold AfterHelp states of the other players, filled
    value-1 states of the protagonist."""
    lab = game.labelled
    names = _display(norm, game)
    p = lab.player
    helped = set().union(*(game.atoms.after_help[q] for q in lab.arena.others(p)))
    lines = ["digraph labelled {", "  rankdir=LR;", "  node [shape=box];"]
    for i, s in enumerate(lab.arena.states):
        members = [x for x in range(len(lab.nodes)) if lab.observation(x) == s]
        if not members:
            continue
        lines.append(f"  subgraph cluster_{i} {{")
        lines.append(f"    label={_quote(names[s])}; style=dashed;")
        for x in members:
            attrs = [f"label={_quote(_node_name(lab.nodes[x], names))}"]
            if x in helped:
                attrs.append("penwidth=3")
            if x in game.atoms.val1[p]:
                attrs.append("style=filled, fillcolor=lightgray")
            lines.append(f"    n{x} [{', '.join(attrs)}];")
        lines.append("  }")
    lines.append("  start [shape=point];")
    lines.append("  start -> n0;")
    for x in range(len(lab.nodes)):
        labels: dict[int, list[str]] = {}
        s = lab.observation(x)
        for a in lab.rows(s):
            for c in lab.cols(s):
                y = lab.step(x, a, c)
                joint = lab.arena.compose(p, a, c)
                labels.setdefault(y, []).append("(" + ",".join(joint) + ")")
        for y, ls in labels.items():
            lines.append(f"  n{x} -> n{y} [label={_quote(' '.join(ls))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _emit(out: TextIO, doc) -> None:
    out.write(json.dumps(doc, indent=2) + "\n")


def _emit_any(out: TextIO, fmt: str, doc: dict) -> None:
    if fmt == "json":
        _emit(out, doc)
        return
    out.write(f"status: {doc['status']}\n")
    for key in ("player", "semantics", "method", "memory_bound", "machines_checked"):
        if key in doc:
            out.write(f"{key}: {doc[key]}\n")
    if "strategy" in doc:
        out.write("strategy:\n")
        for row in doc["strategy"]["output"]:
            move = " + ".join(f"{w} {a}" if w != "1" else a for a, w in row["move"].items())
            out.write(f"  {row['memory']:<8} {row['state']:<12} {move}\n")
        for row in doc["strategy"]["update"]:
            out.write(f"  {row['memory']} --{row['state']}--> {row['next']}\n")
    if "validation" in doc:
        out.write(f"validation: {json.dumps(doc['validation'])}\n")


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="admissible",
        description="Values, admissibility and assume-admissible synthesis for "
                    "concurrent games.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, player=True, player_required=True):
        sp.add_argument("--arena", required=True, help="arena file")
        if player:
            sp.add_argument("--player", type=int, required=player_required)
        sp.add_argument("--semantics", default="almost-sure", choices=SEMANTICS)
        sp.add_argument("--format", default="json", choices=("json", "text"))

    common(sub.add_parser("values", help="state values of one player"))
    common(sub.add_parser("la", help="locally admissible actions of one player"))
    sp = sub.add_parser("check", help="admissibility verdict for a strategy")
    common(sp, player_required=False)
    sp.add_argument("--strategy", required=True, help="strategy JSON document")
    sp = sub.add_parser("synth-aa", help="assume-admissible synthesis")
    common(sp)
    sp.add_argument("--memory-bound", type=int, default=2)
    sp.add_argument("--safety-fast", action="store_true",
                    help="prune to LA actions and solve the safety game directly")
    sp.add_argument("--budget", type=int, default=200_000,
                    help="maximum number of machines to check")
    sp.add_argument("--suite-size", type=int, default=5,
                    help="admissible adversary profiles used for validation")
    sp.add_argument("--seed", type=int, default=0)
    sp = sub.add_parser("simulate", help="sample runs of a strategy profile")
    common(sp, player=False)
    sp.add_argument("--strategy", action="append", default=[],
                    help="strategy JSON (repeatable); other players use the baseline")
    sp.add_argument("--steps", type=int, default=20)
    sp.add_argument("--runs", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp = sub.add_parser("export-dot", help="labelled game in Graphviz syntax")
    common(sp)
    return parser


COMMANDS = {"values": cmd_values, "la": cmd_la, "check": cmd_check, "synth-aa": cmd_synth,
            "simulate": cmd_simulate, "export-dot": cmd_export_dot}


def run_command(args: argparse.Namespace, out: TextIO | None = None,
                err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    if getattr(args, "memory_bound", 1) < 1:
        err.write("error: --memory-bound must be >= 1\n")
        return 2
    if getattr(args, "steps", 1) < 1 or getattr(args, "runs", 1) < 1:
        err.write("error: --steps and --runs must be >= 1\n")
        return 2
    try:
        return COMMANDS[args.command](args, out)
    except InputError as exc:
        err.write(f"error: {exc}\n")
    except ArenaError as exc:
        err.write(f"arena error: {exc}\n")
    except StrategyError as exc:
        err.write(f"strategy error: {exc}\n")
    except UnsupportedError as exc:
        err.write(f"unsupported: {exc}\n")
    return 2


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return run_command(args)


if __name__ == "__main__":
    sys.exit(main())
