"""Assume-admissible synthesis.

The labelled game records, in every state, the joint action that led to it,
and only lets players use LA Dirac actions.  Player p must surely satisfy
the implication formula built by :func:`aa_formula` there with a strategy
that only observes base states.  Winners are searched among Moore machines
with a bounded number of memories, then turned into admissible strategies
of the original game.
"""
from __future__ import annotations

import itertools
import json
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from . import fixpoints as fp
from .admissibility import (WIN_MEMORY, LaTable, NotAdmissibleError, _rebuild,
                            baseline_admissible_strategy, classify_strategy,
                            dominating_admissible, la_from_values, winning_moves)
from .arena import Action, Arena, MixedMove, MooreStrategy, State, product_graph
from .formula import (And, Implies, InfOften, Lasso, Not, Or, Reach, check_universal,
                      relabel, simplify)
from .kernels import AA, EA, EE, MoveGraph, mask
from .objectives import Objective
from .values import (SURE, StateValueTable, check_supported, semantics_name, state_values,
                     strategy_values)


class BudgetExceeded(RuntimeError):
    """The machine enumeration hit its budget before finishing."""


class _NoneAtBound:
    """No winner with at most the requested number of memories."""

    def __repr__(self):
        return "NONE_AT_BOUND"

    def __bool__(self):
        return False


NONE_AT_BOUND = _NoneAtBound()


def _objectives(arena: Arena, objectives: Mapping[int, Objective] | None
                ) -> dict[int, Objective]:
    objs = dict(arena.objectives if objectives is None else objectives)
    missing = [q for q in arena.player_ids if q not in objs]
    if missing:
        raise ValueError(f"players {missing} have no objective")
    return objs


# -- the labelled game -------------------------------------------------------

@dataclass(frozen=True)
class LabelledState:
    """``state`` entered from ``source`` by ``joint``; the initial labelled
    state has no source and no joint action."""

    state: State
    source: State | None = None
    joint: tuple[Action, ...] | None = None

    def __str__(self):
        if self.joint is None:
            return f"{self.state}'"
        return f"({self.state},({','.join(self.joint)}))"


@dataclass(eq=False)
class LabelledArena:
    """Reachable part of the labelled game for protagonist ``player``.

    Node 0 is the initial state.  Moves: the protagonist's LA actions
    (rows) against the LA joint actions of the others (columns).
    """

    arena: Arena
    player: int
    semantics: str
    values: dict[int, StateValueTable]
    la: dict[int, LaTable]
    nodes: list[LabelledState]
    index: dict[LabelledState, int]
    cols_at: dict[State, list[tuple[Action, ...]]]

    def observation(self, x: int) -> State:
        return self.nodes[x].state

    def rows(self, s: State) -> tuple[Action, ...]:
        return self.la[self.player].actions(s)

    def cols(self, s: State) -> list[tuple[Action, ...]]:
        return self.cols_at[s]

    def target(self, s: State, joint: tuple[Action, ...]) -> LabelledState:
        return LabelledState(self.arena.step(s, joint), s, joint)

    def step(self, x: int, a: Action, c: Sequence[Action]) -> int:
        s = self.observation(x)
        return self.index[self.target(s, self.arena.compose(self.player, a, c))]

    def successors(self, x: int, a: Action) -> list[int]:
        return [self.step(x, a, c) for c in self.cols(self.observation(x))]

    def lift(self, states) -> frozenset:
        states = set(states)
        return frozenset(x for x, v in enumerate(self.nodes) if v.state in states)

    def labels(self, xs) -> list[str]:
        return [str(self.nodes[x]) for x in sorted(xs)]

    def move_graph(self) -> MoveGraph:
        return MoveGraph([[self.successors(x, a) for a in self.rows(self.observation(x))]
                          for x in range(len(self.nodes))])


@dataclass(eq=False)
class AaAtoms:
    val0: dict[int, frozenset]
    val1: dict[int, frozenset]
    not_val0: dict[int, frozenset]
    after_help: dict[int, frozenset]
    win: dict[int, object]


@dataclass(eq=False)
class AaGame:
    labelled: LabelledArena
    atoms: AaAtoms
    formula: object
    objectives: dict[int, Objective] = field(default_factory=dict)

    def stats(self) -> dict:
        lab = self.labelled
        per_obs: dict[State, int] = {}
        for v in lab.nodes[1:]:
            per_obs[v.state] = per_obs.get(v.state, 0) + 1
        return {
            "labelled_states": len(lab.nodes),
            "per_observation": {s: per_obs.get(s, 0) for s in lab.arena.states},
            "after_help": {str(q): lab.labels(x) for q, x in self.atoms.after_help.items()},
            "val1_sizes": {str(q): len(x) for q, x in self.atoms.val1.items()},
            "formula": str(simplify(self.formula)),
        }


def build_labelled_arena(arena: Arena, player: int, semantics: str,
                         objectives: Mapping[int, Objective] | None = None) -> LabelledArena:
    objs = _objectives(arena, objectives)
    sem = semantics_name(semantics)
    for obj in objs.values():
        check_supported(obj, sem)
    values = {q: state_values(arena, objs[q], q, sem) for q in arena.player_ids}
    la = {q: la_from_values(arena, values[q]) for q in arena.player_ids}
    others = arena.others(player)
    cols = {s: list(itertools.product(*(la[q].actions(s) for q in others)))
            for s in arena.states}
    root = LabelledState(arena.init)
    lab = LabelledArena(arena, player, sem, values, la, [root], {root: 0}, cols)
    queue = deque([0])
    while queue:
        s = lab.observation(queue.popleft())
        for a in lab.rows(s):
            for c in cols[s]:
                node = lab.target(s, arena.compose(player, a, c))
                if node not in lab.index:
                    lab.index[node] = len(lab.nodes)
                    lab.nodes.append(node)
                    queue.append(lab.index[node])
    return lab


def after_help(lab: LabelledArena, q: int) -> frozenset:
    """Labelled states where ``q`` has value 0 although some other answer
    to q's last action would have led to a different state of value >= 0."""
    vals = lab.values[q]
    out = set()
    for x, v in enumerate(lab.nodes):
        if v.joint is None or vals[v.state] != 0:
            continue
        succ = lab.arena.succ(q, v.source, v.joint[q - 1])
        if any(vals[t] >= 0 and t != v.state for t in succ):
            out.add(x)
    return frozenset(out)


def _win_atom(lab: LabelledArena, q: int, obj: Objective):
    X = lab.lift(obj.states)
    if obj.kind == "reach":
        return Reach(X, f"Win_{q}")
    if obj.kind == "safety":
        return Not(Reach(X, f"Bad_{q}"))
    return InfOften(X, f"Win_{q}")


def aa_formula(atoms: AaAtoms, player: int, players: Sequence[int]):
    """(AND over q != p of phi0_q & phi1_q) -> (Win_p | <>Val1_p) where
    phi0_q = <>!Val0_q | Win_q | []<>AfterHelp_q and phi1_q = <>Val1_q -> Win_q."""
    hyp = []
    for q in players:
        if q == player:
            continue
        hyp.append(Or((Reach(atoms.not_val0[q], f"!Val0_{q}"), atoms.win[q],
                       InfOften(atoms.after_help[q], f"AfterHelp_{q}"))))
        hyp.append(Implies(Reach(atoms.val1[q], f"Val1_{q}"), atoms.win[q]))
    goal = Or((atoms.win[player], Reach(atoms.val1[player], f"Val1_{player}")))
    return Implies(And(tuple(hyp)), goal)


def build_aa_game(arena: Arena, objectives: Mapping[int, Objective] | None, player: int,
                  semantics: str) -> AaGame:
    objs = _objectives(arena, objectives)
    lab = build_labelled_arena(arena, player, semantics, objs)
    everything = frozenset(range(len(lab.nodes)))
    ids = list(arena.player_ids)
    val0 = {q: lab.lift(lab.values[q].states_with(0)) for q in ids}
    atoms = AaAtoms(
        val0=val0,
        val1={q: lab.lift(lab.values[q].states_with(1)) for q in ids},
        not_val0={q: everything - val0[q] for q in ids},
        after_help={q: after_help(lab, q) for q in ids},
        win={q: _win_atom(lab, q, objs[q]) for q in ids},
    )
    return AaGame(lab, atoms, aa_formula(atoms, player, ids), objs)


# -- machines observing base states ------------------------------------------

def _machine_product(lab: LabelledArena, out: Mapping[tuple[int, State], Action],
                     upd: Mapping[tuple[int, State], int]):
    """Reachable (labelled node, memory) pairs under a (partial) machine.

    Returns ``(nodes, succ, missing)`` where ``missing`` is the first
    undefined entry met in breadth-first order, or None.
    """
    root = (0, 0)
    index = {root: 0}
    nodes = [root]
    succ: list[list[int]] = []
    k = 0
    while k < len(nodes):
        x, m = nodes[k]
        k += 1
        s = lab.observation(x)
        a = out.get((m, s))
        if a is None:
            return nodes, succ, ("out", m, s)
        row = []
        for y in lab.successors(x, a):
            t = lab.observation(y)
            m2 = upd.get((m, t))
            if m2 is None:
                return nodes, succ, ("upd", m, t)
            node = (y, m2)
            if node not in index:
                index[node] = len(nodes)
                nodes.append(node)
            row.append(index[node])
        succ.append(row)
    return nodes, succ, None


def _as_strategy(player: int, out, upd, used: int) -> MooreStrategy:
    names = [f"m{i}" for i in range(used)]
    return MooreStrategy(
        player, tuple(names), names[0],
        {(names[m], s): MixedMove.dirac(a) for (m, s), a in out.items()},
        {(names[m], t): names[n] for (m, t), n in upd.items() if n != m})


def _machines(lab: LabelledArena, k: int) -> Iterator[tuple[dict, dict, list, list]]:
    """Every observation-based Dirac machine with exactly ``k`` memories,
    restricted to the entries its play can reach.  A fresh memory always gets
    the next unused index, so renamings are enumerated once."""
    out: dict = {}
    upd: dict = {}

    def used() -> int:
        return max(upd.values(), default=0) + 1

    def walk():
        nodes, succ, missing = _machine_product(lab, out, upd)
        if missing is None:
            if used() == k:
                yield dict(out), dict(upd), nodes, succ
            return
        kind, m, s = missing
        if kind == "out":
            for a in lab.rows(s):
                out[(m, s)] = a
                yield from walk()
            del out[(m, s)]
        else:
            for n in range(min(used() + 1, k)):
                upd[(m, s)] = n
                yield from walk()
            del upd[(m, s)]

    yield from walk()


def _lift_formula(formula, nodes):
    proj = [x for x, _ in nodes]
    return relabel(formula, lambda X: (i for i, x in enumerate(proj) if x in X))


@dataclass
class SearchStats:
    machines: int = 0
    memories: int = 0


def synthesize_aa_bounded(arena: Arena, objectives: Mapping[int, Objective] | None,
                          player: int, semantics: str, memory_bound: int,
                          budget: int = 200_000, stats: SearchStats | None = None,
                          game: AaGame | None = None):
    """First observation-based Dirac machine with at most ``memory_bound``
    memories that surely satisfies the assume-admissible formula in the
    labelled game, or ``NONE_AT_BOUND``.

    Machines are tried by memory count, then in the order their choices are
    met while exploring the play breadth-first (actions in arena order).
    ``budget`` caps the number of machines checked.
    """
    if memory_bound < 1:
        raise ValueError("memory bound must be >= 1")
    game = game or build_aa_game(arena, objectives, player, semantics)
    stats = stats if stats is not None else SearchStats()
    for k in range(1, memory_bound + 1):
        for out, upd, nodes, succ in _machines(game.labelled, k):
            stats.machines += 1
            if stats.machines > budget:
                raise BudgetExceeded(f"more than {budget} machines checked")
            ok, _ = check_universal(succ, _lift_formula(game.formula, nodes))
            if ok:
                stats.memories = k
                return _as_strategy(player, out, upd, k)
    return NONE_AT_BOUND


def check_machine(game: AaGame, machine: MooreStrategy) -> tuple[bool, Lasso | None]:
    """Universal check of the formula on the labelled game restricted by an
    observation-based Dirac machine (missing updates keep the memory)."""
    order = [machine.init] + [m for m in machine.memory if m != machine.init]
    names = {m: i for i, m in enumerate(order)}
    lab = game.labelled
    out, upd = {}, {}
    for (m, s), mv in machine.output.items():
        if not mv.is_dirac:
            raise ValueError("machines in the labelled game are Dirac")
        out[(names[m], s)] = mv.weights[0][0]
    for m in machine.memory:
        for t in lab.arena.states:
            upd[(names[m], t)] = names[machine.next(m, t)]
    for (m, s), a in out.items():
        if a not in lab.rows(s):
            return False, None
    nodes, succ, missing = _machine_product(lab, out, upd)
    if missing is not None:
        return False, None
    ok, lasso = check_universal(succ, _lift_formula(game.formula, nodes))
    if lasso is not None:
        lasso = Lasso([str(lab.nodes[nodes[i][0]]) for i in lasso.prefix],
                      [str(lab.nodes[nodes[i][0]]) for i in lasso.cycle])
    return ok, lasso


# -- from a labelled-game winner to an admissible strategy -------------------

def extend_machine(arena: Arena, objectives: Mapping[int, Objective] | None, player: int,
                   semantics: str, machine: MooreStrategy) -> MooreStrategy:
    """The machine read as a strategy of the original game; memory/state
    pairs the labelled game never reaches get the lowest LA action."""
    objs = _objectives(arena, objectives)
    sem = semantics_name(semantics)
    la = la_from_values(arena, state_values(arena, objs[player], player, sem))
    output = dict(machine.output)
    for m in machine.memory:
        for s in arena.states:
            output.setdefault((m, s), MixedMove.dirac(la.actions(s)[0]))
    return MooreStrategy(player, machine.memory, machine.init, output, dict(machine.update))


def splice_winning(arena: Arena, objective: Objective, player: int, semantics: str,
                   strategy: MooreStrategy) -> MooreStrategy:
    """Switch to a winning strategy at every node whose state has value 1
    while the strategy does not win from there."""
    sem = semantics_name(semantics)
    vals = state_values(arena, objective, player, sem)
    pg = product_graph(arena, strategy)
    sv = strategy_values(arena, objective, player, sem, strategy, pg)
    splice = {i: WIN_MEMORY for i, ((s, _), v) in enumerate(sv.items())
              if vals[s] == 1 and v < 1}
    if not splice:
        return strategy
    win = winning_moves(arena, objective, player, sem, vals)
    helper = MooreStrategy(player, (WIN_MEMORY,), WIN_MEMORY,
                           {(WIN_MEMORY, s): mv for s, mv in win.items()})
    return _rebuild(pg, [strategy.move(m, s) for s, m in pg.nodes], splice, helper)


def extract_admissible_winner(arena: Arena, objectives: Mapping[int, Objective] | None,
                              player: int, semantics: str, winner: MooreStrategy,
                              game: AaGame | None = None) -> MooreStrategy:
    objs = _objectives(arena, objectives)
    game = game or build_aa_game(arena, objs, player, semantics)
    ok, _ = check_machine(game, winner)
    if not ok:
        raise ValueError("the machine does not win the labelled game")
    sigma = extend_machine(arena, objs, player, semantics, winner)
    sigma = splice_winning(arena, objs[player], player, semantics, sigma)
    return dominating_admissible(arena, objs[player], player, semantics, sigma)


# -- safety games ------------------------------------------------------------

def synthesize_aa_safety(arena: Arena, objectives: Mapping[int, Objective] | None,
                         player: int, semantics: str = SURE) -> MooreStrategy | None:
    """With simple safety objectives admissible means LA: prune every
    player to LA actions and solve player ``player``'s safety game."""
    objs = _objectives(arena, objectives)
    if any(o.kind != "safety" for o in objs.values()):
        raise ValueError("the pruning shortcut needs safety objectives for every player")
    sem = semantics_name(semantics)
    la = {q: la_from_values(arena, state_values(arena, objs[q], q, sem))
          for q in arena.player_ids}
    allowed = {s: la[player].actions(s) for s in arena.states}
    cols = {s: list(itertools.product(*(la[q].actions(s) for q in arena.others(player))))
            for s in arena.states}
    g = arena.move_graph(player, allowed, cols)
    bad = mask(len(arena.states), (arena.index[s] for s in objs[player].states))
    W = fp.invariant(g, fp.complement(bad), EA)
    if not W[arena.index[arena.init]]:
        return None
    moves = {}
    for s in arena.states:
        choice = allowed[s][0]
        if W[arena.index[s]]:
            for a in allowed[s]:
                if all(W[arena.index[arena.step(s, arena.compose(player, a, c))]]
                       for c in cols[s]):
                    choice = a
                    break
        moves[s] = choice
    return MooreStrategy.memoryless(player, moves)


# -- validation against admissible adversaries ---------------------------------

@dataclass
class ValidationReport:
    profiles: int
    losing: list[int]

    @property
    def passed(self) -> bool:
        return not self.losing

    def to_json(self) -> dict:
        return {"profiles": self.profiles, "losing": self.losing, "passed": self.passed}


def profile_chain(arena: Arena, profile: Mapping[int, MooreStrategy]
                  ) -> tuple[list[tuple[State, tuple]], list[list[int]]]:
    """Reachable (state, memories) nodes of a full profile and their
    positive-probability successors."""
    ids = list(arena.player_ids)
    root = (arena.init, tuple(profile[q].init for q in ids))
    index = {root: 0}
    nodes = [root]
    succ: list[list[int]] = []
    k = 0
    while k < len(nodes):
        s, mems = nodes[k]
        k += 1
        supports = [[a for a in arena.acts(q, s) if a in profile[q].move(m, s).support]
                    for q, m in zip(ids, mems)]
        row = []
        for joint in itertools.product(*supports):
            t = arena.step(s, joint)
            node = (t, tuple(profile[q].next(m, t) for q, m in zip(ids, mems)))
            if node not in index:
                index[node] = len(nodes)
                nodes.append(node)
            if index[node] not in row:
                row.append(index[node])
        succ.append(row)
    return nodes, succ


def profile_wins(arena: Arena, objective: Objective, semantics: str,
                 profile: Mapping[int, MooreStrategy]) -> bool:
    """Exact win check of a full profile: every run (sure) or almost every
    run (almost-sure) satisfies the objective."""
    sem = semantics_name(semantics)
    check_supported(objective, sem)
    nodes, succ = profile_chain(arena, profile)
    g = MoveGraph([[row] for row in succ])
    goal = mask(len(nodes), (i for i, (s, _) in enumerate(nodes) if s in objective.states))
    if objective.kind == "safety":
        return bool(fp.invariant(g, fp.complement(goal), AA)[0])
    if objective.kind == "buchi":
        return bool(fp.recurrence(g, goal, AA)[0])
    if sem == SURE:
        return bool(fp.attractor(g, goal, AA)[0][0])
    can_reach, _ = fp.attractor(g, goal, EE)
    return all(can_reach)


def validate_vs_admissible(arena: Arena, objectives: Mapping[int, Objective] | None,
                           player: int, semantics: str, candidate: MooreStrategy,
                           adversary_suite: Sequence[Mapping[int, MooreStrategy]]
                           ) -> ValidationReport:
    objs = _objectives(arena, objectives)
    sem = semantics_name(semantics)
    for i, profile in enumerate(adversary_suite):
        for q, strat in profile.items():
            if q == player:
                continue
            verdict = classify_strategy(arena, objs[q], q, sem, strat)
            if not verdict.admissible:
                raise NotAdmissibleError(
                    f"adversary profile {i}: strategy of player {q} is not admissible "
                    f"({verdict.to_json()})")
    losing = []
    for i, profile in enumerate(adversary_suite):
        full = dict(profile)
        full[player] = candidate
        if not profile_wins(arena, objs[player], sem, full):
            losing.append(i)
    return ValidationReport(len(adversary_suite), losing)


def random_la_machine(arena: Arena, la: LaTable, rng: random.Random,
                      max_memory: int = 2) -> MooreStrategy:
    k = rng.randint(1, max_memory)
    names = tuple(f"r{i}" for i in range(k))
    output = {(m, s): MixedMove.dirac(rng.choice(la.actions(s)))
              for m in names for s in arena.states}
    update = {(m, t): rng.choice(names) for m in names for t in arena.states}
    return MooreStrategy(la.player, names, names[0], output, update)


def adversary_suite(arena: Arena, objectives: Mapping[int, Objective] | None, player: int,
                    semantics: str, size: int = 5, seed: int = 0
                    ) -> list[dict[int, MooreStrategy]]:
    """Admissible profiles of the other players: the baseline strategies
    first, then random LA machines made admissible by repair."""
    objs = _objectives(arena, objectives)
    sem = semantics_name(semantics)
    others = arena.others(player)
    rng = random.Random(seed)
    la = {q: la_from_values(arena, state_values(arena, objs[q], q, sem)) for q in others}
    suite = [{q: baseline_admissible_strategy(arena, objs[q], q, sem) for q in others}]
    seen = {_key(suite[0])}
    for _ in range(50 * size):
        if len(suite) >= size:
            break
        profile = {q: dominating_admissible(arena, objs[q], q, sem,
                                            random_la_machine(arena, la[q], rng))
                   for q in others}
        key = _key(profile)
        if key not in seen:
            seen.add(key)
            suite.append(profile)
    return suite


def _key(profile: Mapping[int, MooreStrategy]) -> str:
    return json.dumps({q: s.to_json() for q, s in sorted(profile.items())}, sort_keys=True)
