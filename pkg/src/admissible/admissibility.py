"""Move dominance, locally-admissible moves and admissible strategies.

A strategy is admissible iff every move it plays is locally admissible (LA)
and it keeps the value of every history it reaches (SCO).  Dominance
between Dirac moves is decided from the state values alone, so everything
here works on state values plus the product of a strategy with the arena.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from . import fixpoints as fp
from .arena import (Action, Arena, MixedMove, MooreStrategy, ProductGraph, State,
                    StrategyError, product_graph)
from .kernels import EA, mask
from .objectives import Objective
from .values import (ALMOST_SURE, SURE, StateValueTable, _objective, check_supported,
                     semantics_name, state_values, strategy_values)


class NotAdmissibleError(ValueError):
    pass


# -- dominance between Dirac moves -------------------------------------------

def dirac_dominance_leq(values: StateValueTable, arena: Arena, s: State, a: Action,
                        b: Action) -> bool:
    """Is ``a`` weakly dominated by ``b`` at ``s`` for ``values.player``?"""
    p = values.player
    acts = arena.acts(p, s)
    for x in (a, b):
        if x not in acts:
            raise StrategyError(f"action {x!r} is not available to player {p} at {s!r}")
    for c in arena.adversary_tuples(p, s):
        ta = arena.step(s, arena.compose(p, a, c))
        tb = arena.step(s, arena.compose(p, b, c))
        va, vb = values[ta], values[tb]
        if va > vb or (va == 0 and vb == 0 and ta != tb):
            return False
    return True


@dataclass(frozen=True)
class LaTable:
    """LA Dirac actions per state and their partition into equivalence
    classes; actions and classes follow the arena's action order."""

    player: int
    semantics: str
    classes: dict[State, tuple[tuple[Action, ...], ...]]

    def actions(self, s: State) -> tuple[Action, ...]:
        return tuple(a for cls in self.classes[s] for a in cls)

    def is_la(self, s: State, a: Action) -> bool:
        return any(a in cls for cls in self.classes[s])

    def class_of(self, s: State, a: Action) -> int | None:
        for i, cls in enumerate(self.classes[s]):
            if a in cls:
                return i
        return None

    def to_json(self) -> dict:
        return {"player": self.player, "semantics": self.semantics,
                "states": {s: {"actions": list(self.actions(s)),
                               "classes": [list(c) for c in cls]}
                           for s, cls in self.classes.items()}}


def la_from_values(arena: Arena, values: StateValueTable) -> LaTable:
    p = values.player
    classes = {}
    for s in arena.states:
        acts = arena.acts(p, s)
        leq = {(a, b): dirac_dominance_leq(values, arena, s, a, b) for a in acts for b in acts}
        la = [a for a in acts
              if not any(leq[(a, b)] and not leq[(b, a)] for b in acts)]
        groups: list[list[Action]] = []
        for a in la:
            for g in groups:
                if leq[(a, g[0])] and leq[(g[0], a)]:
                    g.append(a)
                    break
            else:
                groups.append([a])
        classes[s] = tuple(tuple(g) for g in groups)
    return LaTable(p, values.semantics, classes)


def la_actions(arena: Arena, objective: Objective | None, player: int, semantics: str
               ) -> LaTable:
    return la_from_values(arena, state_values(arena, objective, player, semantics))


def is_mixed_move_la(la: LaTable, s: State, move: MixedMove) -> bool:
    """All support actions LA and pairwise equivalent."""
    if s not in la.classes:
        raise StrategyError(f"unknown state {s!r}")
    ids = {la.class_of(s, a) for a in move.support}
    return None not in ids and len(ids) == 1


# -- verdicts ----------------------------------------------------------------

@dataclass(frozen=True)
class AdmissibilityVerdict:
    la: bool
    sco: bool
    la_witness: dict | None = None
    sco_witness: dict | None = None

    @property
    def admissible(self) -> bool:
        return self.la and self.sco

    def to_json(self) -> dict:
        out = {"admissible": self.admissible, "la": self.la, "sco": self.sco}
        if self.la_witness:
            out["la_witness"] = self.la_witness
        if self.sco_witness:
            out["sco_witness"] = self.sco_witness
        return out


def _la_failure(pg: ProductGraph, la: LaTable) -> dict | None:
    for (s, m) in pg.nodes:
        mv = pg.strategy.move(m, s)
        if not is_mixed_move_la(la, s, mv):
            bad = [a for a in pg.rows[pg.index[(s, m)]] if not la.is_la(s, a)]
            return {"state": s, "memory": m, "move": mv.to_json(),
                    "offending": bad[0] if bad else str(mv),
                    "reason": "not LA" if bad else "mixes non-equivalent LA actions"}
    return None


def classify_strategy(arena: Arena, objective: Objective | None, player: int,
                      semantics: str, strategy: MooreStrategy) -> AdmissibilityVerdict:
    """LA and SCO check on the strategy's product graph.

    SCO is evaluated for every objective kind, including safety where it
    follows from LA; the redundant check doubles as a consistency test.
    """
    obj = _objective(arena, objective, player)
    sem = semantics_name(semantics)
    vals = state_values(arena, obj, player, sem)
    la = la_from_values(arena, vals)
    pg = product_graph(arena, strategy)
    la_wit = _la_failure(pg, la)
    sv = strategy_values(arena, obj, player, sem, strategy, pg)
    sco_wit = None
    for (s, m), v in sv.items():
        if v != vals[s]:
            sco_wit = {"state": s, "memory": m, "strategy_value": v, "state_value": vals[s]}
            break
    return AdmissibilityVerdict(la_wit is None, sco_wit is None, la_wit, sco_wit)


# -- winning play at value-1 states ------------------------------------------

def winning_moves(arena: Arena, objective: Objective | None, player: int, semantics: str,
                  values: StateValueTable | None = None) -> dict[State, MixedMove]:
    """Memoryless winning moves on the value-1 states.

    Sure semantics: a Dirac attractor/invariant strategy.  Almost-sure
    reachability: uniform over the actions keeping every successor at
    value 1 (Dirac once the target is reached).  Every move returned keeps
    all successors at value 1, so it is LA.
    """
    obj = _objective(arena, objective, player)
    sem = semantics_name(semantics)
    vals = values or state_values(arena, obj, player, sem)
    p = player
    W = vals.states_with(1)
    g = arena.move_graph(p)
    n = len(arena.states)
    goal = mask(n, (arena.index[s] for s in obj.states))

    def keeps(s: State, a: Action, inside) -> bool:
        return all(arena.step(s, arena.compose(p, a, c)) in inside
                   for c in arena.adversary_tuples(p, s))

    moves: dict[State, MixedMove] = {}
    if obj.kind == "safety":
        for s in arena.states:
            if s in W:
                moves[s] = MixedMove.dirac(next(a for a in arena.acts(p, s) if keeps(s, a, W)))
        return moves

    if obj.kind == "reach" and sem == ALMOST_SURE:
        for s in arena.states:
            if s not in W:
                continue
            safe = [a for a in arena.acts(p, s) if keeps(s, a, W)]
            if s in obj.states or len(safe) == 1:
                moves[s] = MixedMove.dirac(safe[0])
            else:
                moves[s] = MixedMove.uniform(safe)
        return moves

    if obj.kind == "reach":
        seed = goal
    else:
        Wm = mask(n, (arena.index[s] for s in W))
        seed = fp.intersect(goal, g.pre(EA, Wm))
    _, layer = fp.attractor(g, seed, EA)
    rank = {s: layer[arena.index[s]] for s in arena.states}
    for s in arena.states:
        if s not in W:
            continue
        if rank[s] == 0:
            moves[s] = MixedMove.dirac(next(a for a in arena.acts(p, s) if keeps(s, a, W)))
        else:
            closer = {t for t in arena.states if 0 <= rank[t] < rank[s]}
            moves[s] = MixedMove.dirac(next(a for a in arena.acts(p, s)
                                            if keeps(s, a, closer)))
    return moves


# -- baseline admissible strategy --------------------------------------------

DISPATCH = "D"


@dataclass
class _Lasso:
    steps: list[tuple[State, Action]]
    loop: int | None  # index the cycle returns to; None when the path exits to value 1

    def expected(self, i: int) -> State | None:
        if i + 1 < len(self.steps):
            return self.steps[i + 1][0]
        return None if self.loop is None else self.steps[self.loop][0]


def _find_lasso(arena: Arena, obj: Objective, player: int, vals: StateValueTable,
                la: LaTable, e: State) -> _Lasso:
    """Shortest LA path from the value-0 state ``e`` to a value-1 state or,
    failing that, into a value-0 cycle satisfying the objective."""
    p = player
    zero = vals.states_with(0)

    def edges(s):
        for a in la.actions(s):
            for c in arena.adversary_tuples(p, s):
                yield a, arena.step(s, arena.compose(p, a, c))

    def bfs(src, goal_test):
        parent = {src: None}
        queue = deque([src])
        while queue:
            s = queue.popleft()
            for a, t in edges(s):
                if goal_test(t):
                    path = [(s, a)]
                    while parent[path[0][0]] is not None:
                        path.insert(0, parent[path[0][0]])
                    return path, t
                if t in zero and t not in parent:
                    parent[t] = (s, a)
                    queue.append(t)
        return None, None

    path, _ = bfs(e, lambda t: vals[t] == 1)
    if path is not None:
        return _Lasso(path, None)
    if obj.kind == "reach":
        raise AssertionError(f"no LA path to value 1 from value-0 state {e}")
    # candidate cycle starts in BFS order from e
    order = [e]
    seen = {e}
    for s in order:
        for _, t in edges(s):
            if t in zero and t not in seen:
                seen.add(t)
                order.append(t)
    for u in order:
        if obj.kind == "buchi" and u not in obj.states:
            continue
        cycle, _ = bfs(u, lambda t, u=u: t == u)
        if cycle is None:
            continue
        prefix, _ = bfs(e, lambda t, u=u: t == u) if u != e else ([], None)
        return _Lasso(prefix + cycle, len(prefix))
    raise AssertionError(f"no LA lasso from value-0 state {e}")


def _memory_label(e: State, i: int) -> str:
    return f"{e}#{i}"


def _baseline(arena: Arena, obj: Objective, player: int, sem: str,
              vals: StateValueTable, la: LaTable) -> tuple[MooreStrategy, dict[State, str]]:
    win = winning_moves(arena, obj, player, sem, vals)
    lassos = {e: _find_lasso(arena, obj, player, vals, la, e)
              for e in arena.states if vals[e] == 0}
    entry = {s: _memory_label(s, 0) if vals[s] == 0 else DISPATCH for s in arena.states}
    memory = [DISPATCH]
    output: dict[tuple[str, State], MixedMove] = {}
    update: dict[tuple[str, State], str] = {}
    for s in arena.states:
        if vals[s] == 1:
            output[(DISPATCH, s)] = win[s]
        elif vals[s] == -1:
            output[(DISPATCH, s)] = MixedMove.dirac(la.actions(s)[0])
        else:
            output[(DISPATCH, s)] = MixedMove.dirac(lassos[s].steps[0][1])
        if entry[s] != DISPATCH:
            update[(DISPATCH, s)] = entry[s]
    for e, lasso in lassos.items():
        for i, (s, a) in enumerate(lasso.steps):
            m = _memory_label(e, i)
            memory.append(m)
            output[(m, s)] = MixedMove.dirac(a)
            nxt = lasso.expected(i)
            for t in arena.states:
                if t == nxt:
                    target = _memory_label(e, i + 1 if i + 1 < len(lasso.steps) else lasso.loop)
                else:
                    target = entry[t]
                if target != m:
                    update[(m, t)] = target
    strat = MooreStrategy(player, tuple(memory), entry[arena.init], output, update)
    return strat, entry


def baseline_admissible_strategy(arena: Arena, objective: Objective | None, player: int,
                                 semantics: str) -> MooreStrategy:
    """An admissible strategy: win where possible, follow a memoised LA
    lasso from value-0 states (re-chosen after every deviation), and play the
    lowest LA action where the objective is lost."""
    obj = _objective(arena, objective, player)
    sem = semantics_name(semantics)
    check_supported(obj, sem)
    vals = state_values(arena, obj, player, sem)
    return _baseline(arena, obj, player, sem, vals, la_from_values(arena, vals))[0]


# -- machine surgery on the product -------------------------------------------

WIN_MEMORY = "W"
BASE_PREFIX = "B:"


def _rebuild(pg: ProductGraph, moves: list[MixedMove], splice: dict[int, str],
             extra: MooreStrategy | None) -> MooreStrategy:
    """Product-form machine: one memory per kept product node, playing
    ``moves``; entering a node of ``splice`` jumps to the given memory of
    ``extra``, whose outputs and updates are copied over."""
    p = pg.strategy.player
    labels: dict[int, str] = {}
    order: list[int] = []

    def label(j: int) -> str:
        if j in splice:
            return splice[j]
        if j not in labels:
            labels[j] = f"m{len(labels)}"
            order.append(j)
        return labels[j]

    init = label(0)
    output: dict[tuple[str, State], MixedMove] = {}
    update: dict[tuple[str, State], str] = {}
    k = 0
    while k < len(order):
        i = order[k]
        k += 1
        s, _ = pg.nodes[i]
        m = labels[i]
        output[(m, s)] = moves[i]
        for r, a in enumerate(pg.rows[i]):
            if a not in moves[i].support:
                continue
            for j in pg.succ[i][r]:
                t = pg.nodes[j][0]
                target = label(j)
                if target != m:
                    update[(m, t)] = target
    memory = [labels[i] for i in order]
    if extra is not None and splice:
        memory += list(extra.memory)
        output.update(extra.output)
        update.update(extra.update)
    if init not in memory:
        memory.append(init)
    return MooreStrategy(p, tuple(memory), init, output, update)


def _prefixed(strategy: MooreStrategy, prefix: str) -> MooreStrategy:
    return MooreStrategy(
        strategy.player, tuple(prefix + m for m in strategy.memory), prefix + strategy.init,
        {(prefix + m, s): mv for (m, s), mv in strategy.output.items()},
        {(prefix + m, s): prefix + n for (m, s), n in strategy.update.items()})


def _combined_helpers(arena, obj, player, sem, vals, la) -> tuple[MooreStrategy, dict]:
    """WIN memory plus a prefixed copy of the baseline, as one machine."""
    base, entry = _baseline(arena, obj, player, sem, vals, la)
    base = _prefixed(base, BASE_PREFIX)
    win = winning_moves(arena, obj, player, sem, vals)
    output = dict(base.output)
    output.update({(WIN_MEMORY, s): mv for s, mv in win.items()})
    helper = MooreStrategy(player, (WIN_MEMORY,) + base.memory, WIN_MEMORY, output,
                           dict(base.update))
    return helper, {s: BASE_PREFIX + m for s, m in entry.items()}


def dominating_admissible(arena: Arena, objective: Objective | None, player: int,
                          semantics: str, strategy: MooreStrategy) -> MooreStrategy:
    """An admissible strategy dominating the LA strategy ``strategy``.

    Where the state has value 1 but the strategy does not win, switch to a
    winning strategy; where the state has value 0 but the strategy has
    given up, switch to the baseline admissible strategy.  Returns the input
    itself when no switch is needed.
    """
    obj = _objective(arena, objective, player)
    sem = semantics_name(semantics)
    check_supported(obj, sem)
    vals = state_values(arena, obj, player, sem)
    la = la_from_values(arena, vals)
    pg = product_graph(arena, strategy)
    wit = _la_failure(pg, la)
    if wit is not None:
        raise NotAdmissibleError(f"strategy is not LA at state {wit['state']} "
                                 f"(memory {wit['memory']}): {wit['reason']}")
    sv = strategy_values(arena, obj, player, sem, strategy, pg)
    splice: dict[int, str] = {}
    for j, ((t, _), v) in enumerate(sv.items()):
        if vals[t] == 1 and v <= 0:
            splice[j] = WIN_MEMORY
        elif vals[t] == 0 and v == -1:
            splice[j] = "entry"
    if not splice:
        return strategy
    helper, entry = _combined_helpers(arena, obj, player, sem, vals, la)
    for j, how in splice.items():
        if how == "entry":
            splice[j] = entry[pg.nodes[j][0]]
    moves = [strategy.move(m, s) for s, m in pg.nodes]
    return _rebuild(pg, moves, splice, helper)


def derandomize_admissible(arena: Arena, objective: Objective | None, player: int,
                           semantics: str, strategy: MooreStrategy) -> MooreStrategy:
    """A Dirac-where-possible equivalent of an admissible strategy.

    Almost-sure: the lowest support action at every node of value <= 0,
    unchanged at value-1 nodes.  Sure: the lowest support action everywhere
    (sure winning only depends on supports, so a sub-support still wins).
    """
    obj = _objective(arena, objective, player)
    sem = semantics_name(semantics)
    verdict = classify_strategy(arena, obj, player, sem, strategy)
    if not verdict.admissible:
        raise NotAdmissibleError("derandomisation needs an admissible strategy")
    pg = product_graph(arena, strategy)
    sv = strategy_values(arena, obj, player, sem, strategy, pg)
    moves = []
    changed = False
    for i, ((s, m), v) in enumerate(sv.items()):
        mv = strategy.move(m, s)
        if not mv.is_dirac and (sem == SURE or v <= 0):
            mv = MixedMove.dirac(pg.rows[i][0])
            changed = True
        moves.append(mv)
    if not changed:
        return strategy
    return _rebuild(pg, moves, {}, None)
