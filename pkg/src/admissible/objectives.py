"""Winning conditions and their normalisation to state-determined form."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .arena import Arena, ArenaError, MooreStrategy, State, product_graph

KINDS = ("reach", "safety", "buchi")


@dataclass(frozen=True)
class Objective:
    """``reach`` a target, ``safety`` (avoid a bad set) or ``buchi`` (visit
    an accepting set infinitely often).  ``states`` is the target, bad or
    accepting set respectively."""

    kind: str
    states: frozenset
    owner: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown objective kind {self.kind!r}")
        object.__setattr__(self, "states", frozenset(self.states))

    @classmethod
    def reach(cls, target: Iterable[State], owner: int = 0) -> "Objective":
        return cls("reach", frozenset(target), owner)

    @classmethod
    def safety(cls, bad: Iterable[State], owner: int = 0) -> "Objective":
        return cls("safety", frozenset(bad), owner)

    @classmethod
    def buchi(cls, accepting: Iterable[State], owner: int = 0) -> "Objective":
        return cls("buchi", frozenset(accepting), owner)

    def __str__(self):
        word = "safety avoid" if self.kind == "safety" else self.kind
        return f"{word} {{{', '.join(sorted(self.states))}}}"


def is_closed(arena: Arena, states: Iterable[State]) -> bool:
    """No transition leaves ``states``."""
    states = set(states)
    return all(t in states for (s, _), t in arena.delta.items() if s in states)


def eval_lasso(objective: Objective, prefix: Sequence[State], cycle: Sequence[State],
               arena: Arena | None = None) -> bool:
    """Does the run ``prefix . cycle^omega`` satisfy ``objective``?

    With ``arena`` given, consecutive states must be connected.
    """
    if not cycle:
        raise ValueError("ill-formed lasso: empty cycle")
    if arena is not None:
        succ: dict[State, set[State]] = {}
        for (s, _), t in arena.delta.items():
            succ.setdefault(s, set()).add(t)
        walk = list(prefix) + list(cycle) + [cycle[0]]
        for s, t in zip(walk, walk[1:]):
            if t not in succ.get(s, ()):
                raise ValueError(f"ill-formed lasso: no transition {s} -> {t}")
    X = objective.states
    if objective.kind == "reach":
        return any(s in X for s in prefix) or any(s in X for s in cycle)
    if objective.kind == "safety":
        return not any(s in X for s in prefix) and not any(s in X for s in cycle)
    return any(s in X for s in cycle)


@dataclass(frozen=True, eq=False)
class Normalized:
    """A normalised arena, its objectives and the projection to old states."""

    arena: Arena
    objectives: dict[int, Objective]
    origin: dict[State, State]
    tracked: tuple[int, ...]

    def project(self, s: State) -> State:
        return self.origin[s]

    def project_run(self, run: Iterable[State]) -> list[State]:
        return [self.origin[s] for s in run]

    def lift(self, s: State) -> list[State]:
        """All normalised states projecting to ``s``."""
        return [t for t in self.arena.states if self.origin[t] == s]

    def lift_strategy(self, strategy: MooreStrategy) -> MooreStrategy:
        """A strategy written over original states, read in the normalised
        arena (it keeps observing original states only)."""
        if not self.tracked:
            return strategy
        output = {(m, t): mv for (m, s), mv in strategy.output.items() for t in self.lift(s)}
        update = {(m, t): n for (m, s), n in strategy.update.items() for t in self.lift(s)}
        return MooreStrategy(strategy.player, strategy.memory, strategy.init, output, update)

    def project_strategy(self, strategy: MooreStrategy) -> MooreStrategy | None:
        """The same strategy over original states, or None when it tells
        apart normalised copies of one original state along some reachable
        run.  Choices at unreachable (memory, state) pairs are kept only
        where they do not clash with reachable ones."""
        if not self.tracked:
            return strategy
        pg = product_graph(self.arena, strategy)
        outs = {(m, s) for s, m in pg.nodes}
        ups = {(pg.nodes[v][1], pg.nodes[w][0]) for v, _, _, w in pg.edges}
        output: dict = {}
        update: dict = {}
        for (m, t), mv in strategy.output.items():
            if (m, t) in outs and output.setdefault((m, self.origin[t]), mv) != mv:
                return None
        for m, t in ups:
            nxt = strategy.next(m, t)
            if update.setdefault((m, self.origin[t]), nxt) != nxt:
                return None
        for (m, t), mv in strategy.output.items():
            output.setdefault((m, self.origin[t]), mv)
        for (m, t), nxt in strategy.update.items():
            update.setdefault((m, self.origin[t]), nxt)
        update = {k: n for k, n in update.items() if n != k[0]}
        return MooreStrategy(strategy.player, strategy.memory, strategy.init, output, update)


def normalize(arena: Arena, objectives: Mapping[int, Objective] | None = None,
              players: Iterable[int] | None = None) -> Normalized:
    """Make every objective state-determined.

    Each reachability target that can be left, and each bad set that can be
    left, gets a per-player bit recording whether it was visited; the
    objective then refers to the bit, which never resets.  Targets that are
    already closed and Buchi sets need nothing.  ``players`` restricts which
    objectives are normalised (default: all).
    """
    objectives = dict(arena.objectives if objectives is None else objectives)
    for p, obj in objectives.items():
        unknown = set(obj.states) - set(arena.states)
        if unknown:
            raise ArenaError(f"objective of player {p} names unknown states {sorted(unknown)}")
    selected = set(objectives if players is None else players) & set(objectives)
    tracked = tuple(p for p in sorted(selected)
                    if objectives[p].kind in ("reach", "safety")
                    and not is_closed(arena, objectives[p].states))
    if not tracked:
        out = {p: Objective(o.kind, o.states, p) for p, o in objectives.items()}
        return Normalized(arena.with_objectives(out), out,
                          {s: s for s in arena.states}, ())

    sets = [objectives[p].states for p in tracked]

    def name(s: State, bits: tuple[int, ...]) -> str:
        return "(" + ",".join([s, *map(str, bits)]) + ")"

    def consistent(s: State, bits: tuple[int, ...]) -> bool:
        return all(b or s not in X for b, X in zip(bits, sets))

    def advance(bits: tuple[int, ...], t: State) -> tuple[int, ...]:
        return tuple(b | (t in X) for b, X in zip(bits, sets))

    nodes = [(s, bits) for s in arena.states
             for bits in itertools.product((0, 1), repeat=len(tracked))
             if consistent(s, bits)]
    names = {v: name(*v) for v in nodes}
    origin = {names[v]: v[0] for v in nodes}
    actions = {(p, names[(s, bits)]): arena.acts(p, s)
               for (s, bits) in nodes for p in arena.player_ids}
    delta = {}
    for s, bits in nodes:
        for j in arena.joint_actions(s):
            t = arena.step(s, j)
            delta[(names[(s, bits)], j)] = names[(t, advance(bits, t))]
    init_bits = advance((0,) * len(tracked), arena.init)
    new_obj = {}
    for p, obj in objectives.items():
        if p in tracked:
            k = tracked.index(p)
            X = frozenset(names[v] for v in nodes if v[1][k])
        else:
            X = frozenset(names[v] for v in nodes if v[0] in obj.states)
        new_obj[p] = Objective(obj.kind, X, p)
    new = Arena(arena.players, tuple(names[v] for v in nodes),
                names[(arena.init, init_bits)], actions, delta, new_obj)
    return Normalized(new, new_obj, origin, tracked)
