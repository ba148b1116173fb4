"""Concurrent game arenas, randomised moves, Moore-machine strategies.

Actions are named per state: the identifier of action ``a`` played at
state ``s0`` is ``s0.a`` (see :meth:`Arena.qualify`), so users may reuse a
name at several states while every qualified action still has a unique
source state.
"""
from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .kernels import MoveGraph

if TYPE_CHECKING:
    from .objectives import Objective

State = str
Action = str


class ArenaError(ValueError):
    """Malformed arena document or invalid arena."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StrategyError(ValueError):
    pass


def parse_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise StrategyError(f"weights must be exact (int, Fraction or 'p/q' string), got {value!r}")


def format_fraction(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class MixedMove:
    """A probability distribution over one player's actions at one state.

    Weights are exact rationals; zero weights are dropped so that the stored
    actions are exactly the support.
    """

    weights: tuple[tuple[Action, Fraction], ...]

    def __post_init__(self):
        if not self.weights:
            raise StrategyError("a move needs a nonempty support")
        total = sum(w for _, w in self.weights)
        if total != 1:
            raise StrategyError(f"move weights sum to {total}, not 1")
        if any(w <= 0 or w > 1 for _, w in self.weights):
            raise StrategyError("support weights must lie in (0, 1]")

    @classmethod
    def of(cls, weights: Mapping[Action, object] | Action) -> "MixedMove":
        if isinstance(weights, str):
            return cls.dirac(weights)
        items = []
        for a, w in weights.items():
            w = parse_fraction(w)
            if w < 0:
                raise StrategyError(f"negative weight for {a!r}")
            if w:
                items.append((a, w))
        return cls(tuple(sorted(items)))

    @classmethod
    def dirac(cls, action: Action) -> "MixedMove":
        return cls(((action, Fraction(1)),))

    @classmethod
    def uniform(cls, actions: Iterable[Action]) -> "MixedMove":
        actions = sorted(set(actions))
        if not actions:
            raise StrategyError("uniform move over an empty set")
        w = Fraction(1, len(actions))
        return cls(tuple((a, w) for a in actions))

    @property
    def support(self) -> frozenset[Action]:
        return frozenset(a for a, _ in self.weights)

    @property
    def is_dirac(self) -> bool:
        return len(self.weights) == 1

    def prob(self, action: Action) -> Fraction:
        return dict(self.weights).get(action, Fraction(0))

    def to_json(self) -> dict[str, str]:
        return {a: format_fraction(w) for a, w in self.weights}

    def __str__(self):
        if self.is_dirac:
            return self.weights[0][0]
        return "+".join(f"{format_fraction(w)}{a}" for a, w in self.weights)


@dataclass(frozen=True, eq=False)
class Arena:
    """An n-player concurrent game graph.

    ``actions[(p, s)]`` lists player ``p``'s actions at ``s`` (players are
    numbered from 1); ``delta[(s, joint)]`` is the successor for a joint
    action given in player order.
    """

    players: int
    states: tuple[State, ...]
    init: State
    actions: Mapping[tuple[int, State], tuple[Action, ...]]
    delta: Mapping[tuple[State, tuple[Action, ...]], State]
    objectives: Mapping[int, "Objective"] = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.players < 1:
            raise ArenaError("an arena needs at least one player")
        if not self.states:
            raise ArenaError("an arena needs at least one state")
        if len(set(self.states)) != len(self.states):
            raise ArenaError("duplicate state names")
        if self.init not in self.index:
            raise ArenaError(f"initial state {self.init!r} is not a state")
        for s in self.states:
            seen: dict[Action, int] = {}
            for p in self.player_ids:
                acts = self.actions.get((p, s))
                if not acts:
                    raise ArenaError(f"player {p} has no action at state {s!r}")
                if len(set(acts)) != len(acts):
                    raise ArenaError(f"duplicate action for player {p} at state {s!r}")
                for a in acts:
                    if a in seen:
                        raise ArenaError(
                            f"overlapping player alphabets at {s!r}: action {a!r} "
                            f"belongs to players {seen[a]} and {p}")
                    seen[a] = p
            for joint in self.joint_actions(s):
                t = self.delta.get((s, joint))
                if t is None:
                    raise ArenaError(
                        f"totality violated: no transition for {s} {' '.join(joint)}")
                if t not in self.index:
                    raise ArenaError(f"transition from {s!r} targets unknown state {t!r}")
        expected = sum(len(list(self.joint_actions(s))) for s in self.states)
        if len(self.delta) != expected:
            raise ArenaError("transitions mention undeclared actions or states")
        for p, obj in self.objectives.items():
            if p not in self.player_ids:
                raise ArenaError(f"objective for unknown player {p}")
            unknown = set(obj.states) - set(self.states)
            if unknown:
                raise ArenaError(f"objective of player {p} names unknown states {sorted(unknown)}")

    @property
    def player_ids(self) -> range:
        return range(1, self.players + 1)

    @cached_property
    def index(self) -> dict[State, int]:
        return {s: i for i, s in enumerate(self.states)}

    def acts(self, p: int, s: State) -> tuple[Action, ...]:
        return self.actions[(p, s)]

    def others(self, p: int) -> list[int]:
        return [q for q in self.player_ids if q != p]

    def joint_actions(self, s: State) -> Iterable[tuple[Action, ...]]:
        return itertools.product(*(self.actions[(p, s)] for p in self.player_ids))

    def adversary_tuples(self, p: int, s: State) -> list[tuple[Action, ...]]:
        """Joint actions of all players but ``p`` (in player order)."""
        return list(itertools.product(*(self.actions[(q, s)] for q in self.others(p))))

    def compose(self, p: int, a: Action, c: Sequence[Action]) -> tuple[Action, ...]:
        c = list(c)
        c.insert(p - 1, a)
        return tuple(c)

    def step(self, s: State, joint: Sequence[Action]) -> State:
        return self.delta[(s, tuple(joint))]

    def succ(self, p: int, s: State, a: Action) -> set[State]:
        """States reachable from ``s`` in one step when ``p`` plays ``a``."""
        return {self.step(s, self.compose(p, a, c)) for c in self.adversary_tuples(p, s)}

    def qualify(self, s: State, a: Action) -> str:
        return f"{s}.{a}"

    def source_of(self, qualified: str) -> State:
        """The unique state of a qualified action identifier."""
        for s in sorted(self.states, key=len, reverse=True):
            if qualified.startswith(s + ".") and any(
                    qualified[len(s) + 1:] in self.actions[(p, s)] for p in self.player_ids):
                return s
        raise ArenaError(f"unknown qualified action {qualified!r}")

    def action_rank(self, p: int, s: State, a: Action) -> int:
        return self.actions[(p, s)].index(a)

    def move_graph(self, p: int, allowed: Mapping[State, Sequence[Action]] | None = None,
                   adversary: Mapping[State, Sequence[tuple]] | None = None) -> MoveGraph:
        """Matrix view of the arena from player ``p``'s side: rows are ``p``'s
        actions (optionally restricted), columns the others' joint actions."""
        blocks = []
        for s in self.states:
            rows = allowed[s] if allowed is not None else self.acts(p, s)
            cols = adversary[s] if adversary is not None else self.adversary_tuples(p, s)
            blocks.append([[self.index[self.step(s, self.compose(p, a, c))] for c in cols]
                           for a in rows])
        return MoveGraph(blocks)

    def cooperative_graph(self) -> MoveGraph:
        """Every joint action as a column of a single-row block."""
        return MoveGraph([[[self.index[self.step(s, j)] for j in self.joint_actions(s)]]
                          for s in self.states])

    def with_objectives(self, objectives: Mapping[int, "Objective"]) -> "Arena":
        return Arena(self.players, self.states, self.init, self.actions, self.delta,
                     dict(objectives))

    def restrict(self, allowed: Mapping[tuple[int, State], Sequence[Action]]) -> "Arena":
        """Sub-arena keeping only the listed actions (others unchanged)."""
        actions = {key: tuple(a for a in acts if a in set(allowed.get(key, acts)))
                   for key, acts in self.actions.items()}
        delta = {(s, j): t for (s, j), t in self.delta.items()
                 if all(j[p - 1] in actions[(p, s)] for p in self.player_ids)}
        return Arena(self.players, self.states, self.init, actions, delta,
                     dict(self.objectives))


# -- arena file format -------------------------------------------------------

def parse_arena(text: str) -> Arena:
    """Parse the line-oriented arena format (``#`` starts a comment)."""
    from .objectives import Objective

    players = None
    states: list[str] | None = None
    init = None
    actions: dict[tuple[int, str], tuple[str, ...]] = {}
    delta: dict[tuple[str, tuple[str, ...]], str] = {}
    objectives: dict[int, Objective] = {}

    def player_id(tok: str, lineno: int) -> int:
        try:
            p = int(tok)
        except ValueError:
            raise ArenaError(f"expected a player number, got {tok!r}", lineno) from None
        if players is None or not 1 <= p <= players:
            raise ArenaError(f"player {tok} out of range (declare 'players' first)", lineno)
        return p

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        head = tok[0]
        if head == "players":
            if len(tok) != 2 or not tok[1].isdigit() or int(tok[1]) < 1:
                raise ArenaError("usage: players <count>", lineno)
            players = int(tok[1])
        elif head == "states":
            if len(tok) < 2:
                raise ArenaError("usage: states <name> ...", lineno)
            states = tok[1:]
        elif head == "init":
            if len(tok) != 2:
                raise ArenaError("usage: init <state>", lineno)
            init = tok[1]
        elif head == "actions":
            if len(tok) < 5 or tok[3] != ":":
                raise ArenaError("usage: actions <player> <state> : <action> ...", lineno)
            p = player_id(tok[1], lineno)
            if (p, tok[2]) in actions:
                raise ArenaError(f"actions of player {p} at {tok[2]} declared twice", lineno)
            if states is None or tok[2] not in states:
                raise ArenaError(f"unknown state {tok[2]!r}", lineno)
            if len(set(tok[4:])) != len(tok[4:]):
                raise ArenaError(f"duplicate action at {tok[2]}", lineno)
            actions[(p, tok[2])] = tuple(tok[4:])
        elif head == "trans":
            if players is None or len(tok) != players + 4 or tok[-2] != "->":
                raise ArenaError("usage: trans <state> <action per player> -> <state>", lineno)
            key = (tok[1], tuple(tok[2:2 + players]))
            if key in delta:
                raise ArenaError(f"duplicate transition for {tok[1]} {' '.join(key[1])}", lineno)
            for p, a in enumerate(key[1], 1):
                if a not in actions.get((p, tok[1]), ()):
                    raise ArenaError(f"action {a!r} is not available to player {p} at {tok[1]}",
                                     lineno)
            delta[key] = tok[-1]
        elif head == "objective":
            if len(tok) < 3:
                raise ArenaError("usage: objective <player> reach|safety avoid|buchi <states>",
                                 lineno)
            p = player_id(tok[1], lineno)
            kind = tok[2]
            rest = tok[3:]
            if kind == "safety":
                if not rest or rest[0] != "avoid":
                    raise ArenaError("usage: objective <player> safety avoid <states>", lineno)
                rest = rest[1:]
            elif kind not in ("reach", "buchi"):
                raise ArenaError(f"unknown objective kind {kind!r}", lineno)
            if p in objectives:
                raise ArenaError(f"second objective for player {p}", lineno)
            objectives[p] = Objective(kind, frozenset(rest), p)
        else:
            raise ArenaError(f"unknown directive {head!r}", lineno)
    if players is None or states is None or init is None:
        raise ArenaError("missing 'players', 'states' or 'init' declaration")
    return Arena(players, tuple(states), init, actions, delta, objectives)


def dump_arena(arena: Arena) -> str:
    lines = [f"players {arena.players}", "states " + " ".join(arena.states),
             f"init {arena.init}"]
    for s in arena.states:
        for p in arena.player_ids:
            lines.append(f"actions {p} {s} : " + " ".join(arena.acts(p, s)))
    for s in arena.states:
        for j in arena.joint_actions(s):
            lines.append(f"trans {s} {' '.join(j)} -> {arena.step(s, j)}")
    for p in sorted(arena.objectives):
        obj = arena.objectives[p]
        names = " ".join(s for s in arena.states if s in obj.states)
        kind = "safety avoid" if obj.kind == "safety" else obj.kind
        lines.append(f"objective {p} {kind} {names}".rstrip())
    return "\n".join(lines) + "\n"


# -- randomised dynamics -----------------------------------------------------

def step_distribution(arena: Arena, s: State, profile: Mapping[int, MixedMove]
                      ) -> dict[State, Fraction]:
    """Distribution over successors of ``s`` when each player randomises."""
    for p in arena.player_ids:
        move = profile[p]
        if not move.support <= set(arena.acts(p, s)):
            raise StrategyError(f"move {move} of player {p} is not over its actions at {s}")
    dist: dict[State, Fraction] = {}
    for combo in itertools.product(*(profile[p].weights for p in arena.player_ids)):
        joint = tuple(a for a, _ in combo)
        w = Fraction(1)
        for _, x in combo:
            w *= x
        t = arena.step(s, joint)
        dist[t] = dist.get(t, Fraction(0)) + w
    return {t: dist[t] for t in arena.states if t in dist}


# -- strategies --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MooreStrategy:
    """Finite-memory strategy reading only visited states.

    ``output[(m, s)]`` is the move at state ``s`` in memory ``m``;
    ``update[(m, t)]`` is the memory after entering ``t`` (missing entries
    keep the memory unchanged).  The first decision is taken in memory
    ``init`` at the arena's initial state.
    """

    player: int
    memory: tuple[str, ...]
    init: str
    output: Mapping[tuple[str, State], MixedMove]
    update: Mapping[tuple[str, State], str] = field(default_factory=dict)

    def __post_init__(self):
        if self.init not in self.memory:
            raise StrategyError(f"initial memory {self.init!r} not declared")
        mems = set(self.memory)
        for (m, _), nxt in self.update.items():
            if m not in mems or nxt not in mems:
                raise StrategyError(f"update mentions undeclared memory ({m!r} -> {nxt!r})")
        for (m, _) in self.output:
            if m not in mems:
                raise StrategyError(f"output mentions undeclared memory {m!r}")

    @classmethod
    def memoryless(cls, player: int, moves: Mapping[State, MixedMove | Action]
                   ) -> "MooreStrategy":
        out = {("m0", s): mv if isinstance(mv, MixedMove) else MixedMove.dirac(mv)
               for s, mv in moves.items()}
        return cls(player, ("m0",), "m0", out, {})

    def move(self, m: str, s: State) -> MixedMove:
        try:
            return self.output[(m, s)]
        except KeyError:
            raise StrategyError(
                f"strategy of player {self.player} has no move at state {s!r} "
                f"in memory {m!r}") from None

    def next(self, m: str, t: State) -> str:
        return self.update.get((m, t), m)

    def is_dirac(self) -> bool:
        return all(mv.is_dirac for mv in self.output.values())

    def same_as(self, other: "MooreStrategy") -> bool:
        return (self.player == other.player and self.memory == other.memory
                and self.init == other.init and dict(self.output) == dict(other.output)
                and {k: v for k, v in self.update.items() if v != k[0]}
                == {k: v for k, v in other.update.items() if v != k[0]})

    def to_json(self, state_order: Sequence[State] | None = None) -> dict:
        order = {s: i for i, s in enumerate(state_order)} if state_order else {}
        mem_rank = {m: i for i, m in enumerate(self.memory)}

        def key(k):
            return (mem_rank[k[0]], order.get(k[1], len(order)), k[1])

        return {
            "player": self.player,
            "memory": list(self.memory),
            "init": self.init,
            "output": [{"memory": m, "state": s, "move": self.output[(m, s)].to_json()}
                       for m, s in sorted(self.output, key=key)],
            "update": [{"memory": m, "state": s, "next": self.update[(m, s)]}
                       for m, s in sorted(self.update, key=key) if self.update[(m, s)] != m],
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "MooreStrategy":
        try:
            memory = tuple(doc.get("memory", ["m0"]))
            init = doc.get("init", memory[0])
            output = {(row.get("memory", init), row["state"]): MixedMove.of(row["move"])
                      for row in doc["output"]}
            update = {(row["memory"], row["state"]): row["next"]
                      for row in doc.get("update", [])}
            return cls(int(doc["player"]), memory, init, output, update)
        except (KeyError, TypeError) as exc:
            raise StrategyError(f"malformed strategy document: {exc}") from None


def check_strategy(arena: Arena, strategy: MooreStrategy) -> None:
    """Every stored move must be over the player's actions at its state."""
    p = strategy.player
    if p not in arena.player_ids:
        raise StrategyError(f"strategy for unknown player {p}")
    for (m, s), mv in strategy.output.items():
        if s not in arena.index:
            raise StrategyError(f"strategy mentions unknown state {s!r}")
        if not mv.support <= set(arena.acts(p, s)):
            raise StrategyError(f"move {mv} at {s} is not over player {p}'s actions "
                                f"{list(arena.acts(p, s))}")


def cylinder_probability(arena: Arena, profile: Mapping[int, MooreStrategy],
                         history: Sequence[State]) -> Fraction:
    if not history or history[0] != arena.init:
        raise StrategyError("histories start at the initial state")
    mem = {p: profile[p].init for p in arena.player_ids}
    prob = Fraction(1)
    for s, t in zip(history, history[1:]):
        moves = {p: profile[p].move(mem[p], s) for p in arena.player_ids}
        prob *= step_distribution(arena, s, moves).get(t, Fraction(0))
        if not prob:
            return prob
        mem = {p: profile[p].next(mem[p], t) for p in arena.player_ids}
    return prob


def simulate_run(arena: Arena, profile: Mapping[int, MooreStrategy], steps: int,
                 seed: int = 0, rng: random.Random | None = None) -> list[State]:
    """Sample a run of ``steps`` transitions; reproducible from ``seed``."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    rng = rng or random.Random(seed)
    s = arena.init
    mem = {p: profile[p].init for p in arena.player_ids}
    run = [s]
    for _ in range(steps):
        joint = []
        for p in arena.player_ids:
            mv = profile[p].move(mem[p], s)
            if mv.is_dirac:
                joint.append(mv.weights[0][0])
            else:
                acts = [a for a, _ in mv.weights]
                joint.append(rng.choices(acts, weights=[float(w) for _, w in mv.weights])[0])
        s = arena.step(s, joint)
        mem = {p: profile[p].next(mem[p], s) for p in arena.player_ids}
        run.append(s)
    return run


# -- product of a strategy with the arena ------------------------------------

@dataclass(eq=False)
class ProductGraph:
    """Reachable (state, memory) pairs of a strategy in the arena.

    Node ``v`` has a successor matrix whose rows are the strategy's support
    at ``v`` (in arena action order) and whose columns are the other players'
    joint actions.
    """

    arena: Arena
    strategy: MooreStrategy
    nodes: list[tuple[State, str]]
    rows: list[list[Action]]
    cols: list[list[tuple[Action, ...]]]
    succ: list[list[list[int]]]

    @cached_property
    def index(self) -> dict[tuple[State, str], int]:
        return {v: i for i, v in enumerate(self.nodes)}

    @property
    def edges(self) -> list[tuple[int, Action, tuple[Action, ...], int]]:
        return [(v, a, c, self.succ[v][i][j])
                for v in range(len(self.nodes))
                for i, a in enumerate(self.rows[v])
                for j, c in enumerate(self.cols[v])]

    @cached_property
    def move_graph(self) -> MoveGraph:
        return MoveGraph(self.succ)

    def state_mask(self, states: Iterable[State]) -> bytearray:
        states = set(states)
        return bytearray(1 if s in states else 0 for s, _ in self.nodes)


def product_graph(arena: Arena, strategy: MooreStrategy) -> ProductGraph:
    check_strategy(arena, strategy)
    p = strategy.player
    start = (arena.init, strategy.init)
    nodes = [start]
    index = {start: 0}
    rows: list[list[Action]] = []
    cols: list[list[tuple[Action, ...]]] = []
    succ: list[list[list[int]]] = []
    queue = deque([start])
    while queue:
        s, m = queue.popleft()
        mv = strategy.move(m, s)
        support = [a for a in arena.acts(p, s) if a in mv.support]
        adv = arena.adversary_tuples(p, s)
        block = []
        for a in support:
            line = []
            for c in adv:
                t = arena.step(s, arena.compose(p, a, c))
                node = (t, strategy.next(m, t))
                if node not in index:
                    index[node] = len(nodes)
                    nodes.append(node)
                    queue.append(node)
                line.append(index[node])
            block.append(line)
        rows.append(support)
        cols.append(adv)
        succ.append(block)
    return ProductGraph(arena, strategy, nodes, rows, cols, succ)
