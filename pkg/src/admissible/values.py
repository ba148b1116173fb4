"""Three-valued state values and values of fixed strategies.

A state has value +1 for player p when p can win alone, 0 when p cannot
but some cooperation of the others can make p win, and -1 otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import fixpoints as fp
from .arena import Arena, MooreStrategy, ProductGraph, State, product_graph
from .kernels import AA, CA, EA, EE, MoveGraph, mask
from .objectives import Objective

SURE = "sure"
ALMOST_SURE = "almost-sure"
SEMANTICS = (SURE, ALMOST_SURE)
_ALIASES = {"S": SURE, "A": ALMOST_SURE, "sure": SURE, "almost-sure": ALMOST_SURE,
            "almost_sure": ALMOST_SURE}


class UnsupportedError(ValueError):
    """Objective kind not supported under the requested semantics."""


def semantics_name(semantics: str) -> str:
    try:
        return _ALIASES[semantics]
    except KeyError:
        raise ValueError(f"unknown semantics {semantics!r}; use 'sure' or 'almost-sure'") from None


def check_supported(objective: Objective, semantics: str) -> None:
    if semantics_name(semantics) == ALMOST_SURE and objective.kind == "buchi":
        raise UnsupportedError("Buchi objectives are supported under the sure semantics only")


def _objective(arena: Arena, objective: Objective | None, player: int) -> Objective:
    if objective is not None:
        return objective
    try:
        return arena.objectives[player]
    except KeyError:
        raise ValueError(f"player {player} has no objective") from None


def _solve(g: MoveGraph, goal: bytearray, kind: str, pre: int) -> bytearray:
    """Region where the side quantified by ``pre`` enforces the objective."""
    if kind == "reach":
        return fp.attractor(g, goal, pre)[0]
    if kind == "safety":
        return fp.invariant(g, fp.complement(goal), pre)
    return fp.recurrence(g, goal, pre)


def _states(arena: Arena, m: bytearray) -> frozenset:
    return frozenset(s for s, x in zip(arena.states, m) if x)


def cooperative_region(arena: Arena, objective: Objective | None = None,
                       player: int = 0) -> frozenset:
    """States from which some joint behaviour of all players satisfies the
    objective; a plain graph search."""
    obj = _objective(arena, objective, player)
    g = arena.cooperative_graph()
    goal = mask(len(arena.states), (arena.index[s] for s in obj.states))
    return _states(arena, _solve(g, goal, obj.kind, EE))


def winning_region(arena: Arena, objective: Objective | None, player: int,
                   semantics: str) -> frozenset:
    obj = _objective(arena, objective, player)
    sem = semantics_name(semantics)
    check_supported(obj, sem)
    g = arena.move_graph(player)
    goal = mask(len(arena.states), (arena.index[s] for s in obj.states))
    if sem == ALMOST_SURE and obj.kind == "reach":
        return _states(arena, fp.almost_sure_reach(g, goal))
    return _states(arena, _solve(g, goal, obj.kind, EA))


@dataclass(frozen=True)
class StateValueTable:
    player: int
    semantics: str
    values: dict[State, int]

    def __getitem__(self, s: State) -> int:
        return self.values[s]

    def states_with(self, v: int) -> frozenset:
        return frozenset(s for s, x in self.values.items() if x == v)

    def to_json(self) -> dict:
        return {"player": self.player, "semantics": self.semantics,
                "values": dict(self.values)}


def state_values(arena: Arena, objective: Objective | None, player: int,
                 semantics: str) -> StateValueTable:
    obj = _objective(arena, objective, player)
    sem = semantics_name(semantics)
    win = winning_region(arena, obj, player, sem)
    coop = cooperative_region(arena, obj, player)
    vals = {s: 1 if s in win else 0 if s in coop else -1 for s in arena.states}
    return StateValueTable(player, sem, vals)


@dataclass(frozen=True, eq=False)
class StrategyValueTable:
    """Values of a fixed strategy at the nodes of its product graph."""

    product: ProductGraph
    semantics: str
    values: list[int]

    def at(self, state: State, memory: str) -> int:
        return self.values[self.product.index[(state, memory)]]

    @property
    def root(self) -> int:
        return self.values[0]

    def items(self):
        return zip(self.product.nodes, self.values)


def strategy_regions(g: MoveGraph, goal: bytearray, kind: str, semantics: str
                     ) -> tuple[bytearray, bytearray]:
    """(value +1, value >= 0) node masks of a fixed strategy.

    ``g`` has the strategy's support actions as rows and the other players'
    joint actions as columns.  Rows are the strategy's random choice,
    columns are picked by the others (hostile for +1, helpful for >= 0).
    """
    if semantics == SURE or kind == "safety":
        return _solve(g, goal, kind, AA), _solve(g, goal, kind, CA)
    if kind != "reach":
        raise UnsupportedError("Buchi objectives are supported under the sure semantics only")
    # The others defeat the strategy with positive probability iff they can
    # reach, avoiding the goal, a set where they keep the run out of the goal
    # whatever the strategy draws.
    avoid = fp.complement(goal)
    trap = fp.invariant(g, avoid, CA)
    failing, _ = fp.attractor(g, trap, EE, within=avoid)
    return fp.complement(failing), fp.almost_sure_reach(g, goal, rows_random=False)


def strategy_values(arena: Arena, objective: Objective | None, player: int,
                    semantics: str, strategy: MooreStrategy,
                    product: ProductGraph | None = None) -> StrategyValueTable:
    obj = _objective(arena, objective, player)
    sem = semantics_name(semantics)
    check_supported(obj, sem)
    if strategy.player != player:
        raise ValueError(f"strategy belongs to player {strategy.player}, not {player}")
    pg = product if product is not None else product_graph(arena, strategy)
    win, coop = strategy_regions(pg.move_graph, pg.state_mask(obj.states), obj.kind, sem)
    vals = [1 if w else 0 if c else -1 for w, c in zip(win, coop)]
    return StrategyValueTable(pg, sem, vals)
