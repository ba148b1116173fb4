"""Admissible strategies and assume-admissible synthesis for concurrent
games under sure and almost-sure semantics."""
from .arena import (Arena, ArenaError, MixedMove, MooreStrategy, StrategyError, parse_arena,
                    product_graph, simulate_run)
from .objectives import Objective, normalize
from .values import ALMOST_SURE, SURE, state_values, strategy_values
from .admissibility import (baseline_admissible_strategy, classify_strategy,
                            dominating_admissible, la_actions)
from .aa_synthesis import (NONE_AT_BOUND, build_aa_game, extract_admissible_winner,
                           synthesize_aa_bounded, synthesize_aa_safety)

__all__ = [
    "Arena", "ArenaError", "MixedMove", "MooreStrategy", "StrategyError", "parse_arena",
    "product_graph", "simulate_run", "Objective", "normalize", "ALMOST_SURE", "SURE",
    "state_values", "strategy_values", "baseline_admissible_strategy", "classify_strategy",
    "dominating_admissible", "la_actions", "NONE_AT_BOUND", "build_aa_game",
    "extract_admissible_winner", "synthesize_aa_bounded", "synthesize_aa_safety",
]
