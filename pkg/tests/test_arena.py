import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from admissible.arena import (ArenaError, MixedMove, MooreStrategy, StrategyError,
                              cylinder_probability, dump_arena, parse_arena, parse_fraction,
                              product_graph, simulate_run, step_distribution)

from conftest import DATA
from randgames import random_arena

HALF = Fraction(1, 2)


def test_running_example_shape(running):
    assert running.players == 2
    assert running.states == ("s0", "s1", "s2", "Trg")
    assert running.init == "s0"
    assert running.acts(1, "s1") == ("c", "d")
    assert running.acts(2, "s2") == ("f'", "g'")
    assert running.step("s0", ("b", "b'")) == "s1"
    assert running.step("s0", ("a", "b'")) == "s0"
    assert running.step("s2", ("f", "g'")) == "s2"
    assert running.step("s2", ("g", "g'")) == "Trg"
    assert str(running.objectives[1]) == "reach {Trg}"


def test_trivial_arena():
    a = parse_arena("players 1\nstates s\ninit s\nactions 1 s : x\ntrans s x -> s\n")
    assert a.states == ("s",) and a.step("s", ("x",)) == "s"


def test_missing_transition_is_rejected():
    text = (DATA / "running.game").read_text().replace("trans s2 g g' -> Trg", "")
    with pytest.raises(ArenaError, match="s2"):
        parse_arena(text)


@pytest.mark.parametrize("text, line", [
    ("players x\n", 1),
    ("players 1\nstates s\ninit s\nactions 1 t : x\n", 4),
    ("players 1\nstates s\ninit s\nactions 1 s : x\ntrans s y -> s\n", 5),
    ("players 1\nstates s\ninit s\nfoo\n", 4),
    ("players 1\nstates s\ninit s\nactions 1 s : x\ntrans s x -> s\nobjective 1 win s\n", 6),
])
def test_syntax_errors_carry_line_numbers(text, line):
    with pytest.raises(ArenaError) as info:
        parse_arena(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_overlapping_alphabets_rejected():
    text = ("players 2\nstates s\ninit s\nactions 1 s : x\nactions 2 s : x\n"
            "trans s x x -> s\n")
    with pytest.raises(ArenaError, match="x"):
        parse_arena(text)


def test_transition_to_unknown_state_rejected():
    with pytest.raises(ArenaError, match="nowhere"):
        parse_arena("players 1\nstates s\ninit s\nactions 1 s : x\ntrans s x -> nowhere\n")


def test_dump_parse_round_trip(running):
    again = parse_arena(dump_arena(running))
    assert again.states == running.states
    assert again.delta == running.delta
    assert again.actions == running.actions
    assert again.objectives == running.objectives


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), kind=st.sampled_from(["reach", "safety"]))
def test_round_trip_random(seed, kind):
    a = random_arena(random.Random(seed), kind=kind)
    b = parse_arena(dump_arena(a))
    assert (b.states, b.init, b.actions, b.delta, b.objectives) == \
        (a.states, a.init, a.actions, a.delta, a.objectives)


# -- moves -------------------------------------------------------------------

def test_mixed_move_normalisation():
    mv = MixedMove.of({"g": "1/2", "f": "1/2", "h": 0})
    assert mv.support == {"f", "g"}
    assert mv.prob("h") == 0 and mv.prob("f") == HALF
    assert str(mv) == "1/2f+1/2g"
    assert MixedMove.uniform(["g", "f"]) == mv
    assert MixedMove.dirac("f").is_dirac and not mv.is_dirac


@pytest.mark.parametrize("weights", [{"f": "1/2"}, {"f": "3/2", "g": "-1/2"}, {}])
def test_mixed_move_rejects_bad_weights(weights):
    with pytest.raises(StrategyError):
        MixedMove.of(weights)


@given(st.lists(st.integers(1, 9), min_size=1, max_size=4))
def test_mixed_move_json_round_trip(ws):
    total = sum(ws)
    mv = MixedMove.of({f"a{i}": Fraction(w, total) for i, w in enumerate(ws)})
    assert MixedMove.of(mv.to_json()) == mv
    assert sum(w for _, w in mv.weights) == 1


def test_parse_fraction_forms():
    assert parse_fraction("3/4") == Fraction(3, 4)
    assert parse_fraction(1) == 1
    assert parse_fraction("0.25") == Fraction(1, 4)


def test_step_distribution_examples(running):
    mix = MixedMove.uniform(["f", "g"])
    assert step_distribution(running, "s2", {1: mix, 2: MixedMove.dirac("f'")}) == \
        {"s2": HALF, "Trg": HALF}
    assert step_distribution(running, "s2", {1: mix, 2: MixedMove.uniform(["f'", "g'"])}) == \
        {"s2": HALF, "Trg": HALF}
    assert step_distribution(running, "s0", {1: MixedMove.dirac("b"),
                                             2: MixedMove.dirac("b'")}) == {"s1": 1}


def test_step_distribution_rejects_foreign_action(running):
    with pytest.raises(StrategyError):
        step_distribution(running, "s0", {1: MixedMove.dirac("f"), 2: MixedMove.dirac("a'")})


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_step_distribution_sums_to_one(seed):
    rng = random.Random(seed)
    a = random_arena(rng)
    s = rng.choice(a.states)
    profile = {}
    for p in a.player_ids:
        acts = a.acts(p, s)
        ws = [rng.randint(0, 3) for _ in acts]
        ws[0] += 1
        profile[p] = MixedMove.of({x: Fraction(w, sum(ws)) for x, w in zip(acts, ws)})
    assert sum(step_distribution(a, s, profile).values()) == 1


# -- strategies, cylinders, products -------------------------------------------

def coop(running):
    return MooreStrategy.memoryless(2, {"s0": "b'", "s1": "d'", "s2": "f'", "Trg": "t'"})


def test_cylinder_probabilities(running, sigmas):
    profile = {1: sigmas["sigma3"], 2: coop(running)}
    assert cylinder_probability(running, profile, ["s0"]) == 1
    assert cylinder_probability(running, profile, ["s0", "s1", "s2"]) == 1
    assert cylinder_probability(running, profile, ["s0", "s1", "s2", "Trg"]) == HALF
    assert cylinder_probability(running, profile, ["s0", "s0"]) == 0
    with pytest.raises(StrategyError):
        cylinder_probability(running, profile, ["s1"])


def test_dirac_profile_has_a_single_outcome(running, sigmas):
    profile = {1: sigmas["sigma2"], 2: coop(running)}
    run = simulate_run(running, profile, 6, seed=0)
    assert run == ["s0", "s1", "s2", "Trg", "Trg", "Trg", "Trg"]
    for k in range(1, len(run) + 1):
        assert cylinder_probability(running, profile, run[:k]) == 1


def test_simulation_is_reproducible(running, sigmas):
    profile = {1: sigmas["sigma3"], 2: coop(running)}
    assert simulate_run(running, profile, 1, seed=3) == ["s0", "s1"]
    first = simulate_run(running, profile, 30, seed=11)
    assert first == simulate_run(running, profile, 30, seed=11)
    for k in range(1, len(first) + 1):
        assert cylinder_probability(running, profile, first[:k]) > 0
    with pytest.raises(ValueError):
        simulate_run(running, profile, 0)


def test_product_graph_sizes(running, sigmas):
    pg = product_graph(running, sigmas["sigma3"])
    assert sorted(s for s, _ in pg.nodes) == sorted(running.states)
    # support x adversary actions: 1x2 + 1x2 + 2x2 + 1x1
    assert len(pg.edges) == 9
    pg = product_graph(running, sigmas["sigma3prime"])
    assert len(pg.nodes) == 5
    assert {m for s, m in pg.nodes if s == "s1"} == {"first", "done"}
    for v, a, _, _ in pg.edges:
        s, m = pg.nodes[v]
        assert a in sigmas["sigma3prime"].move(m, s).support
    assert len(pg.nodes) <= len(running.states) * len(sigmas["sigma3prime"].memory)


def test_product_graph_self_loop():
    a = parse_arena("players 1\nstates s\ninit s\nactions 1 s : x\ntrans s x -> s\n")
    pg = product_graph(a, MooreStrategy.memoryless(1, {"s": "x"}))
    assert len(pg.nodes) == 1 and len(pg.edges) == 1


def test_strategy_json_round_trip(sigmas, running):
    for strat in sigmas.values():
        again = MooreStrategy.from_json(strat.to_json(running.states))
        assert again.same_as(strat)


def test_strategy_errors(running):
    with pytest.raises(StrategyError):
        MooreStrategy.from_json({"memory": ["m"]})
    bad = MooreStrategy.memoryless(1, {"s0": "a'"})
    with pytest.raises(StrategyError):
        product_graph(running, bad)
    missing = MooreStrategy.memoryless(1, {"s0": "b"})
    with pytest.raises(StrategyError):
        product_graph(running, missing)
