import random

import pytest

from admissible import aa_synthesis as aa
from admissible.admissibility import (NotAdmissibleError, classify_strategy,
                                      dominating_admissible)
from admissible.arena import MooreStrategy, parse_arena
from admissible.formula import Implies, InfOften, Or, Reach, simplify
from admissible.objectives import normalize

from randgames import random_arena

A, S = "almost-sure", "sure"


@pytest.fixture(scope="module")
def game1(running_norm):
    return aa.build_aa_game(running_norm.arena, None, 1, A)


def _by_origin(norm, moves):
    return MooreStrategy.memoryless(1, {s: moves[norm.origin[s]] for s in norm.arena.states})


def test_observation_commutes_and_only_la_actions(game1):
    lab = game1.labelled
    base = lab.arena
    for x, v in enumerate(lab.nodes):
        s = lab.observation(x)
        if v.joint is not None:
            for q in base.player_ids:
                assert lab.la[q].is_la(v.source, v.joint[q - 1])
        for a in lab.rows(s):
            assert lab.la[1].is_la(s, a)
            for c in lab.cols(s):
                assert lab.la[2].is_la(s, c[0])
                y = lab.step(x, a, c)
                assert lab.observation(y) == base.step(s, base.compose(1, a, c))


def test_atoms_and_formula(game1, running_norm):
    lab = game1.labelled
    for q in (1, 2):
        for x in game1.atoms.after_help[q]:
            assert lab.values[q][lab.nodes[x].state] == 0
    val1 = {running_norm.origin[lab.nodes[x].state] for x in game1.atoms.val1[1]}
    assert val1 == {"s2", "Trg"}
    f = simplify(game1.formula)
    assert isinstance(f, Implies)
    assert isinstance(f.left, Or) and isinstance(f.right, Reach)
    helps = [a for a in f.left.args if isinstance(a, InfOften)]
    assert [h.nodes for h in helps] == [game1.atoms.after_help[2]]
    stats = game1.stats()
    assert stats["labelled_states"] == 11
    assert stats["formula"] == "(<>!Val0_2 | []<>AfterHelp_2) -> <>Val1_1"


def test_stubborn_machine_has_a_counterexample(game1, running_norm):
    stubborn = _by_origin(running_norm, {"s0": "a", "s1": "d", "s2": "f", "Trg": "t"})
    ok, lasso = aa.check_machine(game1, stubborn)
    assert not ok
    assert "((s0,0),(a,b'))" in lasso.cycle
    assert all(name.startswith("((s0,0)") for name in lasso.cycle)


def test_running_example_winners(running_norm, game1):
    stats = aa.SearchStats()
    win = aa.synthesize_aa_bounded(running_norm.arena, None, 1, A, 1, stats=stats, game=game1)
    assert stats.machines >= 1
    assert aa.check_machine(game1, win)[0]
    assert {running_norm.origin[s]: mv.weights[0][0] for (_, s), mv in win.output.items()
            if running_norm.origin[s] in ("s0", "s1", "s2")} == {"s0": "b", "s1": "d", "s2": "f"}
    win2 = aa.synthesize_aa_bounded(running_norm.arena, None, 2, A, 1)
    moves2 = {running_norm.origin[s]: mv.weights[0][0] for (_, s), mv in win2.output.items()}
    assert moves2["s0"] == "b'" and moves2["s1"] == "d'"


def test_no_winner_when_only_a_is_available(running):
    norm = normalize(running.restrict({(1, "s0"): ["a"]}))
    for bound in (1, 2):
        assert aa.synthesize_aa_bounded(norm.arena, None, 1, A, bound) is aa.NONE_AT_BOUND
    assert not aa.NONE_AT_BOUND
    assert repr(aa.NONE_AT_BOUND) == "NONE_AT_BOUND"


def test_budget_is_reported_separately(running_norm):
    # the sure search on the running example has no winner within two memories
    with pytest.raises(aa.BudgetExceeded):
        aa.synthesize_aa_bounded(running_norm.arena, None, 1, S, 2, budget=3)
    with pytest.raises(ValueError):
        aa.synthesize_aa_bounded(running_norm.arena, None, 1, A, 0)


def test_validation_harness(running_norm, game1):
    arena = running_norm.arena
    origin = running_norm.origin
    win = aa.synthesize_aa_bounded(arena, None, 1, A, 1, game=game1)
    final = aa.extract_admissible_winner(arena, None, 1, A, win, game1)
    assert classify_strategy(arena, None, 1, A, final).admissible
    base2 = aa.adversary_suite(arena, None, 1, A, size=1)
    assert aa.validate_vs_admissible(arena, None, 1, A, final, base2).passed
    lazy = MooreStrategy.memoryless(2, {s: {"s0": "b'", "s1": "c'", "s2": "f'",
                                            "Trg": "t'"}[origin[s]] for s in arena.states})
    with pytest.raises(NotAdmissibleError, match="player 2"):
        aa.validate_vs_admissible(arena, None, 1, A, final, [{2: lazy}])
    report = aa.validate_vs_admissible(arena, None, 1, A, final, base2)
    assert report.to_json() == {"profiles": 1, "losing": [], "passed": True}


def test_extraction_rejects_a_losing_machine(running_norm, game1):
    stubborn = _by_origin(running_norm, {"s0": "a", "s1": "d", "s2": "f", "Trg": "t"})
    with pytest.raises(ValueError):
        aa.extract_admissible_winner(running_norm.arena, None, 1, A, stubborn, game1)


def test_adversary_suite_is_deterministic(running_norm):
    one = aa.adversary_suite(running_norm.arena, None, 1, A, size=5, seed=4)
    two = aa.adversary_suite(running_norm.arena, None, 1, A, size=5, seed=4)
    assert [aa._key(p) for p in one] == [aa._key(p) for p in two]
    assert len(one) == 5 and len({aa._key(p) for p in one}) == 5


SAFETY_TRAP = ("players 1\nstates s bad\ninit bad\nactions 1 s : x\nactions 1 bad : z\n"
               "trans s x -> s\ntrans bad z -> bad\nobjective 1 safety avoid bad\n")


def test_safety_shortcut():
    a = parse_arena(SAFETY_TRAP)
    assert aa.synthesize_aa_safety(a, None, 1) is None
    b = parse_arena(SAFETY_TRAP.replace("init bad", "init s"))
    strat = aa.synthesize_aa_safety(b, None, 1)
    assert strat.move(strat.init, "s").weights[0][0] == "x"
    with pytest.raises(ValueError, match="safety"):
        aa.synthesize_aa_safety(parse_arena(SAFETY_TRAP.replace("safety avoid", "reach")),
                                None, 1)


@pytest.mark.parametrize("seed", range(12))
def test_safety_shortcut_winners_are_admissible_and_unchanged(seed):
    g = normalize(random_arena(random.Random(seed), kind="safety")).arena
    for p in (1, 2):
        strat = aa.synthesize_aa_safety(g, None, p, S)
        if strat is None:
            continue
        assert classify_strategy(g, None, p, S, strat).admissible
        assert dominating_admissible(g, None, p, S, strat) is strat
        suite = aa.adversary_suite(g, None, p, S, size=3, seed=seed)
        assert aa.validate_vs_admissible(g, None, p, S, strat, suite).passed


@pytest.mark.parametrize("seed", range(30))
def test_bounded_synthesis_soundness(seed):
    rng = random.Random(500 + seed)
    norm = normalize(random_arena(rng, max_states=4))
    g = norm.arena
    for p in (1, 2):
        for sem in (S, A):
            game = aa.build_aa_game(g, None, p, sem)
            win = aa.synthesize_aa_bounded(g, None, p, sem, 1, game=game)
            if not win:
                continue
            assert aa.check_machine(game, win)[0]
            final = aa.extract_admissible_winner(g, None, p, sem, win, game)
            assert classify_strategy(g, None, p, sem, final).admissible
            suite = aa.adversary_suite(g, None, p, sem, size=5, seed=seed)
            assert aa.validate_vs_admissible(g, None, p, sem, final, suite).passed
