"""Acceptance suite: one test per criterion, summarised at the end of the
run by the ``criterion`` marker hook in conftest."""
import random
from fractions import Fraction

import pytest

from admissible import aa_synthesis as aa
from admissible.admissibility import (classify_strategy, dominating_admissible, la_actions)
from admissible.arena import (MixedMove, MooreStrategy, product_graph, simulate_run,
                              step_distribution)
from admissible.formula import check_universal, eval_lasso
from admissible.objectives import normalize
from admissible.values import state_values, strategy_values

from randgames import (oracle_values, random_arena, random_formula, random_graph,
                       universal_oracle)

A, S = "almost-sure", "sure"


def _copy(norm, arena, p, s):
    """The normalised copy of ``s`` reached by a history starting at ``s``:
    its bit is set exactly when ``s`` is in the original set."""
    if not norm.tracked:
        return s
    inside = s in arena.objectives[p].states
    (t,) = [t for t in norm.lift(s) if (t in norm.objectives[p].states) == inside]
    return t


def _random_suite(count, kind="reach"):
    for i in range(count):
        yield i, random_arena(random.Random(i), kind=kind)


@pytest.mark.criterion(1, "running example state values")
def test_values_running_example(running):
    assert state_values(running, None, 1, A).values == {"s0": 0, "s1": 0, "s2": 1, "Trg": 1}
    assert state_values(running, None, 1, S).values == {"s0": 0, "s1": 0, "s2": 0, "Trg": 1}


@pytest.mark.criterion(2, "running example LA tables")
def test_la_running_example(running, running_norm):
    la = la_actions(running, None, 1, A)
    assert la.classes["s0"] == (("a",), ("b",))
    assert la.classes["s1"] == (("d",),)
    assert la.classes["s2"] == (("f", "g"),)
    sure = la_actions(running, None, 1, S)
    assert sure.classes["s2"] == (("f",), ("g",))
    # the labelled game never offers c or c'
    game = aa.build_aa_game(running_norm.arena, None, 1, A)
    lab = game.labelled
    used = set()
    for x, v in enumerate(lab.nodes):
        used.update(v.joint or ())
        used.update(lab.rows(v.state))
        for c in lab.cols(v.state):
            used.update(c)
    assert used and not used & {"c", "c'"}
    assert all("c" not in la.actions(s) for s in running.states)


@pytest.mark.criterion(3, "admissibility verdicts of the example strategies")
def test_verdicts(running, sigmas):
    v = classify_strategy(running, None, 1, S, sigmas["sigma2"])
    assert v.admissible
    assert not classify_strategy(running, None, 1, A, sigmas["sigma2"]).admissible

    assert classify_strategy(running, None, 1, A, sigmas["sigma3"]).admissible
    v = classify_strategy(running, None, 1, S, sigmas["sigma3"])
    assert not v.admissible and not v.la and v.la_witness["state"] == "s2"

    v = classify_strategy(running, None, 1, A, sigmas["sigma3prime"])
    assert v.sco and not v.la and not v.admissible

    fixed = dominating_admissible(running, None, 1, A, sigmas["sigma1"])
    assert classify_strategy(running, None, 1, A, fixed).admissible
    # reaches Trg when player 2 cooperates
    sv = strategy_values(running, None, 1, A, fixed)
    assert sv.root >= 0
    assert sv.root > strategy_values(running, None, 1, A, sigmas["sigma1"]).root


@pytest.mark.criterion(4, "labelled game construction")
def test_labelled_game(running_norm):
    game = aa.build_aa_game(running_norm.arena, None, 1, A)
    lab = game.labelled
    origin = running_norm.origin
    helped = {(origin[lab.nodes[x].state], lab.nodes[x].joint) for x in game.atoms.after_help[2]}
    assert helped == {("s0", ("a", "b'")), ("s1", ("b", "b'"))}
    in_s0 = [v for v in lab.nodes if v.joint is not None and origin[v.state] == "s0"]
    assert len(in_s0) == 3


@pytest.mark.criterion(5, "end-to-end synthesis on the running example")
def test_end_to_end(running_norm):
    arena = running_norm.arena
    origin = running_norm.origin
    game = aa.build_aa_game(arena, None, 1, A)
    winner = aa.synthesize_aa_bounded(arena, None, 1, A, 1, game=game)
    assert winner
    final = aa.extract_admissible_winner(arena, None, 1, A, winner, game)
    vals = state_values(arena, None, 1, A)
    pg = product_graph(arena, final)
    moves = {}
    for s, m in pg.nodes:
        moves.setdefault(origin[s], set()).add(final.move(m, s))
    assert moves["s0"] == {MixedMove.dirac("b")}
    assert moves["s1"] == {MixedMove.dirac("d")}
    assert moves["s2"] == {MixedMove.uniform(["f", "g"])}
    assert all(vals[s] == 1 for s, _ in pg.nodes if origin[s] == "s2")

    suite = aa.adversary_suite(arena, None, 1, A, size=5, seed=0)
    assert len(suite) >= 5
    assert aa.validate_vs_admissible(arena, None, 1, A, final, suite).passed

    plain = aa.extend_machine(arena, None, 1, A, winner)
    g_prime = MooreStrategy.memoryless(2, {s: {"s0": "b'", "s1": "d'", "s2": "g'",
                                               "Trg": "t'"}[origin[s]] for s in arena.states})
    assert classify_strategy(arena, None, 2, A, g_prime).admissible
    assert not aa.profile_wins(arena, running_norm.objectives[1], A, {1: plain, 2: g_prime})
    assert aa.profile_wins(arena, running_norm.objectives[1], A, {1: final, 2: g_prime})


@pytest.mark.criterion(6, "fixpoint values match memoryless brute force")
def test_values_oracle():
    mismatches = []
    count = 0
    for i, arena in _random_suite(240):
        if i % 4 == 0:
            arena = random_arena(random.Random(i), kind="safety")
        for p in (1, 2):
            norm = normalize(arena, players=[p])
            for sem in (S, A):
                want = oracle_values(arena, p, sem)
                got = state_values(norm.arena, None, p, sem)
                for s in arena.states:
                    if got[_copy(norm, arena, p, s)] != want[s]:
                        mismatches.append((i, p, sem, s))
        count += 1
    assert count >= 200
    assert mismatches == []


def _masses(arena, vals, s, p, move, col):
    dist = step_distribution(arena, s, {p: move, **col})
    zero = {t: w for t, w in dist.items() if vals[t] == 0}
    one = sum((w for t, w in dist.items() if vals[t] == 1), Fraction(0))
    return zero, one


@pytest.mark.criterion(7, "equivalent LA actions carry equal value masses")
def test_equivalent_moves_masses():
    rng = random.Random(7)
    checked = 0
    for i, arena in _random_suite(200):
        for p in (1, 2):
            (q,) = arena.others(p)
            norm = normalize(arena, players=[p])
            g = norm.arena
            for sem in (S, A):
                vals = state_values(g, None, p, sem)
                la = la_actions(g, None, p, sem)
                for s in g.states:
                    for cls in la.classes[s]:
                        weights = {a: Fraction(rng.randint(1, 5)) for a in cls}
                        mixed = MixedMove.of({a: w / sum(weights.values())
                                              for a, w in weights.items()})
                        for c in g.acts(q, s):
                            col = {q: MixedMove.dirac(c)}
                            ref = _masses(g, vals, s, p, MixedMove.dirac(cls[0]), col)
                            for a in cls[1:]:
                                assert _masses(g, vals, s, p, MixedMove.dirac(a), col) == ref
                                checked += 1
                            assert _masses(g, vals, s, p, mixed, col) == ref
    assert checked > 0


@pytest.mark.criterion(8, "simple safety: LA implies admissible; fast path agrees")
def test_safety_clause():
    rng = random.Random(8)
    outcomes = {True: 0, False: 0}
    for i, arena in _random_suite(100, kind="safety"):
        norm = normalize(arena)
        g = norm.arena
        for p in (1, 2):
            for sem in (S, A):
                la = la_actions(g, None, p, sem)
                for _ in range(3):
                    machine = aa.random_la_machine(g, la, rng)
                    assert classify_strategy(g, None, p, sem, machine).admissible, (i, p, sem)
                fast = aa.synthesize_aa_safety(g, None, p, sem)
                bounded = aa.synthesize_aa_bounded(g, None, p, sem, 1)
                assert (fast is not None) == bool(bounded), (i, p, sem)
                outcomes[fast is not None] += 1
    assert outcomes[True] and outcomes[False]


@pytest.mark.criterion(9, "universal path check matches exhaustive enumeration")
def test_universal_check_oracle():
    verdicts = {True: 0, False: 0}
    for i in range(150):
        rng = random.Random(i)
        n = rng.randint(1, 12)
        succ = random_graph(rng, n)
        formula = random_formula(rng, n)
        ok, lasso = check_universal(succ, formula)
        assert ok == universal_oracle(succ, formula), i
        if lasso is not None:
            walk = lasso.prefix + lasso.cycle + lasso.cycle[:1]
            assert walk[0] == 0
            assert all(w in succ[v] for v, w in zip(walk, walk[1:]))
            assert not eval_lasso(formula, lasso.prefix, lasso.cycle)
        verdicts[ok] += 1
    assert verdicts[True] and verdicts[False]


@pytest.mark.criterion(10, "simulated synthesized profile reaches Trg in >= 99% of runs")
def test_simulation(running_norm):
    arena = running_norm.arena
    profile = {}
    for p in (1, 2):
        game = aa.build_aa_game(arena, None, p, A)
        winner = aa.synthesize_aa_bounded(arena, None, p, A, 1, game=game)
        profile[p] = aa.extract_admissible_winner(arena, None, p, A, winner, game)
    runs = 10_000
    hits = sum(any(running_norm.origin[s] == "Trg" for s in simulate_run(arena, profile, 200,
                                                                          seed=k))
               for k in range(runs))
    assert hits / runs >= 0.99
