import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfrprune import (CFRSolver, Decision, InvariantViolation, SolverConfig, Terminal,
                      build_game, cfr_iteration, cfr_plus_update, game_from_tree,
                      regret_matching, theoretical_regret_bound)
from cfrprune.regret import normalize_average
from oracles import KuhnCFR, kuhn_labels

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


def test_regret_matching_examples():
    assert regret_matching([3, 1, 0]).tolist() == [0.75, 0.25, 0.0]
    assert regret_matching([-5, -1]).tolist() == [0.5, 0.5]
    assert np.allclose(regret_matching([0, 0, 0]), [1 / 3] * 3)


def test_regret_matching_empty():
    with pytest.raises(ValueError):
        regret_matching([])


@given(st.lists(finite, min_size=1, max_size=12))
def test_regret_matching_is_distribution(r):
    s = regret_matching(r)
    assert (s >= 0).all()
    assert abs(s.sum() - 1.0) <= 1e-12
    pos = np.maximum(np.asarray(r), 0)
    if pos.sum() > 0:
        # zero weight exactly where regret is not positive
        assert (s[pos == 0] == 0).all()


def test_cfr_plus_update_examples():
    assert cfr_plus_update(0, -3) == 0
    assert cfr_plus_update(-4, -1, pruning=True) == -5
    assert cfr_plus_update(-5, 2, pruning=True) == 0
    assert cfr_plus_update(2, 3) == 5


@given(finite, finite)
def test_cfr_plus_update_floor(entry, inc):
    entry = abs(entry)
    assert cfr_plus_update(entry, inc) == max(entry + inc, 0.0)


@given(finite, finite)
def test_cfr_plus_update_with_pruning(entry, inc):
    out = cfr_plus_update(entry, inc, pruning=True)
    if entry < 0 and inc > 0:
        assert out == 0.0
    else:
        assert out == entry + inc


def test_theoretical_bound():
    assert theoretical_regret_bound(4, 4, 100) == 80
    with pytest.raises(ValueError):
        theoretical_regret_bound(4, 4, 0)


def test_normalize_average():
    assert normalize_average(np.array([2.0, 2.0])).tolist() == [0.5, 0.5]
    assert normalize_average(np.array([0.0, 0.0])).tolist() == [0.5, 0.5]


def one_decision_game():
    return game_from_tree(Decision(0, "I", (("l", Terminal((1.0, -1.0))),
                                            ("r", Terminal((0.0, 0.0))))))


def test_one_decision_regrets():
    s = CFRSolver(one_decision_game())
    values = cfr_iteration(s, 0)
    assert values == {0: 0.5}
    assert s.regrets.tolist() == [0.5, -0.5]
    assert s.cum_cfv[0] == 0.5


def test_cfr_plus_linear_average():
    # always-reached infoset whose strategy is [1, 0] at t=1 and [0, 1] at t=2
    g = game_from_tree(Decision(0, "I", (("l", Terminal((0.0, 0.0))), ("r", Terminal((1.0, -1.0))))))
    s = CFRSolver(g, SolverConfig(algo="cfr+"))
    s.regrets[:] = [1.0, 0.0]
    s.iterate()  # sigma = [1, 0]
    s.regrets[:] = [0.0, 1.0]
    s.iterate()  # sigma = [0, 1]
    assert np.allclose(s.average_strategy(0), [1 / 3, 2 / 3])


def test_kuhn_matches_reference_for_ten_iterations():
    g = build_game("kuhn")
    s = CFRSolver(g)
    ref = KuhnCFR()
    for _ in range(10):
        s.iterate()
        ref.iteration()
        for label, player in kuhn_labels():
            I = g.find_infoset(label, player)
            lo = g.inf_ia_start[I]
            assert np.abs(s.regrets[lo:lo + 2] - ref.regret[label]).max() <= 1e-12
            want = ref.avg[label] / ref.avg[label].sum()
            assert np.abs(s.average_strategy(I) - want).max() <= 1e-12


def test_partial_pruning_skips_unreached_infosets():
    # P1's "l" is never played once its regret is hugely negative; P2's infoset under it
    # is then unreachable, and its regrets must stay put under partial pruning
    sub = Decision(1, "P", (("x", Terminal((0.0, 0.0))), ("y", Terminal((1.0, -1.0)))))
    g = game_from_tree(Decision(0, "I", (("l", sub), ("r", Terminal((5.0, -5.0))))))
    s = CFRSolver(g, SolverConfig(prune="partial"))
    s.iterate()
    before = s.regrets.copy()
    touched = s.nodes_touched
    s.iterate()
    P = g.find_infoset("P", 1)
    lo = g.inf_ia_start[P]
    assert (s.regrets[lo:lo + 2] == before[lo:lo + 2]).all()
    plain = CFRSolver(g)
    plain.run(2)
    assert s.nodes_touched - touched < plain.nodes_touched / 2


def test_cum_strategy_nondecreasing_and_regret_bound():
    g = build_game("kuhn")
    s = CFRSolver(g, SolverConfig(algo="cfr+", assertions=True))
    prev = s.cum_strategy.copy()
    for _ in range(50):
        s.iterate()
        assert (s.cum_strategy >= prev).all()
        assert (s.regrets >= 0).all()
        prev = s.cum_strategy.copy()
    assert s.stats.regret_bound_checks == 50


def test_regret_bound_violation_detected():
    g = build_game("kuhn")
    s = CFRSolver(g, SolverConfig(assertions=True))
    s.iterate()
    s.regrets[0] = 1e6
    with pytest.raises(InvariantViolation):
        s.check_regret_bound()


def test_determinism():
    g = build_game("leduc")
    a, b = CFRSolver(g), CFRSolver(g)
    a.run(20)
    b.run(20)
    assert a.regrets.tobytes() == b.regrets.tobytes()
    assert a.nodes_touched == b.nodes_touched


def test_alternating_flag_changes_second_traversal():
    g = build_game("kuhn")
    sim = CFRSolver(g)
    alt = CFRSolver(g, SolverConfig(alternating=True))
    sim.run(2)
    alt.run(2)
    p1 = g.player_ia[0]
    p2 = g.player_ia[1]
    # the first player's first update is the same; the second player then sees new strategies
    s1, a1 = CFRSolver(g), CFRSolver(g, SolverConfig(alternating=True))
    s1.iterate()
    a1.iterate()
    assert np.array_equal(s1.regrets[p1], a1.regrets[p1])
    assert not np.array_equal(sim.regrets[p2], alt.regrets[p2])


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(algo="mccfr")
    with pytest.raises(ValueError):
        SolverConfig(prune="sometimes")
    with pytest.raises(ValueError):
        SolverConfig(C=-1)
    assert SolverConfig(prune="interval").partial is True
    assert SolverConfig().partial is False


def test_env_disables_assertions(monkeypatch):
    monkeypatch.setenv("CFRPRUNE_NO_ASSERT", "1")
    assert SolverConfig().assertions is False
    monkeypatch.delenv("CFRPRUNE_NO_ASSERT")
    assert SolverConfig().assertions is True


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=1, max_value=60), st.sampled_from(["cfr", "cfr+"]))
def test_regret_bound_holds_on_kuhn(T, algo):
    s = CFRSolver(build_game("kuhn"), SolverConfig(algo=algo, assertions=False))
    s.run(T)
    g = s.game
    for I in range(g.n_infosets):
        lo, n = g.inf_ia_start[I], g.inf_n_actions[I]
        assert max(s.regrets[lo:lo + n].max(), 0) <= g.delta_inf[I] * math.sqrt(n * T) + 1e-9
