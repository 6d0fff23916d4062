import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfrprune import (CFRSolver, Decision, Terminal, build_game, compute_cbr, expected_value,
                      exploitability, game_from_tree, near_cbr, uniform_profile)
from cfrprune.best_response import (NearCbrPolicy, counterfactual_regret_potential,
                                    potential_bound)
from oracles import (kuhn_best_response_value, kuhn_equilibrium, kuhn_payoff_matrix,
                     labels_from_profile, matrix_game_value, profile_from_labels)

KUHN = build_game("kuhn")


def random_profile(game, rng):
    prof = np.empty(game.n_ia)
    for I in range(game.n_infosets):
        lo, n = game.inf_ia_start[I], game.inf_n_actions[I]
        prof[lo:lo + n] = rng.dirichlet(np.ones(n))
    return prof


def test_kuhn_game_value_from_matrix():
    assert matrix_game_value(kuhn_payoff_matrix()) == pytest.approx(-1 / 18, abs=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 0.1, 0.2, 1 / 3])
def test_analytic_equilibrium_has_zero_exploitability(alpha):
    prof = profile_from_labels(KUHN, kuhn_equilibrium(alpha))
    assert abs(exploitability(KUHN, prof)) <= 1e-9
    assert expected_value(KUHN, prof) == pytest.approx(-1 / 18, abs=1e-12)


def test_cbr_against_uniform_beats_game_value():
    u = uniform_profile(KUHN)
    r = compute_cbr(KUHN, u, 0)
    assert r.value >= -1 / 18
    assert r.value == pytest.approx(kuhn_best_response_value(0, labels_from_profile(KUHN, u, 1)),
                                    abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_cbr_matches_pure_strategy_enumeration(seed):
    prof = random_profile(KUHN, np.random.default_rng(seed))
    for i in (0, 1):
        r = compute_cbr(KUHN, prof, i)
        want = kuhn_best_response_value(i, labels_from_profile(KUHN, prof, 1 - i))
        assert r.value == pytest.approx(want, abs=1e-12)
    assert exploitability(KUHN, prof) >= -1e-10


def test_one_decision_cbr():
    g = game_from_tree(Decision(0, "I", (("l", Terminal((1.0, -1.0))), ("r", Terminal((0.0, 0.0))))))
    r = compute_cbr(g, uniform_profile(g), 0)
    assert r.strategy.tolist() == [1.0, 0.0]
    assert r.cbv_infoset[0] == 1.0


def test_cbv_identities_and_tiebreak():
    g = build_game("leduc")
    prof = random_profile(g, np.random.default_rng(3))
    for i in (0, 1):
        r = compute_cbr(g, prof, i)
        for I in g.player_infosets[i]:
            lo, n = g.inf_ia_start[I], g.inf_n_actions[I]
            q = r.cbv_action[lo:lo + n]
            assert r.cbv_infoset[I] == q.max()
            assert r.strategy[lo + int(np.argmax(q))] == 1.0
            assert r.strategy[lo:lo + n].sum() == 1.0
    # ties go to the lowest index: every action is worth the same here
    tie = game_from_tree(Decision(0, "I", tuple((a, Terminal((0.0, 0.0))) for a in "abc")))
    assert compute_cbr(tie, uniform_profile(tie), 0).strategy.tolist() == [1.0, 0.0, 0.0]


def test_cbr_values_unreached_infosets():
    # P1 never reaches "J|k.b1" after betting with a pure strategy, but its value still exists
    r = compute_cbr(KUHN, uniform_profile(KUHN), 0)
    I = KUHN.find_infoset("J|k.b1", 0)
    assert np.isfinite(r.cbv_infoset[I])


def test_cbr_not_beaten_by_random_strategies():
    g = build_game("leduc")
    rng = np.random.default_rng(11)
    opp = random_profile(g, rng)
    for i in (0, 1):
        r = compute_cbr(g, opp, i)
        mine = g.player_ia[i]
        sign = 1.0 if i == 0 else -1.0
        for _ in range(100):
            prof = opp.copy()
            prof[mine] = random_profile(g, rng)[mine]
            assert sign * expected_value(g, prof) <= r.value + 1e-10


def test_cbr_has_zero_counterfactual_regret():
    g = build_game("leduc")
    opp = random_profile(g, np.random.default_rng(5))
    for i in (0, 1):
        r = compute_cbr(g, opp, i)
        pot = counterfactual_regret_potential(g, r.strategy, opp, i)
        assert np.nanmax(pot) == 0.0


def test_near_cbr_zero_policy_is_exact():
    prof = random_profile(KUHN, np.random.default_rng(0))
    a = compute_cbr(KUHN, prof, 1)
    b = near_cbr(KUHN, prof, 1, T=10)
    assert a.strategy.tobytes() == b.strategy.tobytes()
    assert a.cbv_action.tobytes() == b.cbv_action.tobytes()
    assert a.value == b.value


def test_near_cbr_contract():
    prof = uniform_profile(KUHN)
    with pytest.raises(ValueError):
        near_cbr(KUHN, prof, 0, T=0)
    with pytest.raises(ValueError):
        near_cbr(KUHN, prof, 0, T=5, policy=NearCbrPolicy(lambda I, T, y: y + 1))
    with pytest.raises(ValueError):
        near_cbr(KUHN, prof, 0, T=5, policy=NearCbrPolicy(lambda I, T, y: -1.0))
    assert potential_bound(4, 4, 25) == 1600


def test_uniform_leduc_is_exploitable():
    g = build_game("leduc")
    assert exploitability(g, uniform_profile(g)) > 0.1


def test_exploitability_repeatable():
    g = build_game("leduc")
    prof = random_profile(g, np.random.default_rng(9))
    assert exploitability(g, prof) == exploitability(g, prof.copy())


def test_cfr_exploitability_falls_each_decade():
    s = CFRSolver(KUHN)
    seen = []
    for T in (100, 1000, 10000):
        s.run(T - s.T)
        seen.append(exploitability(KUHN, s.average_profile()))
    assert seen[0] > seen[1] > seen[2]
