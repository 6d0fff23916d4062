import numpy as np
import pytest

from cfrprune import (CHANCE, TERMINAL, Chance, Decision, GameError, GameKind, Terminal,
                      build_game, game_from_tree, payoff_bounds, terminal_utility,
                      validate_game)
from oracles import brute_force_bounds


def find_terminal(g, deal: str, path: list[str]) -> int:
    root_kids = g.children[g.child_ptr[0]:g.child_ptr[1]]
    h = next(int(c) for c in root_kids if g.edge_label[c] == deal)
    for name in path:
        kids = g.children[g.child_ptr[h]:g.child_ptr[h + 1]]
        h = next(int(c) for c in kids if g.edge_label[c] == name)
    assert g.actor[h] == TERMINAL
    return h


def test_kuhn_structure():
    g = build_game("kuhn")
    assert g.actor[0] == CHANCE
    assert g.n_nodes == 55
    assert g.n_infosets == 12
    assert g.n_ia == 24
    probs = g.edge_prob[g.children[g.child_ptr[0]:g.child_ptr[1]]]
    assert len(probs) == 6
    assert np.allclose(probs, 1 / 6)


def test_leduc_structure():
    g = build_game("leduc")
    assert g.n_infosets == 288
    assert g.n_ia == 672
    assert g.kind.n_ranks * g.kind.copies == 6
    assert g.kind.rounds == 2 and g.kind.bet_cap == 2


def test_leduc5_actions():
    g = build_game("leduc5")
    first_round = [I for I in range(g.n_infosets) if len(g.infoset_label[I].split("|")[0]) == 1]
    counts = g.inf_n_actions[first_round]
    assert counts.max() == 7  # fold, call and five raises
    root_set = g.find_infoset("J|/", 0)
    assert g.inf_n_actions[root_set] == 6  # check and five bets
    assert validate_game(g).ok


def test_build_is_deterministic():
    a = build_game(GameKind.leduc())
    build_game.cache_clear()
    b = build_game(GameKind.leduc())
    assert a is not b
    assert a.dump() == b.dump()


@pytest.mark.parametrize("kind", [
    GameKind("kuhn", n_ranks=0, copies=1, bet_sizes=((1.0,),), bet_cap=1),
    GameKind("leduc", bet_sizes=((2.0,), (-4.0,))),
    GameKind("leduc", bet_sizes=((0.0,), (4.0,))),
    GameKind("kuhn", n_ranks=1, copies=1, bet_sizes=((1.0,),), bet_cap=1),
])
def test_invalid_kinds_rejected(kind):
    with pytest.raises(GameError):
        build_game(kind)


def test_unknown_name():
    with pytest.raises(GameError):
        build_game("holdem")


def test_leduc_payoff_examples():
    g = build_game("leduc")
    z = find_terminal(g, "KQJ", ["k", "k", "k", "k"])
    assert terminal_utility(g, z, 0) == 1.0
    assert terminal_utility(g, z, 1) == -1.0
    z = find_terminal(g, "KQJ", ["b2", "f"])
    assert terminal_utility(g, z, 0) == 1.0
    z = find_terminal(g, "JJQ", ["k", "k", "k", "k"])
    assert terminal_utility(g, z, 0) == 0.0
    assert terminal_utility(g, z, 1) == 0.0
    # a pair with the public card beats a higher private card
    z = find_terminal(g, "JKJ", ["k", "k", "k", "k"])
    assert terminal_utility(g, z, 0) == 1.0


def test_terminal_utility_rejects_internal_history():
    g = build_game("kuhn")
    with pytest.raises(ValueError):
        terminal_utility(g, 0, 0)


def test_leduc5_half_chip_payoffs():
    g = build_game("leduc5")
    z = find_terminal(g, "KQJ", ["b0.5", "c", "k", "k"])
    assert terminal_utility(g, z, 0) == 1.5


def test_kuhn_jack_bet_bounds():
    g = build_game("kuhn")
    I = g.find_infoset("J|", 0)
    U, L = payoff_bounds(g, I, 1)
    # betting with the jack can win the pot against a fold, or lose the called bet
    assert (U, L) == brute_force_bounds(g, I)[1]
    assert (U, L) == (1.0, -2.0)
    assert payoff_bounds(g, g.find_infoset("K|", 0), 1) == (2.0, 1.0)
    K = g.find_infoset("K|", 0)
    assert (g.U_inf[K], g.L_inf[K]) == (2.0, -1.0)


def test_payoff_bounds_bad_action():
    g = build_game("kuhn")
    with pytest.raises(ValueError):
        payoff_bounds(g, 0, 5)


@pytest.mark.parametrize("name", ["kuhn", "leduc"])
def test_bounds_match_terminal_scan(name):
    g = build_game(name)
    for I in range(g.n_infosets):
        scan = brute_force_bounds(g, I)
        for a, (hi, lo) in enumerate(scan):
            U, L = payoff_bounds(g, I, a)
            assert (U, L) == (hi, lo)
            assert L <= U
        ia = slice(g.inf_ia_start[I], g.inf_ia_start[I] + g.inf_n_actions[I])
        assert g.U_inf[I] == g.U_ia[ia].max()
        assert g.L_inf[I] == g.L_ia[ia].min()
        assert g.delta_inf[I] == g.U_inf[I] - g.L_inf[I]


def test_leduc_first_decision_within_max_pot():
    g = build_game("leduc")
    for label in ("J|/", "Q|/", "K|/"):
        U, L = payoff_bounds(g, g.find_infoset(label, 0), 0)
        assert -13 <= L <= U <= 13
    # max pot is reached by a raise war in both rounds
    assert max(np.abs(g.U_ia).max(), np.abs(g.L_ia).max()) == 13


@pytest.mark.parametrize("name", ["kuhn", "leduc"])
def test_chance_normalized_and_zero_sum(name):
    g = build_game(name)
    for h in np.flatnonzero(g.actor == CHANCE):
        kids = g.children[g.child_ptr[h]:g.child_ptr[h + 1]]
        assert abs(g.edge_prob[kids].sum() - 1.0) <= 1e-12
    term = g.actor == TERMINAL
    assert np.all(g.utils[term].sum(axis=1) == 0)


def test_descendant_sets_are_owner_infosets_below():
    g = build_game("leduc")
    for ia in range(0, g.n_ia, 7):
        owner = g.ia_owner[ia]
        I = g.ia_infoset[ia]
        a = g.ia_action[ia]
        expected = set()
        for h in g.members_of(I):
            kid = g.children[g.child_ptr[h] + a]
            for d in range(kid, g.end[kid]):
                if g.actor[d] == owner:
                    expected.add(int(g.infoset[d]))
        assert set(int(x) for x in g.descendants(ia)) == expected


def one_decision(u_left=1.0, u_right=0.0):
    return Decision(0, "I", (("l", Terminal((u_left, -u_left))), ("r", Terminal((u_right, -u_right)))))


def test_validation_flags_non_zero_sum():
    tree = Decision(0, "I", (("l", Terminal((1.0, 0.0))), ("r", Terminal((0.0, 0.0)))))
    report = validate_game(game_from_tree(tree, validate=False))
    assert any("zero-sum" in v for v in report.violations)
    with pytest.raises(GameError):
        game_from_tree(tree)


def test_validation_flags_mixed_action_counts():
    left = Decision(1, "P", (("x", Terminal((0.0, 0.0))), ("y", Terminal((0.0, 0.0)))))
    right = Decision(1, "P", (("x", Terminal((0.0, 0.0))),))
    tree = Chance((("a", 0.5, left), ("b", 0.5, right)))
    report = validate_game(game_from_tree(tree, validate=False))
    assert any("mixes action counts" in v for v in report.violations)


def test_validation_flags_perfect_recall():
    inner = Decision(0, "second", (("x", Terminal((0.0, 0.0))), ("y", Terminal((1.0, -1.0)))))
    tree = Decision(0, "first", (("l", inner), ("r", inner)))
    report = validate_game(game_from_tree(tree, validate=False))
    assert any("perfect recall" in v for v in report.violations)


def test_validation_flags_bad_chance():
    tree = Chance((("a", 0.5, Terminal((0.0, 0.0))), ("b", 0.4, Terminal((0.0, 0.0)))))
    report = validate_game(game_from_tree(tree, validate=False))
    assert any("probabilities" in v for v in report.violations)


def test_leduc_validates():
    assert validate_game(build_game("leduc")).violations == []


def test_hand_built_one_decision():
    g = game_from_tree(one_decision())
    assert g.n_infosets == 1
    assert payoff_bounds(g, 0, 0) == (1.0, 1.0)
    assert payoff_bounds(g, 0, 1) == (0.0, 0.0)
