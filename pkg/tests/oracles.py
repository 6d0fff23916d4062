"""Independent reference implementations used to check the package.

Nothing here imports the solver internals. The Kuhn routines work on the game
rules directly, and the generic helpers only read the public flattened tree.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

CARDS = "JQK"
DEALS = [(a, b) for a in range(3) for b in range(3) if a != b]


def kuhn_terminal(hist: str, c0: int, c1: int) -> float | None:
    """P1's payoff at a terminal Kuhn history, or None if play continues."""
    show = 1.0 if c0 > c1 else -1.0
    if hist == "kk":
        return show
    if hist == "bf":
        return 1.0
    if hist in ("bc", "kbc"):
        return 2.0 * show
    if hist == "kbf":
        return -1.0
    return None


def kuhn_label(hist: str, card: int) -> str:
    return CARDS[card] + "|" + ".".join("b1" if ch == "b" else ch for ch in hist)


def kuhn_actions(hist: str) -> str:
    return "fc" if hist.endswith("b") else "kb"


def kuhn_labels() -> list[tuple[str, int]]:
    """Every (label, player) of Kuhn poker."""
    out = []
    for hist, player in (("", 0), ("k", 1), ("b", 1), ("kb", 0)):
        for c in range(3):
            out.append((kuhn_label(hist, c), player))
    return out


class KuhnCFR:
    """Straight recursive vanilla CFR on Kuhn poker with simultaneous updates."""

    def __init__(self) -> None:
        self.regret: dict[str, np.ndarray] = {}
        self.avg: dict[str, np.ndarray] = {}
        for label, _ in kuhn_labels():
            self.regret[label] = np.zeros(2)
            self.avg[label] = np.zeros(2)

    def strategy(self, label: str) -> np.ndarray:
        pos = np.maximum(self.regret[label], 0.0)
        s = pos.sum()
        return pos / s if s > 0 else np.full(2, 0.5)

    def _walk(self, hist, c0, c1, reach, sigma, player, inc):
        """Return player's utility below ``hist`` and add cf-value increments."""
        u = kuhn_terminal(hist, c0, c1)
        if u is not None:
            return u if player == 0 else -u
        actor = len(hist) % 2
        card = c0 if actor == 0 else c1
        label = kuhn_label(hist, card)
        strat = sigma[label]
        vals = np.zeros(2)
        for a, ch in enumerate(kuhn_actions(hist)):
            nr = list(reach)
            nr[actor] *= strat[a]
            vals[a] = self._walk(hist + ch, c0, c1, nr, sigma, player, inc)
        v = float(strat @ vals)
        if actor == player:
            opp = reach[1 - player] * reach[2]
            inc[label] += opp * (vals - v)
        return v

    def iteration(self) -> None:
        sigma = {lab: self.strategy(lab) for lab in self.regret}
        for player in (0, 1):
            inc = {lab: np.zeros(2) for lab in self.regret}
            for c0, c1 in DEALS:
                self._walk("", c0, c1, [1.0, 1.0, 1.0 / 6.0], sigma, player, inc)
            for lab, (lab_inc) in inc.items():
                self.regret[lab] += lab_inc
        for c0, c1 in DEALS:
            self._accumulate("", c0, c1, [1.0, 1.0], sigma)

    def _accumulate(self, hist, c0, c1, reach, sigma):
        if kuhn_terminal(hist, c0, c1) is not None:
            return
        actor = len(hist) % 2
        label = kuhn_label(hist, c0 if actor == 0 else c1)
        strat = sigma[label]
        # each infoset is reached from 2 deals with the same own reach; add once per deal/2
        self.avg[label] += 0.5 * reach[actor] * strat
        for a, ch in enumerate(kuhn_actions(hist)):
            nr = list(reach)
            nr[actor] *= strat[a]
            self._accumulate(hist + ch, c0, c1, nr, sigma)


def kuhn_value(strategies: tuple[dict[str, np.ndarray], dict[str, np.ndarray]]) -> float:
    """P1's expected payoff when both players follow the given label-keyed strategies."""

    def rec(hist, c0, c1):
        u = kuhn_terminal(hist, c0, c1)
        if u is not None:
            return u
        actor = len(hist) % 2
        strat = strategies[actor][kuhn_label(hist, c0 if actor == 0 else c1)]
        return sum(strat[a] * rec(hist + ch, c0, c1)
                   for a, ch in enumerate(kuhn_actions(hist)) if strat[a] > 0)

    return sum(rec("", c0, c1) for c0, c1 in DEALS) / 6.0


def kuhn_pure_strategies(player: int) -> list[dict[str, np.ndarray]]:
    labels = [lab for lab, p in kuhn_labels() if p == player]
    out = []
    for bits in itertools.product((0, 1), repeat=len(labels)):
        out.append({lab: np.eye(2)[b] for lab, b in zip(labels, bits)})
    return out


def kuhn_payoff_matrix() -> np.ndarray:
    """64 x 64 matrix of P1 payoffs over pure strategy pairs."""
    rows, cols = kuhn_pure_strategies(0), kuhn_pure_strategies(1)
    return np.array([[kuhn_value((r, c)) for c in cols] for r in rows])


def matrix_game_value(A: np.ndarray) -> float:
    """Value of the zero-sum matrix game max_x min_y x^T A y, by linear programming."""
    from scipy.optimize import linprog

    m, n = A.shape
    # variables: x (m), v; maximize v s.t. A^T x >= v, sum x = 1
    c = np.zeros(m + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-A.T, np.ones((n, 1))])
    b_ub = np.zeros(n)
    A_eq = np.hstack([np.ones((1, m)), np.zeros((1, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * m + [(None, None)], method="highs")
    assert res.success
    return float(res.x[-1])


def kuhn_best_response_value(player: int, opponent: dict[str, np.ndarray]) -> float:
    """Best pure-strategy payoff for ``player`` against a fixed opponent strategy."""
    best = -math.inf
    for pure in kuhn_pure_strategies(player):
        strategies = (pure, opponent) if player == 0 else (opponent, pure)
        v = kuhn_value(strategies)
        best = max(best, v if player == 0 else -v)
    return best


def kuhn_equilibrium(alpha: float) -> tuple[dict[str, np.ndarray], dict[str, np.ndarray]]:
    """The analytic one-parameter family of Kuhn equilibria, alpha in [0, 1/3]."""

    def bet(p):
        return np.array([1.0 - p, p])

    p1 = {
        "J|": bet(alpha), "Q|": bet(0.0), "K|": bet(3 * alpha),
        "J|k.b1": bet(0.0), "Q|k.b1": bet(alpha + 1.0 / 3.0), "K|k.b1": bet(1.0),
    }
    p2 = {
        "J|k": bet(1.0 / 3.0), "Q|k": bet(0.0), "K|k": bet(1.0),
        "J|b1": bet(0.0), "Q|b1": bet(1.0 / 3.0), "K|b1": bet(1.0),
    }
    return p1, p2


def profile_from_labels(game, strategies) -> np.ndarray:
    """Flat behavior profile for ``game`` from label-keyed strategies of both players."""
    prof = np.zeros(game.n_ia)
    for player in (0, 1):
        for label, strat in strategies[player].items():
            I = game.find_infoset(label, player)
            start = int(game.inf_ia_start[I])
            prof[start:start + len(strat)] = strat
    return prof


def labels_from_profile(game, prof: np.ndarray, player: int) -> dict[str, np.ndarray]:
    out = {}
    for I in game.player_infosets[player]:
        start = int(game.inf_ia_start[I])
        n = int(game.inf_n_actions[I])
        out[game.infoset_label[I]] = np.array(prof[start:start + n])
    return out


def brute_force_bounds(game, I: int) -> list[tuple[float, float]]:
    """(max, min) owner payoff over every terminal below each action of ``I``,
    by scanning the parent pointers of all terminals."""
    owner = int(game.inf_player[I])
    members = set(int(h) for h in game.members_of(I))
    n = int(game.inf_n_actions[I])
    found = [[] for _ in range(n)]
    for z in np.flatnonzero(game.actor == 3):
        h = int(z)
        while h > 0:
            p = int(game.parent[h])
            if p in members:
                found[int(game.action[h])].append(float(game.utils[z, owner]))
                break
            h = p
    return [(max(f), min(f)) for f in found]


def _path_to_root(game, z: int):
    """(chance probability, [(history, action taken)...]) on the way up from z."""
    prob = 1.0
    steps = []
    h = int(z)
    while h > 0:
        p = int(game.parent[h])
        if game.actor[p] == 2:
            prob *= float(game.edge_prob[h])
        steps.append((p, int(game.action[h])))
        h = p
    return prob, steps


def subtree_best_value(game, ia: int, x_opp: np.ndarray) -> float:
    """max over the owner's pure strategies below (I,a) of the counterfactual value of
    (I,a), where opponent sequence weights come from ``x_opp`` (indexed like the
    solver's sequence arrays). Exhaustive, so only for small subtrees."""
    owner = int(game.ia_owner[ia])
    opp = 1 - owner
    I = int(game.ia_infoset[ia])
    a = int(game.ia_action[ia])
    members = set(int(h) for h in game.members_of(I))
    below = sorted(int(J) for J in game.descendants(ia))
    terms = []  # (weight, utility, [(owner infoset, action) needed below I.a])
    for z in np.flatnonzero(game.actor == 3):
        prob, steps = _path_to_root(game, z)
        hit = [k for k, (p, act) in enumerate(steps) if p in members]
        if not hit or steps[hit[0]][1] != a:
            continue
        k = hit[0]
        need = [(int(game.infoset[p]), act) for p, act in steps[:k] if game.actor[p] == owner]
        opp_steps = [(p, act) for p, act in steps if game.actor[p] == opp]
        if opp_steps:
            p, act = opp_steps[0]
            seq = int(game.inf_ia_start[game.infoset[p]]) + act
        else:
            seq = game.n_ia + opp
        terms.append((prob * float(x_opp[seq]), float(game.utils[z, owner]), need))
    n_act = [int(game.inf_n_actions[J]) for J in below]
    assert np.prod(n_act, dtype=float) <= 2 ** 16, "subtree too large for enumeration"
    best = -math.inf
    for choice in itertools.product(*[range(n) for n in n_act]):
        pick = dict(zip(below, choice))
        v = sum(w * u for w, u, need in terms if all(pick[J] == b for J, b in need))
        best = max(best, v)
    return best
