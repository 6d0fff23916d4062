"""Counterfactual best responses and exploitability.

Strategies and profiles are behavior arrays indexed by global infoset-action
id (length ``game.n_ia``); a profile holds both players' entries side by side.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels as K
from .game import Game


@dataclass
class CbrResult:
    player: int
    strategy: np.ndarray  # pure CBR, behavior array over all ia (other player's entries 0)
    cbv_action: np.ndarray  # CBV(I,a) for the player's ia, 0 elsewhere
    cbv_infoset: np.ndarray  # CBV(I) for the player's infosets, nan elsewhere
    value: float  # u_i(CBR, sigma_-i)
    touches: int


def uniform_profile(game: Game) -> np.ndarray:
    return 1.0 / game.inf_n_actions[game.ia_infoset].astype(np.float64)


def realization_plan(game: Game, player: int, behavior: np.ndarray,
                     out: np.ndarray | None = None) -> np.ndarray:
    """Sequence weights of ``player`` under ``behavior`` (length ``n_seq``)."""
    if out is None:
        out = np.zeros(game.n_seq)
    K.realization(player, game.topo[player], game.inf_ia_start, game.inf_n_actions,
                  game.inf_parent_seq, behavior, game.n_ia, out)
    return out


def expected_value(game: Game, profile: np.ndarray) -> float:
    """Expected payoff of player 1 (index 0) under a full behavior profile."""
    x = realization_plan(game, 0, profile)
    realization_plan(game, 1, profile, x)
    return float(K.expected_value(game.actor, game.chance_reach, game.last_seq[0],
                                  game.last_seq[1], game.util_of[0], x))


def compute_cbr(game: Game, opponent_strategy: np.ndarray, i: int) -> CbrResult:
    """Counterfactual best response of player ``i`` in one bottom-up pass.

    Values are exact for every infoset of ``i``, including those that ``i``'s
    own play never reaches. Ties break toward the lowest action index.
    """
    i = int(i)
    x = realization_plan(game, 1 - i, opponent_strategy)
    sv = np.zeros(game.n_seq)
    touches = K.cbr_terminals(np.zeros(1, np.int32), game.actor, game.end, game.chance_reach,
                              game.last_seq[i], game.last_seq[1 - i], game.util_of[i], x, sv)
    best = np.zeros(game.n_infosets, np.int32)
    cbv = np.full(game.n_infosets, np.nan)
    K.cbr_fold(game.rev_topo[i], game.inf_ia_start, game.inf_n_actions, game.inf_parent_seq,
               sv, best, cbv)
    mine = game.player_ia[i]
    strategy = np.zeros(game.n_ia)
    infs = game.player_infosets[i]
    strategy[game.inf_ia_start[infs] + best[infs]] = 1.0
    cbv_action = np.zeros(game.n_ia)
    cbv_action[mine] = sv[mine]
    return CbrResult(i, strategy, cbv_action, cbv, float(sv[game.n_ia + i]), int(touches))


def best_response_value(game: Game, opponent_strategy: np.ndarray, i: int,
                        scratch: np.ndarray | None = None) -> tuple[float, int]:
    """Root value of player ``i``'s best response and the touches it cost."""
    i = int(i)
    x = realization_plan(game, 1 - i, opponent_strategy)
    sv = np.zeros(game.n_seq) if scratch is None else scratch
    touches = K.cbr_terminals(np.zeros(1, np.int32), game.actor, game.end, game.chance_reach,
                              game.last_seq[i], game.last_seq[1 - i], game.util_of[i], x, sv)
    best = np.zeros(game.n_infosets, np.int32)
    cbv = np.zeros(game.n_infosets)
    K.cbr_fold(game.rev_topo[i], game.inf_ia_start, game.inf_n_actions, game.inf_parent_seq,
               sv, best, cbv)
    value = float(sv[game.n_ia + i])
    sv[:] = 0.0
    return value, int(touches)


def exploitability_with_cost(game: Game, profile: np.ndarray) -> tuple[float, int]:
    v0, t0 = best_response_value(game, profile, 0)
    v1, t1 = best_response_value(game, profile, 1)
    return 0.5 * (v0 + v1), t0 + t1


def exploitability(game: Game, profile: np.ndarray) -> float:
    """Mean of both players' best-response values against ``profile``.

    Zero exactly at a Nash equilibrium of the zero-sum game; nonnegative up to
    rounding otherwise.
    """
    return exploitability_with_cost(game, profile)[0]


def subtree_cbr(game: Game, ia: int, x_opp: np.ndarray, sv: np.ndarray, best: np.ndarray,
                cbv: np.ndarray) -> tuple[float, int]:
    """CBR of the owner of ``ia`` restricted to D(I,a).

    ``x_opp`` holds opponent-and-window sequence weights; only entries for
    sequences below ``(I, a)`` are read. On return ``sv`` holds CBV(I',a') for
    every pair in D(I,a) and ``cbv``/``best`` hold CBV(I') and the argmax.
    The caller clears ``sv`` with :func:`clear_subtree`.
    Returns (CBV(I,a), touches).
    """
    i = int(game.ia_owner[ia])
    touches = K.cbr_terminals(game.action_children(ia), game.actor, game.end,
                              game.chance_reach, game.last_seq[i], game.last_seq[1 - i],
                              game.util_of[i], x_opp, sv)
    K.cbr_fold(game.descendants(ia), game.inf_ia_start, game.inf_n_actions,
               game.inf_parent_seq, sv, best, cbv)
    return float(sv[ia]), int(touches)


def clear_subtree(game: Game, ia: int, sv: np.ndarray) -> None:
    sv[game.descendant_ias(ia)] = 0.0
    sv[ia] = 0.0


# --------------------------------------------------------------------------
# T-near counterfactual best responses
# --------------------------------------------------------------------------


def potential_bound(delta_I: float, n_actions: int, T: int) -> float:
    """CFR bound on the regret potential of an infoset: Delta(I)^2 |A(I)| T."""
    return delta_I * delta_I * n_actions * T


@dataclass(frozen=True)
class NearCbrPolicy:
    """Chooses how much counterfactual regret a near-CBR may keep per infoset.

    ``x_selector(I, T, y)`` returns x_I^T in ``[0, y]`` where ``y`` is the
    potential bound. The zero selector gives an exact CBR.
    """

    x_selector: Callable[[int, int, float], float] = lambda I, T, y: 0.0


def near_cbr(game: Game, opponent_strategy: np.ndarray, i: int, T: int,
             policy: NearCbrPolicy = NearCbrPolicy()) -> CbrResult:
    if T < 1:
        raise ValueError("T must be at least 1")
    for I in game.player_infosets[i]:
        y = potential_bound(float(game.delta_inf[I]), int(game.inf_n_actions[I]), T)
        x = policy.x_selector(int(I), T, y)
        if not 0.0 <= x <= y:
            raise ValueError(f"near-CBR slack {x} outside [0, {y}] at infoset {I}")
        if x != 0.0:
            raise NotImplementedError("only the exact (zero-slack) near-CBR is provided")
    return compute_cbr(game, opponent_strategy, i)


def counterfactual_regret_potential(game: Game, strategy: np.ndarray,
                                    opponent_strategy: np.ndarray, i: int) -> np.ndarray:
    """Per-infoset sum over actions of (v(I,a) - v(I))_+^2 for ``strategy``
    against ``opponent_strategy``."""
    x = realization_plan(game, 1 - i, opponent_strategy)
    sv = np.zeros(game.n_seq)
    K.cbr_terminals(np.zeros(1, np.int32), game.actor, game.end, game.chance_reach,
                    game.last_seq[i], game.last_seq[1 - i], game.util_of[i], x, sv)
    out = np.full(game.n_infosets, np.nan)
    for I in game.rev_topo[i]:
        rng = game.ia_range(int(I))
        q = sv[rng.start:rng.stop]
        v = float(strategy[rng.start:rng.stop] @ q)
        out[I] = float((np.maximum(q - v, 0.0) ** 2).sum())
        sv[game.inf_parent_seq[I]] += v
    return out
