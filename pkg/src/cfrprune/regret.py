"""CFR and CFR+ iterations with hooks for regret-based pruning."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .best_response import exploitability_with_cost, realization_plan
from .game import Game

ALGOS = ("cfr", "cfr+")
PRUNE_MODES = ("none", "partial", "interval", "total")


class InvariantViolation(AssertionError):
    """A runtime invariant of the solver failed."""


def assertions_enabled() -> bool:
    return os.environ.get("CFRPRUNE_NO_ASSERT", "") in ("", "0")


def regret_matching(regrets) -> np.ndarray:
    """Strategy proportional to positive regret, uniform when none is positive."""
    r = np.asarray(regrets, dtype=np.float64)
    if r.ndim != 1 or r.size == 0:
        raise ValueError("regret matching needs a non-empty action set")
    pos = np.maximum(r, 0.0)
    tot = pos.sum()
    if tot > 0.0:
        return pos / tot
    return np.full(r.size, 1.0 / r.size)


def cfr_plus_update(entry: float, increment: float, pruning: bool = False) -> float:
    """CFR+ regret update. Without pruning the floor is zero; with pruning the
    entry may go negative but snaps to zero as soon as it would increase."""
    return float(K.update_regret(float(entry), float(increment),
                                 K.UPD_JUMP if pruning else K.UPD_FLOOR))


def apply_update(regrets: np.ndarray, inc: np.ndarray, rule: int) -> np.ndarray:
    if rule == K.UPD_SUM:
        return regrets + inc
    if rule == K.UPD_FLOOR:
        return np.maximum(regrets + inc, 0.0)
    return np.where((regrets < 0.0) & (inc > 0.0), 0.0, regrets + inc)


def theoretical_regret_bound(delta_I: float, n_actions: int, T: int) -> float:
    """Delta(I) sqrt(|A(I)|) sqrt(T), the regret-matching bound on R^T(I)."""
    if T < 1:
        raise ValueError("T must be at least 1")
    return delta_I * math.sqrt(n_actions) * math.sqrt(T)


def normalize_average(cum: np.ndarray) -> np.ndarray:
    """Normalized cumulative strategy; uniform if the normalizer is zero."""
    c = np.asarray(cum, dtype=np.float64)
    tot = c.sum()
    return c / tot if tot > 0 else np.full(c.size, 1.0 / c.size)


@dataclass
class SolverConfig:
    algo: str = "cfr"
    prune: str = "none"
    C: float = 0.0
    # partial pruning gate; defaults to on for every mode except "none"
    partial: bool | None = None
    alternating: bool = False
    # total pruning tests an action only when R(I,a) <= -check_threshold * Delta(I) sqrt(T),
    # and at most once per check_every visits; None disables testing entirely
    check_threshold: float | None = 1.0
    check_every: int = 10
    # after a failed test, wait until the bound could possibly hold again
    skip_proven: bool = True
    assertions: bool | None = None

    def __post_init__(self) -> None:
        if self.algo not in ALGOS:
            raise ValueError(f"algo must be one of {ALGOS}")
        if self.prune not in PRUNE_MODES:
            raise ValueError(f"prune must be one of {PRUNE_MODES}")
        if self.C < 0:
            raise ValueError("C must be nonnegative")
        if self.check_every < 1:
            raise ValueError("check_every must be >= 1")
        if self.partial is None:
            self.partial = self.prune != "none"
        if self.assertions is None:
            self.assertions = assertions_enabled()


@dataclass
class InvariantStats:
    regret_bound_checks: int = 0
    folk_checks: int = 0
    horizon_checks: int = 0
    resume_checks: int = 0
    max_regret_ratio: float = 0.0
    notes: list[str] = field(default_factory=list)


class CFRSolver:
    """Mutable solver state for one run over one game.

    Both players are traversed separately each iteration. By default both
    traversals see the iteration's strategy profile ``sigma^t``; with
    ``alternating=True`` player 2 sees player 1's updated strategy.
    """

    def __init__(self, game: Game, config: SolverConfig | None = None, *,
                 watch: list[int] | None = None, **kwargs) -> None:
        from .pruning import make_pruner  # circular at import time

        self.game = game
        self.config = config if config is not None else SolverConfig(**kwargs)
        cfg = self.config
        g = game
        n_ia, n_inf = g.n_ia, g.n_infosets
        self.T = 0
        self.weight_sum = 0.0
        self.regrets = np.zeros(n_ia)
        self.cum_strategy = np.zeros(n_ia)
        self.cum_cfv = np.zeros(n_inf)
        self.inst_cfv = np.zeros(n_inf)
        self.regret_live = np.ones(n_ia, dtype=np.bool_)
        self.avg_live = np.ones(n_ia, dtype=np.bool_)
        self.pruned = np.zeros(n_ia, dtype=np.bool_)
        self.sigma = np.zeros(n_ia)
        self.x = np.zeros(g.n_seq)
        self.x_prev = np.zeros(g.n_seq)
        self.stamp = np.full(n_inf, -1, dtype=np.int64)
        self.opp_reach = np.zeros(n_inf)
        self.visits = np.zeros(n_inf, dtype=np.int64)
        self.visited = [np.zeros(max(1, len(g.player_infosets[p])), dtype=np.int32)
                        for p in (0, 1)]
        self.n_visited = [0, 0]
        self.sv = np.zeros(g.n_seq)
        self.best = np.zeros(n_inf, dtype=np.int32)
        self.cbv = np.zeros(n_inf)
        self._beh_scratch = np.zeros(n_ia)
        self.nodes_touched = 0
        self.last_values = [0.0, 0.0]
        self.util = g.util_of
        self.all_infosets = np.arange(n_inf, dtype=np.int32)
        self.all_ia = np.arange(n_ia, dtype=np.int32)
        self.stats = InvariantStats()
        if cfg.algo == "cfr":
            self.rule = K.UPD_SUM
        else:
            # the jump rule only matters once actions can be pruned; with total
            # pruning switched off, plain CFR+ must come out unchanged
            can_prune = cfg.prune == "interval" or (cfg.prune == "total"
                                                    and cfg.check_threshold is not None)
            self.rule = K.UPD_JUMP if can_prune else K.UPD_FLOOR
        self.best_profile: np.ndarray | None = None
        self.best_exploitability = math.inf

        self.watch = [int(w) for w in (watch or [])]
        lo, hi = [], []
        for ia in self.watch:
            for c in g.action_children(ia):
                lo.append(int(c))
                hi.append(int(g.end[c]))
        self._sub_lo = np.asarray(lo, dtype=np.int32)
        self._sub_hi = np.asarray(hi, dtype=np.int32)
        self._sub_count = np.zeros(len(lo), dtype=np.int32)
        self.watch_hits: list[int] = []  # per iteration: passes touching watched subtrees

        self.pruner = make_pruner(self)

    # -- strategies ----------------------------------------------------------

    def current_strategy(self) -> np.ndarray:
        g = self.game
        K.regret_matching_all(self.all_infosets, g.inf_ia_start, g.inf_n_actions, self.regrets,
                              self.pruned, self.sigma)
        return self.sigma

    def average_profile(self) -> np.ndarray:
        """Current average behavior profile of both players."""
        g = self.game
        out = np.empty(g.n_ia)
        K.average_behavior(self.all_infosets, g.inf_ia_start, g.inf_n_actions,
                           self.cum_strategy, self.avg_live, out)
        return out

    def average_strategy(self, I: int) -> np.ndarray:
        rng = self.game.ia_range(I)
        c = np.where(self.avg_live[rng.start:rng.stop], self.cum_strategy[rng.start:rng.stop], 0.0)
        return normalize_average(c)

    def reported_profile(self) -> np.ndarray:
        """Profile whose exploitability is reported: the best-so-far average for
        CFR+, the current average otherwise."""
        if self.config.algo == "cfr+" and self.best_profile is not None:
            return self.best_profile
        return self.average_profile()

    # -- iteration -------------------------------------------------------------

    def _traverse(self, i: int) -> float:
        g = self.game
        cur = 2 * self.T + i
        self._sub_count[:] = 0
        touches, nv = K.cfr_traverse(
            i, g.actor, g.end, g.in_ia, g.ia_owner, g.chance_reach, g.last_seq[i],
            g.last_seq[1 - i], self.util[i], g.infoset, self.x, bool(self.config.partial),
            self.pruned, self.stamp, cur, self.opp_reach, self.visited[i], self.sv,
            self._sub_lo, self._sub_hi, self._sub_count)
        self.nodes_touched += int(touches)
        self.n_visited[i] = int(nv)
        if self.watch and self._sub_count.any():
            self.watch_hits[-1] += 1
        K.visit_count(self.visited[i], nv, self.visits)
        value = K.cfr_update(i, g.rev_topo[i], self.stamp, cur, g.inf_ia_start, g.inf_n_actions,
                             g.inf_parent_seq, self.sigma, self.sv, self.pruned, self.regrets,
                             self.cum_cfv, self.inst_cfv, self.rule, g.n_ia)
        self.last_values[i] = float(value)
        return float(value)

    def iterate(self) -> None:
        """Run one iteration: traverse both players, accumulate the average,
        then do pruning bookkeeping."""
        g = self.game
        cfg = self.config
        self.T += 1
        T = self.T
        self.watch_hits.append(0)
        self.current_strategy()
        for p in (0, 1):
            K.realization(p, g.topo[p], g.inf_ia_start, g.inf_n_actions, g.inf_parent_seq,
                          self.sigma, g.n_ia, self.x)
        self.x_prev[:] = self.x
        self._traverse(0)
        if cfg.alternating:
            K.regret_matching_all(g.player_infosets[0], g.inf_ia_start, g.inf_n_actions,
                                  self.regrets, self.pruned, self.sigma)
            K.realization(0, g.topo[0], g.inf_ia_start, g.inf_n_actions, g.inf_parent_seq,
                          self.sigma, g.n_ia, self.x)
        self._traverse(1)
        w = float(T) if cfg.algo == "cfr+" else 1.0
        self.weight_sum += w
        K.accumulate_average(self.all_ia, self.x_prev, w, self.avg_live, self.cum_strategy)
        self.pruner.after_iteration()
        if cfg.assertions:
            self.check_regret_bound()

    def run(self, iterations: int) -> None:
        for _ in range(iterations):
            self.iterate()

    # -- invariants ------------------------------------------------------------

    def check_regret_bound(self) -> None:
        g = self.game
        self.stats.regret_bound_checks += 1
        bad = K.regret_bound_violations(self.all_infosets, g.inf_ia_start, g.inf_n_actions,
                                        self.regrets, self.regret_live, g.delta_inf,
                                        float(self.T), 1e-9)
        if bad:
            raise InvariantViolation(f"{bad} regrets exceed the regret-matching bound at T={self.T}")

    def folk_bound(self) -> float:
        """(sum over both players' infosets of max_a R_+(I,a)) / T."""
        g = self.game
        tot = K.sum_max_positive_regret(self.all_infosets, g.inf_ia_start, g.inf_n_actions,
                                        self.regrets)
        return tot / self.T

    def folk_applicable(self) -> bool:
        cfg = self.config
        return (cfg.algo == "cfr" and not cfg.alternating and cfg.prune in ("none", "partial")
                and self.T > 0)

    # -- evaluation --------------------------------------------------------------

    def evaluate(self) -> float:
        """Exploitability of the reported profile; the cost is counted in nodes touched."""
        prof = self.average_profile()
        value, touches = exploitability_with_cost(self.game, prof)
        self.nodes_touched += touches
        if self.config.assertions and self.folk_applicable():
            self.stats.folk_checks += 1
            bound = self.folk_bound()
            if value > bound + 1e-12:
                raise InvariantViolation(
                    f"exploitability {value} exceeds folk bound {bound} at T={self.T}")
        if self.config.algo == "cfr+":
            if value < self.best_exploitability:
                self.best_exploitability = value
                self.best_profile = prof
            return self.best_exploitability
        return value

    def opponent_average_realization(self, i: int, out: np.ndarray) -> np.ndarray:
        """Realization weights of player ``1 - i``'s average strategy."""
        g = self.game
        o = 1 - i
        K.average_behavior(g.player_infosets[o], g.inf_ia_start, g.inf_n_actions,
                           self.cum_strategy, self.avg_live, self._beh_scratch)
        realization_plan(g, o, self._beh_scratch, out)
        return out

    # -- accounting ----------------------------------------------------------------

    def live_regret_entries(self) -> int:
        return int(np.count_nonzero(self.regret_live))

    def live_avg_entries(self) -> int:
        return int(np.count_nonzero(self.avg_live))


SolverState = CFRSolver


def cfr_iteration(state: CFRSolver, traverser: int) -> dict[int, float]:
    """One traversal for ``traverser`` with the current profile.

    Accumulates regrets and counterfactual-value sums but leaves the average
    strategy and pruning bookkeeping to :meth:`CFRSolver.iterate`. Returns
    v(I) for every infoset of the traverser that was reached.
    """
    if traverser not in (0, 1):
        raise ValueError("traverser must be 0 or 1")
    g = state.game
    if state.T == 0:
        state.T = 1
        state.watch_hits.append(0)
    state.current_strategy()
    for p in (0, 1):
        K.realization(p, g.topo[p], g.inf_ia_start, g.inf_n_actions, g.inf_parent_seq,
                      state.sigma, g.n_ia, state.x)
    state._traverse(traverser)
    vis = state.visited[traverser][:state.n_visited[traverser]]
    return {int(I): float(state.inst_cfv[I]) for I in vis}
