"""Regret-based pruning: partial pruning, Interval RBP and Total RBP.

A pruned action (I,a) gets probability zero at I and its owner never walks
below I·a until the record expires. Interval records replay the skipped window
with one catch-up best response. Total records reset the subtree from a best
response against the all-time average opponent, so the subtree's regrets (and,
once the action has faded from the average, its average strategy) can be
dropped while pruned.

The per-iteration work runs in :mod:`cfrprune._prune_kernels`; the classes
here own the record arrays and expose them as :class:`PruneRecord` views.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import _prune_kernels as PK
from .regret import InvariantViolation

if TYPE_CHECKING:  # pragma: no cover
    from .game import Game
    from .regret import CFRSolver

TOL = 1e-9


def partial_prune_gate(opponent_reach: float) -> bool:
    """True if a history should be traversed: only exact zero reach is skipped."""
    return opponent_reach != 0.0


def prune_horizon(cfv_sum: float, T: int, nbv: float, U: float, L: float) -> int:
    """Iterations a total prune is guaranteed safe for, or -1 when
    T * NBV <= cfv_sum fails."""
    return int(PK.prune_horizon(float(cfv_sum), int(T), float(nbv), float(U), float(L)))


def interval_expires(banked: float, cfv_sum: float) -> bool:
    return banked > cfv_sum


def discard_threshold_iteration(t0: int, C: float) -> float:
    """Smallest T with t0/T <= C/sqrt(T), that is (t0/C)^2."""
    if C <= 0:
        return math.inf
    return (t0 / C) ** 2


def opp_seq_csr(game: "Game") -> tuple[np.ndarray, np.ndarray]:
    got = getattr(game, "_osb_csr", None)
    if got is None:
        got = PK.build_opp_seq_csr(game.n_ia, game.ia_owner, game.ia_child_ptr, game.ia_child,
                                   game.end, game.last_seq)
        game._osb_csr = got
    return got


def game_context(game: "Game", i: int, watch_lo: np.ndarray, watch_hi: np.ndarray,
                 need_osb: bool = False) -> tuple:
    g = game
    if need_osb:
        osb_ptr, osb = opp_seq_csr(g)
    else:
        osb_ptr, osb = np.zeros(g.n_ia + 1, np.int64), np.zeros(0, np.int32)
    o = 1 - i
    return (g.actor, g.end, g.chance_reach, g.last_seq[i], g.last_seq[o], g.util_of[i],
            g.inf_ia_start, g.inf_n_actions, g.inf_parent_seq, g.ia_infoset, g.U_ia, g.L_inf,
            g.delta_inf, g.desc_ptr, g.desc, g.desc_ia_ptr, g.desc_ia, g.ia_child_ptr,
            g.ia_child, osb_ptr, osb, g.player_ia[i], g.player_infosets[o], g.topo[o], g.n_ia,
            o, watch_lo, watch_hi, g.L_ia, g.U_inf)


@dataclass
class PruneRecord:
    ia: int
    infoset: int
    action: int
    mode: str
    t0: int
    banked: float
    expiry_hint: int = 0
    first_start: int = 0  # start of the current uninterrupted prune
    avg_freed: bool = False


@dataclass
class ReclaimLedger:
    freed_regret_entries: int
    freed_avg_entries: int
    discard_times: dict[int, int]  # ia -> iteration its average storage was freed


class NoPruner:
    mode = "none"

    def __init__(self, solver: "CFRSolver") -> None:
        self.s = solver
        self.counters = np.zeros(PK.N_COUNTERS, dtype=np.int64)

    def after_iteration(self) -> None:
        pass

    def live_records(self) -> int:
        return 0

    @property
    def records(self) -> dict[int, PruneRecord]:
        return {}

    @property
    def starts(self) -> int:
        return int(self.counters[PK.N_START])

    @property
    def expiries(self) -> int:
        return int(self.counters[PK.N_EXPIRE])

    @property
    def resumes(self) -> int:
        return int(self.counters[PK.N_RESUME])

    @property
    def ledger(self) -> ReclaimLedger:
        return ReclaimLedger(int(self.counters[PK.N_REGRET_FREED]),
                             int(self.counters[PK.N_AVG_FREED]), {})

    def _sync(self, before: np.ndarray) -> None:
        s = self.s
        s.nodes_touched += int(self.counters[PK.N_TOUCH] - before[PK.N_TOUCH])
        hits = int(self.counters[PK.N_WATCH] - before[PK.N_WATCH])
        if hits and s.watch_hits:
            s.watch_hits[-1] += hits


class PartialPruner(NoPruner):
    mode = "partial"


class IntervalPruner(NoPruner):
    """Prune zero-probability actions while their counterfactual value provably
    stays below the infoset value, then replay the skipped window once."""

    mode = "interval"

    def __init__(self, solver: "CFRSolver") -> None:
        super().__init__(solver)
        g = solver.game
        self.ctx = [game_context(g, i, solver._sub_lo, solver._sub_hi, need_osb=True)
                    for i in (0, 1)]
        osb_ptr = self.ctx[0][19]
        self.banked = np.zeros(g.n_ia)
        self.cfv0 = np.zeros(g.n_ia)
        self.t0 = np.zeros(g.n_ia, dtype=np.int64)
        self.snap = np.zeros(int(osb_ptr[-1]))
        self.x_window = np.zeros(g.n_seq)  # unweighted sums of opponent realization weights
        self.scratch = np.zeros(g.n_seq)
        self.live_below = np.zeros(g.n_ia, dtype=np.int64)
        self._p0_seq = np.append(g.player_ia[0], g.n_ia).astype(np.int64)

    def _state(self) -> tuple:
        s = self.s
        return (s.regrets, s.pruned, s.cum_cfv, s.opp_reach, s.sv, s.best, s.cbv)

    def _records(self) -> tuple:
        return (self.banked, self.cfv0, self.t0, self.snap, self.x_window, self.scratch,
                self.live_below, self.counters)

    def after_iteration(self) -> None:
        s = self.s
        # opponent weights as seen by each traversal this iteration
        self.x_window += s.x_prev
        if s.config.alternating:
            idx = self._p0_seq
            self.x_window[idx] += s.x[idx] - s.x_prev[idx]
        before = self.counters.copy()
        S, R = self._state(), self._records()
        for i in (0, 1):
            PK.interval_after(self.ctx[i], S, R, s.visited[i], s.n_visited[i], s.rule, s.T)
        self._sync(before)

    def live_records(self) -> int:
        return int(np.count_nonzero(self.s.pruned))

    @property
    def records(self) -> dict[int, PruneRecord]:
        g = self.s.game
        return {int(ia): PruneRecord(int(ia), int(g.ia_infoset[ia]), int(g.ia_action[ia]),
                                     "interval", int(self.t0[ia]), float(self.banked[ia]),
                                     first_start=int(self.t0[ia]))
                for ia in np.flatnonzero(self.s.pruned)}

    def interval_start(self, ia: int) -> PruneRecord | None:
        s = self.s
        if s.regrets[ia] >= 0.0 or s.pruned[ia]:
            return None
        before = self.counters.copy()
        PK.interval_start(self.ctx[int(s.game.ia_owner[ia])], self._state(), self._records(),
                          int(ia), s.rule, s.T)
        self._sync(before)
        return self.records[int(ia)]

    def catch_up(self, ia: int) -> None:
        s = self.s
        if not s.pruned[ia]:
            raise InvariantViolation(f"catch-up of ia {ia} without a live record")
        before = self.counters.copy()
        PK.interval_catch_up(self.ctx[int(s.game.ia_owner[ia])], self._state(), self._records(),
                             int(ia), s.rule)
        self._sync(before)


class TotalPruner(NoPruner):
    """Prune actions whose best-response value is below the infoset's average
    value, free their subtree storage, and reset it from a best response when
    the bound no longer holds."""

    mode = "total"

    def __init__(self, solver: "CFRSolver") -> None:
        super().__init__(solver)
        g = solver.game
        cfg = solver.config
        self.ctx = [game_context(g, i, solver._sub_lo, solver._sub_hi) for i in (0, 1)]
        n = g.n_ia
        self.t0 = np.zeros(n, dtype=np.int64)
        self.first = np.zeros(n, dtype=np.int64)
        self.hint = np.zeros(n, dtype=np.int64)
        self.banked = np.zeros(n)
        self.avg_freed = np.zeros(n, dtype=np.bool_)
        self.last_check = np.full(n, -(10 ** 9), dtype=np.int64)
        self.freed_at = np.full(n, -1, dtype=np.int64)
        self.shortfall = np.zeros(n)
        self.beh = np.zeros(n)
        self.xbar = np.zeros(g.n_seq)
        # the safe-horizon guarantee assumes plain CFR averages and an untouched opponent average
        self.safety_checks = bool(cfg.assertions and cfg.algo == "cfr" and not cfg.alternating
                                   and cfg.C == 0)

    def _state(self) -> tuple:
        s = self.s
        return (s.regrets, s.regret_live, s.pruned, s.cum_cfv, s.cum_strategy, s.avg_live,
                s.opp_reach, s.visits, s.sv, s.best, s.cbv, self.beh, self.xbar)

    def _records(self) -> tuple:
        return (self.t0, self.first, self.hint, self.banked, self.avg_freed, self.last_check,
                self.freed_at, self.shortfall, self.counters)

    def after_iteration(self) -> None:
        s = self.s
        cfg = s.config
        kappa = -1.0 if cfg.check_threshold is None else float(cfg.check_threshold)
        before = self.counters.copy()
        S, R = self._state(), self._records()
        for i in (0, 1):
            PK.total_after(self.ctx[i], S, R, s.visited[i], s.n_visited[i], s.T, kappa,
                           cfg.check_every, float(cfg.C), cfg.algo == "cfr+",
                           self.safety_checks, TOL, cfg.skip_proven)
        self._sync(before)
        s.stats.horizon_checks = int(self.counters[PK.N_HORIZON])
        s.stats.resume_checks = int(self.counters[PK.N_RESUME_CHECK])
        if self.counters[PK.N_HORIZON_BAD] > before[PK.N_HORIZON_BAD]:
            raise InvariantViolation(f"a prune exceeded its value bound at its safe horizon, T={s.T}")
        if self.counters[PK.N_RESUME_BAD] > before[PK.N_RESUME_BAD]:
            raise InvariantViolation(f"a prune expired inside its safe horizon, T={s.T}")

    def live_records(self) -> int:
        return int(np.count_nonzero(self.s.pruned))

    @property
    def ledger(self) -> ReclaimLedger:
        times = {int(ia): int(self.freed_at[ia]) for ia in np.flatnonzero(self.avg_freed)}
        return ReclaimLedger(int(self.counters[PK.N_REGRET_FREED]),
                             int(self.counters[PK.N_AVG_FREED]), times)

    @property
    def records(self) -> dict[int, PruneRecord]:
        g = self.s.game
        return {int(ia): PruneRecord(int(ia), int(g.ia_infoset[ia]), int(g.ia_action[ia]),
                                     "total", int(self.t0[ia]), float(self.banked[ia]),
                                     int(self.hint[ia]), int(self.first[ia]),
                                     bool(self.avg_freed[ia]))
                for ia in np.flatnonzero(self.s.pruned)}

    def opponent_average(self, i: int) -> np.ndarray:
        PK.opponent_average(self.ctx[i], self.s.cum_strategy, self.s.avg_live, self.beh,
                            self.xbar)
        return self.xbar

    def subtree_value(self, ia: int, counted: bool = True) -> float:
        """CBV(I,a) of the owner's best response below (I,a) to the opponent's
        average; leaves the subtree values in the solver's scratch arrays."""
        s = self.s
        i = int(s.game.ia_owner[ia])
        self.opponent_average(i)
        before = self.counters.copy()
        nbv = PK.subtree_cbr(self.ctx[i], int(ia), self.xbar, s.sv, s.best, s.cbv,
                             self.counters, counted)
        self._sync(before)
        return float(nbv)

    def _clear(self, ia: int) -> None:
        PK.clear_subtree(self.ctx[0], int(ia), self.s.sv)

    def total_check(self, ia: int) -> PruneRecord | None:
        """Prune (I,a) if the bound gives at least one safe iteration."""
        s = self.s
        g = s.game
        if s.pruned[ia] or not s.regret_live[ia]:
            return None
        I = int(g.ia_infoset[ia])
        nbv = self.subtree_value(ia)
        self._clear(ia)
        h = prune_horizon(s.cum_cfv[I], s.T, nbv, g.U_ia[ia], g.L_inf[I])
        if h < 1:
            return None
        PK.total_start(self.ctx[int(g.ia_owner[ia])], self._state(), self._records(), int(ia),
                       nbv, h, s.T)
        return self.records[int(ia)]

    def resume(self, ia: int) -> None:
        """Reset D(I,a) from a fresh best response and reallocate its storage."""
        s = self.s
        if not s.pruned[ia]:
            raise InvariantViolation(f"resume of ia {ia} without a live record")
        nbv = self.subtree_value(ia)
        PK.total_resume(self.ctx[int(s.game.ia_owner[ia])], self._state(), self._records(),
                        int(ia), nbv, s.T)
        self._clear(ia)

    def reclaim_space(self, ia: int) -> int:
        """Drop average-strategy storage for (I,a) and D(I,a). Returns entries freed."""
        s = self.s
        if not s.pruned[ia]:
            raise InvariantViolation(f"reclaim of ia {ia} without a live record")
        before = int(self.counters[PK.N_AVG_FREED])
        PK.total_reclaim(self.ctx[0], self._state(), self._records(), int(ia), s.T)
        return int(self.counters[PK.N_AVG_FREED]) - before


def make_pruner(solver: "CFRSolver") -> NoPruner:
    return {"none": NoPruner, "partial": PartialPruner, "interval": IntervalPruner,
            "total": TotalPruner}[solver.config.prune](solver)


def interval_rbp_check(solver: "CFRSolver", ia: int) -> bool:
    """Whether the interval record at ``ia`` is still live; closes it with the
    catch-up pass if its bound no longer holds."""
    p = solver.pruner
    if not isinstance(p, IntervalPruner) or not solver.pruned[ia]:
        return False
    I = int(solver.game.ia_infoset[ia])
    if interval_expires(float(p.banked[ia]), float(solver.cum_cfv[I])):
        p.catch_up(ia)
        return False
    return True


def total_rbp_check(solver: "CFRSolver", ia: int) -> PruneRecord | None:
    p = solver.pruner
    if not isinstance(p, TotalPruner):
        raise ValueError("solver does not use total pruning")
    if solver.pruned[ia]:
        return p.records[int(ia)]
    return p.total_check(ia)


def total_rbp_extend(solver: "CFRSolver", ia: int) -> bool:
    """Whether the total record at ``ia`` still satisfies its banked bound."""
    p = solver.pruner
    if not isinstance(p, TotalPruner) or not solver.pruned[ia]:
        return False
    I = int(solver.game.ia_infoset[ia])
    return not interval_expires(float(p.banked[ia]), float(solver.cum_cfv[I]))


def resume_subtree(solver: "CFRSolver", ia: int) -> None:
    p = solver.pruner
    if not isinstance(p, TotalPruner):
        raise ValueError("solver does not use total pruning")
    p.resume(ia)


def reclaim_space(solver: "CFRSolver", ia: int) -> int:
    p = solver.pruner
    if not isinstance(p, TotalPruner):
        raise ValueError("solver does not use total pruning")
    return p.reclaim_space(ia)
