"""Counterfactual regret minimization with regret-based pruning for small poker games."""

from .best_response import (CbrResult, compute_cbr, exploitability, expected_value,
                            near_cbr, realization_plan, uniform_profile)
from .game import (CHANCE, PLAYER1, PLAYER2, TERMINAL, Chance, Decision, Game, GameError,
                   GameKind, Terminal, build_game, game_from_tree, payoff_bounds,
                   terminal_utility, validate_game)
from .metrics import MetricsRow, checkpoint_schedule, memory_footprint, record_touch, snapshot
from .pruning import (PruneRecord, ReclaimLedger, interval_rbp_check, partial_prune_gate,
                      total_rbp_check, total_rbp_extend)
from .regret import (CFRSolver, InvariantViolation, SolverConfig, SolverState, cfr_iteration,
                     cfr_plus_update, regret_matching, theoretical_regret_bound)

__all__ = [
    "CHANCE", "PLAYER1", "PLAYER2", "TERMINAL", "CFRSolver", "CbrResult", "Chance", "Decision",
    "Game", "GameError", "GameKind", "InvariantViolation", "MetricsRow", "PruneRecord",
    "ReclaimLedger", "SolverConfig", "SolverState", "Terminal", "build_game", "cfr_iteration",
    "cfr_plus_update", "checkpoint_schedule", "compute_cbr", "expected_value", "exploitability",
    "game_from_tree", "interval_rbp_check", "memory_footprint", "near_cbr", "partial_prune_gate",
    "payoff_bounds", "realization_plan", "record_touch", "regret_matching", "snapshot",
    "terminal_utility", "theoretical_regret_bound", "total_rbp_check", "total_rbp_extend",
    "uniform_profile", "validate_game",
]
