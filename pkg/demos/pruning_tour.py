"""Run every pruning mode on Leduc poker and show what each one saves.

Run with ``python demos/pruning_tour.py [iterations]``. Nodes touched include
best-response work done by the pruning checks and the evaluation passes.
"""

import sys
import time

from cfrprune import CFRSolver, SolverConfig, build_game, exploitability

MODES = [
    ("none", dict(prune="none")),
    ("partial", dict(prune="partial")),
    ("interval", dict(prune="interval")),
    ("total, C=0", dict(prune="total", C=0.0)),
    ("total, C=0.1", dict(prune="total", C=0.1)),
    # test every negative-regret action, not only very negative ones
    ("total, eager", dict(prune="total", C=0.1, check_threshold=0.0)),
]


def main(iterations: int) -> None:
    game = build_game("leduc")
    total = 2 * game.n_ia
    print(f"Leduc: {game.n_nodes} histories, {game.n_infosets} infosets, "
          f"{total} stored entries (regrets plus averages)")
    print(f"{'mode':<14}{'exploitability':>15}{'nodes touched':>15}{'live entries':>14}"
          f"{'min live':>10}{'seconds':>9}")
    for name, kw in MODES:
        s = CFRSolver(game, SolverConfig(**kw))
        t = time.perf_counter()
        lowest = total
        for _ in range(20):
            s.run(iterations // 20)
            lowest = min(lowest, s.live_regret_entries() + s.live_avg_entries())
        value = exploitability(game, s.average_profile())
        live = s.live_regret_entries() + s.live_avg_entries()
        print(f"{name:<14}{value:>15.4g}{s.nodes_touched:>15.4g}{live:>14}"
              f"{lowest / total:>10.1%}{time.perf_counter() - t:>9.1f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 20_000)
