"""Solve Kuhn poker with vanilla CFR and compare against the known equilibrium.

Run with ``python demos/kuhn_equilibrium.py``.
"""

import numpy as np

from cfrprune import CFRSolver, build_game, expected_value, exploitability


def main() -> None:
    game = build_game("kuhn")
    solver = CFRSolver(game)
    print(f"{'iterations':>10} {'P1 value':>10} {'exploitability':>15} {'nodes touched':>14}")
    for T in (10, 100, 1000, 10_000):
        solver.run(T - solver.T)
        avg = solver.average_profile()
        print(f"{T:>10} {expected_value(game, avg):>10.5f} {exploitability(game, avg):>15.2e} "
              f"{solver.nodes_touched:>14}")
    print(f"game value is -1/18 = {-1 / 18:.5f}")

    # the equilibrium family is indexed by how often P1 bluffs with the jack
    I = game.find_infoset("J|", 0)
    alpha = solver.average_strategy(I)[1]
    K = game.find_infoset("K|", 0)
    print(f"P1 bets the jack with probability {alpha:.4f} (any value in [0, 1/3] is optimal)")
    print(f"P1 bets the king with probability {solver.average_strategy(K)[1]:.4f} "
          f"(theory: 3 x {alpha:.4f} = {3 * alpha:.4f})")
    Q = game.find_infoset("Q|k.b1", 0)
    print(f"P1 calls with the queen with probability {solver.average_strategy(Q)[1]:.4f} "
          f"(theory: {alpha + 1 / 3:.4f})")
    np.set_printoptions(precision=3)


if __name__ == "__main__":
    main()
