"""Watch Total RBP stop visiting a dominated subtree.

Player 1 chooses between a matching-pennies subgame worth 0 and a subtree whose
best outcome is worse on average. Total RBP prunes the subtree early; the
printed counts are the passes (solver traversals plus pruning best responses)
that touched it in each window of iterations.

Run with ``python demos/dominated_subtree.py``.
"""

import numpy as np

from cfrprune import CFRSolver, Decision, SolverConfig, Terminal, game_from_tree


def leaf(u: float) -> Terminal:
    return Terminal((u, -u))


def build():
    guess = lambda s: Decision(1, "guess", (("h", leaf(s)), ("t", leaf(-s))))
    pennies = Decision(0, "pick", (("H", guess(1.0)), ("T", guess(-1.0))))
    risky = Decision(1, "respond", (("u", leaf(0.9)), ("v", leaf(-0.9))))
    dominated = Decision(0, "deep", (("x", risky), ("y", leaf(-0.75))))
    return game_from_tree(Decision(0, "top", (("pennies", pennies), ("dominated", dominated))))


def main() -> None:
    game = build()
    top = game.find_infoset("top", 0)
    watched = int(game.inf_ia_start[top]) + 1
    for label, kw in (("no pruning", dict(prune="partial")),
                      ("total RBP", dict(prune="total", check_threshold=0.0, check_every=1))):
        s = CFRSolver(game, SolverConfig(**kw), watch=[watched])
        s.run(2 ** 15)
        hits = np.array(s.watch_hits)
        print(label)
        for k in range(6, 15):
            lo, hi = 2 ** k, 2 ** (k + 1)
            print(f"  iterations {lo + 1:>6}..{hi:<6} subtree passes {int(hits[lo:hi].sum()):>6}")


if __name__ == "__main__":
    main()
