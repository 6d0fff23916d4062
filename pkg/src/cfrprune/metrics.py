"""Hardware-independent cost and memory accounting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable

if TYPE_CHECKING:  # pragma: no cover
    from .regret import CFRSolver

CSV_HEADER = "iter,nodes_touched,exploitability,live_regret,live_avg,pruned_subtrees"


@dataclass(frozen=True)
class MetricsRow:
    iteration: int
    nodes_touched: int
    exploitability: float
    live_regret_entries: int
    live_avg_entries: int
    live_pruned_subtrees: int

    def to_csv(self) -> str:
        return (f"{self.iteration},{self.nodes_touched},{self.exploitability!r},"
                f"{self.live_regret_entries},{self.live_avg_entries},{self.live_pruned_subtrees}")

    @classmethod
    def from_csv(cls, line: str) -> "MetricsRow":
        f = line.strip().split(",")
        if len(f) != 6:
            raise ValueError(f"expected 6 fields, got {len(f)}: {line!r}")
        return cls(int(f[0]), int(f[1]), float(f[2]), int(f[3]), int(f[4]), int(f[5]))

    @property
    def live_entries(self) -> int:
        return self.live_regret_entries + self.live_avg_entries


@dataclass
class TouchCounter:
    total: int = 0

    def record(self, n: int) -> "TouchCounter":
        if n < 1:
            raise ValueError("a touch record needs n >= 1")
        self.total += n
        return self


def record_touch(counter: TouchCounter, n: int) -> TouchCounter:
    return counter.record(n)


def memory_footprint(state: "CFRSolver") -> tuple[int, int]:
    """(live regret entries, live average-strategy entries), both players."""
    return state.live_regret_entries(), state.live_avg_entries()


@dataclass
class MetricsLog:
    rows: list[MetricsRow] = field(default_factory=list)

    def snapshot(self, state: "CFRSolver",
                 evaluator: Callable[["CFRSolver"], float] | None = None) -> MetricsRow:
        return snapshot(state, evaluator, self)


def snapshot(state: "CFRSolver", evaluator: Callable[["CFRSolver"], float] | None = None,
             log: MetricsLog | None = None) -> MetricsRow:
    """Evaluate the solver and capture its counters.

    The default evaluator is the solver's own, which reports the best average
    found so far for CFR+ and charges its best-response passes to nodes touched.
    """
    value = (evaluator or (lambda s: s.evaluate()))(state)
    reg, avg = memory_footprint(state)
    row = MetricsRow(state.T, state.nodes_touched, float(value), reg, avg,
                     state.pruner.live_records())
    if log is not None:
        log.rows.append(row)
    return row


def checkpoint_schedule(iterations: int, spec: str | None = None) -> list[int]:
    """Iterations at which to snapshot.

    ``lin:N`` takes every N-th iteration; ``geom:R`` takes every 10th
    iteration up to 100 and then grows by factor R.
    The default is linear with about 100 rows. Iteration 1 and the last
    iteration are always included.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if spec is None or spec == "":
        spec = f"lin:{max(1, iterations // 100)}"
    kind, _, arg = spec.partition(":")
    pts: set[int] = {1, iterations}
    if kind == "lin":
        step = int(arg)
        if step < 1:
            raise ValueError("linear checkpoint step must be >= 1")
        pts.update(range(step, iterations + 1, step))
    elif kind == "geom":
        ratio = float(arg)
        if not ratio > 1.0:
            raise ValueError("geometric checkpoint ratio must exceed 1")
        pts.update(range(10, min(100, iterations) + 1, 10))
        t = 100.0
        while t <= iterations:
            pts.add(int(math.floor(t)))
            t *= ratio
    else:
        raise ValueError(f"unknown checkpoint spec {spec!r}; use lin:N or geom:R")
    return sorted(p for p in pts if 1 <= p <= iterations)
