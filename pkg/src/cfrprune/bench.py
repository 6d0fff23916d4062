"""Experiment harness: run solvers, write convergence/space CSVs, compare runs.

Usage::

    cfrprune --game leduc --algo cfr --prune total --C 0.1 --iters 10000 --out run.csv
    cfrprune compare a.csv b.csv
    cfrprune figures fig1_leduc --outdir out/
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .game import build_game
from .metrics import CSV_HEADER, MetricsRow, checkpoint_schedule, snapshot
from .regret import ALGOS, PRUNE_MODES, CFRSolver, InvariantViolation, SolverConfig

EXIT_INVARIANT = 3

GAMES = ("kuhn", "leduc", "leduc5")


@dataclass
class ExperimentConfig:
    game: str
    algo: str = "cfr"
    prune: str = "none"
    C: float | None = None
    iterations: int = 1000
    checkpoints: str | None = None
    out: str | None = None
    alternating: bool = False
    check_threshold: float | None = 1.0
    check_every: int = 10
    partial: bool | None = None

    def __post_init__(self) -> None:
        if self.game not in GAMES:
            raise ValueError(f"game must be one of {GAMES}")
        if self.algo not in ALGOS:
            raise ValueError(f"algo must be one of {ALGOS}")
        if self.prune not in PRUNE_MODES:
            raise ValueError(f"prune must be one of {PRUNE_MODES}")
        if self.prune == "total" and self.C is None:
            raise ValueError("prune=total needs an explicit C (C=0 keeps the average strategy)")
        if self.C is not None and self.C < 0:
            raise ValueError("C must be nonnegative")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")

    def solver_config(self) -> SolverConfig:
        return SolverConfig(algo=self.algo, prune=self.prune, C=self.C or 0.0,
                            partial=self.partial, alternating=self.alternating,
                            check_threshold=self.check_threshold, check_every=self.check_every)


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def run_experiment(cfg: ExperimentConfig, progress=None) -> list[MetricsRow]:
    """Run the full loop and write header plus one row per checkpoint.

    Raises :class:`InvariantViolation` if a runtime check fails; rows gathered
    so far are still written.
    """
    game = build_game(cfg.game)
    solver = CFRSolver(game, cfg.solver_config())
    marks = checkpoint_schedule(cfg.iterations, cfg.checkpoints)
    rows: list[MetricsRow] = []
    try:
        for m in marks:
            solver.run(m - solver.T)
            rows.append(snapshot(solver))
            if progress is not None:
                progress(rows[-1])
    finally:
        if cfg.out is not None:
            write_csv(cfg.out, rows, cfg, 2 * game.n_ia)
    return rows


def write_csv(path: str | Path, rows: list[MetricsRow], cfg: ExperimentConfig | None = None,
              initial_entries: int | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(CSV_HEADER + "\n")
        for r in rows:
            f.write(r.to_csv() + "\n")
    if cfg is not None:
        meta = {"config": asdict(cfg), "game": cfg.game, "initial_entries": initial_entries}
        with open(_sidecar(path), "w", encoding="utf-8", newline="\n") as f:
            json.dump(meta, f, indent=1, sort_keys=True)
            f.write("\n")


def read_csv(path: str | Path) -> tuple[list[MetricsRow], dict]:
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        lines = [ln for ln in f.read().splitlines() if ln.strip()]
    if not lines or lines[0].strip() != CSV_HEADER:
        raise ValueError(f"{path}: missing or unexpected header")
    rows = [MetricsRow.from_csv(ln) for ln in lines[1:]]
    side = _sidecar(path)
    meta = json.loads(side.read_text(encoding="utf-8")) if side.exists() else {}
    return rows, meta


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------


def nodes_to_reach(rows: list[MetricsRow], target: float) -> float:
    """Nodes touched when exploitability first reaches ``target``, interpolated
    log-log between the bracketing checkpoints; inf if never reached."""
    prev = None
    for r in rows:
        if r.exploitability <= target:
            if prev is None or prev.exploitability <= 0 or r.exploitability <= 0:
                return float(r.nodes_touched)
            le0, le1 = math.log(prev.exploitability), math.log(r.exploitability)
            ln0, ln1 = math.log(prev.nodes_touched), math.log(r.nodes_touched)
            if le0 == le1:
                return float(r.nodes_touched)
            f = (math.log(target) - le0) / (le1 - le0)
            return float(math.exp(ln0 + f * (ln1 - ln0)))
        prev = r
    return math.inf


def decade_grid(runs: list[list[MetricsRow]]) -> list[float]:
    """Powers of ten that every run reaches, excluding its first row."""
    lo = max(min(r.exploitability for r in rows) for rows in runs)
    hi = min(rows[0].exploitability for rows in runs)
    if not (lo > 0 and hi > lo):
        return []
    return [10.0 ** k for k in range(math.ceil(math.log10(lo)), math.floor(math.log10(hi)) + 1)
            if lo <= 10.0 ** k < hi]


@dataclass
class CompareReport:
    names: list[str]
    levels: list[float]
    nodes: dict[str, list[float]]
    min_live: dict[str, int]
    initial: dict[str, int]
    reduction: dict[str, float]
    text: str = field(default="", repr=False)


class CompareError(ValueError):
    pass


def compare_runs(paths: list[str | Path], levels: list[float] | None = None) -> CompareReport:
    if len(paths) < 2:
        raise CompareError("compare needs at least two CSV files")
    runs, metas = [], []
    for p in paths:
        rows, meta = read_csv(p)
        if not rows:
            raise CompareError(f"{p}: no rows")
        runs.append(rows)
        metas.append(meta)
    games = {m.get("game") for m in metas if m.get("game")}
    if len(games) > 1:
        raise CompareError(f"runs are over different games: {sorted(games)}")
    names = [Path(p).stem for p in paths]
    if len(set(names)) < len(names):
        names = [str(p) for p in paths]
    grid = levels if levels is not None else decade_grid(runs)
    nodes = {n: [nodes_to_reach(rows, L) for L in grid] for n, rows in zip(names, runs)}
    min_live, initial, reduction = {}, {}, {}
    for n, rows, meta in zip(names, runs, metas):
        live = [r.live_entries for r in rows]
        init = meta.get("initial_entries") or max(live)
        min_live[n] = min(live)
        initial[n] = int(init)
        reduction[n] = init / min_live[n] if min_live[n] else math.inf
    out = []
    w = max(12, max(len(n) for n in names) + 2)
    out.append("nodes touched to reach exploitability")
    out.append(f"{'level':>10}" + "".join(f"{n:>{w}}" for n in names))
    for k, L in enumerate(grid):
        out.append(f"{L:>10.3g}" + "".join(f"{nodes[n][k]:>{w}.4g}" for n in names))
    if len(names) >= 2 and grid:
        out.append("")
        out.append("speedup (row run vs column run: column nodes / row nodes), geometric mean over levels")
        for a in names:
            cells = []
            for b in names:
                ratios = [nb / na for na, nb in zip(nodes[a], nodes[b])
                          if math.isfinite(na) and math.isfinite(nb) and na > 0]
                g = math.exp(sum(map(math.log, ratios)) / len(ratios)) if ratios else math.nan
                cells.append(f"{g:>{w}.3f}")
            out.append(f"{a:>10}"[:10] + "".join(cells))
    out.append("")
    out.append(f"{'run':<{w}}{'initial':>12}{'min live':>12}{'reduction':>12}")
    for n in names:
        out.append(f"{n:<{w}}{initial[n]:>12}{min_live[n]:>12}{reduction[n]:>12.3f}")
    return CompareReport(names, list(grid), nodes, min_live, initial, reduction, "\n".join(out))


# ---------------------------------------------------------------------------
# figure presets
# ---------------------------------------------------------------------------

DESK_ITERATIONS = {"leduc": 100_000, "leduc5": 100_000}


def preset_configs(name: str, iterations: int | None = None) -> list[tuple[str, ExperimentConfig]]:
    """(file stem, config) pairs for a named preset."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    game, kind = PRESETS[name]
    n = iterations or DESK_ITERATIONS[game]
    out = []
    for algo in ALGOS:
        if kind == "space":
            for C in (0.01, 0.1):
                out.append((f"{algo}_total_C{C}", ExperimentConfig(
                    game, algo, "total", C, n, "geom:1.5", **SPACE_KNOBS)))
        else:
            for prune in ("partial", "interval", "total"):
                C = 0.0 if prune == "total" else None
                out.append((f"{algo}_{prune}", ExperimentConfig(
                    game, algo, prune, C, n, "geom:1.5", **SPEED_KNOBS)))
    return out


PRESETS = {
    "fig1_leduc": ("leduc", "space"),
    "fig1_leduc5": ("leduc5", "space"),
    "fig2_leduc": ("leduc", "speed"),
    "fig2_leduc5": ("leduc5", "speed"),
}
# space runs test every sufficiently negative action, so storage drops sooner;
# speed runs keep the default threshold, where checks cost fewer node touches
SPACE_KNOBS: dict = {"check_threshold": 0.0}
SPEED_KNOBS: dict = {}


def emit_figure_data(name: str, outdir: str | Path, iterations: int | None = None,
                     log=print) -> list[Path]:
    outdir = Path(outdir)
    paths = []
    for stem, cfg in preset_configs(name, iterations):
        cfg.out = str(outdir / name / f"{stem}.csv")
        rows = run_experiment(cfg)
        paths.append(Path(cfg.out))
        if log is not None:
            last = rows[-1]
            log(f"{stem}: T={last.iteration} exploitability={last.exploitability:.4g} "
                f"nodes={last.nodes_touched} min_live={min(r.live_entries for r in rows)}")
    return paths


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------


def _run_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cfrprune", description="Run one CFR experiment.",
                                epilog="Other commands: 'cfrprune compare ...', "
                                       "'cfrprune figures ...'.")
    p.add_argument("--game", required=True, choices=GAMES)
    p.add_argument("--algo", default="cfr", choices=ALGOS)
    p.add_argument("--prune", default="none", choices=PRUNE_MODES)
    p.add_argument("--C", type=float, default=None,
                   help="average-strategy discard threshold (required with --prune total)")
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--checkpoints", default=None, help="lin:N or geom:R (default ~100 rows)")
    p.add_argument("--out", required=True)
    p.add_argument("--alternating", action="store_true",
                   help="player 2 sees player 1's updated strategy within an iteration")
    p.add_argument("--check-threshold", type=float, default=None,
                   help="total pruning tests actions with regret <= -k*Delta(I)*sqrt(T)")
    p.add_argument("--check-interval", type=int, default=10,
                   help="visits of an infoset between tests of the same action")
    p.add_argument("--no-partial", action="store_true",
                   help="traverse zero-reach subtrees even when pruning")
    p.add_argument("--no-check", action="store_true", help="never test total pruning")
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "compare":
        p = argparse.ArgumentParser(prog="cfrprune compare")
        p.add_argument("csv", nargs="+")
        a = p.parse_args(argv[1:])
        try:
            rep = compare_runs(a.csv)
        except (CompareError, ValueError, OSError) as e:
            print(f"cfrprune compare: {e}", file=sys.stderr)
            return 1
        print(rep.text)
        return 0
    if argv and argv[0] == "figures":
        p = argparse.ArgumentParser(prog="cfrprune figures")
        p.add_argument("preset", choices=sorted(PRESETS))
        p.add_argument("--outdir", required=True)
        p.add_argument("--iters", type=int, default=None)
        a = p.parse_args(argv[1:])
        try:
            emit_figure_data(a.preset, a.outdir, a.iters)
        except InvariantViolation as e:
            print(f"cfrprune: invariant violated: {e}", file=sys.stderr)
            return EXIT_INVARIANT
        return 0
    a = _run_parser().parse_args(argv)
    threshold = ExperimentConfig.__dataclass_fields__["check_threshold"].default
    if a.check_threshold is not None:
        threshold = a.check_threshold
    if a.no_check:
        threshold = None
    try:
        cfg = ExperimentConfig(a.game, a.algo, a.prune, a.C, a.iters, a.checkpoints, a.out,
                               a.alternating, threshold, a.check_interval,
                               False if a.no_partial else None)
    except ValueError as e:
        print(f"cfrprune: {e}", file=sys.stderr)
        return 1
    try:
        run_experiment(cfg)
    except InvariantViolation as e:
        print(f"cfrprune: invariant violated: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as e:
        print(f"cfrprune: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
