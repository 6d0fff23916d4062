"""Extensive-form game representation and the built-in poker variants.

A :class:`Game` is an immutable, flattened game tree. Histories are numbered in
depth-first preorder, so the subtree rooted at history ``h`` occupies the
contiguous index range ``[h, end[h])``. Every traversal in the package relies
on that layout to skip pruned subtrees with a single jump.

Infoset-action pairs ("sequences") get a global index ``ia`` in
``[0, n_ia)``. The empty sequence of player ``p`` is encoded as ``n_ia + p`` so a
single array of length ``n_ia + 2`` can hold per-sequence quantities of both
players (realization weights, counterfactual values, ...).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

PLAYER1 = 0
PLAYER2 = 1
CHANCE = 2
TERMINAL = 3

_ACTOR_NAMES = {PLAYER1: "P1", PLAYER2: "P2", CHANCE: "C", TERMINAL: "T"}


class GameError(ValueError):
    """Raised when a game cannot be constructed."""


# --------------------------------------------------------------------------
# Tree specification for hand-built games
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Terminal:
    utils: tuple[float, float]


@dataclass(frozen=True)
class Chance:
    outcomes: tuple[tuple[str, float, "TreeNode"], ...]


@dataclass(frozen=True)
class Decision:
    player: int
    infoset: Hashable
    children: tuple[tuple[str, "TreeNode"], ...]


TreeNode = Terminal | Chance | Decision


# --------------------------------------------------------------------------
# Views
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class History:
    id: int
    parent: int  # -1 for the root
    action_taken: int  # -1 for the root
    actor: int
    infoset_id: int | None
    chance_probs: tuple[float, ...] | None
    utils: tuple[float, float] | None


@dataclass(frozen=True)
class Infoset:
    id: int
    owner: int
    label: str
    actions: tuple[str, ...]
    member_histories: tuple[int, ...]
    bounds_per_action: tuple[tuple[float, float], ...]
    bounds: tuple[float, float, float]
    descendants_per_action: tuple[frozenset[int], ...]


@dataclass(frozen=True)
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


# --------------------------------------------------------------------------
# Flattening builder
# --------------------------------------------------------------------------


class _Builder:
    """Accumulates histories in preorder; call :meth:`finish` once."""

    def __init__(self) -> None:
        self.parent: list[int] = []
        self.action: list[int] = []
        self.actor: list[int] = []
        self.key: list[Hashable | None] = []
        self.edge_prob: list[float] = []
        self.utils: list[tuple[float, float]] = []
        self.edge_label: list[str] = []
        self.infoset_labels: dict[Hashable, str] = {}
        self.infoset_actions: dict[Hashable, tuple[str, ...]] = {}

    def add(
        self,
        parent: int,
        action: int,
        actor: int,
        *,
        key: Hashable | None = None,
        prob: float = 1.0,
        utils: tuple[float, float] = (0.0, 0.0),
        label: str = "",
    ) -> int:
        self.parent.append(parent)
        self.action.append(action)
        self.actor.append(actor)
        self.key.append(key)
        self.edge_prob.append(prob)
        self.utils.append(utils)
        self.edge_label.append(label)
        return len(self.parent) - 1

    def declare_infoset(self, key: Hashable, label: str, actions: Sequence[str]) -> None:
        if key not in self.infoset_labels:
            self.infoset_labels[key] = label
            self.infoset_actions[key] = tuple(actions)

    def emit_tree(self, node: TreeNode, parent: int = -1, action: int = -1, prob: float = 1.0,
                  label: str = "") -> None:
        if isinstance(node, Terminal):
            self.add(parent, action, TERMINAL, prob=prob, utils=tuple(map(float, node.utils)),
                     label=label)
        elif isinstance(node, Chance):
            h = self.add(parent, action, CHANCE, prob=prob, label=label)
            for a, (lab, p, child) in enumerate(node.outcomes):
                self.emit_tree(child, h, a, float(p), lab)
        elif isinstance(node, Decision):
            if node.player not in (PLAYER1, PLAYER2):
                raise GameError(f"decision player must be 0 or 1, got {node.player}")
            key = (node.player, node.infoset)
            self.declare_infoset(key, str(node.infoset), [lab for lab, _ in node.children])
            h = self.add(parent, action, node.player, key=key, prob=prob, label=label)
            for a, (lab, child) in enumerate(node.children):
                self.emit_tree(child, h, a, 1.0, lab)
        else:
            raise GameError(f"unknown tree node {node!r}")

    def finish(self, name: str) -> "Game":
        return Game._from_builder(self, name)


# --------------------------------------------------------------------------
# Game
# --------------------------------------------------------------------------


class Game:
    """Immutable two-player zero-sum extensive-form game with chance.

    Construct with :func:`build_game` for the built-in variants or
    :func:`game_from_tree` for hand-built trees.
    """

    name: str
    n_nodes: int
    n_infosets: int
    n_ia: int

    def __init__(self) -> None:  # pragma: no cover - use the factories
        raise TypeError("use build_game() or game_from_tree()")

    @classmethod
    def _from_builder(cls, b: _Builder, name: str) -> "Game":
        g = object.__new__(cls)
        g.name = name
        n = len(b.parent)
        g.n_nodes = n
        g.parent = np.asarray(b.parent, dtype=np.int32)
        g.action = np.asarray(b.action, dtype=np.int32)
        g.actor = np.asarray(b.actor, dtype=np.int8)
        g.edge_prob = np.asarray(b.edge_prob, dtype=np.float64)
        g.utils = np.asarray(b.utils, dtype=np.float64).reshape(n, 2)
        g.util_of = [np.ascontiguousarray(g.utils[:, p]) for p in (0, 1)]
        g.edge_label = b.edge_label

        # children CSR, in action order (preorder already emits them that way)
        counts = np.bincount(g.parent[1:], minlength=n).astype(np.int32)
        g.child_ptr = np.zeros(n + 1, dtype=np.int32)
        np.cumsum(counts, out=g.child_ptr[1:])
        g.children = np.arange(1, n, dtype=np.int32)[np.argsort(g.parent[1:], kind="stable")]

        end = np.arange(1, n + 1, dtype=np.int32)
        for h in range(n - 1, 0, -1):
            p = g.parent[h]
            if end[h] > end[p]:
                end[p] = end[h]
        g.end = end

        # infosets in order of first appearance
        keys: dict[Hashable, int] = {}
        infoset = np.full(n, -1, dtype=np.int32)
        for h, k in enumerate(b.key):
            if k is not None:
                infoset[h] = keys.setdefault(k, len(keys))
        g.infoset = infoset
        n_inf = len(keys)
        g.n_infosets = n_inf
        key_list = list(keys)
        g.infoset_label = [b.infoset_labels[k] for k in key_list]
        g.infoset_actions = [b.infoset_actions[k] for k in key_list]
        g.inf_player = np.array([k[0] for k in key_list], dtype=np.int8)
        dec = np.flatnonzero(infoset >= 0)
        n_act = np.zeros(n_inf, dtype=np.int32)
        np.maximum.at(n_act, infoset[dec], counts[dec])
        g.inf_n_actions = n_act
        g.inf_ia_start = np.zeros(n_inf, dtype=np.int32)
        np.cumsum(n_act[:-1], out=g.inf_ia_start[1:])
        g.n_ia = int(n_act.sum())
        order = np.argsort(infoset[dec], kind="stable")
        g.member_ptr = np.zeros(n_inf + 1, dtype=np.int32)
        np.cumsum(np.bincount(infoset[dec], minlength=n_inf), out=g.member_ptr[1:])
        g.members = dec[order].astype(np.int32)
        g.ia_infoset = np.repeat(np.arange(n_inf, dtype=np.int32), n_act)
        g.ia_action = (np.arange(g.n_ia) - g.inf_ia_start[g.ia_infoset]).astype(np.int32)
        g.ia_owner = g.inf_player[g.ia_infoset].astype(np.int8)

        g._compute_paths()
        g._compute_bounds()
        g._compute_structure()
        return g

    # -- derived arrays ---------------------------------------------------

    def _compute_paths(self) -> None:
        n = self.n_nodes
        chance_reach = np.ones(n, dtype=np.float64)
        in_ia = np.full(n, -1, dtype=np.int32)
        last_seq = np.empty((2, n), dtype=np.int32)
        last_seq[0, 0] = self.n_ia
        last_seq[1, 0] = self.n_ia + 1
        depth = np.zeros(n, dtype=np.int32)
        parent, actor, action, infoset = self.parent, self.actor, self.action, self.infoset
        start = self.inf_ia_start
        for h in range(1, n):
            p = parent[h]
            depth[h] = depth[p] + 1
            last_seq[0, h] = last_seq[0, p]
            last_seq[1, h] = last_seq[1, p]
            act = actor[p]
            if act == CHANCE:
                chance_reach[h] = chance_reach[p] * self.edge_prob[h]
            else:
                chance_reach[h] = chance_reach[p]
                ia = start[infoset[p]] + action[h]
                in_ia[h] = ia
                last_seq[act, h] = ia
        self.chance_reach = chance_reach
        self.in_ia = in_ia
        self.last_seq = last_seq
        self.depth = depth

        # parent sequence of each infoset from its first member
        first = self.members[self.member_ptr[:-1]]
        self.inf_parent_seq = last_seq[self.inf_player, first].astype(np.int32)
        seq_depth = np.zeros(self.n_infosets, dtype=np.int32)
        for I in range(self.n_infosets):  # parents appear first in preorder
            ps = self.inf_parent_seq[I]
            if ps < self.n_ia:
                seq_depth[I] = seq_depth[self.ia_infoset[ps]] + 1
        self.inf_seq_depth = seq_depth

    def _compute_bounds(self) -> None:
        n = self.n_nodes
        hi = np.full((2, n), -np.inf)
        lo = np.full((2, n), np.inf)
        term = self.actor == TERMINAL
        hi[:, term] = self.utils[term].T
        lo[:, term] = self.utils[term].T
        parent = self.parent
        for h in range(n - 1, 0, -1):
            p = parent[h]
            for q in (0, 1):
                if hi[q, h] > hi[q, p]:
                    hi[q, p] = hi[q, h]
                if lo[q, h] < lo[q, p]:
                    lo[q, p] = lo[q, h]
        self._sub_hi, self._sub_lo = hi, lo
        U = np.full(self.n_ia, -np.inf)
        L = np.full(self.n_ia, np.inf)
        for I in range(self.n_infosets):
            q = self.inf_player[I]
            s = self.inf_ia_start[I]
            for h in self.members[self.member_ptr[I]:self.member_ptr[I + 1]]:
                c0 = self.child_ptr[h]
                for a in range(self.child_ptr[h + 1] - c0):
                    c = self.children[c0 + a]
                    U[s + a] = max(U[s + a], hi[q, c])
                    L[s + a] = min(L[s + a], lo[q, c])
        self.U_ia = U
        self.L_ia = L
        self.U_inf = np.maximum.reduceat(U, self.inf_ia_start) if self.n_ia else U
        self.L_inf = np.minimum.reduceat(L, self.inf_ia_start) if self.n_ia else L
        self.delta_inf = self.U_inf - self.L_inf
        tu = self.utils[term]
        self.delta = float(max(tu[:, 0].max() - tu[:, 0].min(), tu[:, 1].max() - tu[:, 1].min()))

    def _compute_structure(self) -> None:
        n_ia = self.n_ia
        # D(I,a): owner infosets whose parent-sequence chain passes through ia
        desc: list[list[int]] = [[] for _ in range(n_ia)]
        for I in range(self.n_infosets):
            seq = self.inf_parent_seq[I]
            while seq < n_ia:
                desc[seq].append(I)
                seq = self.inf_parent_seq[self.ia_infoset[seq]]
        depth = self.inf_seq_depth
        ptr = np.zeros(n_ia + 1, dtype=np.int64)
        flat: list[int] = []
        ia_flat: list[int] = []
        ia_ptr = np.zeros(n_ia + 1, dtype=np.int64)
        for ia in range(n_ia):
            d = sorted(desc[ia], key=lambda I: (-depth[I], I))
            flat.extend(d)
            ptr[ia + 1] = len(flat)
            for I in d:
                s = self.inf_ia_start[I]
                ia_flat.extend(range(s, s + self.inf_n_actions[I]))
            ia_ptr[ia + 1] = len(ia_flat)
        self.desc_ptr = ptr
        self.desc = np.asarray(flat, dtype=np.int32)
        self.desc_ia_ptr = ia_ptr
        self.desc_ia = np.asarray(ia_flat, dtype=np.int32)

        # child histories h.a for every h in I, per ia
        cptr = np.zeros(n_ia + 1, dtype=np.int64)
        cflat: list[int] = []
        for ia in range(n_ia):
            I = self.ia_infoset[ia]
            a = self.ia_action[ia]
            for h in self.members[self.member_ptr[I]:self.member_ptr[I + 1]]:
                if self.child_ptr[h] + a < self.child_ptr[h + 1]:
                    cflat.append(int(self.children[self.child_ptr[h] + a]))
            cptr[ia + 1] = len(cflat)
        self.ia_child_ptr = cptr
        self.ia_child = np.asarray(cflat, dtype=np.int32)

        self.player_infosets = []
        self.rev_topo = []
        for p in (0, 1):
            ids = np.flatnonzero(self.inf_player == p).astype(np.int32)
            self.player_infosets.append(ids)
            order = np.lexsort((ids, -depth[ids]))
            self.rev_topo.append(ids[order].astype(np.int32))
        self.topo = [r[::-1].copy() for r in self.rev_topo]
        self.player_ia = [np.flatnonzero(self.ia_owner == p).astype(np.int32) for p in (0, 1)]
        self._opp_seq_cache: dict[int, np.ndarray] = {}

    # -- queries -------------------------------------------------------------

    @property
    def n_seq(self) -> int:
        return self.n_ia + 2

    def history(self, h: int) -> History:
        actor = int(self.actor[h])
        kids = self.children[self.child_ptr[h]:self.child_ptr[h + 1]]
        return History(
            id=h,
            parent=int(self.parent[h]),
            action_taken=int(self.action[h]),
            actor=actor,
            infoset_id=int(self.infoset[h]) if actor in (PLAYER1, PLAYER2) else None,
            chance_probs=tuple(float(self.edge_prob[c]) for c in kids) if actor == CHANCE else None,
            utils=tuple(map(float, self.utils[h])) if actor == TERMINAL else None,
        )

    def members_of(self, I: int) -> np.ndarray:
        return self.members[self.member_ptr[I]:self.member_ptr[I + 1]]

    def ia_range(self, I: int) -> range:
        s = int(self.inf_ia_start[I])
        return range(s, s + int(self.inf_n_actions[I]))

    def descendants(self, ia: int) -> np.ndarray:
        """Owner infosets in D(I,a), deepest first."""
        return self.desc[self.desc_ptr[ia]:self.desc_ptr[ia + 1]]

    def descendant_ias(self, ia: int) -> np.ndarray:
        return self.desc_ia[self.desc_ia_ptr[ia]:self.desc_ia_ptr[ia + 1]]

    def action_children(self, ia: int) -> np.ndarray:
        """Histories h.a for every h in I."""
        return self.ia_child[self.ia_child_ptr[ia]:self.ia_child_ptr[ia + 1]]

    def opponent_sequences_below(self, ia: int) -> np.ndarray:
        """Opponent sequence ids reached anywhere below ``(I, a)``; a static property."""
        got = self._opp_seq_cache.get(ia)
        if got is None:
            opp = 1 - int(self.ia_owner[ia])
            kids = self.action_children(ia)
            parts = [self.last_seq[opp, c:self.end[c]] for c in kids]
            got = np.unique(np.concatenate(parts)) if parts else np.zeros(0, np.int32)
            self._opp_seq_cache[ia] = got
        return got

    def ia_label(self, ia: int) -> str:
        I = int(self.ia_infoset[ia])
        return f"{self.infoset_label[I]}:{self.infoset_actions[I][self.ia_action[ia]]}"

    def infoset_view(self, I: int) -> Infoset:
        rng = self.ia_range(I)
        return Infoset(
            id=I,
            owner=int(self.inf_player[I]),
            label=self.infoset_label[I],
            actions=self.infoset_actions[I],
            member_histories=tuple(int(h) for h in self.members_of(I)),
            bounds_per_action=tuple((float(self.U_ia[ia]), float(self.L_ia[ia])) for ia in rng),
            bounds=(float(self.U_inf[I]), float(self.L_inf[I]), float(self.delta_inf[I])),
            descendants_per_action=tuple(frozenset(int(x) for x in self.descendants(ia))
                                         for ia in rng),
        )

    def find_infoset(self, label: str, player: int | None = None) -> int:
        for I, lab in enumerate(self.infoset_label):
            if lab == label and (player is None or self.inf_player[I] == player):
                return I
        raise KeyError(label)

    def total_entries(self) -> int:
        """Infoset-action pairs of both players (one table's worth of scalars)."""
        return self.n_ia

    def dump(self) -> str:
        """Line-oriented text dump, one history per line."""
        lines = []
        for h in range(self.n_nodes):
            act = int(self.actor[h])
            head = f"{h} {self.parent[h]} {self.action[h]} {_ACTOR_NAMES[act]}"
            if act == TERMINAL:
                tail = ",".join(repr(float(u)) for u in self.utils[h])
            elif act == CHANCE:
                kids = self.children[self.child_ptr[h]:self.child_ptr[h + 1]]
                tail = ",".join(repr(float(self.edge_prob[c])) for c in kids)
            else:
                tail = f"I{self.infoset[h]}"
            lines.append(f"{head} {tail}")
        return "\n".join(lines) + "\n"


def game_from_tree(root: TreeNode, name: str = "custom", validate: bool = True) -> Game:
    """Flatten a hand-built tree. Raises :class:`GameError` on invariant breaches
    unless ``validate`` is false."""
    b = _Builder()
    b.emit_tree(root)
    g = b.finish(name)
    if validate:
        report = validate_game(g)
        if not report.ok:
            raise GameError("; ".join(report.violations))
    return g


# --------------------------------------------------------------------------
# Validation
# --------------------------------------------------------------------------


def validate_game(game: Game) -> ValidationReport:
    """Check zero-sum, chance normalization, infoset action consistency and
    perfect recall. Never raises; the report carries every violation found."""
    out: list[str] = []
    g = game
    n_kids = np.diff(g.child_ptr)
    for h in range(g.n_nodes):
        act = g.actor[h]
        if act == TERMINAL and n_kids[h]:
            out.append(f"terminal history {h} has actions")
        if act != TERMINAL and not n_kids[h]:
            out.append(f"non-terminal history {h} has no actions")
    term = np.flatnonzero(g.actor == TERMINAL)
    bad = term[np.abs(g.utils[term].sum(axis=1)) > 1e-12]
    for z in bad:
        out.append(f"terminal {z} is not zero-sum: {tuple(g.utils[z])}")
    for h in np.flatnonzero(g.actor == CHANCE):
        kids = g.children[g.child_ptr[h]:g.child_ptr[h + 1]]
        probs = g.edge_prob[kids]
        if abs(probs.sum() - 1.0) > 1e-12 or (probs < 0).any():
            out.append(f"chance history {h} probabilities sum to {probs.sum()!r}")
    for I in range(g.n_infosets):
        mem = g.members_of(I)
        counts = n_kids[mem]
        if (counts != counts[0]).any():
            out.append(f"infoset {I} ({g.infoset_label[I]}) mixes action counts {sorted(set(counts.tolist()))}")
        owner = g.inf_player[I]
        seqs = {_own_sequence(g, h, owner) for h in mem}
        if len(seqs) > 1:
            out.append(f"infoset {I} ({g.infoset_label[I]}) violates perfect recall")
    return ValidationReport(out)


def _own_sequence(g: Game, h: int, player: int) -> tuple[tuple[int, int], ...]:
    seq = []
    while h > 0:
        p = g.parent[h]
        if g.actor[p] == player:
            seq.append((int(g.infoset[p]), int(g.action[h])))
        h = p
    return tuple(reversed(seq))


def terminal_utility(game: Game, z: int, i: int) -> float:
    if game.actor[z] != TERMINAL:
        raise ValueError(f"history {z} is not terminal")
    return float(game.utils[z, i])


def payoff_bounds(game: Game, I: int, a: int) -> tuple[float, float]:
    """(U(I,a), L(I,a)) for the owner of infoset ``I``."""
    ia = int(game.inf_ia_start[I]) + a
    if not 0 <= a < game.inf_n_actions[I]:
        raise ValueError(f"action {a} not available at infoset {I}")
    return float(game.U_ia[ia]), float(game.L_ia[ia])


# --------------------------------------------------------------------------
# Poker variants
# --------------------------------------------------------------------------

RANK_NAMES = "JQKA23456789"


@dataclass(frozen=True)
class GameKind:
    """Parameters of a Kuhn/Leduc-style poker game."""

    variant: str
    ante: float = 1.0
    bet_sizes: tuple[tuple[float, ...], ...] = ((2.0,), (4.0,))
    bet_cap: int = 2
    n_ranks: int = 3
    copies: int = 2

    @classmethod
    def kuhn(cls) -> "GameKind":
        return cls("kuhn", ante=1.0, bet_sizes=((1.0,),), bet_cap=1, n_ranks=3, copies=1)

    @classmethod
    def leduc(cls) -> "GameKind":
        return cls("leduc")

    @classmethod
    def leduc5(cls) -> "GameKind":
        return cls("leduc5", bet_sizes=((0.5, 1.0, 2.0, 4.0, 8.0), (1.0, 2.0, 4.0, 8.0, 16.0)))

    @classmethod
    def named(cls, name: str) -> "GameKind":
        try:
            return {"kuhn": cls.kuhn, "leduc": cls.leduc, "leduc5": cls.leduc5}[name]()
        except KeyError:
            raise GameError(f"unknown game {name!r}") from None

    @property
    def rounds(self) -> int:
        return len(self.bet_sizes)

    def check(self) -> None:
        if self.n_ranks < 1 or self.copies < 1:
            raise GameError("deck must contain at least one card")
        if self.n_ranks * self.copies < self.rounds + 1:
            raise GameError("deck too small to deal private and public cards")
        if self.rounds not in (1, 2):
            raise GameError("only one or two betting rounds are supported")
        if self.ante <= 0:
            raise GameError("ante must be positive")
        if self.bet_cap < 1:
            raise GameError("bet cap must be at least 1")
        for sizes in self.bet_sizes:
            if not sizes or any(s <= 0 for s in sizes):
                raise GameError("bet sizes must be positive")


def _deals(kind: GameKind) -> list[tuple[tuple[int, ...], float]]:
    counts = [kind.copies] * kind.n_ranks
    total = sum(counts)
    n_cards = 3 if kind.rounds == 2 else 2
    out = []

    def rec(prefix: tuple[int, ...], prob: float, left: int) -> None:
        if len(prefix) == n_cards:
            out.append((prefix, prob))
            return
        for r in range(kind.n_ranks):
            if counts[r]:
                p = prob * counts[r] / left
                counts[r] -= 1
                rec(prefix + (r,), p, left - 1)
                counts[r] += 1

    rec((), 1.0, total)
    return out


def _fmt(x: float) -> str:
    return f"{x:g}"


class _PokerEmitter:
    def __init__(self, kind: GameKind, b: _Builder) -> None:
        self.kind = kind
        self.b = b

    def showdown(self, cards: tuple[int, ...], contrib: tuple[float, float]) -> tuple[float, float]:
        r0, r1 = cards[0], cards[1]
        pub = cards[2] if len(cards) > 2 else None
        pair0, pair1 = r0 == pub, r1 == pub
        if pair0 != pair1:
            w = 0 if pair0 else 1
        elif r0 != r1:
            w = 0 if r0 > r1 else 1
        else:
            return (0.0, 0.0)
        pot = contrib[1 - w]
        return (pot, -pot) if w == 0 else (-pot, pot)

    def node(self, parent: int, action: int, label: str, cards: tuple[int, ...], rnd: int,
             hist: tuple[tuple[str, ...], ...], player: int, contrib: tuple[float, float],
             n_bets: int) -> None:
        k = self.kind
        facing = contrib[1 - player] - contrib[player]
        sizes = k.bet_sizes[rnd]
        if facing > 0:
            acts = [("f", None), ("c", None)]
            if n_bets < k.bet_cap:
                acts += [("r" + _fmt(s), s) for s in sizes]
        else:
            acts = [("k", None)]
            if n_bets < k.bet_cap:
                acts += [("b" + _fmt(s), s) for s in sizes]
        card = RANK_NAMES[cards[player]]
        if rnd > 0:
            card += RANK_NAMES[cards[2]]
        info_label = card + "|" + "/".join(".".join(r) for r in hist)
        key = (player, card, hist)
        names = [a for a, _ in acts]
        self.b.declare_infoset(key, info_label, names)
        h = self.b.add(parent, action, player, key=key, label=label)
        cur = hist[rnd]
        for a, (name, size) in enumerate(acts):
            nh = hist[:rnd] + (cur + (name,),) + hist[rnd + 1:]
            c = list(contrib)
            if name == "f":
                lost = contrib[player]
                u = (-lost, lost) if player == 0 else (lost, -lost)
                self.b.add(h, a, TERMINAL, utils=u, label=name)
                continue
            if name == "c":
                c[player] = contrib[1 - player]
                self.round_end(h, a, name, cards, rnd, nh, (c[0], c[1]))
                continue
            if name == "k":
                if cur == ("k",):
                    self.round_end(h, a, name, cards, rnd, nh, contrib)
                else:
                    self.node(h, a, name, cards, rnd, nh, 1 - player, contrib, n_bets)
                continue
            c[player] = contrib[1 - player] + size
            self.node(h, a, name, cards, rnd, nh, 1 - player, (c[0], c[1]), n_bets + 1)

    def round_end(self, parent: int, action: int, label: str, cards: tuple[int, ...], rnd: int,
                  hist: tuple[tuple[str, ...], ...], contrib: tuple[float, float]) -> None:
        if rnd + 1 == self.kind.rounds:
            self.b.add(parent, action, TERMINAL, utils=self.showdown(cards, contrib), label=label)
        else:
            self.node(parent, action, label, cards, rnd + 1, hist, 0, contrib, 0)


@functools.lru_cache(maxsize=8)
def build_game(kind: GameKind | str) -> Game:
    """Build and validate a poker game tree.

    The root is a single chance node over rank-level deals (P1 card, P2 card,
    and the public card when there are two rounds) with exact deck weights.
    Builds are cached; the returned object is immutable and shared.
    """
    if isinstance(kind, str):
        kind = GameKind.named(kind)
    kind.check()
    b = _Builder()
    root = b.add(-1, -1, CHANCE)
    em = _PokerEmitter(kind, b)
    ante = float(kind.ante)
    empty = tuple(() for _ in range(kind.rounds))
    for a, (cards, prob) in enumerate(_deals(kind)):
        label = "".join(RANK_NAMES[c] for c in cards)
        b_idx = len(b.parent)
        em.node(root, a, label, cards, 0, empty, 0, (ante, ante), 0)
        b.edge_prob[b_idx] = prob
        b.edge_label[b_idx] = label
    g = b.finish(kind.variant)
    report = validate_game(g)
    if not report.ok:  # pragma: no cover - constructor bug
        raise GameError("; ".join(report.violations[:5]))
    g.kind = kind
    return g
