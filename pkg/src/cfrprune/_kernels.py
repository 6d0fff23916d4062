"""Compiled inner loops.

All passes work on the flattened preorder tree of :class:`cfrprune.game.Game`
and on per-sequence arrays of length ``n_ia + 2``. Counterfactual values are
accumulated at the traverser's last sequence of every terminal and then folded
up the traverser's infoset tree, which makes one pass over histories plus one
pass over infosets sufficient for CFR, best responses and subtree checks.
"""

import numpy as np
from numba import njit

TERMINAL = 3

# regret update rules
UPD_SUM = 0  # vanilla CFR
UPD_FLOOR = 1  # CFR+
UPD_JUMP = 2  # CFR+ with pruning: may go negative, jumps to 0 when increasing


@njit(cache=True)
def update_regret(r, inc, rule):
    if rule == UPD_SUM:
        return r + inc
    if rule == UPD_FLOOR:
        v = r + inc
        return v if v > 0.0 else 0.0
    if r < 0.0 and inc > 0.0:
        return 0.0
    return r + inc


@njit(cache=True)
def regret_matching_all(infosets, ia_start, n_act, regrets, pruned, sigma):
    for k in range(infosets.shape[0]):
        I = infosets[k]
        s = ia_start[I]
        n = n_act[I]
        tot = 0.0
        live = 0
        for a in range(n):
            if not pruned[s + a]:
                live += 1
                r = regrets[s + a]
                if r > 0.0:
                    tot += r
        for a in range(n):
            if pruned[s + a]:
                sigma[s + a] = 0.0
            elif tot > 0.0:
                r = regrets[s + a]
                sigma[s + a] = r / tot if r > 0.0 else 0.0
            else:
                sigma[s + a] = 1.0 / live


@njit(cache=True)
def realization(player, topo, ia_start, n_act, parent_seq, sigma, n_ia, x):
    x[n_ia + player] = 1.0
    for k in range(topo.shape[0]):
        I = topo[k]
        base = x[parent_seq[I]]
        s = ia_start[I]
        for a in range(n_act[I]):
            x[s + a] = base * sigma[s + a]


@njit(cache=True)
def average_behavior(infosets, ia_start, n_act, cum, avg_live, out):
    """Normalize cumulative strategies; freed entries count as zero, an all-zero
    normalizer falls back to uniform."""
    for k in range(infosets.shape[0]):
        I = infosets[k]
        s = ia_start[I]
        n = n_act[I]
        tot = 0.0
        for a in range(n):
            if avg_live[s + a]:
                tot += cum[s + a]
        for a in range(n):
            if tot > 0.0:
                out[s + a] = cum[s + a] / tot if avg_live[s + a] else 0.0
            else:
                out[s + a] = 1.0 / n


@njit(cache=True)
def accumulate_average(ias, x, weight, avg_live, cum):
    for k in range(ias.shape[0]):
        ia = ias[k]
        if avg_live[ia]:
            cum[ia] += weight * x[ia]


@njit(cache=True)
def cfr_traverse(i, actor, end, in_ia, ia_owner, chance_reach, seq_i, seq_o, util_i,
                 infoset, x, partial, pruned, stamp, cur, opp_reach, visited, sv,
                 sub_lo, sub_hi, sub_count):
    """Opponent-reach pass for traverser ``i``.

    Terminal values land in ``sv`` at the traverser's last sequence; visited
    traverser infosets are stamped and appended to ``visited`` in first-visit
    order (parents before children). ``sub_count[k]`` records whether any node
    of the watched range ``[sub_lo[k], sub_hi[k])`` was touched.
    Returns (touches, n_visited).
    """
    n = actor.shape[0]
    touches = 0
    nv = 0
    idx = 0
    while idx < n:
        e = in_ia[idx]
        if e >= 0 and pruned[e] and ia_owner[e] == i:
            idx = end[idx]
            continue
        w = chance_reach[idx] * x[seq_o[idx]]
        if partial and w == 0.0:
            idx = end[idx]
            continue
        touches += 1
        for k in range(sub_lo.shape[0]):
            if sub_lo[k] <= idx < sub_hi[k]:
                sub_count[k] = 1
        k = actor[idx]
        if k == TERMINAL:
            sv[seq_i[idx]] += w * util_i[idx]
        elif k == i:
            I = infoset[idx]
            if stamp[I] != cur:
                stamp[I] = cur
                opp_reach[I] = 0.0
                visited[nv] = I
                nv += 1
            opp_reach[I] += w
        idx += 1
    return touches, nv


@njit(cache=True)
def cfr_update(i, order, stamp, cur, ia_start, n_act, parent_seq, sigma, sv, pruned, regrets,
               cum_cfv, inst_cfv, rule, n_ia):
    """Fold values up the traverser's infoset tree and apply regret updates.

    ``order`` lists the traverser's infosets deepest first; only those stamped
    with ``cur`` are processed. The fixed order keeps floating-point sums
    independent of which subtrees the traversal skipped.
    Returns the traverser's expected value."""
    for k in range(order.shape[0]):
        I = order[k]
        if stamp[I] != cur:
            continue
        s = ia_start[I]
        n = n_act[I]
        v = 0.0
        for a in range(n):
            v += sigma[s + a] * sv[s + a]
        for a in range(n):
            if not pruned[s + a]:
                regrets[s + a] = update_regret(regrets[s + a], sv[s + a] - v, rule)
            sv[s + a] = 0.0
        cum_cfv[I] += v
        inst_cfv[I] = v
        sv[parent_seq[I]] += v
    root = sv[n_ia + i]
    sv[n_ia + i] = 0.0
    return root


@njit(cache=True)
def cbr_terminals(starts, actor, end, chance_reach, seq_i, seq_o, util_i, x, sv):
    """Accumulate opponent-weighted terminal values below each start history.
    Zero-weight subtrees are skipped. Returns touches."""
    touches = 0
    for r in range(starts.shape[0]):
        idx = starts[r]
        stop = end[idx]
        while idx < stop:
            w = chance_reach[idx] * x[seq_o[idx]]
            if w == 0.0:
                idx = end[idx]
                continue
            touches += 1
            if actor[idx] == TERMINAL:
                sv[seq_i[idx]] += w * util_i[idx]
            idx += 1
    return touches


@njit(cache=True)
def cbr_fold(infosets, ia_start, n_act, parent_seq, sv, best, cbv):
    """Max-fold over infosets given deepest first; ties go to the lowest action."""
    for k in range(infosets.shape[0]):
        I = infosets[k]
        s = ia_start[I]
        b = 0
        m = sv[s]
        for a in range(1, n_act[I]):
            if sv[s + a] > m:
                m = sv[s + a]
                b = a
        best[I] = b
        cbv[I] = m
        sv[parent_seq[I]] += m


@njit(cache=True)
def expected_value(actor, chance_reach, seq0, seq1, util0, x):
    tot = 0.0
    for idx in range(actor.shape[0]):
        if actor[idx] == TERMINAL:
            tot += chance_reach[idx] * x[seq0[idx]] * x[seq1[idx]] * util0[idx]
    return tot


@njit(cache=True)
def regret_bound_violations(infosets, ia_start, n_act, regrets, regret_live, delta, T, tol):
    bad = 0
    sq = np.sqrt(T)
    for k in range(infosets.shape[0]):
        I = infosets[k]
        s = ia_start[I]
        n = n_act[I]
        bound = delta[I] * np.sqrt(n) * sq
        for a in range(n):
            if regret_live[s + a] and regrets[s + a] > bound + tol:
                bad += 1
    return bad


@njit(cache=True)
def sum_max_positive_regret(infosets, ia_start, n_act, regrets):
    tot = 0.0
    for k in range(infosets.shape[0]):
        I = infosets[k]
        s = ia_start[I]
        m = 0.0
        for a in range(n_act[I]):
            if regrets[s + a] > m:
                m = regrets[s + a]
        tot += m
    return tot


@njit(cache=True)
def extend_records(live, ia_infoset, stamp, cur, opp_reach, U, banked, cum_cfv, expired):
    """Bank pi_{-i}(I) U(I,a) for live records; flag those whose condition fails."""
    ne = 0
    for k in range(live.shape[0]):
        ia = live[k]
        I = ia_infoset[ia]
        if stamp[I] == cur:
            banked[ia] += opp_reach[I] * U[ia]
        if banked[ia] > cum_cfv[I]:
            expired[ne] = ia
            ne += 1
    return ne


@njit(cache=True)
def visit_count(visited, nv, visits):
    for k in range(nv):
        visits[visited[k]] += 1


@njit(cache=True)
def total_candidates(visited, nv, ia_start, n_act, regrets, regret_live, pruned, delta, sqrtT,
                     kappa, visits, last_check, every, out):
    """Actions whose regret is very negative and whose check cadence allows a test."""
    c = 0
    for k in range(nv):
        I = visited[k]
        s = ia_start[I]
        n = n_act[I]
        active = 0
        for a in range(n):
            if not pruned[s + a]:
                active += 1
        if active < 2:
            continue
        thr = -kappa * delta[I] * sqrtT
        for a in range(n):
            ia = s + a
            if pruned[ia] or not regret_live[ia]:
                continue
            if regrets[ia] <= thr and visits[I] - last_check[ia] >= every:
                out[c] = ia
                c += 1
    return c


@njit(cache=True)
def interval_candidates(visited, nv, ia_start, n_act, regrets, pruned, out):
    """Negative-regret actions that regret matching currently plays with probability 0."""
    c = 0
    for k in range(nv):
        I = visited[k]
        s = ia_start[I]
        n = n_act[I]
        pos = False
        for a in range(n):
            if not pruned[s + a] and regrets[s + a] > 0.0:
                pos = True
        if not pos:
            continue
        for a in range(n):
            ia = s + a
            if not pruned[ia] and regrets[ia] < 0.0:
                out[c] = ia
                c += 1
    return c
