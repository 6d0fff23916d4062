"""Compiled bookkeeping for interval and total pruning.

Records live in flat per-action arrays; ``pruned[ia]`` doubles as the
"record is live" flag. A record's bound can only change on iterations where
its infoset is reached, so expiry is tested while scanning the visited list.

Static game data is passed as the tuple built by ``game_context`` and mutable
state as the tuples built by the pruners; each kernel unpacks what it needs.
"""

import numpy as np
from numba import njit

from ._kernels import average_behavior, cbr_fold, cbr_terminals, realization, update_regret

# counter slots
N_TOUCH = 0
N_START = 1
N_EXPIRE = 2
N_RESUME = 3
N_REPRUNE = 4
N_REGRET_FREED = 5  # running count of freed regret entries
N_AVG_FREED = 6  # running count of freed average entries
N_HORIZON = 7
N_HORIZON_BAD = 8
N_RESUME_CHECK = 9
N_RESUME_BAD = 10
N_WATCH = 11
N_SUBSUMED = 12
N_CHECK = 13  # start checks that ran a best response
N_COUNTERS = 14


@njit(cache=True)
def build_opp_seq_csr(n_ia, ia_owner, ia_child_ptr, ia_child, end, last_seq):
    """Per action pair, the distinct opponent sequences at histories below it."""
    n_seq = n_ia + 2
    mark = np.full(n_seq, -1, dtype=np.int64)
    ptr = np.zeros(n_ia + 1, dtype=np.int64)
    for ia in range(n_ia):
        o = 1 - ia_owner[ia]
        c = 0
        for j in range(ia_child_ptr[ia], ia_child_ptr[ia + 1]):
            h0 = ia_child[j]
            for h in range(h0, end[h0]):
                q = last_seq[o, h]
                if mark[q] != ia:
                    mark[q] = ia
                    c += 1
        ptr[ia + 1] = ptr[ia] + c
    out = np.empty(ptr[n_ia], dtype=np.int32)
    mark[:] = -1
    for ia in range(n_ia):
        o = 1 - ia_owner[ia]
        c = ptr[ia]
        for j in range(ia_child_ptr[ia], ia_child_ptr[ia + 1]):
            h0 = ia_child[j]
            for h in range(h0, end[h0]):
                q = last_seq[o, h]
                if mark[q] != ia:
                    mark[q] = ia
                    out[c] = q
                    c += 1
    return ptr, out


@njit(cache=True)
def _hits_watch(ia, ia_child_ptr, ia_child, end, watch_lo, watch_hi):
    for j in range(ia_child_ptr[ia], ia_child_ptr[ia + 1]):
        lo = ia_child[j]
        hi = end[lo]
        for k in range(watch_lo.shape[0]):
            if watch_lo[k] < hi and watch_hi[k] > lo:
                return True
    return False


@njit(cache=True)
def subtree_cbr(G, ia, xo, sv, best, cbv, counters, counted):
    """CBR restricted to D(I,a) against sequence weights ``xo``; returns CBV(I,a)."""
    (actor, end, chance_reach, seq_i, seq_o, util_i, ia_start, n_act, parent_seq, ia_infoset,
     U_ia, L_inf, delta_inf, desc_ptr, desc, desc_ia_ptr, desc_ia, ia_child_ptr, ia_child,
     osb_ptr, osb, player_ia, opp_infosets, opp_topo, n_ia, opp, watch_lo, watch_hi, L_ia, U_inf) = G
    t = cbr_terminals(ia_child[ia_child_ptr[ia]:ia_child_ptr[ia + 1]], actor, end, chance_reach,
                      seq_i, seq_o, util_i, xo, sv)
    cbr_fold(desc[desc_ptr[ia]:desc_ptr[ia + 1]], ia_start, n_act, parent_seq, sv, best, cbv)
    if counted:
        counters[N_TOUCH] += t
        if watch_lo.shape[0] > 0 and _hits_watch(ia, ia_child_ptr, ia_child, end, watch_lo,
                                                 watch_hi):
            counters[N_WATCH] += 1
    return sv[ia]


@njit(cache=True)
def clear_subtree(G, ia, sv):
    desc_ia_ptr = G[15]
    desc_ia = G[16]
    for j in range(desc_ia_ptr[ia], desc_ia_ptr[ia + 1]):
        sv[desc_ia[j]] = 0.0
    sv[ia] = 0.0


@njit(cache=True)
def prune_horizon(cfv_sum, T, nbv, U, L):
    slack = cfv_sum - T * nbv
    if slack < 0.0:
        return -1
    width = U - L
    if width <= 0.0:
        return 0
    return int(np.floor(slack / width))


# ---------------------------------------------------------------------------
# interval pruning
# ---------------------------------------------------------------------------


@njit(cache=True)
def _mark_ancestors(ia, delta, parent_seq, ia_infoset, live_below, n_ia):
    """Add ``delta`` to the live-record count of every owner sequence above ``ia``."""
    seq = parent_seq[ia_infoset[ia]]
    while seq < n_ia:
        live_below[seq] += delta
        seq = parent_seq[ia_infoset[seq]]


@njit(cache=True)
def interval_catch_up(G, S, R, ia, rule):
    """End the record at ``ia``: one CBR over D(I,a) against the window's summed
    opponent weights, applied as the window's regret and value increments."""
    (actor, end, chance_reach, seq_i, seq_o, util_i, ia_start, n_act, parent_seq, ia_infoset,
     U_ia, L_inf, delta_inf, desc_ptr, desc, desc_ia_ptr, desc_ia, ia_child_ptr, ia_child,
     osb_ptr, osb, player_ia, opp_infosets, opp_topo, n_ia, opp, watch_lo, watch_hi, L_ia, U_inf) = G
    regrets, pruned, cum_cfv, opp_reach, sv, best, cbv = S
    banked, cfv0, t0, snap, xw, scratch, live_below, counters = R
    I = ia_infoset[ia]
    pruned[ia] = False
    _mark_ancestors(ia, -1, parent_seq, ia_infoset, live_below, n_ia)
    for k in range(osb_ptr[ia], osb_ptr[ia + 1]):
        q = osb[k]
        scratch[q] = xw[q] - snap[k]
    nbv = subtree_cbr(G, ia, scratch, sv, best, cbv, counters, True)
    for k in range(osb_ptr[ia], osb_ptr[ia + 1]):
        scratch[osb[k]] = 0.0
    for j in range(desc_ia_ptr[ia], desc_ia_ptr[ia + 1]):
        e = desc_ia[j]
        regrets[e] = update_regret(regrets[e], sv[e] - cbv[ia_infoset[e]], rule)
    for j in range(desc_ptr[ia], desc_ptr[ia + 1]):
        J = desc[j]
        cum_cfv[J] += cbv[J]
    regrets[ia] = update_regret(regrets[ia], nbv - (cum_cfv[I] - cfv0[ia]), rule)
    clear_subtree(G, ia, sv)
    counters[N_EXPIRE] += 1


@njit(cache=True)
def interval_start(G, S, R, ia, rule, T):
    """Open a record at ``ia``; nested live records are closed first."""
    (actor, end, chance_reach, seq_i, seq_o, util_i, ia_start, n_act, parent_seq, ia_infoset,
     U_ia, L_inf, delta_inf, desc_ptr, desc, desc_ia_ptr, desc_ia, ia_child_ptr, ia_child,
     osb_ptr, osb, player_ia, opp_infosets, opp_topo, n_ia, opp, watch_lo, watch_hi, L_ia, U_inf) = G
    regrets, pruned, cum_cfv, opp_reach, sv, best, cbv = S
    banked, cfv0, t0, snap, xw, scratch, live_below, counters = R
    if live_below[ia] > 0:
        for j in range(desc_ia_ptr[ia], desc_ia_ptr[ia + 1]):
            if pruned[desc_ia[j]]:
                interval_catch_up(G, S, R, desc_ia[j], rule)
    I = ia_infoset[ia]
    for k in range(osb_ptr[ia], osb_ptr[ia + 1]):
        snap[k] = xw[osb[k]]
    cfv0[ia] = cum_cfv[I]
    t0[ia] = T
    banked[ia] = regrets[ia] + cum_cfv[I]
    pruned[ia] = True
    _mark_ancestors(ia, 1, parent_seq, ia_infoset, live_below, n_ia)
    counters[N_START] += 1


@njit(cache=True)
def _inside_pruned(I, parent_seq, ia_infoset, pruned, n_ia):
    seq = parent_seq[I]
    while seq < n_ia:
        if pruned[seq]:
            return True
        seq = parent_seq[ia_infoset[seq]]
    return False


@njit(cache=True)
def interval_after(G, S, R, visited, nv, rule, T):
    (actor, end, chance_reach, seq_i, seq_o, util_i, ia_start, n_act, parent_seq, ia_infoset,
     U_ia, L_inf, delta_inf, desc_ptr, desc, desc_ia_ptr, desc_ia, ia_child_ptr, ia_child,
     osb_ptr, osb, player_ia, opp_infosets, opp_topo, n_ia, opp, watch_lo, watch_hi, L_ia, U_inf) = G
    regrets, pruned, cum_cfv, opp_reach, sv, best, cbv = S
    banked, cfv0, t0, snap, xw, scratch, live_below, counters = R
    for k in range(nv):
        I = visited[k]
        s = ia_start[I]
        for a in range(n_act[I]):
            e = s + a
            if pruned[e]:
                banked[e] += opp_reach[I] * U_ia[e]
                if banked[e] > cum_cfv[I]:
                    interval_catch_up(G, S, R, e, rule)
    for k in range(nv):
        I = visited[k]
        s = ia_start[I]
        n = n_act[I]
        pos = False
        for a in range(n):
            if not pruned[s + a] and regrets[s + a] > 0.0:
                pos = True
        if not pos or _inside_pruned(I, parent_seq, ia_infoset, pruned, n_ia):
            continue
        for a in range(n):
            e = s + a
            if not pruned[e] and regrets[e] < 0.0:
                interval_start(G, S, R, e, rule, T)


# ---------------------------------------------------------------------------
# total pruning
# ---------------------------------------------------------------------------


@njit(cache=True)
def opponent_average(G, cum_strategy, avg_live, beh, xbar):
    (actor, end, chance_reach, seq_i, seq_o, util_i, ia_start, n_act, parent_seq, ia_infoset,
     U_ia, L_inf, delta_inf, desc_ptr, desc, desc_ia_ptr, desc_ia, ia_child_ptr, ia_child,
     osb_ptr, osb, player_ia, opp_infosets, opp_topo, n_ia, opp, watch_lo, watch_hi, L_ia, U_inf) = G
    average_behavior(opp_infosets, ia_start, n_act, cum_strategy, avg_live, beh)
    realization(opp, opp_topo, ia_start, n_act, parent_seq, beh, n_ia, xbar)


@njit(cache=True)
def total_start(G, S, R, ia, nbv, hint, T):
    """Open a total record and free the regrets of (I,a) and D(I,a)."""
    (actor, end, chance_reach, seq_i, seq_o, util_i, ia_start, n_act, parent_seq, ia_infoset,
     U_ia, L_inf, delta_inf, desc_ptr, desc, desc_ia_ptr, desc_ia, ia_child_ptr, ia_child,
     osb_ptr, osb, player_ia, opp_infosets, opp_topo, n_ia, opp, watch_lo, watch_hi, L_ia, U_inf) = G
    (regrets, regret_live, pruned, cum_cfv, cum_strategy, avg_live, opp_reach, visits,
     sv, best, cbv, beh, xbar) = S
    t0, first, hint_a, banked, avg_freed, last_check, freed_at, shortfall, counters = R
    for j in range(desc_ia_ptr[ia], desc_ia_ptr[ia + 1]):
        e = desc_ia[j]
        if pruned[e]:
            pruned[e] = False
            avg_freed[e] = False
            counters[N_SUBSUMED] += 1
        if regret_live[e]:
            regret_live[e] = False
            regrets[e] = 0.0
            counters[N_REGRET_FREED] += 1
    if regret_live[ia]:
        regret_live[ia] = False
        regrets[ia] = 0.0
        counters[N_REGRET_FREED] += 1
    pruned[ia] = True
    avg_freed[ia] = False
    t0[ia] = T
    first[ia] = T
    hint_a[ia] = hint
    banked[ia] = T * nbv
    counters[N_START] += 1


@njit(cache=True)
def total_resume(G, S, R, ia, nbv, T):
    """Reinstate regrets as if the just-computed CBR (in ``sv``/``cbv``) had
    been played every iteration; reallocate freed storage."""
    (actor, end, chance_reach, seq_i, seq_o, util_i, ia_start, n_act, parent_seq, ia_infoset,
     U_ia, L_inf, delta_inf, desc_ptr, desc, desc_ia_ptr, desc_ia, ia_child_ptr, ia_child,
     osb_ptr, osb, player_ia, opp_infosets, opp_topo, n_ia, opp, watch_lo, watch_hi, L_ia, U_inf) = G
    (regrets, regret_live, pruned, cum_cfv, cum_strategy, avg_live, opp_reach, visits,
     sv, best, cbv, beh, xbar) = S
    t0, first, hint_a, banked, avg_freed, last_check, freed_at, shortfall, counters = R
    I = ia_infoset[ia]
    pruned[ia] = False
    avg_freed[ia] = False
    for j in range(desc_ia_ptr[ia], desc_ia_ptr[ia + 1]):
        e = desc_ia[j]
        shortfall[e] = 0.0
        regrets[e] = T * (sv[e] - cbv[ia_infoset[e]])
        if not regret_live[e]:
            regret_live[e] = True
            counters[N_REGRET_FREED] -= 1
        if not avg_live[e]:
            avg_live[e] = True
            cum_strategy[e] = 0.0
            counters[N_AVG_FREED] -= 1
    for j in range(desc_ptr[ia], desc_ptr[ia + 1]):
        J = desc[j]
        cum_cfv[J] = T * cbv[J]
    regrets[ia] = T * nbv - cum_cfv[I]
    if not regret_live[ia]:
        regret_live[ia] = True
        counters[N_REGRET_FREED] -= 1
    if not avg_live[ia]:
        avg_live[ia] = True
        cum_strategy[ia] = 0.0
        counters[N_AVG_FREED] -= 1
    counters[N_RESUME] += 1


@njit(cache=True)
def total_reclaim(G, S, R, ia, T):
    """Free average-strategy storage of (I,a) and D(I,a)."""
    desc_ia_ptr = G[15]
    desc_ia = G[16]
    (regrets, regret_live, pruned, cum_cfv, cum_strategy, avg_live, opp_reach, visits,
     sv, best, cbv, beh, xbar) = S
    t0, first, hint_a, banked, avg_freed, last_check, freed_at, shortfall, counters = R
    for j in range(desc_ia_ptr[ia], desc_ia_ptr[ia + 1]):
        e = desc_ia[j]
        if avg_live[e]:
            avg_live[e] = False
            cum_strategy[e] = 0.0
            counters[N_AVG_FREED] += 1
    if avg_live[ia]:
        avg_live[ia] = False
        cum_strategy[ia] = 0.0
        counters[N_AVG_FREED] += 1
    avg_freed[ia] = True
    freed_at[ia] = T


@njit(cache=True)
def _weight(t, plus):
    return t * (t + 1) / 2.0 if plus else float(t)


@njit(cache=True)
def total_after(G, S, R, visited, nv, T, kappa, every, C, plus, safety_checks, tol,
                skip_proven):
    """One player's end-of-iteration pass: extend or expire records, reclaim
    average storage, then test new candidates."""
    (actor, end, chance_reach, seq_i, seq_o, util_i, ia_start, n_act, parent_seq, ia_infoset,
     U_ia, L_inf, delta_inf, desc_ptr, desc, desc_ia_ptr, desc_ia, ia_child_ptr, ia_child,
     osb_ptr, osb, player_ia, opp_infosets, opp_topo, n_ia, opp, watch_lo, watch_hi, L_ia, U_inf) = G
    (regrets, regret_live, pruned, cum_cfv, cum_strategy, avg_live, opp_reach, visits,
     sv, best, cbv, beh, xbar) = S
    t0, first, hint_a, banked, avg_freed, last_check, freed_at, shortfall, counters = R
    fresh = False

    for k in range(nv):
        I = visited[k]
        s = ia_start[I]
        for a in range(n_act[I]):
            e = s + a
            if not pruned[e]:
                continue
            banked[e] += opp_reach[I] * U_ia[e]
            if banked[e] <= cum_cfv[I]:
                continue
            counters[N_EXPIRE] += 1
            if safety_checks:
                counters[N_RESUME_CHECK] += 1
                if T <= t0[e] + hint_a[e]:
                    counters[N_RESUME_BAD] += 1
            if not fresh:
                opponent_average(G, cum_strategy, avg_live, beh, xbar)
                fresh = True
            nbv = subtree_cbr(G, e, xbar, sv, best, cbv, counters, True)
            h = prune_horizon(cum_cfv[I], T, nbv, U_ia[e], L_inf[I])
            if h >= 1:
                t0[e] = T
                hint_a[e] = h
                banked[e] = T * nbv
                counters[N_REPRUNE] += 1
            else:
                total_resume(G, S, R, e, nbv, T)
                if skip_proven:
                    shortfall[e] = T * nbv - cum_cfv[I] + U_ia[e] - L_inf[I]
            clear_subtree(G, e, sv)

    if C > 0.0:
        thr = C / np.sqrt(T)
        W = _weight(T, plus)
        for k in range(player_ia.shape[0]):
            e = player_ia[k]
            # realized average reach of (I,a); never above the bound W(first)/W(T)
            if pruned[e] and not avg_freed[e] and avg_live[e] and cum_strategy[e] / W <= thr:
                total_reclaim(G, S, R, e, T)

    if kappa >= 0.0:
        sq = np.sqrt(T)
        for k in range(nv):
            I = visited[k]
            s = ia_start[I]
            n = n_act[I]
            active = 0
            for a in range(n):
                if not pruned[s + a]:
                    active += 1
            thr = -kappa * delta_inf[I] * sq
            for a in range(n):
                e = s + a
                # after a failed check the horizon's numerator must grow by the
                # recorded shortfall; it grows by at most reach * (U(I) - L(I,a)) per iteration
                if shortfall[e] > 0.0:
                    shortfall[e] -= opp_reach[I] * (U_inf[I] - L_ia[e])
            for a in range(n):
                if active < 2:
                    break
                e = s + a
                if pruned[e] or not regret_live[e] or regrets[e] > thr or shortfall[e] > 0.0:
                    continue
                if visits[I] - last_check[e] < every:
                    continue
                last_check[e] = visits[I]
                counters[N_CHECK] += 1
                if not fresh:
                    opponent_average(G, cum_strategy, avg_live, beh, xbar)
                    fresh = True
                nbv = subtree_cbr(G, e, xbar, sv, best, cbv, counters, True)
                clear_subtree(G, e, sv)
                h = prune_horizon(cum_cfv[I], T, nbv, U_ia[e], L_inf[I])
                if h >= 1:
                    total_start(G, S, R, e, nbv, h, T)
                    active -= 1
                elif skip_proven:
                    shortfall[e] = T * nbv - cum_cfv[I] + U_ia[e] - L_inf[I]

    if safety_checks:
        for k in range(player_ia.shape[0]):
            e = player_ia[k]
            if not pruned[e] or T != t0[e] + hint_a[e]:
                continue
            if not fresh:
                opponent_average(G, cum_strategy, avg_live, beh, xbar)
                fresh = True
            counters[N_HORIZON] += 1
            nbv = subtree_cbr(G, e, xbar, sv, best, cbv, counters, False)
            clear_subtree(G, e, sv)
            rhs = cum_cfv[ia_infoset[e]]
            if T * nbv > rhs + tol * max(1.0, abs(rhs)):
                counters[N_HORIZON_BAD] += 1
