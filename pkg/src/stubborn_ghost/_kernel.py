"""Numba kernel: explicit block tree under GHOST with a withholding attacker.

Node 0 is the current consensus block; live blocks ``1..nb`` are stored in
creation order so every parent index is smaller than its children's.
"""

import numpy as np
from numba import njit

OWNER_MP = 0
OWNER_HP = 1

# stats layout
S_MAIN_MP, S_MAIN_HP, S_STALE_MP, S_STALE_HP, S_TOT_MP, S_TOT_HP = range(6)
S_EVENTS, S_ENVELOPE, S_OVERFLOW, S_PENDING_MP, S_PENDING_HP = range(6, 11)
N_STATS = 11

# visit histogram index: [delta + 2, hs, n, mark]
VISIT_DELTA = 512

# trace layout: pre(delta, hs, n, mark), kind, in_private, same_leaf, post(delta, hs, n, mark), published
TRACE_W = 12


@njit(cache=True)
def _compute(nb, par, own, pub, mt, trailing, w_all, w_vis, maxc, npch, sel, cand, info):
    """Weights, private root, HP candidate leaves; returns number of candidates.

    info: [pr, W_A, V_A, W_H, hs, c_candidate]
    """
    for i in range(nb + 1):
        w_all[i] = 0
        w_vis[i] = 0
        maxc[i] = 0
        npch[i] = 0
    for i in range(nb, 0, -1):
        w_all[i] += 1
        w_all[par[i]] += w_all[i]
        if pub[i]:
            w_vis[i] += 1
            w_vis[par[i]] += w_vis[i]
    pr = 0
    if mt != 0:
        pr = mt
        while par[pr] != 0:
            pr = par[pr]
    W_H = 0
    for i in range(1, nb + 1):
        if pub[i]:
            p = par[i]
            if p == 0 and trailing and i == pr:
                continue
            npch[p] += 1
            if w_vis[i] > maxc[p]:
                maxc[p] = w_vis[i]
            if p == 0 and i != pr and w_vis[i] > W_H:
                W_H = w_vis[i]
    hs = 0
    for i in range(1, nb + 1):
        if pub[i] and par[i] == 0 and i != pr and w_vis[i] == W_H and W_H > 0:
            hs += 1
    sel[0] = True
    ncand = 0
    for i in range(1, nb + 1):
        s = False
        if pub[i] and sel[par[i]] and w_vis[i] == maxc[par[i]]:
            if not (trailing and i == pr):
                s = True
        sel[i] = s
        if s and npch[i] == 0:
            cand[ncand] = i
            ncand += 1
    c_cand = 0
    if npch[0] == 0:
        cand[ncand] = 0
        ncand += 1
        c_cand = 1
    info[0] = pr
    info[1] = w_all[pr] if pr != 0 else 0
    info[2] = w_vis[pr] if pr != 0 else 0
    info[3] = W_H
    info[4] = hs
    info[5] = c_cand
    return ncand


@njit(cache=True)
def _root_of(par, i):
    while par[i] != 0:
        i = par[i]
    return i


@njit(cache=True)
def _publish(nb, par, pub, mt, k):
    """Publish up to ``k`` withheld blocks of the attacker chain (oldest first)."""
    if mt == 0:
        return 0
    # collect chain from tip to root
    chain = np.empty(nb + 1, np.int64)
    m = 0
    j = mt
    while j != 0:
        chain[m] = j
        m += 1
        j = par[j]
    done = 0
    for q in range(m - 1, -1, -1):
        j = chain[q]
        if not pub[j]:
            if done >= k:
                break
            pub[j] = True
            done += 1
    return done


@njit(cache=True)
def _withheld(par, pub, mt):
    c = 0
    j = mt
    while j != 0:
        if not pub[j]:
            c += 1
        j = par[j]
    return c


@njit(cache=True)
def _settle(nb, par, own, pub, r, keep, remap, stats):
    """Make ``r`` the consensus block; drop everything outside its subtree."""
    if own[r] == OWNER_MP:
        stats[S_MAIN_MP] += 1
    else:
        stats[S_MAIN_HP] += 1
    keep[0] = False
    for i in range(1, nb + 1):
        p = par[i]
        keep[i] = (p == r) or (p != 0 and keep[p])
    m = 0
    for i in range(1, nb + 1):
        if keep[i]:
            m += 1
            remap[i] = m
            p = par[i]
            par[m] = 0 if p == r else remap[p]
            own[m] = own[i]
            pub[m] = pub[i]
        elif i != r:
            remap[i] = 0
            if own[i] == OWNER_MP:
                stats[S_STALE_MP] += 1
            else:
                stats[S_STALE_HP] += 1
        else:
            remap[i] = 0
    return m


@njit(cache=True)
def _abstract(info, ncand, trailing, mt, out):
    pr = info[0]
    W_A, W_H, hs, c_cand = info[1], info[3], info[4], info[5]
    if pr == 0:
        d = 0 if c_cand else -W_H
        mark = 0
    else:
        d = W_A - W_H
        mark = 0
        if d == 0:
            mark = 2 if trailing else 1
    out[0] = d
    out[1] = hs
    out[2] = ncand
    out[3] = mark


@njit(cache=True)
def simulate_kernel(p_mp, p_one, L, F, T, honest, target_main, seed, cap,
                    visits, trace, max_events):
    np.random.seed(seed)
    par = np.zeros(cap + 1, np.int64)
    own = np.zeros(cap + 1, np.int8)
    pub = np.zeros(cap + 1, np.bool_)
    w_all = np.zeros(cap + 1, np.int64)
    w_vis = np.zeros(cap + 1, np.int64)
    maxc = np.zeros(cap + 1, np.int64)
    npch = np.zeros(cap + 1, np.int64)
    sel = np.zeros(cap + 1, np.bool_)
    keep = np.zeros(cap + 1, np.bool_)
    remap = np.zeros(cap + 1, np.int64)
    cand = np.zeros(cap + 2, np.int64)
    info = np.zeros(6, np.int64)
    st = np.zeros(4, np.int64)
    stats = np.zeros(N_STATS, np.int64)
    ntrace = trace.shape[0]

    nb = 0
    mt = 0
    trailing = False
    # p_mp, p_one: cumulative thresholds of the embedded event distribution
    ev = 0
    while stats[S_MAIN_MP] + stats[S_MAIN_HP] < target_main and ev < max_events:
        if nb + 3 > cap:
            stats[S_OVERFLOW] += 1
            break
        ncand = _compute(nb, par, own, pub, mt, trailing, w_all, w_vis, maxc, npch, sel,
                         cand, info)
        _abstract(info, ncand, trailing, mt, st)
        d_old = st[0]
        mark_old = st[3]
        if st[1] > 2 or st[2] > 3:
            stats[S_ENVELOPE] += 1
        di = st[0] + 2
        if 0 <= di < VISIT_DELTA:
            visits[di, st[1], st[2], st[3]] += 1
        has_private = info[0] != 0
        W_H_old = info[3]
        withheld = _withheld(par, pub, mt)
        if ev < ntrace:
            for q in range(4):
                trace[ev, q] = st[q]
        u = np.random.random()
        kind = 0
        in_private = 0
        same_leaf = 0
        published = 0
        if u < p_mp:
            nb += 1
            par[nb] = mt
            own[nb] = OWNER_MP
            pub[nb] = False
            stats[S_TOT_MP] += 1
            fresh = not has_private and info[5] == 1
            mt = nb
            if honest:
                published = _publish(nb, par, pub, mt, nb)
            elif fresh or d_old >= 1:
                pass
            elif d_old == 0 and mark_old == 2:
                published = _publish(nb, par, pub, mt, nb)
            elif d_old == 0:
                if F == 0:
                    published = _publish(nb, par, pub, mt, nb)
            elif d_old == -1:
                published = _publish(nb, par, pub, mt, nb)
                trailing = True
        else:
            kind = 1 if u < p_one else 2
            nnew = kind
            first_leaf = -1
            for b in range(nnew):
                leaf = cand[np.random.randint(ncand)]
                if b == 0:
                    first_leaf = leaf
                elif leaf == first_leaf:
                    same_leaf = 1
                nb += 1
                par[nb] = leaf
                own[nb] = OWNER_HP
                pub[nb] = True
                stats[S_TOT_HP] += 1
                if has_private and leaf != 0 and _root_of(par, leaf) == info[0]:
                    in_private += 1
            if has_private:
                _compute(nb, par, own, pub, mt, trailing, w_all, w_vis, maxc, npch, sel,
                         cand, info)
                W_H_new = info[3]
                if in_private > 0:
                    if d_old >= 1:
                        if d_old == 2 and L == 0:
                            published = _publish(nb, par, pub, mt, nb)
                        else:
                            published = _publish(nb, par, pub, mt, 1)
                else:
                    i_gain = W_H_new - W_H_old
                    d = d_old - i_gain
                    if d >= 2 or (d == 1 and L == 1):
                        published = _publish(nb, par, pub, mt, W_H_new - info[2])
                    elif d == 1 or d == 0:
                        published = _publish(nb, par, pub, mt, nb)
                    elif d == -1 and T == 1:
                        published = _publish(nb, par, pub, mt, nb)
                        trailing = True
                    else:
                        mt = 0
                        trailing = False
        # with nothing withheld the attacker follows honest blocks built on its tip
        if kind != 0 and mt != 0 and in_private > 0 and _withheld(par, pub, mt) == 0:
            ncand = _compute(nb, par, own, pub, mt, trailing, w_all, w_vis, maxc, npch,
                             sel, cand, info)
            m = 0
            for q in range(ncand):
                j = cand[q]
                while j != 0 and j != mt:
                    j = par[j]
                if j == mt and cand[q] != mt:
                    cand[m] = cand[q]
                    m += 1
            if m > 0:
                mt = cand[np.random.randint(m)]
        if trailing:
            _compute(nb, par, own, pub, mt, trailing, w_all, w_vis, maxc, npch, sel, cand,
                     info)
            if info[0] == 0 or info[2] > info[3]:
                trailing = False
        # settlement and adoption
        while True:
            ncand = _compute(nb, par, own, pub, mt, trailing, w_all, w_vis, maxc, npch,
                             sel, cand, info)
            if info[5] == 1:
                break
            pr = info[0]
            # alive root children: private root and roots holding candidates
            r1 = 0
            r2 = 0
            if pr != 0:
                r1 = pr
            for q in range(ncand):
                r = _root_of(par, cand[q])
                if r1 == 0:
                    r1 = r
                elif r != r1:
                    r2 = r
            if r2 != 0 or r1 == 0:
                break
            if mt == r1:
                mt = 0
            elif mt != 0:
                pass
            nb = _settle(nb, par, own, pub, r1, keep, remap, stats)
            if mt != 0:
                mt = remap[mt]
        if mt == 0 and info[5] == 0:
            mt = cand[np.random.randint(ncand)]
            trailing = False
        if trailing:
            ncand = _compute(nb, par, own, pub, mt, trailing, w_all, w_vis, maxc, npch,
                             sel, cand, info)
            if info[0] == 0 or info[1] - info[3] >= 1:
                trailing = False
        if ev < ntrace:
            ncand = _compute(nb, par, own, pub, mt, trailing, w_all, w_vis, maxc, npch,
                             sel, cand, info)
            _abstract(info, ncand, trailing, mt, st)
            trace[ev, 4] = kind
            trace[ev, 5] = in_private
            trace[ev, 6] = same_leaf
            for q in range(4):
                trace[ev, 7 + q] = st[q]
            trace[ev, 11] = published
        ev += 1
    stats[S_EVENTS] = ev
    for i in range(1, nb + 1):
        if own[i] == OWNER_MP:
            stats[S_PENDING_MP] += 1
        else:
            stats[S_PENDING_HP] += 1
    return stats
