"""
Compiled inner loops for the partition-function recursion.

All kernels work in square coordinates ``(t1, t2)`` and sweep the lattice by
anti-diagonals (levels ``t = t1 + t2``). A node is reached from
``(t1-1, t2)`` and ``(t1, t2-1)`` on level ``t-1`` and from ``(t1-1, t2-1)``
on level ``t-2``.
"""

import math

import numba as nb
import numpy as np

# a restricted level mass below this (relative to the level maximum) is
# handed back to the exact log-domain route
MASS_FLOOR = 1e-200
# values are flushed to zero below this to stay out of denormals
_FLUSH = 1e-300


@nb.njit(cache=True, nogil=True)
def log_field(E, inv_T, a1, a2):
    """Log partition function of every node reachable from ``(a1, a2)``.

    Unreachable nodes hold ``-inf``.
    """
    N = E.shape[0]
    lw = np.full((N, N), -np.inf)
    lw[a1, a2] = -E[a1, a2] * inv_T
    for t in range(a1 + a2 + 1, 2 * N - 1):
        lo = max(a1, t - (N - 1))
        hi = min(N - 1, t - a2)
        for t1 in range(lo, hi + 1):
            t2 = t - t1
            p = -np.inf
            q = -np.inf
            r = -np.inf
            if t1 > a1:
                p = lw[t1 - 1, t2]
                if t2 > a2:
                    r = lw[t1 - 1, t2 - 1]
            if t2 > a2:
                q = lw[t1, t2 - 1]
            m = max(p, max(q, r))
            s = math.exp(p - m) + math.exp(q - m) + math.exp(r - m)
            lw[t1, t2] = m + math.log(s) - E[t1, t2] * inv_T
    return lw


@nb.njit(cache=True, nogil=True, error_model="numpy")
def restricted_energy_sums(B, E, origins, cuts):
    """Per-pair sums of level-wise restricted mean energies.

    Propagates the Boltzmann weights ``B = exp(-E/T)`` from every origin at
    once. Each level is stored in its own unit (the previous level's
    maximum) so values stay near one. For origin ``k`` and cut ``c`` (an end
    node ``(u1, u2)``), level ``t`` in ``[t_origin(k), u1 + u2]`` contributes
    the mean of ``E`` under the forward occupancy restricted to
    ``t1 <= u1, t2 <= u2``.

    Returns ``(acc, bad)``; ``bad[k, c]`` marks pairs whose restricted mass
    fell under ``MASS_FLOOR`` somewhere and must be recomputed exactly.
    """
    N = B.shape[0]
    K = origins.shape[0]
    C = cuts.shape[0]
    acc = np.zeros((C, K))
    bad = np.zeros((C, K), dtype=np.bool_)

    t_o = np.empty(K, dtype=np.int64)
    for k in range(K):
        t_o[k] = origins[k, 0] + origins[k, 1]
    t_c = np.empty(C, dtype=np.int64)
    for c in range(C):
        t_c[c] = cuts[c, 0] + cuts[c, 1]
    tmin = t_o.min()
    tmax = t_c.max()

    prev1 = np.zeros((N, K))
    prev2 = np.zeros((N, K))
    cur = np.zeros((N, K))
    # log unit of each buffered level and the maximum it holds
    U1 = np.zeros(K)
    U2 = np.zeros(K)
    M1 = np.zeros(K)
    M2 = np.zeros(K)
    U0 = np.zeros(K)
    M0 = np.zeros(K)
    f1 = np.zeros(K)
    f2 = np.zeros(K)

    mid_g = np.zeros(K)
    mid_e = np.zeros(K)
    edge = N + 1
    left_g = np.zeros((edge, K))
    left_e = np.zeros((edge, K))
    right_g = np.zeros((edge, K))
    right_e = np.zeros((edge, K))
    pL = np.zeros(C, dtype=np.int64)
    qR = np.zeros(C, dtype=np.int64)

    for t in range(tmin, tmax + 1):
        lo = max(0, t - N + 1)
        hi = min(N - 1, t)
        lo1 = max(0, t - N)
        hi1 = min(N - 1, t - 1)
        lo2 = max(0, t - N - 1)
        hi2 = min(N - 1, t - 2)

        # new unit: previous level's unit times its maximum
        for k in range(K):
            if M1[k] > 0.0:
                U0[k] = U1[k] + math.log(M1[k])
                f1[k] = 1.0 / M1[k]
                f2[k] = math.exp(U2[k] - U0[k]) if M2[k] > 0.0 else 0.0
            else:
                U0[k] = 0.0
                f1[k] = 0.0
                f2[k] = 0.0
            M0[k] = 0.0
            mid_g[k] = 0.0
            mid_e[k] = 0.0

        # trimming window of each cut on this level, in t1
        P = lo
        Q = hi
        pmin = hi
        qmax = lo
        n_active = 0
        for c in range(C):
            if t > t_c[c]:
                continue
            n_active += 1
            p = max(lo, t - cuts[c, 1])
            q = min(hi, cuts[c, 0])
            pL[c] = p
            qR[c] = q
            if p > P:
                P = p
            if q < Q:
                Q = q
            if p < pmin:
                pmin = p
            if q > qmax:
                qmax = q
        split = P <= Q

        for t1 in range(lo, hi + 1):
            t2 = t - t1
            b = B[t1, t2]
            e = E[t1, t2]
            # branch-free predecessor selection keeps the inner loop vectorizable
            ch = 1.0 if (t1 - 1 >= lo1 and t1 - 1 <= hi1) else 0.0
            cv = 1.0 if (t1 >= lo1 and t1 <= hi1) else 0.0
            cd = 1.0 if (t1 - 1 >= lo2 and t1 - 1 <= hi2) else 0.0
            cm = 1.0 if (split and t1 >= P and t1 <= Q) else 0.0
            ih = max(t1 - 1, 0)
            row = cur[t1]
            rh = prev1[ih]
            rv = prev1[t1]
            rd = prev2[ih]
            for k in range(K):
                v = ((ch * rh[k] + cv * rv[k]) * f1[k] + cd * f2[k] * rd[k]) * b
                v = v if v >= _FLUSH else 0.0
                row[k] = v
                M0[k] = max(M0[k], v)
                mid_g[k] += cm * v
                mid_e[k] += cm * v * e

        for k in range(K):
            if t_o[k] == t:
                # a fresh origin has no predecessors: its weight is its own factor
                a1 = origins[k, 0]
                v = B[a1, t - a1]
                cur[a1, k] = v
                M0[k] = v
                U0[k] = 0.0
                if split and a1 >= P and a1 <= Q:
                    mid_g[k] = v
                    mid_e[k] = v * E[a1, t - a1]

        if n_active > 0:
            if split:
                # left_*[j] accumulates nodes P-j .. P-1, right_*[j] nodes Q+1 .. Q+j
                for k in range(K):
                    left_g[0, k] = 0.0
                    left_e[0, k] = 0.0
                    right_g[0, k] = 0.0
                    right_e[0, k] = 0.0
                for j in range(1, P - pmin + 1):
                    t1 = P - j
                    e = E[t1, t - t1]
                    for k in range(K):
                        g = cur[t1, k]
                        left_g[j, k] = left_g[j - 1, k] + g
                        left_e[j, k] = left_e[j - 1, k] + g * e
                for j in range(1, qmax - Q + 1):
                    t1 = Q + j
                    e = E[t1, t - t1]
                    for k in range(K):
                        g = cur[t1, k]
                        right_g[j, k] = right_g[j - 1, k] + g
                        right_e[j, k] = right_e[j - 1, k] + g * e
                for c in range(C):
                    if t > t_c[c]:
                        continue
                    lg = left_g[P - pL[c]]
                    le = left_e[P - pL[c]]
                    rg = right_g[qR[c] - Q]
                    re = right_e[qR[c] - Q]
                    ac = acc[c]
                    bc = bad[c]
                    for k in range(K):
                        sg = lg[k] + mid_g[k] + rg[k]
                        # origins not yet emitted have zero mass and no cone here
                        live = t >= t_o[k]
                        ok = sg > MASS_FLOOR * M0[k]
                        r = (le[k] + mid_e[k] + re[k]) / (sg if ok else 1.0)
                        ac[k] += r if (ok and live) else 0.0
                        bc[k] = bc[k] or (live and not ok)
            else:
                for c in range(C):
                    if t > t_c[c]:
                        continue
                    for k in range(K):
                        if t < t_o[k]:
                            continue
                        sg = 0.0
                        se = 0.0
                        for t1 in range(pL[c], qR[c] + 1):
                            g = cur[t1, k]
                            sg += g
                            se += g * E[t1, t - t1]
                        if sg > MASS_FLOOR * M0[k]:
                            acc[c, k] += se / sg
                        else:
                            bad[c, k] = True

        tmp = prev2
        prev2 = prev1
        prev1 = cur
        cur = tmp
        for k in range(K):
            U2[k] = U1[k]
            M2[k] = M1[k]
            U1[k] = U0[k]
            M1[k] = M0[k]

    return acc.T.copy(), bad.T.copy()


@nb.njit(cache=True)
def level_sums(a):
    """Sum of ``a[t1, t2]`` over each level ``t1 + t2``.

    Each anti-diagonal is added as pairs of mirrored entries, outermost
    first, so a level and its reversed copy give bit-identical totals.
    """
    N = a.shape[0]
    out = np.zeros(2 * N - 1)
    for t in range(2 * N - 1):
        lo = max(0, t - N + 1)
        hi = min(N - 1, t)
        s = 0.0
        i = lo
        j = hi
        while i < j:
            s += a[i, t - i] + a[j, t - j]
            i += 1
            j -= 1
        if i == j:
            s += a[i, t - i]
        out[t] = s
    return out
