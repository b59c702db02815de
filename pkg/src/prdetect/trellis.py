"""Log-domain trellis kernels shared by the full-state and DFE-3 detectors.

All kernels take a branch-metric tensor ``gamma[t, s_prev, s_next]`` holding
log-domain metrics (``-inf`` marks a blocked transition). State time ``t``
runs over ``0..N``; transition ``t -> t+1`` consumes observation ``t``.

Each kernel also tallies compare-and-select (CS) operands: ``cs[0]`` counts
every operand as written in the recursions, ``cs[1]`` skips transitions that
are blocked.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NEG_INF = -np.inf


@njit(cache=True)
def _combine(vals, maxlog):
    m = NEG_INF
    for v in vals:
        if v > m:
            m = v
    if maxlog or m == NEG_INF:
        return m
    acc = 0.0
    for v in vals:
        acc += np.exp(v - m)
    return m + np.log(acc)


@njit(cache=True)
def bcjr_kernel(gamma, alpha0, betaN, maxlog):
    """Forward/backward recursion.

    Returns ``alpha (N+1, S)``, ``beta (N+1, S)``, ``app (N+1, S)`` and CS tallies.
    ``app[t, s]`` is the (unnormalized) log of ``p(state_t = s, y)``; for
    ``t < N`` it is combined over outgoing branches, for ``t = N`` it is
    ``alpha[N] + beta[N]``. Rows are shifted by per-step constants, which
    cancel in any ratio taken within a row.
    """
    n, S, _ = gamma.shape
    alpha = np.empty((n + 1, S))
    beta = np.empty((n + 1, S))
    app = np.empty((n + 1, S))
    cs = np.zeros(2, dtype=np.int64)
    tmp = np.empty(S)
    alpha[0] = alpha0
    for t in range(n):
        for s in range(S):
            k = 0
            for sp in range(S):
                g = gamma[t, sp, s]
                tmp[sp] = alpha[t, sp] + g
                if g > NEG_INF:
                    k += 1
            alpha[t + 1, s] = _combine(tmp, maxlog)
            cs[0] += S
            cs[1] += k
        mx = alpha[t + 1].max()
        if mx > NEG_INF:
            alpha[t + 1] -= mx
    beta[n] = betaN
    for t in range(n - 1, -1, -1):
        for sp in range(S):
            k = 0
            for s in range(S):
                g = gamma[t, sp, s]
                tmp[s] = g + beta[t + 1, s]
                if g > NEG_INF:
                    k += 1
            beta[t, sp] = _combine(tmp, maxlog)
            cs[0] += S
            cs[1] += k
        mx = beta[t].max()
        if mx > NEG_INF:
            beta[t] -= mx
    for t in range(n):
        for sp in range(S):
            k = 0
            for s in range(S):
                g = gamma[t, sp, s]
                tmp[s] = alpha[t, sp] + g + beta[t + 1, s]
                if g > NEG_INF:
                    k += 1
            app[t, sp] = _combine(tmp, maxlog)
            cs[0] += S
            cs[1] += k
    for s in range(S):
        app[n, s] = alpha[n, s] + beta[n, s]
    return alpha, beta, app, cs


@njit(cache=True)
def viterbi_kernel(gamma, xi0, term):
    """Minimum-metric path; ties resolve to the lower state index."""
    n, S, _ = gamma.shape
    xi = xi0.copy()
    new = np.empty(S)
    surv = np.zeros((n + 1, S), dtype=np.int64)
    for t in range(n):
        for s in range(S):
            best = np.inf
            arg = 0
            for sp in range(S):
                v = xi[sp] - gamma[t, sp, s]
                if v < best:
                    best = v
                    arg = sp
            new[s] = best
            surv[t + 1, s] = arg
        mn = new.min()
        if mn < np.inf:
            new -= mn
        xi[:] = new
    path = np.empty(n + 1, dtype=np.int64)
    best = np.inf
    arg = 0
    for s in range(S):
        v = xi[s] + term[s]
        if v < best:
            best = v
            arg = s
    path[n] = arg
    for t in range(n, 0, -1):
        path[t - 1] = surv[t, path[t]]
    return path


@njit(cache=True)
def sova_kernel(gamma, xi0, term, delta):
    """Soft-output Viterbi with per-terminating-state reliability registers.

    ``reg[s, j, s2]`` is the metric excess of the best path that ends in
    state ``s`` at the current time and passes ``s2`` at time ``j``, relative
    to the survivor of ``s``. Each step seeds the newest entry with the
    path-metric differences and refreshes the ``delta`` older entries with
    ``min_s1 reg[s1, j, s2] + diff(s1, s)``. Entries leaving the window are
    frozen per terminating state and read back along the final survivor.
    At the end all terminating states are merged with the ``term`` costs.

    Returns
    -------
    rel : (N+1, S) float
        Metric excess per state time, zero on the final survivor.
    path : (N+1,) int
        Final survivor state sequence.
    cs : (2,) int
        CS tallies.
    """
    n, S, _ = gamma.shape
    W = delta + 1
    xi = xi0.copy()
    new_xi = np.empty(S)
    reg = np.full((S, W, S), np.inf)
    new_reg = np.full((S, W, S), np.inf)
    frozen = np.full((n + 1, S, S), np.inf)
    surv = np.zeros((n + 1, S), dtype=np.int64)
    diff = np.empty((S, S))
    cs = np.zeros(2, dtype=np.int64)
    for t in range(n):
        jx = t - 1 - delta
        if jx >= 0:
            for s in range(S):
                for s2 in range(S):
                    frozen[jx, s, s2] = reg[s, jx % W, s2]
        j0 = t - delta
        if j0 < 0:
            j0 = 0
        n_old = t - j0
        for s in range(S):
            best = np.inf
            arg = 0
            k = 0
            for sp in range(S):
                g = gamma[t, sp, s]
                if g > NEG_INF:
                    k += 1
                v = xi[sp] - g
                if v < best:
                    best = v
                    arg = sp
            new_xi[s] = best
            surv[t + 1, s] = arg
            cs[0] += S + n_old * S * S
            if k > 0:
                cs[1] += k + n_old * S * S
            if best == np.inf:
                for sp in range(S):
                    diff[sp, s] = np.inf
                for j in range(W):
                    for s2 in range(S):
                        new_reg[s, j, s2] = np.inf
                continue
            for sp in range(S):
                v = xi[sp] - gamma[t, sp, s]
                diff[sp, s] = v - best if v < np.inf else np.inf
            for s2 in range(S):
                new_reg[s, t % W, s2] = diff[s2, s]
            for j in range(j0, t):
                slot = j % W
                for s2 in range(S):
                    m = np.inf
                    for sp in range(S):
                        v = reg[sp, slot, s2] + diff[sp, s]
                        if v < m:
                            m = v
                    new_reg[s, slot, s2] = m
        mn = new_xi.min()
        for s in range(S):
            xi[s] = new_xi[s] - mn if mn < np.inf else new_xi[s]
        tmp = reg
        reg = new_reg
        new_reg = tmp

    tot = np.empty(S)
    for s in range(S):
        tot[s] = xi[s] + term[s]
    star = 0
    for s in range(1, S):
        if tot[s] < tot[star]:
            star = s
    cs[0] += S
    cs[1] += S
    ref = tot[star]
    path = np.empty(n + 1, dtype=np.int64)
    path[n] = star
    for t in range(n, 0, -1):
        path[t - 1] = surv[t, path[t]]

    rel = np.empty((n + 1, S))
    for s in range(S):
        rel[n, s] = tot[s] - ref if tot[s] < np.inf else np.inf
    j0 = n - 1 - delta
    if j0 < 0:
        j0 = 0
    for j in range(j0, n):
        slot = j % W
        for s2 in range(S):
            m = np.inf
            for s in range(S):
                v = reg[s, slot, s2] + tot[s]
                if v < m:
                    m = v
            rel[j, s2] = m - ref if m < np.inf else np.inf
            cs[0] += S
            cs[1] += S
    for j in range(0, j0):
        s = path[j + delta + 1]
        for s2 in range(S):
            rel[j, s2] = frozen[j, s, s2]
    return rel, path, cs
