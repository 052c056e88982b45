"""Compiled hot loops.

These mirror the streaming class in detector.py operation for operation;
keep the arithmetic order in sync with glr_sq_scalefree / threshold there.
"""

from __future__ import annotations

import numpy as np
from numba import njit

SCAN_FULL = 0
SCAN_MULTISCALE = 1


@njit(cache=True, nogil=True)
def _offset_capacity(T, base):
    cap = 4
    v = 1.0
    while v < T + 1.0:
        cap += 2
        v *= base
    return cap


@njit(cache=True, nogil=True)
def scalar_run(x, sigma, alpha, scan_mode, base, const_gamma, init_pred):
    """Run the tracker over x; const_gamma = NaN selects the anytime threshold.

    Returns (predictions, statistics, thresholds, alarm_flags, restarts);
    statistics/thresholds are NaN at steps with no test.
    """
    T = x.shape[0]
    preds = np.empty(T)
    stats = np.full(T, np.nan)
    gammas = np.full(T, np.nan)
    alarms = np.zeros(T, dtype=np.bool_)
    restarts = np.empty(T, dtype=np.int64)

    G = np.empty(T + 1)
    G[0] = 0.0

    pi2 = np.pi * np.pi
    two_log_pi2_3 = 2.0 * np.log(pi2 / 3.0)
    use_const = not np.isnan(const_gamma)

    preds[0] = init_pred
    restarts[0] = 1
    G[1] = x[0]
    r = 1
    alpha_r = 6.0 * alpha / (pi2 * r * r)

    cand = np.empty(_offset_capacity(T, base), dtype=np.int64)

    for t in range(2, T + 1):
        if t >= r + 2:
            span = t - r
            if use_const:
                gam = const_gamma
            else:
                gam = np.sqrt(6.0 * np.log(span) + 2.0 * np.log(1.0 / alpha_r) + two_log_pi2_3)
            Gr = G[r - 1]
            Gt = G[t - 1]
            best_u = -1.0
            if scan_mode == SCAN_FULL:
                for k in range(r + 1, t):
                    s = k - r
                    q = t - k
                    left = G[k - 1] - Gr
                    right = Gt - G[k - 1]
                    num = q * left - s * right
                    u = (num * num) / (s * q * span)
                    if u > best_u:
                        best_u = u
            else:
                cnt = 0
                v = 1.0
                prev = 0
                while True:
                    d = int(np.ceil(v))
                    if d >= span:
                        break
                    if d != prev:
                        cand[cnt] = r + d
                        cand[cnt + 1] = t - d
                        cnt += 2
                        prev = d
                    v *= base
                sub = cand[:cnt]
                sub.sort()
                prev_k = -1
                for i in range(cnt):
                    k = sub[i]
                    if k == prev_k:
                        continue
                    prev_k = k
                    s = k - r
                    q = t - k
                    left = G[k - 1] - Gr
                    right = Gt - G[k - 1]
                    num = q * left - s * right
                    u = (num * num) / (s * q * span)
                    if u > best_u:
                        best_u = u
            C = np.sqrt(best_u) / sigma
            stats[t - 1] = C
            gammas[t - 1] = gam
            if C >= gam:
                alarms[t - 1] = True
                r = t - 1
                alpha_r = 6.0 * alpha / (pi2 * r * r)
        preds[t - 1] = (G[t - 1] - G[r - 1]) / (t - r)
        restarts[t - 1] = r
        G[t] = G[t - 1] + x[t - 1]

    return preds, stats, gammas, alarms, restarts
