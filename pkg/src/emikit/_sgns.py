"""Numba kernels for skip-gram negative-sampling training.

The RNG is an inlined splitmix64 stream so that single-worker runs are
bitwise reproducible for a given seed; numpy's Generator cannot be used
inside nogil kernels. All randomness (subsampling, window shrink,
negative draws) consumes this one stream in a fixed order.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
GOLDEN = U64(0x9E3779B97F4A7C15)
MIX1 = U64(0xBF58476D1CE4E5B9)
MIX2 = U64(0x94D049BB133111EB)
INV53 = 1.0 / 9007199254740992.0


@njit(nogil=True, inline="always")
def _next_u64(state):
    state = state + GOLDEN
    z = state
    z = (z ^ (z >> U64(30))) * MIX1
    z = (z ^ (z >> U64(27))) * MIX2
    z = z ^ (z >> U64(31))
    return state, z


@njit(nogil=True, inline="always")
def _next_f64(state):
    state, z = _next_u64(state)
    return state, (z >> U64(11)) * INV53


@njit(nogil=True, inline="always")
def _cdf_search(cdf, u):
    lo = 0
    hi = cdf.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) >> 1
        if u < cdf[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit(cache=True, nogil=True)
def sample_negatives(cdf, n, state):
    """Draw n indices from the sampling CDF with the training RNG."""
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        state, u = _next_f64(state)
        out[i] = _cdf_search(cdf, u)
    return out


@njit(cache=True, nogil=True)
def uniform_stream(n, state):
    """Expose the raw uniform stream for distribution tests."""
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        state, u = _next_f64(state)
        out[i] = u
    return out


@njit(cache=True, nogil=True)
def _train_epoch(
    tokens,
    offsets,
    sent_lo,
    sent_hi,
    maxlen,
    w_in,
    w_out,
    cdf,
    keep_prob,
    window,
    k_neg,
    alpha0,
    alpha_min,
    sched_total,
    sched_done,
    state,
):
    """One epoch over sentences [sent_lo, sent_hi).

    Returns (rng state, raw in-vocab tokens scanned). The learning rate
    follows the global schedule: alpha0 * (1 - progress), floored at
    alpha_min, where progress counts raw tokens so it does not depend on
    the subsampling draws.
    """
    d = w_in.shape[1]
    wu = U64(window)
    neu = np.empty(d, dtype=np.float32)
    kept = np.empty(maxlen, dtype=np.int32)
    processed = 0
    for s in range(sent_lo, sent_hi):
        start = offsets[s]
        end = offsets[s + 1]
        n_raw = end - start
        if n_raw == 0:
            continue
        progress = (sched_done + processed) / sched_total
        alpha = alpha0 * (1.0 - progress)
        if alpha < alpha_min:
            alpha = alpha_min
        # frequent-word subsampling; one draw per token keeps the stream
        # aligned regardless of keep probabilities
        m = 0
        for i in range(start, end):
            wid = tokens[i]
            state, u = _next_f64(state)
            if u < keep_prob[wid]:
                kept[m] = wid
                m += 1
        processed += n_raw
        if m < 2:
            continue
        for pos in range(m):
            c = kept[pos]
            state, z = _next_u64(state)
            b = 1 + int(z % wu)
            lo = pos - b
            if lo < 0:
                lo = 0
            hi = pos + b
            if hi > m - 1:
                hi = m - 1
            for cpos in range(lo, hi + 1):
                if cpos == pos:
                    continue
                o = kept[cpos]
                for j in range(d):
                    neu[j] = np.float32(0.0)
                for nidx in range(k_neg + 1):
                    if nidx == 0:
                        target = o
                        label = 1.0
                    else:
                        state, u = _next_f64(state)
                        target = _cdf_search(cdf, u)
                        # drawing the positive as a negative is skipped,
                        # not redrawn, so the draw count stays fixed
                        if target == o:
                            continue
                        label = 0.0
                    f = 0.0
                    for j in range(d):
                        f += w_in[c, j] * w_out[target, j]
                    if f > 35.0:
                        sig = 1.0
                    elif f < -35.0:
                        sig = 0.0
                    else:
                        sig = 1.0 / (1.0 + np.exp(-f))
                    g = np.float32((label - sig) * alpha)
                    for j in range(d):
                        neu[j] += g * w_out[target, j]
                        w_out[target, j] += g * w_in[c, j]
                for j in range(d):
                    w_in[c, j] += neu[j]
    return state, processed
