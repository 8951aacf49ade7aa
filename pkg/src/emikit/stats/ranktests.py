"""Mann-Whitney U and ROC-AUC, implemented independently of each other."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from ..errors import DataError

EXACT_MAX_N = 20


def _midranks(values: np.ndarray) -> np.ndarray:
    """Average ranks (1-based) with ties sharing their midrank."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    i = 0
    while i < values.shape[0]:
        j = i
        while j + 1 < values.shape[0] and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _exact_u_counts(n: int, m: int) -> np.ndarray:
    """Frequency of each U value over all C(n+m, n) tie-free arrangements."""
    total_u = n * m
    # counts[j][u]: placements of j first-sample items among the prefix
    counts = np.zeros((n + 1, total_u + 1), dtype=np.float64)
    counts[0, 0] = 1.0
    for i in range(1, n + m + 1):
        for j in range(min(i, n), 0, -1):
            preceding_b = i - j  # b-items before this a-item
            if preceding_b > m:
                continue
            shifted = np.zeros(total_u + 1)
            if preceding_b == 0:
                shifted = counts[j - 1].copy()
            else:
                shifted[preceding_b:] = counts[j - 1][:-preceding_b]
            counts[j] += shifted
    return counts[n]


@dataclass(frozen=True)
class MannWhitneyResult:
    u: float
    p_value: float
    median_a: float
    median_b: float
    method: str


def mann_whitney(a, b) -> MannWhitneyResult:
    """Two-sided Mann-Whitney test; U counts pairs where a beats b.

    Ties contribute half a win through midranks. Small tie-free samples
    (both sizes <= 20) get the exact permutation distribution; otherwise
    the normal approximation with tie correction and continuity correction.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise DataError("both samples must be nonempty")
    n, m = a.size, b.size
    combined = np.concatenate([a, b])
    ranks = _midranks(combined)
    rank_sum_a = float(ranks[:n].sum())
    u = rank_sum_a - n * (n + 1) / 2.0

    _, tie_counts = np.unique(combined, return_counts=True)
    has_ties = bool(np.any(tie_counts > 1))

    if not has_ties and n <= EXACT_MAX_N and m <= EXACT_MAX_N:
        counts = _exact_u_counts(n, m)
        total = counts.sum()
        u_int = int(round(u))
        lower = min(u_int, n * m - u_int)
        p = 2.0 * counts[: lower + 1].sum() / total
        p = min(1.0, p)
        method = "exact"
    else:
        mean = n * m / 2.0
        nm = n + m
        tie_term = float(np.sum(tie_counts ** 3 - tie_counts)) / (nm * (nm - 1.0))
        var = n * m / 12.0 * ((nm + 1.0) - tie_term)
        if var <= 0:
            p = 1.0
        else:
            z = (abs(u - mean) - 0.5) / np.sqrt(var)
            z = max(z, 0.0)
            p = 2.0 * float(sps.norm.sf(z))
            p = min(1.0, p)
        method = "normal"
    return MannWhitneyResult(
        u=u,
        p_value=p,
        median_a=float(np.median(a)),
        median_b=float(np.median(b)),
        method=method,
    )


def roc_auc(scores, labels) -> float:
    """Probability a positive outscores a negative; ties count one half.

    Computed from the rank sum of the positive class, without calling
    mann_whitney, so the two can cross-check each other.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape[0] != labels.shape[0]:
        raise DataError("scores and labels must align")
    pos = labels.astype(bool)
    n_pos = int(pos.sum())
    n_neg = int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise DataError("AUC needs both classes present")
    ranks = _midranks(scores)
    rank_sum_pos = float(ranks[pos].sum())
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
