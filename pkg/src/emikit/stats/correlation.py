"""Pearson correlation with Fisher CIs and lagged cross-correlation."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from ..errors import DataError, NumericalError


@dataclass(frozen=True)
class PearsonResult:
    r: float
    ci_low: float
    ci_high: float
    p_value: float
    n: int


def pearson_ci(x, y, level: float = 0.95) -> PearsonResult:
    """Pearson r with a Fisher-z confidence interval and a t-test p-value."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DataError("samples must have equal length")
    keep = np.isfinite(x) & np.isfinite(y)
    x, y = x[keep], y[keep]
    n = x.shape[0]
    if n < 4:
        raise DataError(f"Pearson CI needs at least 4 paired observations, got {n}")
    if np.std(x) == 0.0 or np.std(y) == 0.0:
        raise NumericalError("correlation undefined for a constant sample")
    r = float(np.corrcoef(x, y)[0, 1])
    r = max(-1.0, min(1.0, r))
    if 1.0 - abs(r) < 1e-12:
        # exact linear data rounds to just under 1; snap so the
        # degenerate-interval branch below is reachable
        r = math.copysign(1.0, r)

    zcrit = float(sps.norm.ppf((1.0 + level) / 2.0))
    se = 1.0 / math.sqrt(n - 3)
    if abs(r) == 1.0:
        ci_low = ci_high = r
        p = 0.0
    else:
        z = math.atanh(r)
        ci_low = math.tanh(z - zcrit * se)
        ci_high = math.tanh(z + zcrit * se)
        t = r * math.sqrt((n - 2) / (1.0 - r * r))
        p = 2.0 * float(sps.t.sf(abs(t), n - 2))
    return PearsonResult(r=r, ci_low=ci_low, ci_high=ci_high, p_value=p, n=n)


@dataclass(frozen=True)
class LagCorrelation:
    lag: int
    n: int
    r: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class CrossCorrelation:
    lags: tuple[LagCorrelation, ...]
    peak_lag: int

    def at(self, lag: int) -> LagCorrelation:
        for lc in self.lags:
            if lc.lag == lag:
                return lc
        raise DataError(f"lag {lag} not present")


def lagged_crosscorr(x, y, max_lag: int, min_overlap: int = 4, level: float = 0.95) -> CrossCorrelation:
    """Correlate x_t against y_{t+lag} for lag in [-max_lag, max_lag].

    Lags whose overlapping window (after dropping missing pairs) is below
    min_overlap are omitted with a warning. The peak is the largest |r|,
    with ties broken toward the smaller |lag| (negative first).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DataError("series must share an index of equal length")
    if max_lag < 0:
        raise DataError("max_lag must be non-negative")
    n = x.shape[0]
    out: list[LagCorrelation] = []
    for lag in range(-max_lag, max_lag + 1):
        if lag >= 0:
            xs, ys = x[: n - lag] if lag else x, y[lag:]
        else:
            xs, ys = x[-lag:], y[: n + lag]
        keep = np.isfinite(xs) & np.isfinite(ys)
        xs, ys = xs[keep], ys[keep]
        if xs.shape[0] < max(min_overlap, 4):
            warnings.warn(f"lag {lag}: only {xs.shape[0]} overlapping points; omitted", stacklevel=2)
            continue
        try:
            res = pearson_ci(xs, ys, level=level)
        except NumericalError:
            warnings.warn(f"lag {lag}: constant overlap window; omitted", stacklevel=2)
            continue
        out.append(LagCorrelation(lag=lag, n=res.n, r=res.r, ci_low=res.ci_low, ci_high=res.ci_high))
    if not out:
        raise DataError("no lag had sufficient overlap")
    peak = max(out, key=lambda lc: (abs(lc.r), -abs(lc.lag), -lc.lag))
    return CrossCorrelation(lags=tuple(out), peak_lag=peak.lag)
