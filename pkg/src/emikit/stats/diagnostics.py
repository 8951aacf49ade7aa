"""Unit-root, stationarity, and normality diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from ..errors import DataError, NumericalError
from ..resources import adf_pvalue_table, kpss_critical_values
from .regression import hac_bandwidth, vif

MIN_SERIES_LENGTH = 10


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    p_value: float
    used_lag: int
    n_obs: int


@dataclass(frozen=True)
class KpssResult:
    statistic: float
    p_low: float
    p_high: float
    bandwidth: int

    @property
    def p_band(self) -> tuple[float, float]:
        return (self.p_low, self.p_high)


@dataclass(frozen=True)
class JarqueBeraResult:
    statistic: float
    p_value: float
    skewness: float
    kurtosis: float


def adf_max_lag(n_obs: int) -> int:
    """Schwert rule of thumb floor(12*(T/100)^(1/4))."""
    return int(math.floor(12.0 * (n_obs / 100.0) ** 0.25))


def _adf_regress(dy: np.ndarray, ylag: np.ndarray, p: int, start: int):
    """Fit dy_t = a + g*y_{t-1} + sum_j b_j dy_{t-j} on rows from start."""
    rows = np.arange(start, dy.shape[0])
    cols = [np.ones(rows.shape[0]), ylag[rows]]
    for j in range(1, p + 1):
        cols.append(dy[rows - j])
    X = np.column_stack(cols)
    y = dy[rows]
    beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    ssr = float(resid @ resid)
    n = y.shape[0]
    k = X.shape[1]
    dof = n - k
    if dof <= 0 or ssr <= 0:
        raise NumericalError("degenerate ADF regression")
    cov = (ssr / dof) * np.linalg.inv(X.T @ X)
    tau = beta[1] / math.sqrt(cov[1, 1])
    return float(tau), ssr, n, k


def _mackinnon_p(tau: float) -> float:
    table = adf_pvalue_table()
    if tau <= table["tau_min"]:
        return 0.0
    if tau >= table["tau_max"]:
        return 1.0
    coefs = table["small_p"] if tau <= table["tau_star"] else table["large_p"]
    poly = sum(c * tau ** i for i, c in enumerate(coefs))
    return float(sps.norm.cdf(poly))


def adf_test(series, max_lag: int | None = None) -> AdfResult:
    """Augmented Dickey-Fuller test with constant, AIC lag selection.

    Candidate lag orders are compared on a common sample, then the winner
    is refit on its own maximal sample. p-values come from the shipped
    response-surface table.
    """
    y = np.asarray(series, dtype=np.float64)
    y = y[np.isfinite(y)]
    t_obs = y.shape[0]
    if t_obs < MIN_SERIES_LENGTH:
        raise DataError(f"ADF needs at least {MIN_SERIES_LENGTH} observations, got {t_obs}")
    dy = np.diff(y)
    ylag = y[:-1]
    maxlag = adf_max_lag(t_obs) if max_lag is None else int(max_lag)
    maxlag = max(0, min(maxlag, dy.shape[0] - 3))

    best_p, best_aic = 0, math.inf
    for p in range(maxlag + 1):
        _, ssr, n, k = _adf_regress(dy, ylag, p, start=maxlag)
        aic = n * math.log(ssr / n) + 2 * k
        if aic < best_aic:
            best_aic, best_p = aic, p
    tau, _, n, _ = _adf_regress(dy, ylag, best_p, start=best_p)
    return AdfResult(statistic=tau, p_value=_mackinnon_p(tau), used_lag=best_p, n_obs=n)


def kpss_test(series) -> KpssResult:
    """KPSS level-stationarity test with Bartlett long-run variance.

    The p-value is a band bracketed by the shipped critical-value table;
    a statistic below the loosest critical value reports (0.10, 1.0).
    """
    y = np.asarray(series, dtype=np.float64)
    y = y[np.isfinite(y)]
    t_obs = y.shape[0]
    if t_obs < MIN_SERIES_LENGTH:
        raise DataError(f"KPSS needs at least {MIN_SERIES_LENGTH} observations, got {t_obs}")
    e = y - y.mean()
    if np.all(e == 0.0):
        raise NumericalError("KPSS undefined for a constant series")
    s = np.cumsum(e)
    bw = hac_bandwidth(t_obs)
    gamma0 = float(e @ e) / t_obs
    lrv = gamma0
    for lag in range(1, bw + 1):
        w = 1.0 - lag / (bw + 1.0)
        lrv += 2.0 * w * float(e[lag:] @ e[:-lag]) / t_obs
    if lrv <= 0:
        raise NumericalError("non-positive long-run variance")
    stat = float(s @ s) / (t_obs ** 2 * lrv)

    crits = kpss_critical_values()  # (alpha, value), descending alpha
    p_high = 1.0
    for alpha, value in crits:
        if stat >= value:
            p_high = alpha
    smaller = [alpha for alpha, _ in crits if alpha < p_high]
    if p_high == 1.0:
        p_low = crits[0][0]
    else:
        p_low = max(smaller) if smaller else 0.0
    return KpssResult(statistic=stat, p_low=p_low, p_high=p_high, bandwidth=bw)


def jarque_bera(residuals) -> JarqueBeraResult:
    """JB = n/6*(S^2 + (K-3)^2/4) with population moments; p from chi2(2)."""
    x = np.asarray(residuals, dtype=np.float64)
    x = x[np.isfinite(x)]
    n = x.shape[0]
    if n < 8:
        raise DataError(f"Jarque-Bera needs at least 8 observations, got {n}")
    centered = x - x.mean()
    m2 = float(np.mean(centered ** 2))
    if m2 == 0.0:
        raise NumericalError("Jarque-Bera undefined for zero-variance input")
    skew = float(np.mean(centered ** 3)) / m2 ** 1.5
    kurt = float(np.mean(centered ** 4)) / m2 ** 2
    stat = n / 6.0 * (skew ** 2 + (kurt - 3.0) ** 2 / 4.0)
    return JarqueBeraResult(
        statistic=stat,
        p_value=float(sps.chi2.sf(stat, 2)),
        skewness=skew,
        kurtosis=kurt,
    )


@dataclass(frozen=True)
class DiagnosticsReport:
    adf: AdfResult | None = None
    kpss: KpssResult | None = None
    jb: JarqueBeraResult | None = None
    vif: dict[str, float] | None = None


def diagnose_series(series) -> DiagnosticsReport:
    """Stationarity diagnostics for one time series."""
    return DiagnosticsReport(adf=adf_test(series), kpss=kpss_test(series))


def diagnose_fit(fit, vif_exclude: tuple[str, ...] = ()) -> DiagnosticsReport:
    """Residual normality plus regressor VIFs for a fitted model."""
    jb = jarque_bera(fit.residuals)
    vifs = None
    if fit.design.shape[1] >= 3 and fit.names[0] == "const":
        vifs = vif(fit.design[:, 1:], fit.names[1:], exclude=vif_exclude)
    return DiagnosticsReport(jb=jb, vif=vifs)
