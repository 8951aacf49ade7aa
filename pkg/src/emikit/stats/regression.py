"""OLS with Newey-West covariance, VIF, and bootstrap coefficient CIs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
import scipy.linalg
from scipy import stats as sps

from ..errors import DataError, NumericalError
from .timeseries import TimeSeriesTable

CONST_NAME = "const"


@dataclass(frozen=True)
class Term:
    column: str
    lag: int = 0

    def __post_init__(self):
        if self.lag < 0:
            raise DataError(f"term lag must be non-negative, got {self.lag}")

    @property
    def name(self) -> str:
        return f"{self.column}(t-{self.lag})" if self.lag else self.column


@dataclass(frozen=True)
class Interaction:
    left: Term
    right: Term

    @property
    def name(self) -> str:
        return f"{self.left.name}*{self.right.name}"


@dataclass(frozen=True)
class RegressionSpec:
    dependent: str
    terms: tuple[Term, ...]
    interactions: tuple[Interaction, ...] = ()
    include_intercept: bool = True
    name: str = ""

    def __post_init__(self):
        names = [t.name for t in self.terms] + [i.name for i in self.interactions]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise DataError(f"duplicate regression terms: {dupes}")
        if not self.terms:
            raise DataError("regression needs at least one term")

    @property
    def term_names(self) -> list[str]:
        return [t.name for t in self.terms] + [i.name for i in self.interactions]


@dataclass(eq=False)
class RegressionFit:
    names: list[str]
    coefficients: np.ndarray
    se_ols: np.ndarray
    se_hac: np.ndarray
    p_values: np.ndarray
    se_flavor: str
    hac_bandwidth: int | None
    r_squared: float
    adj_r_squared: float
    f_stat: float
    f_pvalue: float
    residuals: np.ndarray
    fitted: np.ndarray
    n_obs: int
    design: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    index: np.ndarray | None = None
    spec: RegressionSpec | None = None

    def coef(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def se(self, name: str) -> float:
        src = self.se_hac if self.se_flavor == "hac" else self.se_ols
        return float(src[self.names.index(name)])

    def p_value(self, name: str) -> float:
        return float(self.p_values[self.names.index(name)])


def hac_bandwidth(n_obs: int) -> int:
    """Newey-West rule-of-thumb bandwidth floor(4*(T/100)^(2/9))."""
    return int(math.floor(4.0 * (n_obs / 100.0) ** (2.0 / 9.0)))


def _check_rank(X: np.ndarray, names: list[str]) -> None:
    rank = np.linalg.matrix_rank(X)
    if rank < X.shape[1]:
        _, r, pivots = scipy.linalg.qr(X, mode="economic", pivoting=True)
        culprits = sorted(names[p] for p in pivots[rank:])
        raise NumericalError(f"singular design; collinear columns: {culprits}")


def _hac_cov(X: np.ndarray, resid: np.ndarray, bandwidth: int) -> np.ndarray:
    """Newey-West sandwich with Bartlett weights, no small-sample scaling."""
    n = X.shape[0]
    if bandwidth >= n:
        raise DataError(f"HAC bandwidth {bandwidth} must be below n_obs {n}")
    if bandwidth < 0:
        raise DataError(f"HAC bandwidth must be non-negative, got {bandwidth}")
    xe = X * resid[:, None]
    meat = xe.T @ xe
    for lag in range(1, bandwidth + 1):
        w = 1.0 - lag / (bandwidth + 1.0)
        gamma = xe[lag:].T @ xe[:-lag]
        meat += w * (gamma + gamma.T)
    bread = np.linalg.inv(X.T @ X)
    return bread @ meat @ bread


def ols_arrays(
    y: np.ndarray,
    x_columns: np.ndarray,
    names: list[str],
    se: str = "hac",
    bandwidth: int | None = None,
    include_intercept: bool = True,
    index: np.ndarray | None = None,
    spec: RegressionSpec | None = None,
) -> RegressionFit:
    """Fit y on the given columns (intercept prepended by default).

    se selects which flavor feeds p_values; both classical and HAC standard
    errors are always computed. p-values use the t distribution with n-k
    degrees of freedom.
    """
    if se not in ("hac", "classical"):
        raise DataError(f"se must be 'hac' or 'classical', got {se!r}")
    y = np.asarray(y, dtype=np.float64)
    x_columns = np.asarray(x_columns, dtype=np.float64)
    if x_columns.ndim == 1:
        x_columns = x_columns.reshape(-1, 1)
    n = y.shape[0]
    if include_intercept:
        X = np.column_stack([np.ones(n), x_columns])
        all_names = [CONST_NAME] + list(names)
    else:
        X = x_columns
        all_names = list(names)
    k = X.shape[1]
    if n <= k:
        raise DataError(f"need more observations ({n}) than parameters ({k})")
    _check_rank(X, all_names)

    beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    fitted = X @ beta
    resid = y - fitted
    ssr = float(resid @ resid)
    dof = n - k

    sigma2 = ssr / dof
    cov_ols = sigma2 * np.linalg.inv(X.T @ X)
    se_ols = np.sqrt(np.diag(cov_ols))

    bw = hac_bandwidth(n) if bandwidth is None else int(bandwidth)
    cov_hac = _hac_cov(X, resid, bw)
    se_hac = np.sqrt(np.diag(cov_hac))

    chosen = se_hac if se == "hac" else se_ols
    with np.errstate(divide="ignore", invalid="ignore"):
        tvals = beta / chosen
    p_values = 2.0 * sps.t.sf(np.abs(tvals), dof)

    if include_intercept:
        sst = float(np.sum((y - y.mean()) ** 2))
    else:
        sst = float(y @ y)
    r2 = 1.0 - ssr / sst if sst > 0 else float("nan")
    adj_r2 = 1.0 - (1.0 - r2) * (n - 1) / dof if sst > 0 else float("nan")
    n_slopes = k - 1 if include_intercept else k
    if n_slopes >= 1 and sst > 0 and ssr > 0:
        f_stat = ((sst - ssr) / n_slopes) / (ssr / dof)
        f_pvalue = float(sps.f.sf(f_stat, n_slopes, dof))
    else:
        f_stat, f_pvalue = float("nan"), float("nan")

    return RegressionFit(
        names=all_names,
        coefficients=beta,
        se_ols=se_ols,
        se_hac=se_hac,
        p_values=p_values,
        se_flavor=se,
        hac_bandwidth=bw,
        r_squared=r2,
        adj_r_squared=adj_r2,
        f_stat=float(f_stat),
        f_pvalue=float(f_pvalue),
        residuals=resid,
        fitted=fitted,
        n_obs=n,
        design=X,
        y=y,
        index=index,
        spec=spec,
    )


def align_spec(spec: RegressionSpec, table: TimeSeriesTable):
    """Lag-align all variables and listwise-delete incomplete rows.

    Returns (y, x_columns, names, kept_sessions).
    """
    pieces = {"__dep__": table.column(spec.dependent)}
    for term in spec.terms:
        pieces[term.name] = table.lagged(term.column, term.lag)
    for inter in spec.interactions:
        left = table.lagged(inter.left.column, inter.left.lag)
        right = table.lagged(inter.right.column, inter.right.lag)
        pieces[inter.name] = left * right
    frame = pd.DataFrame(pieces).dropna()
    names = spec.term_names
    y = frame["__dep__"].to_numpy(dtype=np.float64)
    x = frame[names].to_numpy(dtype=np.float64)
    return y, x, names, frame.index.to_numpy()


def ols_fit(
    spec: RegressionSpec,
    table: TimeSeriesTable,
    se: str = "hac",
    bandwidth: int | None = None,
) -> RegressionFit:
    y, x, names, kept = align_spec(spec, table)
    if y.size == 0:
        raise DataError(f"no complete rows for model {spec.name or spec.dependent!r}")
    return ols_arrays(
        y, x, names, se=se, bandwidth=bandwidth,
        include_intercept=spec.include_intercept, index=kept, spec=spec,
    )


@dataclass(frozen=True)
class HacResult:
    bandwidth: int
    se: np.ndarray
    p_values: np.ndarray


def hac_se(fit: RegressionFit, bandwidth: int | None = None) -> HacResult:
    """Recompute Newey-West SEs of an existing fit at a given bandwidth."""
    bw = hac_bandwidth(fit.n_obs) if bandwidth is None else int(bandwidth)
    cov = _hac_cov(fit.design, fit.residuals, bw)
    se = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        tvals = fit.coefficients / se
    p = 2.0 * sps.t.sf(np.abs(tvals), fit.n_obs - fit.design.shape[1])
    return HacResult(bandwidth=bw, se=se, p_values=p)


def vif(columns: np.ndarray, names: list[str], exclude: tuple[str, ...] = ()) -> dict[str, float]:
    """VIF_j = 1/(1-R^2_j) from regressing column j on the others.

    Auxiliary regressions include an intercept and use every other column;
    exclude only filters the reported entries (e.g. the lagged dependent
    variable, which the published inclusion rule ignores).
    """
    columns = np.asarray(columns, dtype=np.float64)
    if columns.ndim != 2 or columns.shape[1] < 2:
        raise DataError("VIF needs at least two columns")
    if columns.shape[1] != len(names):
        raise DataError("names must match design columns")
    out: dict[str, float] = {}
    n = columns.shape[0]
    for j, name in enumerate(names):
        if name in exclude:
            continue
        target = columns[:, j]
        others = np.delete(columns, j, axis=1)
        X = np.column_stack([np.ones(n), others])
        beta, _, _, _ = np.linalg.lstsq(X, target, rcond=None)
        resid = target - X @ beta
        sst = float(np.sum((target - target.mean()) ** 2))
        if sst <= 0:
            out[name] = float("inf")
            continue
        r2 = 1.0 - float(resid @ resid) / sst
        out[name] = float("inf") if r2 >= 1.0 - 1e-12 else 1.0 / (1.0 - r2)
    return out


@dataclass(frozen=True)
class BootstrapCoef:
    coef_name: str
    point: float
    ci_low: float
    ci_high: float
    n_boot: int
    n_failed: int


def bootstrap_coef(
    spec: RegressionSpec,
    table: TimeSeriesTable,
    coef_name: str,
    n_boot: int = 10000,
    seed: int = 0,
) -> BootstrapCoef:
    """Case-resampling percentile bootstrap of one coefficient.

    Rows are resampled after lag alignment, so each replicate refits on a
    with-replacement draw of complete cases. Errors out if more than 1% of
    replicates are rank-deficient.
    """
    base = ols_fit(spec, table)
    if coef_name not in base.names:
        raise DataError(f"no coefficient {coef_name!r} in model; have {base.names}")
    target = base.names.index(coef_name)
    X, y = base.design, base.y
    n, k = X.shape
    rng = np.random.default_rng(seed)
    draws = np.empty(n_boot, dtype=np.float64)
    n_failed = 0
    batch = 2000
    done = 0
    while done < n_boot:
        b = min(batch, n_boot - done)
        idx = rng.integers(0, n, size=(b, n))
        Xb = X[idx]
        yb = y[idx]
        xtx = np.einsum("bni,bnj->bij", Xb, Xb)
        xty = np.einsum("bni,bn->bi", Xb, yb)
        try:
            # trailing axis: numpy 2 treats 2-D rhs as a stack of matrices
            betas = np.linalg.solve(xtx, xty[:, :, None])[:, :, 0]
            bad = ~np.isfinite(betas[:, target])
        except np.linalg.LinAlgError:
            betas = np.full((b, k), np.nan)
            bad = np.zeros(b, dtype=bool)
            for i in range(b):
                try:
                    betas[i] = np.linalg.solve(xtx[i], xty[i])
                except np.linalg.LinAlgError:
                    bad[i] = True
            bad |= ~np.isfinite(betas[:, target])
        draws[done:done + b] = betas[:, target]
        n_failed += int(bad.sum())
        draws[done:done + b][bad] = np.nan
        done += b
    if n_failed > 0.01 * n_boot:
        raise NumericalError(
            f"{n_failed} of {n_boot} bootstrap replicates were rank-deficient"
        )
    good = draws[np.isfinite(draws)]
    lo, hi = np.percentile(good, [2.5, 97.5])
    return BootstrapCoef(
        coef_name=coef_name,
        point=float(base.coefficients[target]),
        ci_low=float(lo),
        ci_high=float(hi),
        n_boot=n_boot,
        n_failed=n_failed,
    )
