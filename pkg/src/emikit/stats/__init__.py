"""Econometrics toolkit: OLS with HAC errors, diagnostics, correlations,
rank tests, bootstrap, and the canned published model suite.
"""

from .correlation import CrossCorrelation, LagCorrelation, PearsonResult, lagged_crosscorr, pearson_ci
from .diagnostics import (
    AdfResult,
    DiagnosticsReport,
    JarqueBeraResult,
    KpssResult,
    adf_test,
    diagnose_fit,
    diagnose_series,
    jarque_bera,
    kpss_test,
)
from .ranktests import MannWhitneyResult, mann_whitney, roc_auc
from .regression import (
    BootstrapCoef,
    HacResult,
    Interaction,
    RegressionFit,
    RegressionSpec,
    Term,
    bootstrap_coef,
    hac_bandwidth,
    hac_se,
    ols_arrays,
    ols_fit,
    vif,
)
from .models import ModelResult, SuiteModel, build_model_suite, run_model_suite
from .timeseries import TimeSeriesTable, load_table

__all__ = [
    "AdfResult",
    "BootstrapCoef",
    "CrossCorrelation",
    "DiagnosticsReport",
    "HacResult",
    "Interaction",
    "JarqueBeraResult",
    "KpssResult",
    "LagCorrelation",
    "MannWhitneyResult",
    "ModelResult",
    "PearsonResult",
    "RegressionFit",
    "RegressionSpec",
    "SuiteModel",
    "Term",
    "TimeSeriesTable",
    "adf_test",
    "bootstrap_coef",
    "build_model_suite",
    "diagnose_fit",
    "diagnose_series",
    "hac_bandwidth",
    "hac_se",
    "jarque_bera",
    "kpss_test",
    "lagged_crosscorr",
    "load_table",
    "mann_whitney",
    "ols_arrays",
    "ols_fit",
    "pearson_ci",
    "roc_auc",
    "run_model_suite",
    "vif",
]
