"""Canned regression suite reproducing the published model families.

Families cover the cross-lagged polarization pair, the inequality models
(plus Gini / long-sample / long-lag variants), and the productivity models
with survey mood or log patents as the mood proxy. Session restrictions are
applied to the table before lag construction, which is what reproduces the
published observation counts.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..errors import DataError
from .diagnostics import DiagnosticsReport, adf_test, jarque_bera, kpss_test
from .regression import (
    Interaction,
    RegressionFit,
    RegressionSpec,
    Term,
    align_spec,
    ols_fit,
    vif,
)
from .timeseries import TimeSeriesTable

VIF_THRESHOLD = 10.0
VIF_GRAY_ZONE = 9.0

# session restrictions reproducing published sample windows
POSTWAR_START = 79
SINCE_1912_START = 62


@dataclass(frozen=True)
class SuiteModel:
    name: str
    spec: RegressionSpec
    min_session: int | None = None
    max_session: int | None = None
    vif_max: float | None = None
    interaction_included: bool = False
    note: str = ""


@dataclass(eq=False)
class ModelResult:
    model: SuiteModel
    fit: RegressionFit
    diagnostics: DiagnosticsReport


def _require(table: TimeSeriesTable, dependent: str, covariates: list[str]) -> bool:
    """Skip a family whose dependent is absent; missing covariates error."""
    if dependent not in table:
        return False
    missing = [c for c in covariates if c not in table]
    if missing:
        raise DataError(f"model family for {dependent!r} missing columns {missing}")
    return True


def _decide_interaction(
    table: TimeSeriesTable,
    spec_without: RegressionSpec,
    lagdep_name: str,
    policy: str,
    min_session: int | None,
) -> tuple[float | None, bool, str]:
    """Apply the published interaction rule to one extended model.

    Returns (max VIF over covariates excluding the lagged dependent,
    include-interaction flag, note).
    """
    if policy == "published":
        return None, True, "interaction forced (published specification)"
    if policy == "never":
        return None, False, "interaction disabled"
    if policy != "auto":
        raise DataError(f"unknown interaction policy {policy!r}")
    view = table.restricted(min_session=min_session)
    _, x, names, _ = align_spec(spec_without, view)
    if x.shape[0] < x.shape[1] + 2:
        return None, False, "too few rows to assess VIF; interaction omitted"
    vifs = vif(x, names, exclude=(lagdep_name,))
    vif_max = max(vifs.values())
    if vif_max > VIF_THRESHOLD:
        return vif_max, True, f"interaction included (max VIF {vif_max:.2f} > {VIF_THRESHOLD:g})"
    if vif_max > VIF_GRAY_ZONE:
        warnings.warn(
            f"max VIF {vif_max:.2f} is in ({VIF_GRAY_ZONE:g}, {VIF_THRESHOLD:g}]; the literal "
            "rule omits the interaction but the published analysis included it",
            stacklevel=3,
        )
        return vif_max, False, f"interaction omitted (max VIF {vif_max:.2f} in gray zone)"
    return vif_max, False, f"interaction omitted (max VIF {vif_max:.2f} <= {VIF_THRESHOLD:g})"


def _lagged_pair_family(table: TimeSeriesTable) -> list[SuiteModel]:
    if "EMI" not in table or "Pol" not in table:
        return []
    out = []
    for dep, other in (("EMI", "Pol"), ("Pol", "EMI")):
        out.append(
            SuiteModel(
                name=f"crosslag-{dep}-ar",
                spec=RegressionSpec(dependent=dep, terms=(Term(dep, 1),), name=f"crosslag-{dep}-ar"),
            )
        )
        # full model adds the other series at lag 0, not lagged
        out.append(
            SuiteModel(
                name=f"crosslag-{dep}-full",
                spec=RegressionSpec(
                    dependent=dep, terms=(Term(dep, 1), Term(other, 0)), name=f"crosslag-{dep}-full"
                ),
            )
        )
    return out


def _inequality_family(
    table: TimeSeriesTable,
    dependent: str,
    label: str,
    policy: str,
    min_session: int | None,
    pol_lag: int = 1,
    include_base: bool = False,
) -> list[SuiteModel]:
    if not _require(table, dependent, ["Pol", "EMI"]):
        return []
    out = []
    if include_base:
        out.append(
            SuiteModel(
                name=f"{label}-base",
                spec=RegressionSpec(
                    dependent=dependent,
                    terms=(Term(dependent, 1), Term("Pol", pol_lag)),
                    name=f"{label}-base",
                ),
                min_session=min_session,
            )
        )
    terms = (Term(dependent, 1), Term("EMI", 1), Term("Pol", pol_lag))
    spec_without = RegressionSpec(dependent=dependent, terms=terms, name=f"{label}-emi")
    vif_max, include, note = _decide_interaction(
        table, spec_without, Term(dependent, 1).name, policy, min_session
    )
    interactions = (Interaction(Term("EMI", 1), Term("Pol", pol_lag)),) if include else ()
    out.append(
        SuiteModel(
            name=f"{label}-emi",
            spec=RegressionSpec(
                dependent=dependent, terms=terms, interactions=interactions, name=f"{label}-emi"
            ),
            min_session=min_session,
            vif_max=vif_max,
            interaction_included=include,
            note=note,
        )
    )
    return out


def _productivity_family(
    table: TimeSeriesTable, mood_column: str, label: str, policy: str
) -> list[SuiteModel]:
    out = []
    for dep in ("MLI", "LPI", "nlaw"):
        if dep not in table:
            continue
        if not _require(table, dep, ["Pol", mood_column, "PartyControl", "PartyControlDif", "EMI"]):
            continue
        base_terms = (
            Term(dep, 1),
            Term("Pol", 0),
            Term(mood_column, 0),
            Term("PartyControl", 0),
            Term("PartyControlDif", 0),
        )
        out.append(
            SuiteModel(
                name=f"{label}-{dep}-base",
                spec=RegressionSpec(dependent=dep, terms=base_terms, name=f"{label}-{dep}-base"),
            )
        )
        ext_terms = base_terms + (Term("EMI", 0),)
        spec_without = RegressionSpec(dependent=dep, terms=ext_terms, name=f"{label}-{dep}-emi")
        vif_max, include, note = _decide_interaction(
            table, spec_without, Term(dep, 1).name, policy, None
        )
        interactions = (Interaction(Term("EMI", 0), Term("Pol", 0)),) if include else ()
        out.append(
            SuiteModel(
                name=f"{label}-{dep}-emi",
                spec=RegressionSpec(
                    dependent=dep, terms=ext_terms, interactions=interactions,
                    name=f"{label}-{dep}-emi",
                ),
                vif_max=vif_max,
                interaction_included=include,
                note=note,
            )
        )
    return out


def build_model_suite(table: TimeSeriesTable, interaction_policy: str = "auto") -> list[SuiteModel]:
    """Emit the canned model specs supported by the table's columns.

    interaction_policy: "auto" applies the literal VIF>10 rule (warning in
    the (9, 10] gray zone), "published" always includes the EMI-by-Pol
    interaction in extended models, "never" never does.
    """
    suite: list[SuiteModel] = []
    suite += _lagged_pair_family(table)
    suite += _inequality_family(
        table, "Ineq", "ineq", interaction_policy, POSTWAR_START, include_base=True
    )
    suite += _inequality_family(table, "Gini", "gini", interaction_policy, POSTWAR_START)
    if "Ineq" in table:
        suite += _inequality_family(
            table, "Ineq", "ineq1912", interaction_policy, SINCE_1912_START
        )
        suite += _inequality_family(
            table, "Ineq", "ineq-lag8", interaction_policy, POSTWAR_START, pol_lag=8
        )
    if "Mood" in table:
        suite += _productivity_family(table, "Mood", "prod-mood", interaction_policy)
    if "npatents" in table:
        suite += _productivity_family(table, "npatents", "prod-patents", interaction_policy)
    return suite


def run_model_suite(
    table: TimeSeriesTable,
    interaction_policy: str = "auto",
    se: str = "hac",
) -> list[ModelResult]:
    """Fit every suite model and attach residual diagnostics."""
    results = []
    for model in build_model_suite(table, interaction_policy=interaction_policy):
        view = table.restricted(min_session=model.min_session, max_session=model.max_session)
        fit = ols_fit(model.spec, view, se=se)
        resid = fit.residuals
        diagnostics = DiagnosticsReport(
            adf=adf_test(resid) if resid.size >= 10 else None,
            kpss=kpss_test(resid) if resid.size >= 10 else None,
            jb=jarque_bera(resid) if resid.size >= 8 else None,
            vif=vif(fit.design[:, 1:], fit.names[1:]) if fit.design.shape[1] >= 3 else None,
        )
        results.append(ModelResult(model=model, fit=fit, diagnostics=diagnostics))
    return results


def coefficients_frame(results: list[ModelResult]) -> pd.DataFrame:
    """Long-format coefficient table for the suite."""
    rows = []
    for res in results:
        fit = res.fit
        for i, name in enumerate(fit.names):
            rows.append(
                {
                    "model": res.model.name,
                    "term": name,
                    "coefficient": fit.coefficients[i],
                    "se_ols": fit.se_ols[i],
                    "se_hac": fit.se_hac[i],
                    "p_value": fit.p_values[i],
                    "n_obs": fit.n_obs,
                    "r_squared": fit.r_squared,
                    "adj_r_squared": fit.adj_r_squared,
                    "f_stat": fit.f_stat,
                }
            )
    return pd.DataFrame(rows)


def diagnostics_frame(results: list[ModelResult]) -> pd.DataFrame:
    rows = []
    for res in results:
        d = res.diagnostics
        rows.append(
            {
                "model": res.model.name,
                "adf_stat": d.adf.statistic if d.adf else np.nan,
                "adf_p": d.adf.p_value if d.adf else np.nan,
                "kpss_stat": d.kpss.statistic if d.kpss else np.nan,
                "kpss_p_low": d.kpss.p_low if d.kpss else np.nan,
                "kpss_p_high": d.kpss.p_high if d.kpss else np.nan,
                "jb_stat": d.jb.statistic if d.jb else np.nan,
                "jb_p": d.jb.p_value if d.jb else np.nan,
                "max_vif": max(d.vif.values()) if d.vif else np.nan,
                "interaction_included": res.model.interaction_included,
                "note": res.model.note,
            }
        )
    return pd.DataFrame(rows)
