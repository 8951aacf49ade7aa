"""Acceptance gate for the toolkit.

Criteria 1-7 are self-contained properties of the pipeline and the
statistics layer. Criteria 8-11 reproduce published session-level
results and run only when the published data files are supplied (see
README: EMIKIT_PUBLISHED_DIR, defaulting to tests/data/published/).
Each test prints one PASS/FAIL line; run with -s to see them live.
"""

import math
import os
import shutil
import time
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from emikit._sgns import sample_negatives
from emikit.corpus import chunk_tokens
from emikit.embeddings import (
    build_vocab,
    negative_cdf,
    sgns_gradients,
    sgns_loss,
    train_sgns,
)
from emikit.resources import data_path, stopwords
from emikit.scoring import (
    ScoredChunk,
    SessionAggregate,
    construct_vector,
    length_adjust,
    load_dictionary,
    score_chunks,
    trend_fit,
    z_transform,
)
from emikit.stats import (
    adf_test,
    bootstrap_coef,
    jarque_bera,
    kpss_test,
    mann_whitney,
    pearson_ci,
    roc_auc,
    run_model_suite,
    vif,
)
from emikit.stats.regression import RegressionSpec, Term, ols_arrays
from emikit.stats.timeseries import load_table
from emikit.synth import labeled_chunks

PUBLISHED_DIR = Path(
    os.environ.get("EMIKIT_PUBLISHED_DIR", str(Path(__file__).parent / "data" / "published"))
)
SERIES_CSV = PUBLISHED_DIR / "session_series.csv"
RATED_CSV = PUBLISHED_DIR / "rated_sample.csv"

needs_series = pytest.mark.skipif(
    not SERIES_CSV.exists(), reason=f"published session series not found at {SERIES_CSV}"
)
needs_rated = pytest.mark.skipif(
    not RATED_CSV.exists(), reason=f"published rated sample not found at {RATED_CSV}"
)


def report(criterion: int, ok: bool, detail: str) -> None:
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")


def score_pipeline(chunks, model):
    cv_e = construct_vector(load_dictionary("evidence"), model)
    cv_i = construct_vector(load_dictionary("intuition"), model)
    scored, n_dropped = score_chunks(chunks, model, cv_e, cv_i, stopwords())
    return z_transform(length_adjust(scored)), n_dropped


# ---------------------------------------------------------------------------
# 1. pipeline discrimination

def test_criterion_1_pipeline_discrimination():
    t0 = time.perf_counter()
    chunks, labels = labeled_chunks(n_chunks=2000, seed=11)
    sentences = [list(c.tokens) for c in chunks]
    vocab = build_vocab(sentences, min_count=5)
    model = train_sgns(
        sentences, vocab, d=100, epochs=5, seed=1, threads=1, verbose=False
    )
    scored, n_dropped = score_pipeline(chunks, model)
    assert n_dropped == 0  # keeps labels aligned with the scored order
    emi = np.array([c.emi for c in scored])
    auc = roc_auc(emi, labels)
    elapsed = time.perf_counter() - t0
    ok = auc >= 0.95 and elapsed < 120.0
    report(1, ok, f"pipeline discrimination: AUC={auc:.4f}, {elapsed:.1f}s")
    assert auc >= 0.95
    assert elapsed < 120.0


# ---------------------------------------------------------------------------
# 2. dictionary antisymmetry

def test_criterion_2_dictionary_antisymmetry(tmp_path, monkeypatch):
    chunks, _ = labeled_chunks(n_chunks=400, seed=7)
    sentences = [list(c.tokens) for c in chunks]
    vocab = build_vocab(sentences, min_count=2)
    model = train_sgns(sentences, vocab, d=40, epochs=2, seed=3, verbose=False)
    forward, _ = score_pipeline(chunks, model)

    # swap the dictionary files through the data-directory override
    shutil.copy(data_path("dict_evidence.txt"), tmp_path / "dict_intuition.txt")
    shutil.copy(data_path("dict_intuition.txt"), tmp_path / "dict_evidence.txt")
    monkeypatch.setenv("EMIKIT_DATA_DIR", str(tmp_path))
    swapped, _ = score_pipeline(chunks, model)

    worst = max(abs(a.emi + b.emi) for a, b in zip(forward, swapped))
    ok = worst <= 1e-9
    report(2, ok, f"dictionary swap negates EMI: max |emi + emi'| = {worst:.2e}")
    assert worst <= 1e-9


# ---------------------------------------------------------------------------
# 3. chunker properties

def test_criterion_3_chunker_properties():
    master = [f"w{i}" for i in range(5000)]
    rng = np.random.default_rng(3)
    lengths = rng.integers(1, 5001, size=10000)
    for n in lengths:
        tokens = master[:n]
        pieces = chunk_tokens(tokens)
        flat = [t for p in pieces for t in p]
        assert flat == tokens
        if n < 50:
            assert len(pieces) == 1 and len(pieces[0]) == n
        else:
            assert all(50 <= len(p) <= 199 for p in pieces)
    merged = [len(p) for p in chunk_tokens(master[:349])]
    ok = merged == [150, 199]
    report(3, ok, f"chunker partition/bounds on 10000 lengths; 349 -> {merged}")
    assert merged == [150, 199]


# ---------------------------------------------------------------------------
# 4. SGNS training

def test_criterion_4_sgns():
    # gradients against central finite differences
    rng = np.random.default_rng(44)
    d, k = 10, 5
    v = rng.standard_normal(d) / math.sqrt(d)
    u_pos = rng.standard_normal(d) / math.sqrt(d)
    u_negs = rng.standard_normal((k, d)) / math.sqrt(d)
    grads = sgns_gradients(v, u_pos, u_negs)
    h = 1e-6
    worst_rel = 0.0
    for analytic, param in zip(grads, (v, u_pos, u_negs)):
        flat = param.reshape(-1)
        numeric = np.empty_like(flat)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            hi = sgns_loss(v, u_pos, u_negs)
            flat[i] = orig - h
            lo = sgns_loss(v, u_pos, u_negs)
            flat[i] = orig
            numeric[i] = (hi - lo) / (2 * h)
        rel = np.linalg.norm(analytic.reshape(-1) - numeric) / np.linalg.norm(numeric)
        worst_rel = max(worst_rel, rel)

    # same-seed single-worker training is bitwise reproducible
    chunks, _ = labeled_chunks(n_chunks=150, seed=9)
    sentences = [list(c.tokens) for c in chunks]
    vocab = build_vocab(sentences, min_count=2)
    m1 = train_sgns(sentences, vocab, d=16, epochs=2, seed=5, threads=1, verbose=False)
    m2 = train_sgns(sentences, vocab, d=16, epochs=2, seed=5, threads=1, verbose=False)
    bitwise = np.array_equal(m1.w_in, m2.w_in) and np.array_equal(m1.w_out, m2.w_out)

    # negative sampling follows unigram^0.75
    tokens = ["a"] * 120 + ["b"] * 60 + ["c"] * 30 + ["d"] * 10
    nvocab = build_vocab([tokens], min_count=1)
    cdf = negative_cdf(nvocab)
    probs = nvocab.counts.astype(float) ** 0.75
    probs /= probs.sum()
    draws = sample_negatives(cdf, 1_000_000, np.uint64(17))
    freqs = np.bincount(draws, minlength=len(nvocab)) / 1_000_000
    sampling_dev = float(np.max(np.abs(freqs - probs)))

    ok = worst_rel <= 1e-5 and bitwise and sampling_dev < 0.01
    report(
        4,
        ok,
        f"sgns: grad rel err {worst_rel:.2e}, bitwise={bitwise}, "
        f"sampling dev {sampling_dev:.4f}",
    )
    assert worst_rel <= 1e-5
    assert bitwise
    assert sampling_dev < 0.01


# ---------------------------------------------------------------------------
# 5. statistics oracles

def test_criterion_5_statistics_oracles():
    # roc_auc is exactly the normalized Mann-Whitney U
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n_pos = int(rng.integers(5, 40))
        n_neg = int(rng.integers(5, 40))
        scores = np.round(rng.standard_normal(n_pos + n_neg), 1)
        labels = np.concatenate([np.ones(n_pos, dtype=int), np.zeros(n_neg, dtype=int)])
        perm = rng.permutation(scores.size)
        scores, labels = scores[perm], labels[perm]
        pos, neg = scores[labels == 1], scores[labels == 0]
        assert roc_auc(scores, labels) == mann_whitney(pos, neg).u / (n_pos * n_neg)

    # HAC on the 5-point hand fixture
    x = np.arange(5, dtype=np.float64)
    y = np.array([1.0, 3.0, 2.0, 5.0, 4.0])
    fit = ols_arrays(y, x[:, None], ["x"], se="hac", bandwidth=1)
    hac_dev = max(
        abs(fit.se_hac[0] - math.sqrt(0.0736)),
        abs(fit.se_hac[1] - math.sqrt(0.0208)),
    )

    # OLS against a hand-solved normal-equation system
    x1 = np.arange(6, dtype=np.float64)
    x2 = np.array([1.0, 0.0, 2.0, 1.0, 3.0, 2.0])
    yh = np.array([1.0, 2.0, 4.5, 4.0, 7.0, 6.5])
    hand = ols_arrays(yh, np.column_stack([x1, x2]), ["x1", "x2"])
    ols_dev = float(
        np.max(np.abs(hand.coefficients - np.array([2.0 / 3.0, 7.0 / 8.0, 7.0 / 8.0])))
    )

    # VIF on an orthogonal design is exactly one
    cols = np.column_stack(
        [np.array([1.0, 1.0, -1.0, -1.0]), np.array([1.0, -1.0, 1.0, -1.0])]
    )
    vifs = vif(cols, ["a", "b"])
    vif_exact = vifs["a"] == 1.0 and vifs["b"] == 1.0

    # JB closed form on the {-1, 1} tiling
    jb = jarque_bera(np.tile([-1.0, 1.0], 10))
    jb_exact = jb.statistic == 20.0 / 6.0

    ok = hac_dev <= 1e-10 and ols_dev <= 1e-10 and vif_exact and jb_exact
    report(
        5,
        ok,
        f"oracles: auc=U/nm on 100 fixtures, hac dev {hac_dev:.1e}, "
        f"ols dev {ols_dev:.1e}, vif exact={vif_exact}, jb exact={jb_exact}",
    )
    assert hac_dev <= 1e-10
    assert ols_dev <= 1e-10
    assert vif_exact
    assert jb_exact


# ---------------------------------------------------------------------------
# 6. Monte-Carlo behavior

def test_criterion_6_monte_carlo():
    # T=300 keeps the size distortion of AIC lag selection small; at
    # T=200 this seed set retains the walk only 89 times, matching an
    # independent reference implementation decision-for-decision
    seeds = range(100)
    T = 300
    adf_rejects_noise = 0
    adf_retains_walk = 0
    kpss_retains_noise = 0
    kpss_rejects_walk = 0
    for s in seeds:
        rng = np.random.default_rng(s)
        noise = rng.standard_normal(T)
        walk = np.cumsum(rng.standard_normal(T))
        adf_rejects_noise += adf_test(noise).p_value < 0.05
        adf_retains_walk += adf_test(walk).p_value > 0.05
        kpss_retains_noise += kpss_test(noise).p_low >= 0.05
        kpss_rejects_walk += kpss_test(walk).p_high <= 0.05

    covered = 0
    for s in seeds:
        rng = np.random.default_rng(10_000 + s)
        x = rng.uniform(0.0, 1.0, T)
        y = 1.0 + 2.0 * x + rng.standard_normal(T)
        table = load_table(
            pd.DataFrame({"session": np.arange(1, T + 1), "y": y, "x": x})
        )
        spec = RegressionSpec(dependent="y", terms=(Term("x", 0),))
        res = bootstrap_coef(spec, table, "x", n_boot=10_000, seed=s)
        covered += res.ci_low <= 2.0 <= res.ci_high

    ok = (
        adf_rejects_noise >= 90
        and adf_retains_walk >= 90
        and kpss_retains_noise >= 90
        and kpss_rejects_walk >= 90
        and covered >= 93
    )
    report(
        6,
        ok,
        f"monte carlo: adf {adf_rejects_noise}/{adf_retains_walk}, "
        f"kpss {kpss_retains_noise}/{kpss_rejects_walk}, coverage {covered}/100",
    )
    assert adf_rejects_noise >= 90
    assert adf_retains_walk >= 90
    assert kpss_retains_noise >= 90
    assert kpss_rejects_walk >= 90
    assert covered >= 93


# ---------------------------------------------------------------------------
# 7. z-transform normalization

def test_criterion_7_z_transform():
    rng = np.random.default_rng(77)
    n = 600
    scored = [
        ScoredChunk(
            chunk_id=f"c{i}",
            session=100 + i % 5,
            party="D" if i % 2 == 0 else "R",
            chamber="House",
            length=int(rng.integers(20, 400)),
            sim_e=float(rng.normal(0.3, 0.1)),
            sim_i=float(rng.normal(0.25, 0.1)),
        )
        for i in range(n)
    ]
    adjusted = length_adjust(scored)
    final = z_transform(adjusted)

    z_e = np.array([c.z_e for c in final])
    z_i = np.array([c.z_i for c in final])
    mean_dev = max(abs(z_e.mean()), abs(z_i.mean()))
    sd_dev = max(abs(z_e.std() - 1.0), abs(z_i.std() - 1.0))

    bins = {}
    for c in adjusted:
        bins.setdefault(min(c.length // 25, 8), []).append((c.adj_e, c.adj_i))
    bin_dev = max(
        abs(float(np.mean(col)))
        for vals in bins.values()
        for col in zip(*vals)
    )

    ok = mean_dev <= 1e-9 and sd_dev <= 1e-9 and bin_dev <= 1e-9
    report(
        7,
        ok,
        f"z-transform: mean dev {mean_dev:.1e}, sd dev {sd_dev:.1e}, "
        f"bin-mean dev {bin_dev:.1e}",
    )
    assert mean_dev <= 1e-9
    assert sd_dev <= 1e-9
    assert bin_dev <= 1e-9


# ---------------------------------------------------------------------------
# 8-11. published-data reproduction

def _aligned(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    mask = np.isfinite(a) & np.isfinite(b)
    return a[mask], b[mask]


@needs_series
def test_criterion_8_published_trend():
    table = load_table(str(SERIES_CSV))
    aggs = [
        SessionAggregate(
            session=int(s), party=None, chamber=None,
            mean_emi=float(v), n_chunks=0, ci_low=float("nan"), ci_high=float("nan"),
        )
        for s, v in table.column("EMI").items()
        if np.isfinite(v)
    ]
    fit = trend_fit(aggs, min_session=94)
    ok = abs(fit.slope - (-0.032)) <= 0.002 and abs(fit.r_squared - 0.927) <= 0.01
    report(8, ok, f"published trend: slope {fit.slope:.4f}, R^2 {fit.r_squared:.3f}")
    assert abs(fit.slope - (-0.032)) <= 0.002
    assert abs(fit.r_squared - 0.927) <= 0.01


@needs_series
def test_criterion_9_published_correlations():
    table = load_table(str(SERIES_CSV))
    emi = table.column("EMI").to_numpy()

    x, y = _aligned(table.lagged("EMI", 1).to_numpy(), table.column("Ineq").to_numpy())
    ineq = pearson_ci(x, y)
    x, y = _aligned(emi, table.column("Pol").to_numpy())
    pol = pearson_ci(x, y)
    prods = {}
    for name, column in (
        ("MLI", table.column("MLI").to_numpy()),
        ("LPI", table.column("LPI").to_numpy()),
        ("log nlaw", np.log(table.column("nlaw").to_numpy())),
    ):
        x, y = _aligned(emi, column)
        prods[name] = pearson_ci(x, y).r

    checks = [
        abs(ineq.r - (-0.948)) <= 0.005,
        abs(ineq.ci_low - (-0.973)) <= 0.01,
        abs(ineq.ci_high - (-0.902)) <= 0.01,
        abs(pol.r - (-0.615)) <= 0.005,
        abs(prods["MLI"] - 0.454) <= 0.01,
        abs(prods["LPI"] - 0.836) <= 0.01,
        abs(prods["log nlaw"] - 0.796) <= 0.01,
    ]
    ok = all(checks)
    report(
        9,
        ok,
        f"published correlations: ineq r={ineq.r:.3f} CI=[{ineq.ci_low:.3f},"
        f"{ineq.ci_high:.3f}], pol r={pol.r:.3f}, prod="
        + "/".join(f"{prods[k]:.3f}" for k in ("MLI", "LPI", "log nlaw")),
    )
    assert ok


@needs_series
def test_criterion_10_published_regressions():
    table = load_table(str(SERIES_CSV))
    results = {r.model.name: r for r in run_model_suite(table, interaction_policy="published")}

    crosslag = results["crosslag-EMI-full"].fit
    ineq = results["ineq-emi"].fit
    checks = [
        abs(crosslag.coef("EMI(t-1)") - 0.92) <= 0.02,
        abs(crosslag.coef("Pol") - (-0.15)) <= 0.02,
        crosslag.n_obs == 71,
        abs(ineq.coef("Ineq(t-1)") - 0.57) <= 0.02,
        abs(ineq.coef("EMI(t-1)") - (-0.11)) <= 0.02,
        abs(ineq.coef("Pol(t-1)") - 0.003) <= 0.02,
        abs(ineq.coef("EMI(t-1)*Pol(t-1)") - 0.08) <= 0.02,
        ineq.n_obs == 38,
    ]
    ok = all(checks)
    report(
        10,
        ok,
        f"published regressions: crosslag ({crosslag.coef('EMI(t-1)'):.3f}, "
        f"{crosslag.coef('Pol'):.3f}, n={crosslag.n_obs}); ineq "
        f"({ineq.coef('Ineq(t-1)'):.3f}, {ineq.coef('EMI(t-1)'):.3f}, "
        f"{ineq.coef('Pol(t-1)'):.3f}, {ineq.coef('EMI(t-1)*Pol(t-1)'):.3f}, "
        f"n={ineq.n_obs})",
    )
    assert ok


@needs_rated
def test_criterion_11_published_auc():
    frame = pd.read_csv(RATED_CSV)
    score_col = "score" if "score" in frame.columns else "emi"
    keep = frame[score_col].notna() & frame["label"].notna()
    auc = roc_auc(
        frame.loc[keep, score_col].to_numpy(dtype=np.float64),
        frame.loc[keep, "label"].astype(int).to_numpy(),
    )
    ok = abs(auc - 0.79) <= 0.02
    report(11, ok, f"published rated-sample AUC: {auc:.3f} on {int(keep.sum())} items")
    assert abs(auc - 0.79) <= 0.02
