import hashlib
import json

import numpy as np
import pandas as pd
import pytest

from emikit.cli import CONFIG_SCHEMA, build_parser, main, read_config_file, resolve_config
from emikit.corpus import speech_to_json
from emikit.errors import DataError
from emikit.scoring import SCORED_COLUMNS
from emikit.synth import synthetic_speeches

# small model keeps the end-to-end fixtures fast
FAST = ["--dim", "32", "--epochs", "2", "--min-count", "2", "--n-boot", "200"]

STAGE_FILES = [
    "chunks.jsonl",
    "rejections.csv",
    "model.txt",
    "model.txt.npz",
    "scored.csv",
    "aggregates.csv",
    "plot_emi_sessions.csv",
]


def write_speeches(path, records):
    path.write_text("".join(speech_to_json(r) + "\n" for r in records), encoding="utf-8")


def run_pipeline(speeches, workdir):
    for args in (
        ["preprocess", "--speeches", str(speeches), "--workdir", str(workdir)],
        ["train", "--workdir", str(workdir)] + FAST,
        ["score", "--workdir", str(workdir)],
        ["aggregate", "--workdir", str(workdir), "--emit-plot-data"] + FAST,
    ):
        assert main(args) == 0


def digests(workdir):
    return {
        p.name: hashlib.sha256(p.read_bytes()).hexdigest()
        for p in workdir.iterdir()
        if p.is_file()
    }


@pytest.fixture(scope="module")
def speeches_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("speeches") / "speeches.jsonl"
    write_speeches(path, synthetic_speeches(150, seed=23))
    return path


@pytest.fixture(scope="module")
def pipeline_dir(tmp_path_factory, speeches_file):
    workdir = tmp_path_factory.mktemp("work")
    run_pipeline(speeches_file, workdir)
    return workdir


def series_csv(tmp_path, seed=0):
    rng = np.random.default_rng(seed)
    sessions = np.arange(46, 118)
    n = sessions.size
    frame = pd.DataFrame(
        {
            "session": sessions,
            "EMI": rng.standard_normal(n).cumsum() / 8,
            "Pol": rng.standard_normal(n).cumsum() / 6 + 0.5,
            "Ineq": rng.standard_normal(n).cumsum() / 10 + 38,
            "Gini": rng.standard_normal(n).cumsum() / 20 + 0.4,
            "Mood": rng.standard_normal(n) + 60,
            "npatents": np.exp(rng.standard_normal(n) * 0.1 + 10),
            "MLI": rng.standard_normal(n),
            "LPI": rng.standard_normal(n),
            "nlaw": np.abs(rng.standard_normal(n)) * 100 + 300,
            "PartyControl": rng.integers(0, 2, n).astype(float),
            "PartyControlDif": rng.integers(0, 2, n).astype(float),
        }
    )
    path = tmp_path / "series.csv"
    frame.to_csv(path, index=False)
    return path


# ---------------------------------------------------------------------------
# config handling

def test_config_precedence(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("dim = 64\nchunk_target = 120\n", encoding="utf-8")
    args = build_parser().parse_args(
        ["train", "--config", str(cfg_file), "--dim", "32"]
    )
    cfg = resolve_config(args)
    assert cfg["dim"] == 32
    assert cfg["chunk_target"] == 120
    assert cfg["window"] == 5


def test_config_comments_and_blanks(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(
        "# a comment\n\nseed = 7\n  epochs=3  \nstandardize = true\nmin_session = none\n",
        encoding="utf-8",
    )
    cfg = read_config_file(cfg_file)
    assert cfg == {"seed": 7, "epochs": 3, "standardize": True, "min_session": None}


def test_config_unknown_key(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("frobnicate = 1\n", encoding="utf-8")
    with pytest.raises(DataError, match="frobnicate"):
        read_config_file(cfg_file)


def test_config_bad_value(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("dim = many\n", encoding="utf-8")
    with pytest.raises(DataError, match="dim"):
        read_config_file(cfg_file)


def test_config_missing_equals(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("dim 300\n", encoding="utf-8")
    with pytest.raises(DataError, match=":1"):
        read_config_file(cfg_file)


def test_stage_config_roundtrip(pipeline_dir):
    # the emitted resolved-config file is itself a valid config file
    cfg = read_config_file(pipeline_dir / "train.config")
    assert set(cfg) == set(CONFIG_SCHEMA)
    assert cfg["dim"] == 32
    assert cfg["epochs"] == 2
    assert cfg["workdir"] == str(pipeline_dir)
    assert cfg["min_session"] is None
    assert cfg["emit_plot_data"] is False


# ---------------------------------------------------------------------------
# exit codes

def test_usage_errors_exit_1():
    assert main(["bogus-command"]) == 1
    assert main([]) == 1
    assert main(["train", "--dim", "notanint"]) == 1


def test_help_and_version_exit_0(capsys):
    assert main(["--help"]) == 0
    assert main(["--version"]) == 0
    capsys.readouterr()


def test_missing_upstream_names_producer(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["train", "--workdir", str(empty)]) == 2
    assert "preprocess" in capsys.readouterr().err
    assert main(["score", "--workdir", str(empty)]) == 2
    assert "preprocess" in capsys.readouterr().err
    assert main(["aggregate", "--workdir", str(empty)]) == 2
    assert "score" in capsys.readouterr().err


def test_analyze_requires_table(tmp_path):
    assert main(["analyze", "--workdir", str(tmp_path)]) == 2


def test_preprocess_missing_input(tmp_path):
    assert main(
        ["preprocess", "--speeches", str(tmp_path / "nope.jsonl"), "--workdir", str(tmp_path)]
    ) == 2


# ---------------------------------------------------------------------------
# preprocess error tolerance

def test_preprocess_tolerates_sparse_corruption(tmp_path):
    path = tmp_path / "speeches.jsonl"
    write_speeches(path, synthetic_speeches(120, seed=3))
    lines = path.read_text(encoding="utf-8").splitlines()
    lines.insert(50, "{not json")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    workdir = tmp_path / "out"
    assert main(["preprocess", "--speeches", str(path), "--workdir", str(workdir)]) == 0
    report = pd.read_csv(workdir / "rejections.csv").fillna("")
    malformed = report[report["reason"] == "malformed"]
    assert len(malformed) == 1
    assert "line 51" in malformed.iloc[0]["detail"]


def test_preprocess_rejects_heavy_corruption(tmp_path, capsys):
    path = tmp_path / "speeches.jsonl"
    write_speeches(path, synthetic_speeches(5, seed=3))
    with path.open("a", encoding="utf-8") as fh:
        fh.write("{not json\n")
    assert main(["preprocess", "--speeches", str(path), "--workdir", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "malformed" in err
    assert "line 6" in err


# ---------------------------------------------------------------------------
# pipeline artifacts

def test_pipeline_writes_expected_artifacts(pipeline_dir):
    for name in STAGE_FILES:
        assert (pipeline_dir / name).exists(), name
    for stage in ("preprocess", "train", "score", "aggregate"):
        assert (pipeline_dir / f"{stage}.manifest.json").exists()
        assert (pipeline_dir / f"{stage}.config").exists()


def test_scored_csv_schema(pipeline_dir):
    frame = pd.read_csv(pipeline_dir / "scored.csv")
    assert list(frame.columns) == list(SCORED_COLUMNS)
    assert len(frame) > 100
    assert frame["emi"].notna().all()


def test_aggregates_and_plot_data(pipeline_dir):
    aggs = pd.read_csv(pipeline_dir / "aggregates.csv")
    assert {"session", "mean_emi", "ci_low", "ci_high", "n_chunks"} <= set(aggs.columns)
    assert (aggs["ci_low"] <= aggs["mean_emi"]).all()
    assert (aggs["mean_emi"] <= aggs["ci_high"]).all()
    plot = pd.read_csv(pipeline_dir / "plot_emi_sessions.csv")
    assert list(plot.columns) == ["session", "mean_emi", "ci_low", "ci_high", "n_chunks"]
    assert len(plot) == len(aggs)


def test_manifest_hashes_and_no_timestamps(pipeline_dir):
    manifest = json.loads((pipeline_dir / "score.manifest.json").read_text())
    assert manifest["stage"] == "score"
    assert set(manifest) == {
        "stage", "package_version", "versions", "config", "config_sha256",
        "inputs", "outputs",
    }
    chunks = str(pipeline_dir / "chunks.jsonl")
    assert chunks in manifest["inputs"]
    actual = hashlib.sha256((pipeline_dir / "chunks.jsonl").read_bytes()).hexdigest()
    assert manifest["inputs"][chunks] == actual
    scored = str(pipeline_dir / "scored.csv")
    actual = hashlib.sha256((pipeline_dir / "scored.csv").read_bytes()).hexdigest()
    assert manifest["outputs"][scored] == actual
    assert len(manifest["config_sha256"]) == 64
    text = (pipeline_dir / "score.manifest.json").read_text().lower()
    for banned in ("timestamp", "date", "time"):
        assert banned not in text.replace("datetime", "")


def test_rerun_is_byte_identical(pipeline_dir, speeches_file):
    before = digests(pipeline_dir)
    run_pipeline(speeches_file, pipeline_dir)
    after = digests(pipeline_dir)
    assert before == after


def test_trend_from_aggregates(pipeline_dir):
    assert main(["trend", "--workdir", str(pipeline_dir)]) == 0
    trend = pd.read_csv(pipeline_dir / "trend.csv")
    assert {"intercept", "slope", "r_squared", "p_slope", "n_obs"} <= set(trend.columns)
    aggs = pd.read_csv(pipeline_dir / "aggregates.csv")
    assert trend.iloc[0]["n_obs"] == aggs["session"].nunique()


def test_validate_auc_joins_scored_chunks(pipeline_dir, tmp_path):
    scored = pd.read_csv(pipeline_dir / "scored.csv")
    ratings = scored[["chunk_id"]].copy()
    ratings["label"] = (scored["emi"] > scored["emi"].median()).astype(int)
    ratings["decade"] = 1880 + 10 * (np.arange(len(ratings)) % 3)
    path = tmp_path / "ratings.csv"
    ratings.to_csv(path, index=False)

    assert main(["validate-auc", "--workdir", str(pipeline_dir), "--ratings", str(path)]) == 0
    auc = pd.read_csv(pipeline_dir / "auc.csv")
    assert list(auc.columns) == ["group", "n", "n_pos", "n_neg", "auc"]
    assert len(auc) == 4
    assert auc.iloc[-1]["group"] == "overall"
    # labels derived from the scores themselves: separation must be perfect
    assert auc["auc"].min() == 1.0


def test_validate_auc_direct_scores(tmp_path):
    pd.DataFrame({"score": [0.1, 0.4, 0.9, 1.2], "label": [0, 0, 1, 1]}).to_csv(
        tmp_path / "ratings.csv", index=False
    )
    assert main(
        ["validate-auc", "--workdir", str(tmp_path), "--ratings", str(tmp_path / "ratings.csv")]
    ) == 0
    auc = pd.read_csv(tmp_path / "auc.csv")
    assert len(auc) == 1
    assert auc.iloc[0]["auc"] == 1.0


def test_validate_auc_needs_label_column(tmp_path):
    pd.DataFrame({"score": [0.1, 0.9]}).to_csv(tmp_path / "ratings.csv", index=False)
    assert main(
        ["validate-auc", "--workdir", str(tmp_path), "--ratings", str(tmp_path / "ratings.csv")]
    ) == 2


# ---------------------------------------------------------------------------
# analysis commands

def test_analyze_full_table(tmp_path):
    table = series_csv(tmp_path)
    workdir = tmp_path / "out"
    assert main(
        [
            "analyze", "--workdir", str(workdir), "--table", str(table),
            "--log-columns", "npatents", "--emit-plot-data",
        ]
    ) == 0
    coef = pd.read_csv(workdir / "coefficients.csv")
    assert coef["model"].nunique() == 21
    assert {"model", "term", "coefficient", "se_hac", "p_value", "n_obs"} <= set(coef.columns)
    diag = pd.read_csv(workdir / "diagnostics.csv")
    assert len(diag) == 21
    assert {"adf_p", "kpss_p_low", "jb_p", "max_vif"} <= set(diag.columns)
    assert (workdir / "trend.csv").exists()
    for name in (
        "plot_emi_sessions.csv",
        "plot_emi_polarization.csv",
        "plot_emi_inequality.csv",
        "plot_emi_productivity.csv",
    ):
        assert (workdir / name).exists(), name


def test_analyze_partial_family_is_data_error(tmp_path, capsys):
    frame = pd.read_csv(series_csv(tmp_path)).drop(columns=["PartyControl"])
    path = tmp_path / "partial.csv"
    frame.to_csv(path, index=False)
    assert main(["analyze", "--workdir", str(tmp_path), "--table", str(path)]) == 2
    assert "PartyControl" in capsys.readouterr().err


def test_crosscorr_outputs(tmp_path):
    table = series_csv(tmp_path)
    workdir = tmp_path / "out"
    assert main(
        ["crosscorr", "--workdir", str(workdir), "--table", str(table), "--max-lag", "8"]
    ) == 0
    frame = pd.read_csv(workdir / "crosscorr.csv")
    assert list(frame["lag"]) == list(range(-8, 9))
    assert frame["is_peak"].sum() == 1
    assert frame["r"].abs().max() <= 1.0


def test_crosscorr_missing_column(tmp_path, capsys):
    table = series_csv(tmp_path)
    assert main(
        [
            "crosscorr", "--workdir", str(tmp_path), "--table", str(table),
            "--y-column", "Nope",
        ]
    ) == 2
    assert "Nope" in capsys.readouterr().err
