"""Command-line pipeline driver.

Stages (preprocess, train, score, aggregate) hand artifacts to each other
through a shared working directory; analysis commands (analyze, trend,
crosscorr, validate-auc) consume those artifacts or external CSV tables.
Every stage writes its resolved configuration and a manifest with content
hashes, and all writes are atomic, so a rerun with unchanged inputs
produces byte-identical outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys

import numba
import numpy as np
import pandas as pd
import scipy

from . import __version__
from .corpus import chunk_to_json, load_chunks_jsonl, load_speeches_jsonl, preprocess_records
from .embeddings import build_vocab, load_model, save_model, train_sgns
from .errors import DataError, EmikitError, NumericalError
from .resources import stopwords
from .scoring import (
    SessionAggregate,
    aggregate,
    aggregates_to_frame,
    construct_vector,
    frame_to_scored,
    length_adjust,
    load_dictionary,
    score_chunks,
    scored_to_frame,
    trend_fit,
    z_transform,
)
from .stats.correlation import lagged_crosscorr
from .stats.models import coefficients_frame, diagnostics_frame, run_model_suite
from .stats.ranktests import roc_auc
from .stats.timeseries import load_table

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

MAX_MALFORMED_SHARE = 0.01

# key -> (type tag, default); the single source of truth for config files
# and command-line flags alike
CONFIG_SCHEMA: dict[str, tuple[str, object]] = {
    "speeches": ("str", "speeches.jsonl"),
    "workdir": ("str", "emikit_out"),
    "ratio_threshold": ("float", 0.05),
    "min_tokens": ("int", 11),
    "chunk_target": ("int", 150),
    "chunk_min": ("int", 50),
    "dim": ("int", 300),
    "window": ("int", 5),
    "negatives": ("int", 5),
    "epochs": ("int", 5),
    "alpha": ("float", 0.025),
    "subsample": ("float", 1e-5),
    "min_count": ("int", 5),
    "seed": ("int", 1),
    "threads": ("int", 1),
    "bin_width": ("int", 25),
    "open_top_at": ("int", 200),
    "group_keys": ("str", "session"),
    "n_boot": ("int", 10000),
    "bootstrap_seed": ("int", 0),
    "table": ("str", ""),
    "log_columns": ("str", ""),
    "standardize": ("bool", False),
    "interaction_policy": ("str", "auto"),
    "se": ("str", "hac"),
    "trend_input": ("str", ""),
    "trend_column": ("str", "mean_emi"),
    "min_session": ("optint", None),
    "x_column": ("str", "EMI"),
    "y_column": ("str", "Pol"),
    "max_lag": ("int", 10),
    "ratings": ("str", ""),
    "emit_plot_data": ("bool", False),
}


def _parse_value(key: str, raw: str):
    kind = CONFIG_SCHEMA[key][0]
    try:
        if kind == "int":
            return int(raw)
        if kind == "optint":
            return None if raw.lower() in ("", "none") else int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return raw
    except ValueError as exc:
        raise DataError(f"config key {key!r}: cannot parse {raw!r} as {kind}") from exc


def read_config_file(path) -> dict:
    """Flat key=value file; blank lines and # comments ignored."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in CONFIG_SCHEMA:
                raise DataError(f"{path}:{lineno}: unknown config key {key!r}")
            out[key] = _parse_value(key, value.strip())
    return out


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = {k: default for k, (_, default) in CONFIG_SCHEMA.items()}
    if getattr(args, "config", None):
        cfg.update(read_config_file(args.config))
    for key in CONFIG_SCHEMA:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _split_list(raw: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in raw.split(",") if part.strip())


# ---------------------------------------------------------------------------
# artifacts

def _atomic_write(path: str, data) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _require(path: str, producer: str) -> str:
    if not os.path.exists(path):
        raise DataError(f"{path} not found; run `emikit {producer}` first")
    return path


def _config_text(cfg: dict) -> str:
    lines = []
    for key in CONFIG_SCHEMA:
        value = cfg[key]
        if value is None:
            value = ""
        elif isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def write_manifest(cfg: dict, stage: str, inputs: list[str], outputs: list[str]) -> str:
    workdir = cfg["workdir"]
    config_path = os.path.join(workdir, f"{stage}.config")
    _atomic_write(config_path, _config_text(cfg))
    config_json = json.dumps(cfg, sort_keys=True)
    manifest = {
        "stage": stage,
        "package_version": __version__,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "pandas": pd.__version__,
            "numba": numba.__version__,
        },
        "config": {k: cfg[k] for k in sorted(cfg)},
        "config_sha256": hashlib.sha256(config_json.encode("utf-8")).hexdigest(),
        "inputs": {p: _sha256(p) for p in inputs},
        "outputs": {p: _sha256(p) for p in sorted(set(outputs + [config_path]))},
    }
    path = os.path.join(workdir, f"{stage}.manifest.json")
    _atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _write_frame(path: str, frame: pd.DataFrame) -> str:
    _atomic_write(path, frame.to_csv(index=False))
    return path


def _artifact(cfg: dict, name: str) -> str:
    return os.path.join(cfg["workdir"], name)


# ---------------------------------------------------------------------------
# pipeline stages

def cmd_preprocess(cfg: dict) -> None:
    speeches_path = cfg["speeches"]
    if not os.path.exists(speeches_path):
        raise DataError(f"input speeches file {speeches_path} not found")
    os.makedirs(cfg["workdir"], exist_ok=True)

    records, malformed = load_speeches_jsonl(speeches_path)
    total = len(records) + len(malformed)
    if total == 0:
        raise DataError(f"{speeches_path} contains no records")
    if len(malformed) > MAX_MALFORMED_SHARE * total:
        first = malformed[0]
        raise DataError(
            f"{len(malformed)} of {total} lines malformed (over "
            f"{MAX_MALFORMED_SHARE:.0%}); first: line {first[0]}: {first[1]}"
        )

    chunks, rejected = preprocess_records(
        records,
        threshold=cfg["ratio_threshold"],
        min_tokens=cfg["min_tokens"],
        target=cfg["chunk_target"],
        min_size=cfg["chunk_min"],
    )

    chunks_path = _artifact(cfg, "chunks.jsonl")
    _atomic_write(chunks_path, "".join(chunk_to_json(c) + "\n" for c in chunks))

    rows = [
        {"speech_id": rec.speech_id, "reason": reason, "detail": ""}
        for rec, reason in rejected
    ]
    rows += [
        {"speech_id": "", "reason": "malformed", "detail": f"line {lineno}: {msg}"}
        for lineno, msg in malformed
    ]
    report = pd.DataFrame(rows, columns=["speech_id", "reason", "detail"])
    report_path = _write_frame(_artifact(cfg, "rejections.csv"), report)

    write_manifest(cfg, "preprocess", [speeches_path], [chunks_path, report_path])
    n_kept = len(records) - len(rejected)
    print(
        f"preprocess: {len(chunks)} chunks from {n_kept} of {len(records)} speeches; "
        f"{len(rejected)} rejected, {len(malformed)} malformed lines -> {chunks_path}"
    )


def cmd_train(cfg: dict) -> None:
    chunks_path = _require(_artifact(cfg, "chunks.jsonl"), "preprocess")
    chunks = load_chunks_jsonl(chunks_path)
    if not chunks:
        raise DataError(f"{chunks_path} contains no chunks")
    sentences = [list(c.tokens) for c in chunks]
    vocab = build_vocab(sentences, min_count=cfg["min_count"])
    model = train_sgns(
        sentences,
        vocab,
        d=cfg["dim"],
        window=cfg["window"],
        k_negatives=cfg["negatives"],
        epochs=cfg["epochs"],
        alpha0=cfg["alpha"],
        subsample_t=cfg["subsample"],
        seed=cfg["seed"],
        threads=cfg["threads"],
    )
    model_path = _artifact(cfg, "model.txt")
    save_model(model, model_path)
    write_manifest(cfg, "train", [chunks_path], [model_path, model_path + ".npz"])
    print(
        f"train: {len(vocab.words)} words x {cfg['dim']} dims over "
        f"{cfg['epochs']} epochs -> {model_path}"
    )


def cmd_score(cfg: dict) -> None:
    chunks_path = _require(_artifact(cfg, "chunks.jsonl"), "preprocess")
    model_path = _require(_artifact(cfg, "model.txt"), "train")
    chunks = load_chunks_jsonl(chunks_path)
    model = load_model(model_path)
    cv_e = construct_vector(load_dictionary("evidence"), model)
    cv_i = construct_vector(load_dictionary("intuition"), model)
    scored, n_dropped = score_chunks(chunks, model, cv_e, cv_i, stopwords())
    scored = z_transform(
        length_adjust(scored, bin_width=cfg["bin_width"], open_top_at=cfg["open_top_at"])
    )
    scored_path = _write_frame(_artifact(cfg, "scored.csv"), scored_to_frame(scored))
    inputs = [chunks_path, model_path, model_path + ".npz"]
    write_manifest(cfg, "score", [p for p in inputs if os.path.exists(p)], [scored_path])
    unresolved = len(cv_e.unresolved) + len(cv_i.unresolved)
    print(
        f"score: {len(scored)} chunks scored, {n_dropped} dropped (no content words), "
        f"{unresolved} dictionary entries unresolved -> {scored_path}"
    )


def cmd_aggregate(cfg: dict) -> None:
    scored_path = _require(_artifact(cfg, "scored.csv"), "score")
    scored = frame_to_scored(pd.read_csv(scored_path))
    group_keys = _split_list(cfg["group_keys"])
    aggs = aggregate(
        scored, group_keys=group_keys, n_boot=cfg["n_boot"], seed=cfg["bootstrap_seed"]
    )
    agg_path = _write_frame(_artifact(cfg, "aggregates.csv"), aggregates_to_frame(aggs))
    outputs = [agg_path]
    if cfg["emit_plot_data"]:
        if group_keys == ("session",):
            session_aggs = aggs
        else:
            session_aggs = aggregate(
                scored, group_keys=("session",), n_boot=cfg["n_boot"], seed=cfg["bootstrap_seed"]
            )
        plot = aggregates_to_frame(session_aggs)[
            ["session", "mean_emi", "ci_low", "ci_high", "n_chunks"]
        ]
        outputs.append(_write_frame(_artifact(cfg, "plot_emi_sessions.csv"), plot))
    write_manifest(cfg, "aggregate", [scored_path], outputs)
    print(f"aggregate: {len(aggs)} groups by ({', '.join(group_keys)}) -> {agg_path}")


# ---------------------------------------------------------------------------
# analysis commands

def _trend_rows_from_frame(frame: pd.DataFrame, column: str) -> list[SessionAggregate]:
    if "session" not in frame.columns:
        raise DataError("trend input needs a 'session' column")
    if column not in frame.columns:
        raise DataError(f"trend input has no column {column!r}")
    view = frame
    # aggregates files carry party/chamber keys; use the session-only rows
    for key in ("party", "chamber"):
        if key in view.columns:
            blank = view[key].isna() | (view[key].astype(str).str.len() == 0)
            view = view[blank]
    view = view[pd.notna(view["session"]) & pd.notna(view[column])]
    if view.empty:
        raise DataError("trend input has no usable session rows")
    return [
        SessionAggregate(
            session=int(row["session"]), party=None, chamber=None,
            mean_emi=float(row[column]), n_chunks=0, ci_low=float("nan"), ci_high=float("nan"),
        )
        for _, row in view.iterrows()
    ]


def _trend_frame(fit, min_session) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "intercept": fit.intercept,
                "slope": fit.slope,
                "r_squared": fit.r_squared,
                "p_intercept": fit.p_intercept,
                "p_slope": fit.p_slope,
                "n_obs": fit.n_obs,
                "min_session": "" if min_session is None else min_session,
            }
        ]
    )


def cmd_trend(cfg: dict) -> None:
    source = cfg["trend_input"]
    if source:
        if not os.path.exists(source):
            raise DataError(f"trend input {source} not found")
    else:
        source = _require(_artifact(cfg, "aggregates.csv"), "aggregate")
    os.makedirs(cfg["workdir"], exist_ok=True)
    rows = _trend_rows_from_frame(pd.read_csv(source), cfg["trend_column"])
    fit = trend_fit(rows, min_session=cfg["min_session"])
    trend_path = _write_frame(
        _artifact(cfg, "trend.csv"), _trend_frame(fit, cfg["min_session"])
    )
    write_manifest(cfg, "trend", [source], [trend_path])
    print(
        f"trend: slope {fit.slope:.4f} (p={fit.p_slope:.3g}), "
        f"R^2 {fit.r_squared:.3f}, n={fit.n_obs} -> {trend_path}"
    )


def cmd_crosscorr(cfg: dict) -> None:
    if not cfg["table"]:
        raise DataError("crosscorr needs --table, a session-series CSV")
    if not os.path.exists(cfg["table"]):
        raise DataError(f"table {cfg['table']} not found")
    os.makedirs(cfg["workdir"], exist_ok=True)
    table = load_table(cfg["table"])
    x = table.column(cfg["x_column"]).to_numpy()
    y = table.column(cfg["y_column"]).to_numpy()
    res = lagged_crosscorr(x, y, max_lag=cfg["max_lag"])
    frame = pd.DataFrame(
        [
            {
                "lag": lc.lag,
                "n": lc.n,
                "r": lc.r,
                "ci_low": lc.ci_low,
                "ci_high": lc.ci_high,
                "is_peak": lc.lag == res.peak_lag,
            }
            for lc in res.lags
        ]
    )
    path = _write_frame(_artifact(cfg, "crosscorr.csv"), frame)
    write_manifest(cfg, "crosscorr", [cfg["table"]], [path])
    peak = res.at(res.peak_lag)
    print(
        f"crosscorr: {cfg['x_column']} vs {cfg['y_column']}, peak r={peak.r:.3f} "
        f"at lag {res.peak_lag} -> {path}"
    )


def cmd_analyze(cfg: dict) -> None:
    if not cfg["table"]:
        raise DataError("analyze needs --table, a session-series CSV")
    if not os.path.exists(cfg["table"]):
        raise DataError(f"table {cfg['table']} not found")
    os.makedirs(cfg["workdir"], exist_ok=True)
    table = load_table(
        cfg["table"],
        log_columns=_split_list(cfg["log_columns"]),
        standardize=cfg["standardize"],
    )
    results = run_model_suite(
        table, interaction_policy=cfg["interaction_policy"], se=cfg["se"]
    )
    outputs = [
        _write_frame(_artifact(cfg, "coefficients.csv"), coefficients_frame(results)),
        _write_frame(_artifact(cfg, "diagnostics.csv"), diagnostics_frame(results)),
    ]
    trend_note = ""
    if "EMI" in table:
        frame = table.frame.reset_index()
        rows = _trend_rows_from_frame(frame, "EMI")
        fit = trend_fit(rows, min_session=cfg["min_session"])
        outputs.append(
            _write_frame(_artifact(cfg, "trend.csv"), _trend_frame(fit, cfg["min_session"]))
        )
        trend_note = f"; EMI trend slope {fit.slope:.4f}"
    if cfg["emit_plot_data"]:
        outputs += _emit_analysis_plots(cfg, table)
    write_manifest(cfg, "analyze", [cfg["table"]], outputs)
    print(
        f"analyze: {len(results)} models on {cfg['table']}{trend_note} "
        f"-> {outputs[0]}, {outputs[1]}"
    )


def _emit_analysis_plots(cfg: dict, table) -> list[str]:
    frame = table.frame.reset_index()
    outputs = []
    specs = [
        ("plot_emi_sessions.csv", ["session", "EMI"]),
        ("plot_emi_polarization.csv", ["session", "EMI", "Pol"]),
        ("plot_emi_inequality.csv", ["session", "EMI", "Ineq"]),
        ("plot_emi_productivity.csv", ["session", "EMI", "MLI", "LPI", "nlaw"]),
    ]
    for name, wanted in specs:
        cols = [c for c in wanted if c == "session" or c in table]
        if len(cols) < 2:
            continue
        outputs.append(_write_frame(_artifact(cfg, name), frame[cols]))
    return outputs


def cmd_validate_auc(cfg: dict) -> None:
    if not cfg["ratings"]:
        raise DataError("validate-auc needs --ratings, a labels CSV")
    if not os.path.exists(cfg["ratings"]):
        raise DataError(f"ratings file {cfg['ratings']} not found")
    os.makedirs(cfg["workdir"], exist_ok=True)
    ratings = pd.read_csv(cfg["ratings"])
    if "label" not in ratings.columns:
        raise DataError("ratings CSV needs a binary 'label' column")
    inputs = [cfg["ratings"]]

    score_col = next((c for c in ("score", "emi") if c in ratings.columns), None)
    if score_col is None:
        if "chunk_id" not in ratings.columns:
            raise DataError(
                "ratings CSV needs a 'score' or 'emi' column, or a 'chunk_id' "
                "column to join against scored chunks"
            )
        scored_path = _require(_artifact(cfg, "scored.csv"), "score")
        inputs.append(scored_path)
        scored = pd.read_csv(scored_path)[["chunk_id", "emi"]]
        ratings = ratings.merge(scored, on="chunk_id", how="inner")
        if ratings.empty:
            raise DataError("no ratings matched a scored chunk_id")
        score_col = "emi"

    keep = pd.notna(ratings[score_col]) & pd.notna(ratings["label"])
    ratings = ratings[keep]
    rows = []

    def auc_row(group, sub):
        labels = sub["label"].astype(int).to_numpy()
        scores = sub[score_col].to_numpy(dtype=np.float64)
        return {
            "group": group,
            "n": len(sub),
            "n_pos": int(labels.sum()),
            "n_neg": int((1 - labels).sum()),
            "auc": roc_auc(scores, labels),
        }

    if "decade" in ratings.columns:
        for decade, sub in ratings.groupby("decade", sort=True):
            rows.append(auc_row(str(decade), sub))
    rows.append(auc_row("overall", ratings))
    path = _write_frame(
        _artifact(cfg, "auc.csv"),
        pd.DataFrame(rows, columns=["group", "n", "n_pos", "n_neg", "auc"]),
    )
    write_manifest(cfg, "validate-auc", inputs, [path])
    print(f"validate-auc: overall AUC {rows[-1]['auc']:.3f} on {rows[-1]['n']} items -> {path}")


# ---------------------------------------------------------------------------
# argument parsing

COMMANDS = {
    "preprocess": (cmd_preprocess, "filter and chunk a speeches JSONL file"),
    "train": (cmd_train, "train word embeddings on the chunked corpus"),
    "score": (cmd_score, "compute per-chunk construct similarities and scores"),
    "aggregate": (cmd_aggregate, "bootstrap group means of the chunk scores"),
    "analyze": (cmd_analyze, "run the regression suite on a session-series CSV"),
    "trend": (cmd_trend, "fit a linear session trend to aggregated scores"),
    "crosscorr": (cmd_crosscorr, "lagged cross-correlation of two table columns"),
    "validate-auc": (cmd_validate_auc, "score discrimination against rated labels"),
}


def _flag_converter(key: str):
    def convert(raw: str):
        try:
            return _parse_value(key, raw)
        except DataError as exc:
            # argparse only maps ArgumentTypeError/ValueError to usage errors
            raise argparse.ArgumentTypeError(str(exc)) from exc

    return convert


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="emikit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"emikit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat key=value config file")
        for key, (kind, default) in CONFIG_SCHEMA.items():
            flag = "--" + key.replace("_", "-")
            if kind == "bool":
                p.add_argument(flag, action=argparse.BooleanOptionalAction,
                               default=None, help=f"(default {default})")
            else:
                p.add_argument(
                    flag,
                    type=_flag_converter(key),
                    default=None,
                    metavar=kind.removeprefix("opt").upper(),
                    help=f"(default {default})",
                )
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        COMMANDS[args.command][0](cfg)
    except NumericalError as exc:
        print(f"emikit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except EmikitError as exc:
        print(f"emikit: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
