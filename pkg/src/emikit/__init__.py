"""emikit: evidence-minus-intuition scoring for legislative speech corpora."""

__version__ = "0.1.0"

from .corpus import (
    Chunk,
    SpeechRecord,
    chunk_speech,
    filter_speeches,
    load_chunks_jsonl,
    load_speeches_jsonl,
    preprocess_records,
    tokenize,
)
from .embeddings import (
    EmbeddingModel,
    Vocabulary,
    build_vocab,
    cosine,
    doc_vector,
    load_model,
    save_model,
    train_sgns,
)
from .errors import DataError, EmikitError, NumericalError
from .scoring import (
    ConstructDictionary,
    ConstructVector,
    ScoredChunk,
    SessionAggregate,
    TrendFit,
    aggregate,
    construct_vector,
    length_adjust,
    load_dictionary,
    score_chunks,
    trend_fit,
    z_transform,
)
from .stats import (
    adf_test,
    bootstrap_coef,
    jarque_bera,
    kpss_test,
    lagged_crosscorr,
    mann_whitney,
    ols_fit,
    pearson_ci,
    roc_auc,
    run_model_suite,
    vif,
)
from .stats.timeseries import TimeSeriesTable, load_table

__all__ = [
    "__version__",
    "Chunk",
    "SpeechRecord",
    "chunk_speech",
    "filter_speeches",
    "load_chunks_jsonl",
    "load_speeches_jsonl",
    "preprocess_records",
    "tokenize",
    "EmbeddingModel",
    "Vocabulary",
    "build_vocab",
    "cosine",
    "doc_vector",
    "load_model",
    "save_model",
    "train_sgns",
    "DataError",
    "EmikitError",
    "NumericalError",
    "ConstructDictionary",
    "ConstructVector",
    "ScoredChunk",
    "SessionAggregate",
    "TrendFit",
    "aggregate",
    "construct_vector",
    "length_adjust",
    "load_dictionary",
    "score_chunks",
    "trend_fit",
    "z_transform",
    "adf_test",
    "bootstrap_coef",
    "jarque_bera",
    "kpss_test",
    "lagged_crosscorr",
    "mann_whitney",
    "ols_fit",
    "pearson_ci",
    "roc_auc",
    "run_model_suite",
    "vif",
    "TimeSeriesTable",
    "load_table",
]
