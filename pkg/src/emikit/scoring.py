"""Dictionary-based scoring: similarities, length adjustment, z-scores,
the per-chunk evidence-minus-intuition score, and session aggregates.
"""

from __future__ import annotations

import dataclasses
import hashlib
import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .embeddings import EmbeddingModel, cosine, doc_vector
from .errors import DataError, NumericalError
from .resources import data_path

DEFAULT_BIN_WIDTH = 25
OPEN_TOP_AT = 200
DEFAULT_N_BOOT = 10000

SCORED_COLUMNS = [
    "chunk_id", "session", "party", "chamber", "length",
    "sim_e", "sim_i", "adj_e", "adj_i", "z_e", "z_i", "emi",
]
AGGREGATE_COLUMNS = ["session", "party", "chamber", "mean_emi", "n_chunks", "ci_low", "ci_high"]


@dataclass(frozen=True)
class ConstructDictionary:
    name: str
    keywords: tuple[str, ...]


@dataclass(frozen=True)
class ConstructVector:
    name: str
    vector: np.ndarray
    n_resolved: int
    unresolved: tuple[str, ...]


@dataclass
class ScoredChunk:
    chunk_id: str
    session: int
    party: str
    chamber: str
    length: int
    sim_e: float
    sim_i: float
    adj_e: float | None = None
    adj_i: float | None = None
    z_e: float | None = None
    z_i: float | None = None
    emi: float | None = None


@dataclass(frozen=True)
class SessionAggregate:
    session: int | None
    party: str | None
    chamber: str | None
    mean_emi: float
    n_chunks: int
    ci_low: float
    ci_high: float


def read_dictionary_file(path, name: str) -> ConstructDictionary:
    """One keyword (or multiword phrase) per line; blanks ignored."""
    keywords: list[str] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            entry = raw.strip()
            if not entry:
                continue
            if entry != entry.lower():
                raise DataError(f"{path}:{lineno}: dictionary entries must be lowercase")
            if entry in seen:
                raise DataError(f"{path}:{lineno}: duplicate entry {entry!r}")
            seen.add(entry)
            keywords.append(entry)
    if not keywords:
        raise DataError(f"{path}: empty dictionary")
    return ConstructDictionary(name=name, keywords=tuple(keywords))


def load_dictionary(name: str) -> ConstructDictionary:
    if name not in ("evidence", "intuition"):
        raise DataError(f"unknown construct {name!r}")
    return read_dictionary_file(data_path(f"dict_{name}.txt"), name)


def construct_vector(cdict: ConstructDictionary, model: EmbeddingModel) -> ConstructVector:
    """Unweighted mean over resolved entries.

    A multiword entry contributes the mean of its in-vocabulary constituent
    word vectors; an entry with no in-vocabulary word is left unresolved.
    """
    entry_vectors = []
    unresolved = []
    for entry in cdict.keywords:
        rows = [model.vocab.index[w] for w in entry.split() if w in model.vocab.index]
        if rows:
            entry_vectors.append(model.w_in[rows].astype(np.float64).mean(axis=0))
        else:
            unresolved.append(entry)
    if not entry_vectors:
        raise DataError(f"construct {cdict.name!r}: no dictionary entry resolved in vocabulary")
    vector = np.mean(entry_vectors, axis=0)
    if not np.isfinite(vector).all():
        raise NumericalError(f"construct {cdict.name!r}: non-finite vector")
    return ConstructVector(
        name=cdict.name,
        vector=vector,
        n_resolved=len(entry_vectors),
        unresolved=tuple(unresolved),
    )


def score_chunks(
    chunks,
    model: EmbeddingModel,
    cv_e: ConstructVector,
    cv_i: ConstructVector,
    stopwords: frozenset[str],
) -> tuple[list[ScoredChunk], int]:
    """Raw cosine similarities per chunk; empty-doc chunks are dropped.

    Returns (scored, n_dropped).
    """
    for cv in (cv_e, cv_i):
        if cv.vector.shape[0] != model.dim:
            raise DataError(
                f"construct {cv.name!r} has dimension {cv.vector.shape[0]}, model has {model.dim}"
            )
    scored: list[ScoredChunk] = []
    n_dropped = 0
    for chunk in chunks:
        dv = doc_vector(model, chunk.tokens, stopwords)
        if dv.empty:
            n_dropped += 1
            continue
        scored.append(
            ScoredChunk(
                chunk_id=chunk.chunk_id,
                session=chunk.session,
                party=chunk.party,
                chamber=chunk.chamber,
                length=chunk.length,
                sim_e=cosine(dv.vector, cv_e.vector),
                sim_i=cosine(dv.vector, cv_i.vector),
            )
        )
    return scored, n_dropped


def _bin_index(length: int, bin_width: int, open_top_at: int) -> int:
    top = open_top_at // bin_width
    return min(length // bin_width, top)


def length_adjust(
    scored: list[ScoredChunk],
    bin_width: int = DEFAULT_BIN_WIDTH,
    open_top_at: int = OPEN_TOP_AT,
) -> list[ScoredChunk]:
    """Subtract the per-length-bin mean similarity, per construct.

    Bins are fixed-width [0, w), [w, 2w), ... with one open bin at
    >= open_top_at.
    """
    if not scored:
        return []
    bins = np.array([_bin_index(c.length, bin_width, open_top_at) for c in scored])
    out = [dataclasses.replace(c) for c in scored]
    for attr_sim, attr_adj in (("sim_e", "adj_e"), ("sim_i", "adj_i")):
        sims = np.array([getattr(c, attr_sim) for c in scored], dtype=np.float64)
        for b in np.unique(bins):
            mask = bins == b
            mean = sims[mask].mean()
            for idx in np.nonzero(mask)[0]:
                setattr(out[idx], attr_adj, float(sims[idx] - mean))
    return out


def z_transform(scored: list[ScoredChunk]) -> list[ScoredChunk]:
    """Corpus-wide z-scores of the adjusted similarities; emi = z_e - z_i.

    Statistics are pooled over the whole scored list and use the
    population (1/N) standard deviation.
    """
    if len(scored) < 2:
        raise DataError("z-transform needs at least 2 scored chunks")
    if any(c.adj_e is None or c.adj_i is None for c in scored):
        raise DataError("z-transform requires length-adjusted scores")
    out = [dataclasses.replace(c) for c in scored]
    for attr_adj, attr_z in (("adj_e", "z_e"), ("adj_i", "z_i")):
        vals = np.array([getattr(c, attr_adj) for c in scored], dtype=np.float64)
        mean = vals.mean()
        sd = vals.std()  # population convention (ddof=0)
        if sd == 0.0:
            raise NumericalError(f"zero variance in {attr_adj}; z-scores undefined")
        for c, v in zip(out, vals):
            setattr(c, attr_z, float((v - mean) / sd))
    for c in out:
        c.emi = c.z_e - c.z_i
    return out


def _group_rng(seed: int, key: tuple) -> np.random.Generator:
    """Independent, order-insensitive substream per group key."""
    digest = hashlib.sha256(repr(key).encode("utf-8")).digest()
    salt = int.from_bytes(digest[:8], "big")
    return np.random.default_rng(np.random.SeedSequence([seed, salt]))


def aggregate(
    scored: list[ScoredChunk],
    group_keys: tuple[str, ...] = ("session",),
    n_boot: int = DEFAULT_N_BOOT,
    seed: int = 0,
) -> list[SessionAggregate]:
    """Group means of emi with percentile bootstrap 95% CIs.

    Chunks are resampled with replacement within each group; the CI is the
    2.5/97.5 percentile of the replicate means. Substreams are derived from
    the group key so results do not depend on group iteration order.
    """
    allowed = {"session", "party", "chamber"}
    if not set(group_keys) <= allowed:
        raise DataError(f"group keys must be a subset of {sorted(allowed)}")
    if any(c.emi is None for c in scored):
        raise DataError("aggregate requires z-transformed scores")

    groups: dict[tuple, list[float]] = {}
    for c in scored:
        key = tuple(getattr(c, k) for k in group_keys)
        groups.setdefault(key, []).append(c.emi)

    out = []
    for key in sorted(groups):
        # sorted so the resample is invariant to input permutation, not
        # just to group iteration order
        values = np.sort(np.array(groups[key], dtype=np.float64))
        n = len(values)
        if n == 0:
            warnings.warn(f"empty group {key}; skipped", stacklevel=2)
            continue
        rng = _group_rng(seed, key)
        means = np.empty(n_boot, dtype=np.float64)
        # fixed batching keeps the draw sequence identical across runs
        batch = max(1, min(n_boot, 10_000_000 // max(n, 1)))
        done = 0
        while done < n_boot:
            b = min(batch, n_boot - done)
            idx = rng.integers(0, n, size=(b, n))
            means[done:done + b] = values[idx].mean(axis=1)
            done += b
        ci_low, ci_high = np.percentile(means, [2.5, 97.5])
        fields = dict.fromkeys(("session", "party", "chamber"))
        for k, v in zip(group_keys, key):
            fields[k] = v
        out.append(
            SessionAggregate(
                session=fields["session"],
                party=fields["party"],
                chamber=fields["chamber"],
                mean_emi=float(values.mean()),
                n_chunks=n,
                ci_low=float(ci_low),
                ci_high=float(ci_high),
            )
        )
    return out


@dataclass(frozen=True)
class TrendFit:
    intercept: float
    slope: float
    r_squared: float
    p_intercept: float
    p_slope: float
    n_obs: int


def trend_fit(aggregates: list[SessionAggregate], min_session: int | None = None) -> TrendFit:
    """OLS of mean_emi on session index, t = 0 at the first included session."""
    rows = [a for a in aggregates if a.session is not None]
    if min_session is not None:
        rows = [a for a in rows if a.session >= min_session]
    rows.sort(key=lambda a: a.session)
    if len(rows) < 3:
        raise DataError(f"trend fit needs at least 3 sessions, got {len(rows)}")
    t = np.array([a.session - rows[0].session for a in rows], dtype=np.float64)
    y = np.array([a.mean_emi for a in rows], dtype=np.float64)
    from .stats.regression import ols_arrays

    fit = ols_arrays(y, t.reshape(-1, 1), names=["t"], se="classical")
    return TrendFit(
        intercept=fit.coefficients[0],
        slope=fit.coefficients[1],
        r_squared=fit.r_squared,
        p_intercept=fit.p_values[0],
        p_slope=fit.p_values[1],
        n_obs=fit.n_obs,
    )


# ---------------------------------------------------------------------------
# CSV wire formats

def scored_to_frame(scored: list[ScoredChunk]) -> pd.DataFrame:
    return pd.DataFrame([dataclasses.asdict(c) for c in scored], columns=SCORED_COLUMNS)


def frame_to_scored(frame: pd.DataFrame) -> list[ScoredChunk]:
    missing = [c for c in SCORED_COLUMNS if c not in frame.columns]
    if missing:
        raise DataError(f"scored-chunk table missing columns {missing}")
    out = []
    for row in frame.itertuples(index=False):
        out.append(
            ScoredChunk(
                chunk_id=str(row.chunk_id),
                session=int(row.session),
                party=str(row.party),
                chamber=str(row.chamber),
                length=int(row.length),
                sim_e=float(row.sim_e),
                sim_i=float(row.sim_i),
                adj_e=None if pd.isna(row.adj_e) else float(row.adj_e),
                adj_i=None if pd.isna(row.adj_i) else float(row.adj_i),
                z_e=None if pd.isna(row.z_e) else float(row.z_e),
                z_i=None if pd.isna(row.z_i) else float(row.z_i),
                emi=None if pd.isna(row.emi) else float(row.emi),
            )
        )
    return out


def aggregates_to_frame(aggs: list[SessionAggregate]) -> pd.DataFrame:
    rows = []
    for a in aggs:
        rows.append(
            {
                "session": "" if a.session is None else a.session,
                "party": "" if a.party is None else a.party,
                "chamber": "" if a.chamber is None else a.chamber,
                "mean_emi": a.mean_emi,
                "n_chunks": a.n_chunks,
                "ci_low": a.ci_low,
                "ci_high": a.ci_high,
            }
        )
    return pd.DataFrame(rows, columns=AGGREGATE_COLUMNS)
