"""Skip-gram negative-sampling embeddings trained on chunked speeches.

Training runs either strictly sequentially (deterministic for a fixed
seed) or hogwild-style across threads, where concurrent unsynchronized
updates to the shared matrices are accepted as racy by design.
"""

from __future__ import annotations

import json
import math
import os
import sys
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._sgns import GOLDEN, INV53, MIX1, MIX2, _train_epoch
from .errors import (
    DataError,
    DuplicateWordError,
    ModelDimensionError,
    ModelFormatError,
    ModelHeaderError,
    NumericalError,
    TruncatedModelError,
)

DEFAULT_DIM = 300
DEFAULT_WINDOW = 5
DEFAULT_NEGATIVES = 5
DEFAULT_EPOCHS = 5
DEFAULT_ALPHA = 0.025
DEFAULT_SUBSAMPLE = 1e-5
DEFAULT_MIN_COUNT = 5


def _tokens_of(item) -> tuple[str, ...] | list[str]:
    return item.tokens if hasattr(item, "tokens") else item


@dataclass(frozen=True, eq=False)
class Vocabulary:
    words: tuple[str, ...]
    counts: np.ndarray
    index: dict[str, int] = field(repr=False)
    total_tokens: int
    min_count: int

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def frequency(self, word: str) -> int:
        return int(self.counts[self.index[word]])

    def index_of(self, word: str) -> int:
        return self.index[word]


def build_vocab(sentences, min_count: int = DEFAULT_MIN_COUNT) -> Vocabulary:
    """Count tokens and keep words seen at least min_count times.

    Index order is descending frequency with lexicographic tie-break so
    the mapping is reproducible across runs and platforms.
    """
    counter: Counter[str] = Counter()
    for item in sentences:
        counter.update(_tokens_of(item))
    if not counter:
        raise DataError("cannot build a vocabulary from an empty token stream")
    surviving = sorted(
        ((w, c) for w, c in counter.items() if c >= min_count),
        key=lambda wc: (-wc[1], wc[0]),
    )
    words = tuple(w for w, _ in surviving)
    counts = np.array([c for _, c in surviving], dtype=np.int64)
    index = {w: i for i, w in enumerate(words)}
    total = int(counts.sum()) if len(counts) else 0
    return Vocabulary(words=words, counts=counts, index=index, total_tokens=total, min_count=min_count)


@dataclass(eq=False)
class EmbeddingModel:
    vocab: Vocabulary
    w_in: np.ndarray
    w_out: np.ndarray
    hyperparams: dict

    @property
    def dim(self) -> int:
        return self.w_in.shape[1]

    def __contains__(self, word: str) -> bool:
        return word in self.vocab

    def vector(self, word: str) -> np.ndarray:
        return self.w_in[self.vocab.index_of(word)]


def splitmix64_uniform(seed: int, n: int) -> np.ndarray:
    """Vectorized splitmix64 uniforms in [0, 1), used for initialization."""
    with np.errstate(over="ignore"):
        idx = np.arange(1, n + 1, dtype=np.uint64)
        z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * GOLDEN
        z = (z ^ (z >> np.uint64(30))) * MIX1
        z = (z ^ (z >> np.uint64(27))) * MIX2
        z = z ^ (z >> np.uint64(31))
        return (z >> np.uint64(11)) * INV53


def _seed_state(seed: int, salt: int = 0) -> np.uint64:
    with np.errstate(over="ignore"):
        z = (np.uint64(seed & 0xFFFFFFFFFFFFFFFF) ^ (np.uint64(salt) * MIX1)) + GOLDEN
        z = (z ^ (z >> np.uint64(30))) * MIX1
        z = (z ^ (z >> np.uint64(27))) * MIX2
        return np.uint64(z ^ (z >> np.uint64(31)))


def negative_cdf(vocab: Vocabulary) -> np.ndarray:
    """CDF of the unigram^0.75 negative-sampling distribution."""
    p = vocab.counts.astype(np.float64) ** 0.75
    p /= p.sum()
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    return cdf


def subsample_keep_probs(vocab: Vocabulary, t: float) -> np.ndarray:
    """Keep probability sqrt(t/f) clipped to 1; discard prob is 1 - keep."""
    f = vocab.counts.astype(np.float64) / vocab.total_tokens
    return np.minimum(1.0, np.sqrt(t / f))


def encode_sentences(sentences, vocab: Vocabulary) -> tuple[np.ndarray, np.ndarray]:
    """Map sentences to flat in-vocab id arrays plus per-sentence offsets."""
    ids: list[int] = []
    offsets = [0]
    index = vocab.index
    for item in sentences:
        for tok in _tokens_of(item):
            wid = index.get(tok)
            if wid is not None:
                ids.append(wid)
        offsets.append(len(ids))
    return np.array(ids, dtype=np.int32), np.array(offsets, dtype=np.int64)


def _partition_offsets(offsets: np.ndarray, parts: int) -> list[tuple[int, int, int]]:
    """Split sentences into contiguous runs with near-equal token mass.

    Returns (sent_lo, sent_hi, tokens_before) triples; tokens_before is the
    token count owned by earlier partitions, used to keep every worker on
    the shared learning-rate schedule.
    """
    n_sent = len(offsets) - 1
    total = int(offsets[-1])
    bounds = [0]
    for p in range(1, parts):
        cut = int(np.searchsorted(offsets, total * p / parts))
        bounds.append(min(max(cut, bounds[-1]), n_sent))
    bounds.append(n_sent)
    out = []
    for p in range(parts):
        lo, hi = bounds[p], bounds[p + 1]
        out.append((lo, hi, int(offsets[lo])))
    return out


def train_sgns(
    sentences,
    vocab: Vocabulary,
    d: int = DEFAULT_DIM,
    window: int = DEFAULT_WINDOW,
    k_negatives: int = DEFAULT_NEGATIVES,
    epochs: int = DEFAULT_EPOCHS,
    alpha0: float = DEFAULT_ALPHA,
    subsample_t: float = DEFAULT_SUBSAMPLE,
    seed: int = 1,
    threads: int = 1,
    verbose: bool = True,
) -> EmbeddingModel:
    """Train skip-gram embeddings with negative sampling.

    threads=1 is bitwise reproducible for a fixed seed; threads>1 uses
    lock-free concurrent updates and is not.
    """
    if d <= 0:
        raise DataError(f"embedding dimension must be positive, got {d}")
    if len(vocab) == 0:
        raise DataError("cannot train on an empty vocabulary")
    if window < 1 or k_negatives < 0 or epochs < 1 or threads < 1:
        raise DataError("window/epochs/threads must be >= 1 and negatives >= 0")

    sentences = list(sentences)
    tokens, offsets = encode_sentences(sentences, vocab)
    if len(tokens) == 0:
        raise DataError("no in-vocabulary tokens to train on")
    maxlen = int(np.max(np.diff(offsets)))
    total = int(len(tokens))

    n_words = len(vocab)
    w_in = ((splitmix64_uniform(seed, n_words * d) - 0.5) / d).astype(np.float32).reshape(n_words, d)
    w_out = np.zeros((n_words, d), dtype=np.float32)

    cdf = negative_cdf(vocab)
    keep = subsample_keep_probs(vocab, subsample_t)
    sched_total = float(epochs * total)
    alpha_min = alpha0 / 10000.0

    state = _seed_state(seed)
    parts = _partition_offsets(offsets, threads) if threads > 1 else None
    for epoch in range(epochs):
        t0 = time.perf_counter()
        done_before = epoch * total
        if threads == 1:
            state, n_done = _train_epoch(
                tokens, offsets, 0, len(offsets) - 1, maxlen, w_in, w_out,
                cdf, keep, window, k_negatives, alpha0, alpha_min,
                sched_total, float(done_before), state,
            )
            # numba hands the state back as a Python int; re-wrap so the
            # next dispatch does not try to fit it into int64
            state = np.uint64(state)
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                futures = [
                    pool.submit(
                        _train_epoch,
                        tokens, offsets, lo, hi, maxlen, w_in, w_out,
                        cdf, keep, window, k_negatives, alpha0, alpha_min,
                        sched_total, float(done_before + before),
                        _seed_state(seed, salt=1 + epoch * threads + widx),
                    )
                    for widx, (lo, hi, before) in enumerate(parts)
                ]
                n_done = sum(f.result()[1] for f in futures)
        elapsed = max(time.perf_counter() - t0, 1e-9)
        alpha_now = max(alpha_min, alpha0 * (1.0 - (done_before + n_done) / sched_total))
        if verbose:
            print(f"sgns,{epoch + 1},{n_done / elapsed:.0f},{alpha_now:.6f}", file=sys.stderr)

    if not (np.isfinite(w_in).all() and np.isfinite(w_out).all()):
        raise NumericalError("training produced non-finite vectors")
    hyperparams = {
        "d": d, "window": window, "k_negatives": k_negatives, "epochs": epochs,
        "alpha0": alpha0, "subsample_t": subsample_t, "seed": seed,
        "threads": threads, "min_count": vocab.min_count,
    }
    return EmbeddingModel(vocab=vocab, w_in=w_in, w_out=w_out, hyperparams=hyperparams)


# ---------------------------------------------------------------------------
# reference objective, kept in float64 for finite-difference checks

def sgns_loss(v: np.ndarray, u_pos: np.ndarray, u_negs: np.ndarray) -> float:
    """Negative log-likelihood of one (center, context, negatives) tuple."""
    def log_sigmoid(x):
        return -np.logaddexp(0.0, -x)

    pos = log_sigmoid(float(v @ u_pos))
    neg = sum(log_sigmoid(-float(v @ u)) for u in u_negs)
    return -(pos + neg)


def sgns_gradients(v, u_pos, u_negs):
    """Analytic gradients of sgns_loss wrt (v, u_pos, each u_neg)."""
    def sigmoid(x):
        return 1.0 / (1.0 + math.exp(-x))

    s_pos = sigmoid(float(v @ u_pos))
    gv = -(1.0 - s_pos) * u_pos
    gu_pos = -(1.0 - s_pos) * v
    gu_negs = np.empty_like(u_negs)
    for j, u in enumerate(u_negs):
        s = sigmoid(float(v @ u))
        gv = gv + s * u
        gu_negs[j] = s * v
    return gv, gu_pos, gu_negs


# ---------------------------------------------------------------------------
# lookup helpers

@dataclass(frozen=True)
class DocVector:
    vector: np.ndarray | None
    n_content_words: int

    @property
    def empty(self) -> bool:
        return self.n_content_words == 0


def doc_vector(model: EmbeddingModel, tokens, stopwords: frozenset[str]) -> DocVector:
    """Average input vectors of in-vocabulary non-stopword tokens."""
    rows = [
        model.vocab.index[tok]
        for tok in tokens
        if tok not in stopwords and tok in model.vocab.index
    ]
    if not rows:
        return DocVector(vector=None, n_content_words=0)
    vec = model.w_in[rows].astype(np.float64).mean(axis=0)
    return DocVector(vector=vec, n_content_words=len(rows))


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise NumericalError("cosine undefined for zero-norm vector")
    return float(np.dot(a, b) / (na * nb))


def nearest_neighbors(model: EmbeddingModel, word: str, topn: int = 1) -> list[tuple[str, float]]:
    """Most-similar vocabulary words by cosine over input vectors."""
    if word not in model.vocab:
        raise DataError(f"word {word!r} not in vocabulary")
    w = model.vector(word).astype(np.float64)
    mat = model.w_in.astype(np.float64)
    norms = np.linalg.norm(mat, axis=1)
    norms[norms == 0.0] = np.inf
    sims = mat @ w / (norms * np.linalg.norm(w))
    sims[model.vocab.index_of(word)] = -np.inf
    order = np.argsort(-sims)[:topn]
    return [(model.vocab.words[i], float(sims[i])) for i in order]


# ---------------------------------------------------------------------------
# persistence: text vectors plus an exact binary sidecar

def _sidecar_path(path) -> str:
    return str(path) + ".npz"


def save_model(model: EmbeddingModel, path, sidecar: bool = True) -> None:
    """Write the text vector file and, by default, a bit-exact sidecar.

    The text format stores input vectors only; floats are written with
    shortest round-trip precision so reparsing is exact for float32 data.
    """
    path = str(path)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(f"{len(model.vocab)} {model.dim}\n")
        for i, word in enumerate(model.vocab.words):
            comps = " ".join(repr(float(x)) for x in model.w_in[i])
            fh.write(f"{word} {comps}\n")
    os.replace(tmp, path)
    if sidecar:
        sc_tmp = _sidecar_path(path) + ".tmp"
        with open(sc_tmp, "wb") as fh:
            np.savez(
                fh,
                words=np.array(model.vocab.words, dtype=np.str_),
                counts=model.vocab.counts,
                total_tokens=np.int64(model.vocab.total_tokens),
                min_count=np.int64(model.vocab.min_count),
                w_in=model.w_in,
                w_out=model.w_out,
                hyperparams=np.str_(json.dumps(model.hyperparams, sort_keys=True)),
            )
        os.replace(sc_tmp, _sidecar_path(path))


def _load_sidecar(path) -> EmbeddingModel:
    with np.load(_sidecar_path(path)) as arc:
        words = tuple(str(w) for w in arc["words"])
        counts = arc["counts"].astype(np.int64)
        vocab = Vocabulary(
            words=words,
            counts=counts,
            index={w: i for i, w in enumerate(words)},
            total_tokens=int(arc["total_tokens"]),
            min_count=int(arc["min_count"]),
        )
        return EmbeddingModel(
            vocab=vocab,
            w_in=arc["w_in"],
            w_out=arc["w_out"],
            hyperparams=json.loads(str(arc["hyperparams"])),
        )


def load_model(path, prefer_sidecar: bool = True) -> EmbeddingModel:
    """Load a model, bit-exactly when the binary sidecar is present."""
    path = str(path)
    if prefer_sidecar and os.path.exists(_sidecar_path(path)):
        return _load_sidecar(path)

    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise ModelHeaderError(f"expected header 'V d', got {header.strip()!r}")
        try:
            n_words, d = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ModelHeaderError(f"non-integer header {header.strip()!r}") from exc
        if n_words <= 0 or d <= 0:
            raise ModelHeaderError(f"header counts must be positive, got {header.strip()!r}")

        words: list[str] = []
        index: dict[str, int] = {}
        w_in = np.empty((n_words, d), dtype=np.float32)
        row = 0
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            if row >= n_words:
                raise ModelFormatError(f"line {lineno}: more rows than header declares")
            fields = line.split()
            word, comps = fields[0], fields[1:]
            if len(comps) != d:
                raise ModelDimensionError(
                    f"line {lineno}: expected {d} components, got {len(comps)}"
                )
            if word in index:
                raise DuplicateWordError(f"line {lineno}: duplicate word {word!r}")
            try:
                w_in[row] = [float(c) for c in comps]
            except ValueError as exc:
                raise ModelFormatError(f"line {lineno}: bad float ({exc})") from exc
            index[word] = row
            words.append(word)
            row += 1
        if row < n_words:
            raise TruncatedModelError(f"header declares {n_words} rows, found {row}")

    vocab = Vocabulary(
        words=tuple(words),
        counts=np.zeros(n_words, dtype=np.int64),
        index=index,
        total_tokens=0,
        min_count=0,
    )
    return EmbeddingModel(
        vocab=vocab,
        w_in=w_in,
        w_out=np.zeros((n_words, d), dtype=np.float32),
        hyperparams={"d": d, "source": "text"},
    )
