"""Speech ingestion, quality filtering, tokenization and chunking.

All functions here are pure over immutable records, so the stage can be
parallelised per record; outputs are kept stable by speech_id.
"""

from __future__ import annotations

import datetime as dt
import json
import unicodedata
from dataclasses import dataclass

from .errors import DataError
from .resources import top100_words

MAJOR_PARTIES = frozenset({"D", "R"})
PARTIES = frozenset({"D", "R", "Other"})
CHAMBERS = frozenset({"House", "Senate"})

REASON_PROCEDURAL = "procedural"
REASON_NON_MAJOR_PARTY = "non_major_party"
REASON_TOO_SHORT = "too_short"
REASON_LOW_RATIO = "low_ratio"
REASON_DUPLICATE = "duplicate"

DEFAULT_RATIO_THRESHOLD = 0.05
DEFAULT_MIN_TOKENS = 11
DEFAULT_CHUNK_TARGET = 150
DEFAULT_CHUNK_MIN = 50


def session_from_date(date: dt.date) -> int:
    """Two-year legislative session index for a calendar date.

    Sessions are numbered consecutively from 1789 and start in odd years,
    so 1879-1880 is session 46 and 2021-2022 is session 117.
    """
    return (date.year - 1789) // 2 + 1


@dataclass(frozen=True)
class SpeechRecord:
    speech_id: str
    date: dt.date
    chamber: str
    party: str
    speaker: str
    text: str
    session: int = -1
    is_procedural: bool = False

    def __post_init__(self):
        if not self.text:
            raise DataError(f"speech {self.speech_id!r}: empty text")
        if self.party not in PARTIES:
            raise DataError(f"speech {self.speech_id!r}: unknown party {self.party!r}")
        if self.chamber not in CHAMBERS:
            raise DataError(f"speech {self.speech_id!r}: unknown chamber {self.chamber!r}")
        if self.session < 0:
            object.__setattr__(self, "session", session_from_date(self.date))


@dataclass(frozen=True)
class TokenizedSpeech:
    speech_id: str
    tokens: tuple[str, ...]

    @property
    def token_count(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Chunk:
    chunk_id: str
    speech_id: str
    tokens: tuple[str, ...]
    session: int
    party: str
    chamber: str
    date: dt.date | None = None

    @property
    def length(self) -> int:
        return len(self.tokens)


def _strip_punct(token: str) -> str:
    start, end = 0, len(token)
    while start < end and unicodedata.category(token[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(token[end - 1]).startswith("P"):
        end -= 1
    return token[start:end]


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace and strip edge punctuation.

    Tokens that are empty after stripping are dropped; purely numeric
    tokens are kept because they count toward the common-word-ratio
    denominator. This is the single canonical tokenizer, shared by the
    filtering and the embedding stages.
    """
    out = []
    for raw in text.lower().split():
        tok = _strip_punct(raw)
        if tok:
            out.append(tok)
    return out


def tokenize_record(record: SpeechRecord) -> TokenizedSpeech:
    return TokenizedSpeech(record.speech_id, tuple(tokenize(record.text)))


def common_word_ratio(speech: TokenizedSpeech, common_words: frozenset[str]) -> float:
    """Fraction of tokens that belong to the common-word list."""
    if speech.token_count == 0:
        raise DataError(f"speech {speech.speech_id!r}: ratio undefined for zero tokens")
    hits = sum(1 for tok in speech.tokens if tok in common_words)
    return hits / speech.token_count


def filter_speeches(
    records: list[SpeechRecord],
    threshold: float = DEFAULT_RATIO_THRESHOLD,
    min_tokens: int = DEFAULT_MIN_TOKENS,
    common_words: frozenset[str] | None = None,
) -> tuple[list[SpeechRecord], list[tuple[SpeechRecord, str]]]:
    """Apply the mechanical quality filters.

    Keeps records from the two major parties, at least `min_tokens` tokens
    long, with a common-word ratio of at least `threshold`, and without an
    earlier (by date, then speech_id) record carrying byte-identical
    normalized text. Records flagged is_procedural are dropped first.
    Returns (kept, rejected) where each rejection carries one reason tag.
    """
    if common_words is None:
        common_words = top100_words()

    kept: list[SpeechRecord] = []
    rejected: list[tuple[SpeechRecord, str]] = []
    survivors: list[tuple[SpeechRecord, str]] = []

    for rec in records:
        if rec.is_procedural:
            rejected.append((rec, REASON_PROCEDURAL))
            continue
        if rec.party not in MAJOR_PARTIES:
            rejected.append((rec, REASON_NON_MAJOR_PARTY))
            continue
        tok = tokenize_record(rec)
        if tok.token_count < min_tokens:
            rejected.append((rec, REASON_TOO_SHORT))
            continue
        if common_word_ratio(tok, common_words) < threshold:
            rejected.append((rec, REASON_LOW_RATIO))
            continue
        survivors.append((rec, " ".join(tok.tokens)))

    # dedup among survivors, earliest (date, speech_id) instance wins
    first_seen: dict[str, tuple[dt.date, str]] = {}
    for rec, key in survivors:
        cand = (rec.date, rec.speech_id)
        if key not in first_seen or cand < first_seen[key]:
            first_seen[key] = cand
    for rec, key in survivors:
        if first_seen[key] == (rec.date, rec.speech_id):
            kept.append(rec)
        else:
            rejected.append((rec, REASON_DUPLICATE))
    return kept, rejected


def chunk_tokens(
    tokens: list[str] | tuple[str, ...],
    target: int = DEFAULT_CHUNK_TARGET,
    min_size: int = DEFAULT_CHUNK_MIN,
) -> list[tuple[str, ...]]:
    """Split a token sequence into scoring chunks.

    Sequences up to `target` tokens stay whole. Longer ones are cut every
    `target` tokens; a final remainder shorter than `min_size` is merged
    into the preceding chunk, so concatenating the pieces always restores
    the input exactly.
    """
    if not tokens:
        raise DataError("cannot chunk an empty token sequence")
    n = len(tokens)
    if n <= target:
        return [tuple(tokens)]
    cuts = list(range(target, n, target))
    if n - cuts[-1] < min_size:
        cuts.pop()
    pieces = []
    prev = 0
    for cut in cuts + [n]:
        pieces.append(tuple(tokens[prev:cut]))
        prev = cut
    return pieces


def chunk_speech(
    record: SpeechRecord,
    tokenized: TokenizedSpeech | None = None,
    target: int = DEFAULT_CHUNK_TARGET,
    min_size: int = DEFAULT_CHUNK_MIN,
) -> list[Chunk]:
    """Chunk one speech, inheriting its session/party/chamber metadata."""
    tok = tokenized if tokenized is not None else tokenize_record(record)
    pieces = chunk_tokens(tok.tokens, target=target, min_size=min_size)
    return [
        Chunk(
            chunk_id=f"{record.speech_id}#{i}",
            speech_id=record.speech_id,
            tokens=piece,
            session=record.session,
            party=record.party,
            chamber=record.chamber,
            date=record.date,
        )
        for i, piece in enumerate(pieces)
    ]


def preprocess_records(
    records: list[SpeechRecord],
    threshold: float = DEFAULT_RATIO_THRESHOLD,
    min_tokens: int = DEFAULT_MIN_TOKENS,
    target: int = DEFAULT_CHUNK_TARGET,
    min_size: int = DEFAULT_CHUNK_MIN,
    common_words: frozenset[str] | None = None,
) -> tuple[list[Chunk], list[tuple[SpeechRecord, str]]]:
    """Filter then chunk, the full corpus stage in one call."""
    kept, rejected = filter_speeches(
        records, threshold=threshold, min_tokens=min_tokens, common_words=common_words
    )
    chunks: list[Chunk] = []
    for rec in kept:
        chunks.extend(chunk_speech(rec, target=target, min_size=min_size))
    return chunks, rejected


# ---------------------------------------------------------------------------
# wire formats: JSON-lines speeches in, JSON-lines chunks out

def speech_to_json(record: SpeechRecord) -> str:
    return json.dumps(
        {
            "speech_id": record.speech_id,
            "date": record.date.isoformat(),
            "chamber": record.chamber,
            "party": record.party,
            "speaker": record.speaker,
            "text": record.text,
            "session": record.session,
            "is_procedural": record.is_procedural,
        },
        ensure_ascii=False,
    )


def parse_speech_json(line: str) -> SpeechRecord:
    obj = json.loads(line)
    try:
        date = dt.date.fromisoformat(obj["date"])
        return SpeechRecord(
            speech_id=str(obj["speech_id"]),
            date=date,
            chamber=obj["chamber"],
            party=obj["party"],
            speaker=obj.get("speaker", ""),
            text=obj["text"],
            session=int(obj["session"]) if "session" in obj else -1,
            is_procedural=bool(obj.get("is_procedural", False)),
        )
    except KeyError as exc:
        raise DataError(f"missing field {exc.args[0]!r}") from exc
    except ValueError as exc:
        raise DataError(str(exc)) from exc


def load_speeches_jsonl(path) -> tuple[list[SpeechRecord], list[tuple[int, str]]]:
    """Read a speeches file; malformed lines are collected, not fatal."""
    records: list[SpeechRecord] = []
    errors: list[tuple[int, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(parse_speech_json(line))
            except (DataError, json.JSONDecodeError) as exc:
                errors.append((lineno, str(exc)))
    return records, errors


def chunk_to_json(chunk: Chunk) -> str:
    return json.dumps(
        {
            "chunk_id": chunk.chunk_id,
            "speech_id": chunk.speech_id,
            "session": chunk.session,
            "party": chunk.party,
            "chamber": chunk.chamber,
            "date": chunk.date.isoformat() if chunk.date else None,
            "length": chunk.length,
            "tokens": list(chunk.tokens),
        },
        ensure_ascii=False,
    )


def parse_chunk_json(line: str) -> Chunk:
    obj = json.loads(line)
    try:
        return Chunk(
            chunk_id=str(obj["chunk_id"]),
            speech_id=str(obj.get("speech_id", obj["chunk_id"].rsplit("#", 1)[0])),
            tokens=tuple(obj["tokens"]),
            session=int(obj["session"]),
            party=obj["party"],
            chamber=obj["chamber"],
            date=dt.date.fromisoformat(obj["date"]) if obj.get("date") else None,
        )
    except KeyError as exc:
        raise DataError(f"missing field {exc.args[0]!r}") from exc


def load_chunks_jsonl(path) -> list[Chunk]:
    chunks = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                chunks.append(parse_chunk_json(line))
            except (DataError, json.JSONDecodeError) as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
    return chunks
