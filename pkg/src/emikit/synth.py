"""Deterministic synthetic corpora for pipeline validation.

Two generators: labeled chunks whose vocabulary is drawn from one construct
dictionary (plus shared filler), used to check end-to-end discrimination,
and a small speech corpus exercising every preprocessing path. All
randomness flows through a seeded PCG64 generator, so output is identical
across runs and platforms.
"""

from __future__ import annotations

import datetime as dt

import numpy as np

from .corpus import Chunk, SpeechRecord
from .resources import top100_words
from .scoring import load_dictionary

FILLER_WORDS = tuple(f"filler{i:02d}" for i in range(50))


def dictionary_words(name: str) -> tuple[str, ...]:
    """Single-word generation vocabulary: multiword entries contribute
    their constituent words."""
    seen: dict[str, None] = {}
    for entry in load_dictionary(name).keywords:
        for word in entry.split():
            seen.setdefault(word)
    return tuple(seen)


def _session_date(session: int) -> dt.date:
    return dt.date(1789 + 2 * (session - 1), 1, 15)


def _chunk_tokens(
    rng: np.random.Generator,
    content_words: tuple[str, ...],
    n_tokens: int,
    filler_share: float,
    function_words: tuple[str, ...],
    function_every: int = 6,
) -> list[str]:
    tokens: list[str] = []
    for j in range(n_tokens):
        if j % function_every == 0:
            # keeps the top-100-word ratio comfortably above the floor
            tokens.append(function_words[j // function_every % len(function_words)])
        elif rng.random() < filler_share:
            tokens.append(FILLER_WORDS[rng.integers(0, len(FILLER_WORDS))])
        else:
            tokens.append(content_words[rng.integers(0, len(content_words))])
    return tokens


def labeled_chunks(
    n_chunks: int = 2000,
    min_tokens: int = 60,
    max_tokens: int = 180,
    filler_share: float = 0.5,
    seed: int = 11,
) -> tuple[list[Chunk], np.ndarray]:
    """Chunks drawn from one construct's vocabulary plus shared filler.

    Returns (chunks, labels) with label 1 for evidence-flavored chunks.
    """
    rng = np.random.default_rng(seed)
    evidence = dictionary_words("evidence")
    intuition = dictionary_words("intuition")
    function_words = tuple(top100_words())[:10]
    chunks: list[Chunk] = []
    labels = np.empty(n_chunks, dtype=np.int64)
    for i in range(n_chunks):
        label = i % 2
        content = evidence if label == 1 else intuition
        n_tokens = int(rng.integers(min_tokens, max_tokens + 1))
        tokens = _chunk_tokens(rng, content, n_tokens, filler_share, function_words)
        session = 100 + i % 10
        chunks.append(
            Chunk(
                chunk_id=f"synth{i:05d}#0",
                speech_id=f"synth{i:05d}",
                tokens=tuple(tokens),
                session=session,
                party="D" if i % 4 < 2 else "R",
                chamber="House" if i % 2 == 0 else "Senate",
                date=_session_date(session),
            )
        )
        labels[i] = label
    return chunks, labels


def synthetic_speeches(n_speeches: int = 500, seed: int = 23) -> list[SpeechRecord]:
    """Speech corpus with a sprinkling of records every filter rejects.

    Indices divisible by 97 are procedural, by 89 carry a third party, and
    by 101 are too short; everything else passes preprocessing.
    """
    rng = np.random.default_rng(seed)
    evidence = dictionary_words("evidence")
    intuition = dictionary_words("intuition")
    function_words = tuple(top100_words())[:10]
    records: list[SpeechRecord] = []
    for i in range(n_speeches):
        session = 100 + i % 12
        leaning = float(rng.uniform(0.2, 0.8))
        n_tokens = int(rng.integers(80, 400))
        tokens: list[str] = []
        for j in range(n_tokens):
            if j % 6 == 0:
                tokens.append(function_words[j // 6 % len(function_words)])
            elif rng.random() < 0.5:
                tokens.append(FILLER_WORDS[rng.integers(0, len(FILLER_WORDS))])
            elif rng.random() < leaning:
                tokens.append(evidence[rng.integers(0, len(evidence))])
            else:
                tokens.append(intuition[rng.integers(0, len(intuition))])
        if i % 101 == 0 and i > 0:
            tokens = tokens[:8]
        text = " ".join(tokens)
        if text:
            text = text[0].upper() + text[1:] + "."
        party = "D" if i % 2 == 0 else "R"
        if i % 89 == 0 and i > 0:
            party = "Other"
        records.append(
            SpeechRecord(
                speech_id=f"s{i:05d}",
                date=_session_date(session),
                chamber="House" if i % 3 else "Senate",
                party=party,
                speaker=f"Member {i % 40:02d}",
                text=text,
                session=session,
                is_procedural=bool(i % 97 == 0 and i > 0),
            )
        )
    return records
