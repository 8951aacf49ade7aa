"""Access to the data files shipped with the package.

The directory can be overridden with the EMIKIT_DATA_DIR environment
variable, which is the only environment variable the toolkit reads.
"""

from __future__ import annotations

import json
import os
from importlib import resources
from pathlib import Path

_ENV_VAR = "EMIKIT_DATA_DIR"


def data_path(name: str) -> Path:
    """Resolve a shipped data file, honouring EMIKIT_DATA_DIR overrides."""
    override = os.environ.get(_ENV_VAR)
    if override:
        candidate = Path(override) / name
        if candidate.exists():
            return candidate
    return Path(str(resources.files("emikit").joinpath("data", name)))


def load_wordlist(name: str) -> list[str]:
    """Read a one-word-per-line text file, skipping blanks and # comments."""
    words = []
    with open(data_path(name), encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                words.append(line)
    return words


def top100_words() -> frozenset[str]:
    return frozenset(load_wordlist("top100_words.txt"))


def stopwords() -> frozenset[str]:
    return frozenset(load_wordlist("stopwords.txt"))


def adf_pvalue_table() -> dict:
    with open(data_path("adf_pvalues.json"), encoding="utf-8") as fh:
        return json.load(fh)


def kpss_critical_values() -> list[tuple[float, float]]:
    """Return (alpha, critical value) pairs sorted by descending alpha."""
    with open(data_path("kpss_critical_values.json"), encoding="utf-8") as fh:
        table = json.load(fh)
    rows = [(row["alpha"], row["value"]) for row in table["critical_values"]]
    return sorted(rows, reverse=True)
