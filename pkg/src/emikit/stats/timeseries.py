"""Session-indexed time-series table feeding the regression layer."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ..errors import DataError


@dataclass(eq=False)
class TimeSeriesTable:
    """Named real-valued columns over a shared, gap-free session index.

    The index is reindexed to consecutive sessions at load time so that a
    positional shift and an index shift coincide; vacated positions are
    missing and drop out by listwise deletion at fit time.
    """

    frame: pd.DataFrame
    transforms: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.frame.index.name != "session":
            raise DataError("table index must be the session column")

    @property
    def sessions(self) -> np.ndarray:
        return self.frame.index.to_numpy()

    @property
    def columns(self) -> list[str]:
        return list(self.frame.columns)

    def __contains__(self, name: str) -> bool:
        return name in self.frame.columns

    def column(self, name: str) -> pd.Series:
        if name not in self.frame.columns:
            raise DataError(f"table has no column {name!r}")
        return self.frame[name]

    def lagged(self, name: str, lag: int) -> pd.Series:
        if lag < 0:
            raise DataError(f"lag must be non-negative, got {lag}")
        return self.column(name).shift(lag)

    def restricted(self, min_session: int | None = None, max_session: int | None = None) -> "TimeSeriesTable":
        frame = self.frame
        if min_session is not None:
            frame = frame[frame.index >= min_session]
        if max_session is not None:
            frame = frame[frame.index <= max_session]
        return TimeSeriesTable(frame=frame.copy(), transforms=dict(self.transforms))


def load_table(
    path_or_frame,
    log_columns: tuple[str, ...] = (),
    standardize: bool = False,
) -> TimeSeriesTable:
    """Ingest a CSV (or prepared frame) keyed by a session column.

    log_columns get a natural log; with standardize=True every column is
    z-scored (population sd) after any logs. Transforms are recorded per
    column so output metadata can state what the coefficients are on.
    """
    if isinstance(path_or_frame, pd.DataFrame):
        frame = path_or_frame.copy()
    else:
        frame = pd.read_csv(path_or_frame)
    if "session" not in frame.columns:
        raise DataError("time-series table needs a 'session' column")
    if frame["session"].duplicated().any():
        dups = sorted(frame.loc[frame["session"].duplicated(), "session"].unique())
        raise DataError(f"duplicate sessions in table: {dups}")
    frame = frame.sort_values("session").set_index("session")
    frame.index = frame.index.astype(int)
    full = pd.RangeIndex(frame.index.min(), frame.index.max() + 1, name="session")
    frame = frame.reindex(full)

    transforms: dict[str, str] = {}
    for col in frame.columns:
        series = pd.to_numeric(frame[col], errors="coerce")
        applied = []
        if col in log_columns:
            valid = series.dropna()
            if (valid <= 0).any():
                raise DataError(f"column {col!r} has non-positive values; cannot log")
            series = np.log(series)
            applied.append("log")
        if standardize:
            sd = float(series.std(ddof=0))
            if not sd > 0:
                raise DataError(f"column {col!r} is constant; cannot standardize")
            series = (series - float(series.mean())) / sd
            applied.append("zscore")
        frame[col] = series.astype(np.float64)
        transforms[col] = "+".join(applied) if applied else "raw"
    missing_logs = set(log_columns) - set(frame.columns)
    if missing_logs:
        raise DataError(f"log columns not in table: {sorted(missing_logs)}")
    return TimeSeriesTable(frame=frame, transforms=transforms)
